//! Buchberger core over a generic coefficient field.
//!
//! Monomials are encoded as order keys: signed vectors whose plain
//! lexicographic comparison is the monomial order (grevlex becomes
//! `[deg, -e_n, ..., -e_1]`, blocks concatenate their parts). Keys are linear
//! in the exponents, so monomial products are key sums.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::ops::Range;
use std::time::{Duration, Instant};

use smallvec::SmallVec;

use super::field::Field;
use super::{BudgetKind, GbStats};
use crate::multipoly::MonomialOrder;

pub(crate) type Key = SmallVec<[i16; 32]>;
pub(crate) type Term<F> = (Key, F);

/// Mapping between exponent vectors and order keys.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    nvars: usize,
    key_len: usize,
    var_pos: Vec<usize>,
    var_neg: Vec<bool>,
    degree_slots: Vec<(usize, Range<usize>)>,
}

impl Layout {
    pub(crate) fn new(order: &MonomialOrder, nvars: usize) -> Self {
        let mut layout = Layout {
            nvars,
            key_len: 0,
            var_pos: vec![0; nvars],
            var_neg: vec![false; nvars],
            degree_slots: Vec::new(),
        };
        layout.key_len = layout.place(order, 0..nvars, 0);
        layout
    }

    fn place(&mut self, order: &MonomialOrder, vars: Range<usize>, offset: usize) -> usize {
        let width = vars.len();
        match order {
            MonomialOrder::Lex => {
                for (j, v) in vars.enumerate() {
                    self.var_pos[v] = offset + j;
                }
                width
            }
            MonomialOrder::Grevlex => {
                self.degree_slots.push((offset, vars.clone()));
                for (j, v) in vars.enumerate() {
                    self.var_pos[v] = offset + width - j;
                    self.var_neg[v] = true;
                }
                width + 1
            }
            MonomialOrder::Block { split, first, second } => {
                let mid = (vars.start + split).min(vars.end);
                let a = self.place(first, vars.start..mid, offset);
                let b = self.place(second, mid..vars.end, offset + a);
                a + b
            }
        }
    }

    pub(crate) fn encode(&self, exps: &[u16]) -> Key {
        let mut key: Key = SmallVec::from_elem(0, self.key_len);
        for v in 0..self.nvars {
            let e = exps[v] as i16;
            key[self.var_pos[v]] = if self.var_neg[v] { -e } else { e };
        }
        for (pos, range) in &self.degree_slots {
            key[*pos] = range.clone().map(|v| exps[v] as i16).sum();
        }
        key
    }

    #[inline]
    pub(crate) fn exponent(&self, key: &[i16], v: usize) -> i16 {
        let raw = key[self.var_pos[v]];
        if self.var_neg[v] {
            -raw
        } else {
            raw
        }
    }

    pub(crate) fn decode(&self, key: &[i16]) -> Vec<u16> {
        (0..self.nvars).map(|v| self.exponent(key, v) as u16).collect()
    }

    pub(crate) fn degree(&self, key: &[i16]) -> u32 {
        (0..self.nvars).map(|v| self.exponent(key, v) as u32).sum()
    }

    #[inline]
    pub(crate) fn mask(&self, key: &[i16]) -> u64 {
        let mut m = 0u64;
        for v in 0..self.nvars {
            if self.exponent(key, v) > 0 {
                m |= 1 << (v % 64);
            }
        }
        m
    }

    #[inline]
    pub(crate) fn divides(&self, a: &[i16], b: &[i16]) -> bool {
        for v in 0..self.nvars {
            let p = self.var_pos[v];
            let ok = if self.var_neg[v] { a[p] >= b[p] } else { a[p] <= b[p] };
            if !ok {
                return false;
            }
        }
        true
    }

    pub(crate) fn lcm(&self, a: &[i16], b: &[i16]) -> Key {
        let exps: Vec<u16> = (0..self.nvars)
            .map(|v| self.exponent(a, v).max(self.exponent(b, v)) as u16)
            .collect();
        self.encode(&exps)
    }

    pub(crate) fn coprime(&self, a: &[i16], b: &[i16]) -> bool {
        (0..self.nvars).all(|v| self.exponent(a, v) == 0 || self.exponent(b, v) == 0)
    }

    pub(crate) fn is_one(key: &[i16]) -> bool {
        key.iter().all(|&k| k == 0)
    }

    pub(crate) fn one(&self) -> Key {
        SmallVec::from_elem(0, self.key_len)
    }
}

#[inline]
pub(crate) fn key_add(a: &[i16], b: &[i16]) -> Key {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub(crate) fn key_sub(a: &[i16], b: &[i16]) -> Key {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Polynomial with terms in strictly decreasing key order.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Poly<F> {
    pub(crate) terms: Vec<Term<F>>,
}

impl<F: Field> Poly<F> {
    pub(crate) fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub(crate) fn from_unsorted(mut terms: Vec<Term<F>>) -> Self {
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<Term<F>> = Vec::with_capacity(terms.len());
        for (k, c) in terms {
            match out.last_mut() {
                Some((lk, lc)) if *lk == k => *lc = lc.add(&c),
                _ => out.push((k, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Poly { terms: out }
    }

    pub(crate) fn constant(c: F, layout: &Layout) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: vec![(layout.one(), c)],
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn lm(&self) -> &Key {
        &self.terms[0].0
    }

    pub(crate) fn lc(&self) -> &F {
        &self.terms[0].1
    }

    pub(crate) fn is_constant(&self) -> bool {
        self.terms.len() == 1 && Layout::is_one(&self.terms[0].0)
    }

    pub(crate) fn scale(&self, c: &F) -> Self {
        Poly {
            terms: self.terms.iter().map(|(k, d)| (k.clone(), d.mul(c))).collect(),
        }
    }

    pub(crate) fn mul_term(&self, key: &[i16], c: &F) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(k, d)| (key_add(k, key), d.mul(c))).collect(),
        }
    }

    /// `self - c * x^key * other`.
    pub(crate) fn sub_scaled(&self, c: &F, key: &[i16], other: &Poly<F>) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = self.terms.iter().peekable();
        let mut b = other.terms.iter().map(|(k, d)| (key_add(k, key), d)).peekable();
        loop {
            let ord = match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => Ordering::Greater,
                (None, Some(_)) => Ordering::Less,
                (Some(x), Some(y)) => x.0.cmp(&y.0),
            };
            match ord {
                Ordering::Greater => out.push(a.next().unwrap().clone()),
                Ordering::Less => {
                    let (k, d) = b.next().unwrap();
                    out.push((k, d.mul(c).neg()));
                }
                Ordering::Equal => {
                    let (k, x) = a.next().unwrap();
                    let (_, d) = b.next().unwrap();
                    let v = x.sub_mul(c, d);
                    if !v.is_zero() {
                        out.push((k.clone(), v));
                    }
                }
            }
        }
        Poly { terms: out }
    }

    pub(crate) fn mul(&self, other: &Poly<F>) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                terms.push((key_add(ka, kb), ca.mul(cb)));
            }
        }
        Self::from_unsorted(terms)
    }
}

/// Wall-clock, pair and term limits, checked cheaply.
pub(crate) struct Tracker {
    start: Instant,
    deadline: Option<Duration>,
    max_pairs: Option<usize>,
    max_terms: Option<usize>,
    ticks: u32,
}

impl Tracker {
    pub(crate) fn new(deadline: Option<Duration>, max_pairs: Option<usize>, max_terms: Option<usize>) -> Self {
        Tracker {
            start: Instant::now(),
            deadline,
            max_pairs,
            max_terms,
            ticks: 0,
        }
    }

    pub(crate) fn unlimited() -> Self {
        Self::new(None, None, None)
    }

    pub(crate) fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    #[inline]
    pub(crate) fn tick(&mut self) -> Result<(), BudgetKind> {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks % 16 == 0 {
            self.check_time()?;
        }
        Ok(())
    }

    pub(crate) fn check_time(&self) -> Result<(), BudgetKind> {
        match self.deadline {
            Some(d) if self.start.elapsed() > d => Err(BudgetKind::WallClock),
            _ => Ok(()),
        }
    }

    pub(crate) fn check_terms(&self, n: usize) -> Result<(), BudgetKind> {
        match self.max_terms {
            Some(m) if n > m => Err(BudgetKind::Terms),
            _ => Ok(()),
        }
    }

    pub(crate) fn check_pairs(&self, n: usize) -> Result<(), BudgetKind> {
        match self.max_pairs {
            Some(m) if n > m => Err(BudgetKind::Pairs),
            _ => Ok(()),
        }
    }
}

/// A basis element with its cached leading-monomial mask.
#[derive(Debug, Clone)]
pub(crate) struct Elem<F> {
    pub(crate) poly: Poly<F>,
    pub(crate) mask: u64,
    pub(crate) sugar: u32,
    pub(crate) cof: Option<Vec<Poly<F>>>,
}

impl<F: Field> Elem<F> {
    pub(crate) fn new(poly: Poly<F>, sugar: u32, cof: Option<Vec<Poly<F>>>, layout: &Layout) -> Self {
        let mask = layout.mask(poly.lm());
        Elem { poly, mask, sugar, cof }
    }
}

pub(crate) struct Reduced<F> {
    pub(crate) poly: Poly<F>,
    pub(crate) cof: Option<Vec<Poly<F>>>,
    pub(crate) sugar: u32,
    pub(crate) steps: u64,
}

/// Reduces `p` by the monic elements `elems[reducers]`. With `full`, every
/// term is reduced; otherwise only the leading term.
#[allow(clippy::too_many_arguments)]
pub(crate) fn reduce<F: Field>(
    layout: &Layout,
    elems: &[Elem<F>],
    reducers: &[usize],
    p: Poly<F>,
    cof: Option<Vec<Poly<F>>>,
    sugar: u32,
    full: bool,
    tracker: &mut Tracker,
) -> Result<Reduced<F>, BudgetKind> {
    // Work polynomial kept ascending so the leading term pops off the end.
    let mut work: Vec<Term<F>> = p.terms;
    work.reverse();
    let mut done: Vec<Term<F>> = Vec::new();
    let mut quotients: Vec<(usize, Vec<Term<F>>)> = Vec::new();
    let mut sugar = sugar;
    let mut steps = 0u64;
    let track = cof.is_some();

    while let Some((key, c)) = work.pop() {
        let mask = layout.mask(&key);
        let found = reducers.iter().copied().find(|&r| {
            let e = &elems[r];
            e.mask & !mask == 0 && layout.divides(e.poly.lm(), &key)
        });
        let Some(r) = found else {
            done.push((key, c));
            if !full {
                break;
            }
            continue;
        };
        tracker.tick()?;
        steps += 1;
        let g = &elems[r];
        let shift = key_sub(&key, g.poly.lm());
        sugar = sugar.max(layout.degree(&shift) + g.sugar);
        let tail = &g.poly.terms[1..];
        let mut merged: Vec<Term<F>> = Vec::with_capacity(work.len() + tail.len());
        let mut a = work.drain(..).peekable();
        let mut b = tail.iter().rev().peekable();
        loop {
            let ord = match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (Some(x), Some(y)) => cmp_shifted(&x.0, &y.0, &shift),
            };
            match ord {
                Ordering::Less => merged.push(a.next().unwrap()),
                Ordering::Greater => {
                    let (k, d) = b.next().unwrap();
                    merged.push((key_add(k, &shift), d.mul(&c).neg()));
                }
                Ordering::Equal => {
                    let (k, x) = a.next().unwrap();
                    let (_, d) = b.next().unwrap();
                    let v = x.sub_mul(&c, d);
                    if !v.is_zero() {
                        merged.push((k, v));
                    }
                }
            }
        }
        drop(a);
        work = merged;
        tracker.check_terms(work.len() + done.len())?;
        if track {
            match quotients.iter_mut().find(|(idx, _)| *idx == r) {
                Some((_, q)) => q.push((shift, c)),
                None => quotients.push((r, vec![(shift, c)])),
            }
        }
    }
    if !full {
        work.reverse();
        done.extend(work);
    }
    let cof = cof.map(|mut cof| {
        for (r, q) in quotients {
            let qpoly = Poly { terms: q };
            let gcof = elems[r].cof.as_ref().expect("reducer without cofactors");
            for (slot, gc) in cof.iter_mut().zip(gcof) {
                if !gc.is_zero() {
                    let prod = qpoly.mul(gc);
                    *slot = slot.sub_scaled(&F::one(), &layout.one(), &prod);
                }
            }
        }
        cof
    });
    Ok(Reduced {
        poly: Poly { terms: done },
        cof,
        sugar,
        steps,
    })
}

/// Compares `a` with `b + shift` without materializing the sum.
#[inline]
fn cmp_shifted(a: &[i16], b: &[i16], shift: &[i16]) -> Ordering {
    for i in 0..a.len() {
        let rhs = b[i] + shift[i];
        if a[i] != rhs {
            return a[i].cmp(&rhs);
        }
    }
    Ordering::Equal
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Pair {
    lcm: Key,
    sugar: u32,
    i: usize,
    j: usize,
}

impl Ord for Pair {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lcm
            .cmp(&other.lcm)
            .then(self.sugar.cmp(&other.sugar))
            .then(self.i.cmp(&other.i))
            .then(self.j.cmp(&other.j))
    }
}

impl PartialOrd for Pair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) struct Criteria {
    pub(crate) product: bool,
    pub(crate) chain: bool,
}

pub(crate) struct Outcome<F> {
    pub(crate) basis: Vec<Poly<F>>,
    pub(crate) cofactors: Option<Vec<Vec<Poly<F>>>>,
    /// Filled in by a recording run.
    pub(crate) trace: Option<Trace>,
    /// Pairs were skipped on a trace's word, so the basis property is unproven.
    pub(crate) unchecked: bool,
}

/// Shape of a finished run: the leading monomial of every element in
/// insertion order and the pairs whose S-polynomial reduced to zero.
#[derive(Debug, Clone, Default)]
pub(crate) struct Trace {
    lms: Vec<Key>,
    zero_pairs: HashSet<(usize, usize)>,
}

pub(crate) enum Guidance {
    Off,
    Record,
    /// Skip the trace's zero pairs while the run keeps its shape.
    Follow(Trace),
}

pub(crate) struct Abort {
    pub(crate) kind: BudgetKind,
}

struct Engine<'a, F> {
    layout: &'a Layout,
    elems: Vec<Elem<F>>,
    active: Vec<usize>,
    pairs: BTreeSet<Pair>,
    criteria: Criteria,
    track: bool,
    tracker: Tracker,
    stats: &'a mut GbStats,
    record: Option<Trace>,
    follow: Option<Trace>,
    deferred: Vec<Pair>,
}

enum Inserted<F> {
    Zero,
    Added,
    Unit(Outcome<F>),
}

/// Computes the reduced Groebner basis of `inputs`.
pub(crate) fn run<F: Field>(
    layout: &Layout,
    inputs: Vec<Poly<F>>,
    track: bool,
    criteria: Criteria,
    tracker: Tracker,
    guidance: Guidance,
    stats: &mut GbStats,
) -> Result<Outcome<F>, Abort> {
    let ninputs = inputs.len();
    let (record, follow) = match guidance {
        Guidance::Off => (None, None),
        Guidance::Record => (Some(Trace::default()), None),
        Guidance::Follow(t) => (None, Some(t)),
    };
    let mut engine = Engine {
        layout,
        elems: Vec::new(),
        active: Vec::new(),
        pairs: BTreeSet::new(),
        criteria,
        track,
        tracker,
        stats,
        record,
        follow,
        deferred: Vec::new(),
    };
    let result = engine.main(inputs, ninputs).map(|mut o| {
        o.trace = engine.record.take();
        o
    });
    engine.stats.elapsed = engine.tracker.elapsed();
    result.map_err(|kind| Abort { kind })
}

impl<F: Field> Engine<'_, F> {
    fn main(&mut self, inputs: Vec<Poly<F>>, ninputs: usize) -> Result<Outcome<F>, BudgetKind> {
        let unit_cof = |j: usize, layout: &Layout| -> Vec<Poly<F>> {
            (0..ninputs)
                .map(|k| if k == j { Poly::constant(F::one(), layout) } else { Poly::zero() })
                .collect()
        };
        for (j, f) in inputs.into_iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            let sugar = f.terms.iter().map(|t| self.layout.degree(&t.0)).max().unwrap_or(0);
            let cof = self.track.then(|| unit_cof(j, self.layout));
            if let Inserted::Unit(unit) = self.insert(f, cof, sugar)? {
                return Ok(unit);
            }
        }
        loop {
            let Some(pair) = self.pairs.pop_first() else {
                if self.deferred.is_empty() {
                    break;
                }
                let complete = self.follow.as_ref().is_some_and(|t| t.lms.len() == self.elems.len());
                if complete {
                    break;
                }
                // Fewer elements than the trace: the shapes differ.
                self.unfollow();
                continue;
            };
            self.tracker.check_time()?;
            if self.follow.as_ref().is_some_and(|t| t.zero_pairs.contains(&(pair.i, pair.j))) {
                self.stats.pairs_skipped += 1;
                self.deferred.push(pair);
                continue;
            }
            self.stats.pairs_reduced += 1;
            let (gi, gj) = (&self.elems[pair.i], &self.elems[pair.j]);
            let si = key_sub(&pair.lcm, gi.poly.lm());
            let sj = key_sub(&pair.lcm, gj.poly.lm());
            let one = F::one();
            let s = gi.poly.mul_term(&si, &one).sub_scaled(&one, &sj, &gj.poly);
            let cof = match (&gi.cof, &gj.cof) {
                (Some(ci), Some(cj)) => Some(
                    ci.iter()
                        .zip(cj)
                        .map(|(a, b)| a.mul_term(&si, &one).sub_scaled(&one, &sj, b))
                        .collect(),
                ),
                _ => None,
            };
            let (i, j) = (pair.i, pair.j);
            let zero = if s.is_zero() {
                self.stats.zero_reductions += 1;
                true
            } else {
                match self.insert(s, cof, pair.sugar)? {
                    Inserted::Unit(unit) => return Ok(unit),
                    Inserted::Zero => true,
                    Inserted::Added => false,
                }
            };
            if zero {
                if let Some(t) = self.record.as_mut() {
                    t.zero_pairs.insert((i, j));
                }
            }
            self.tracker.check_pairs(self.pairs.len())?;
        }
        let unchecked = !self.deferred.is_empty();
        let mut outcome = self.finish()?;
        outcome.unchecked = unchecked;
        Ok(outcome)
    }

    /// Stops following the trace and queues every skipped pair.
    fn unfollow(&mut self) {
        self.follow = None;
        self.pairs.extend(self.deferred.drain(..));
    }

    /// Reduces `p`, and if nonzero adds it to the basis. Returns the final
    /// outcome early when a unit appears.
    fn insert(&mut self, p: Poly<F>, cof: Option<Vec<Poly<F>>>, sugar: u32) -> Result<Inserted<F>, BudgetKind> {
        let red = reduce(self.layout, &self.elems, &self.active, p, cof, sugar, true, &mut self.tracker)?;
        self.stats.reduction_steps += red.steps;
        if red.poly.is_zero() {
            self.stats.zero_reductions += 1;
            return Ok(Inserted::Zero);
        }
        let inv = red.poly.lc().inv();
        let poly = red.poly.scale(&inv);
        let cof = red.cof.map(|c| c.iter().map(|q| q.scale(&inv)).collect::<Vec<_>>());
        self.stats.max_terms = self.stats.max_terms.max(poly.terms.len());
        if poly.is_constant() {
            return Ok(Inserted::Unit(Outcome {
                basis: vec![poly],
                cofactors: cof.map(|c| vec![c]),
                trace: None,
                unchecked: false,
            }));
        }
        let h = self.elems.len();
        if let Some(t) = self.record.as_mut() {
            t.lms.push(poly.lm().clone());
        }
        if self.follow.as_ref().is_some_and(|t| t.lms.get(h) != Some(poly.lm())) {
            self.unfollow();
        }
        self.elems.push(Elem::new(poly, red.sugar, cof, self.layout));
        self.update(h);
        Ok(Inserted::Added)
    }

    fn update(&mut self, h: usize) {
        let layout = self.layout;
        let lm_h = self.elems[h].poly.lm().clone();
        let sugar_h = self.elems[h].sugar;
        let deg_h = layout.degree(&lm_h);

        #[derive(Clone)]
        struct Cand {
            g: usize,
            lcm: Key,
            coprime: bool,
            sugar: u32,
        }
        let mut cands: Vec<Cand> = self
            .active
            .iter()
            .map(|&g| {
                let lm_g = self.elems[g].poly.lm();
                let lcm = layout.lcm(&lm_h, lm_g);
                let dl = layout.degree(&lcm);
                let sugar = (sugar_h + dl - deg_h).max(self.elems[g].sugar + dl - layout.degree(lm_g));
                Cand {
                    g,
                    coprime: layout.coprime(&lm_h, lm_g),
                    lcm,
                    sugar,
                }
            })
            .collect();
        let created = cands.len();

        if self.criteria.chain {
            // Criterion M: drop pairs whose lcm is a proper multiple of another's.
            let keep: Vec<bool> = (0..cands.len())
                .map(|a| {
                    !(0..cands.len()).any(|b| {
                        b != a && cands[b].lcm != cands[a].lcm && layout.divides(&cands[b].lcm, &cands[a].lcm)
                    })
                })
                .collect();
            let mut it = keep.iter();
            cands.retain(|_| *it.next().unwrap());
            // Criterion F: one representative per lcm; a coprime member
            // condemns the whole group when the product criterion is on.
            cands.sort_by(|a, b| a.lcm.cmp(&b.lcm).then(a.g.cmp(&b.g)));
            let mut grouped: Vec<Cand> = Vec::new();
            for group in cands.chunk_by(|a, b| a.lcm == b.lcm) {
                let any_coprime = group.iter().any(|c| c.coprime);
                if any_coprime && self.criteria.product {
                    continue;
                }
                grouped.push(Cand {
                    coprime: any_coprime,
                    ..group[0].clone()
                });
            }
            cands = grouped;
        }
        if self.criteria.product {
            cands.retain(|c| !c.coprime);
        }

        if self.criteria.chain {
            // Criterion B on existing pairs.
            let elems = &self.elems;
            let before = self.pairs.len();
            self.pairs.retain(|p| {
                if !layout.divides(&lm_h, &p.lcm) {
                    return true;
                }
                let li = layout.lcm(elems[p.i].poly.lm(), &lm_h);
                let lj = layout.lcm(elems[p.j].poly.lm(), &lm_h);
                li == p.lcm || lj == p.lcm
            });
            self.stats.pairs_pruned += (before - self.pairs.len()) as u64;
        }
        self.stats.pairs_pruned += (created - cands.len()) as u64;
        self.stats.pairs_created += created as u64;
        for c in cands {
            let (i, j) = if c.g < h { (c.g, h) } else { (h, c.g) };
            self.pairs.insert(Pair {
                lcm: c.lcm,
                sugar: c.sugar,
                i,
                j,
            });
        }
        let elems = &self.elems;
        self.active.retain(|&g| !layout.divides(&lm_h, elems[g].poly.lm()));
        self.active.push(h);
        self.stats.max_basis = self.stats.max_basis.max(self.active.len());
    }

    /// Inter-reduces the active elements into the reduced basis.
    fn finish(&mut self) -> Result<Outcome<F>, BudgetKind> {
        let mut order = self.active.clone();
        order.sort_by(|&a, &b| self.elems[a].poly.lm().cmp(self.elems[b].poly.lm()));
        let mut finished: Vec<usize> = Vec::new();
        for idx in order {
            let e = &self.elems[idx];
            let head = Poly {
                terms: e.poly.terms[..1].to_vec(),
            };
            let tail = Poly {
                terms: e.poly.terms[1..].to_vec(),
            };
            // Reduce only the tail; the head is irreducible by minimality. The
            // cofactors still describe the whole element, so they carry over.
            let cof = e.cof.clone();
            let sugar = e.sugar;
            let red = reduce(self.layout, &self.elems, &finished, tail, cof, sugar, true, &mut self.tracker)?;
            self.stats.reduction_steps += red.steps;
            let mut terms = head.terms;
            terms.extend(red.poly.terms);
            let poly = Poly { terms };
            self.elems.push(Elem::new(poly, red.sugar, red.cof, self.layout));
            finished.push(self.elems.len() - 1);
        }
        let basis: Vec<Poly<F>> = finished.iter().map(|&i| self.elems[i].poly.clone()).collect();
        let cofactors = self.track.then(|| {
            finished
                .iter()
                .map(|&i| self.elems[i].cof.clone().expect("tracked element without cofactors"))
                .collect()
        });
        self.stats.basis_size = basis.len();
        Ok(Outcome {
            basis,
            cofactors,
            trace: None,
            unchecked: false,
        })
    }
}

/// Checks that `basis` (monic) is a Groebner basis containing every input:
/// each input and each S-polynomial with non-coprime leading monomials
/// reduces to zero.
pub(crate) fn verify_basis<F: Field>(
    layout: &Layout,
    inputs: &[Poly<F>],
    basis: &[Poly<F>],
    tracker: &mut Tracker,
    stats: &mut GbStats,
) -> Result<bool, BudgetKind> {
    let elems: Vec<Elem<F>> = basis.iter().map(|p| Elem::new(p.clone(), 0, None, layout)).collect();
    let all: Vec<usize> = (0..elems.len()).collect();
    let mut zero = |p: Poly<F>, tracker: &mut Tracker| -> Result<bool, BudgetKind> {
        let red = reduce(layout, &elems, &all, p, None, 0, true, tracker)?;
        stats.reduction_steps += red.steps;
        Ok(red.poly.is_zero())
    };
    for f in inputs {
        if !zero(f.clone(), tracker)? {
            return Ok(false);
        }
    }
    let one = F::one();
    for (i, gi) in basis.iter().enumerate() {
        for gj in &basis[i + 1..] {
            if layout.coprime(gi.lm(), gj.lm()) {
                continue;
            }
            tracker.check_time()?;
            let lcm = layout.lcm(gi.lm(), gj.lm());
            let s = gi
                .mul_term(&key_sub(&lcm, gi.lm()), &one)
                .sub_scaled(&one, &key_sub(&lcm, gj.lm()), gj);
            if !zero(s, tracker)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
