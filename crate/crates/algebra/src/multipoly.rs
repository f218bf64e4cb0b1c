//! Sparse multivariate polynomials over [`GaussianRational`].
//!
//! A [`MultiPoly`] is a map from exponent vectors to nonzero coefficients,
//! tied to a shared [`VarUniverse`]. Terms are stored in a `BTreeMap` keyed by
//! [`Monomial`], whose `Ord` is graded reverse lexicographic; iteration in
//! reverse therefore yields terms in decreasing grevlex order, which is the
//! canonical print order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::exactnum::GaussianRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("polynomials live in different variable universes")]
    UniverseMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("invalid variable name `{0}`")]
    InvalidVariableName(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("division by zero")]
    DivisionByZero,
}

/// Ordered list of distinct variable names. Indices are stable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarUniverse {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    name != "i" && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl VarUniverse {
    /// Builds a universe; `i` is reserved for the imaginary unit.
    pub fn new<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Arc<Self>, PolyError> {
        let mut out = VarUniverse {
            names: Vec::new(),
            index: HashMap::new(),
        };
        for name in names {
            let name = name.as_ref();
            if !valid_name(name) {
                return Err(PolyError::InvalidVariableName(name.to_string()));
            }
            if out.index.insert(name.to_string(), out.names.len()).is_some() {
                return Err(PolyError::DuplicateVariable(name.to_string()));
            }
            out.names.push(name.to_string());
        }
        Ok(Arc::new(out))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// A new universe with `extra` appended.
    pub fn extended<S: AsRef<str>>(&self, extra: impl IntoIterator<Item = S>) -> Result<Arc<Self>, PolyError> {
        let names: Vec<String> = self
            .names
            .iter()
            .cloned()
            .chain(extra.into_iter().map(|s| s.as_ref().to_string()))
            .collect();
        VarUniverse::new(names)
    }
}

pub(crate) fn same_universe(a: &Arc<VarUniverse>, b: &Arc<VarUniverse>) -> bool {
    Arc::ptr_eq(a, b) || a.names == b.names
}

/// Exponent vector aligned with a universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: SmallVec<[u16; 12]>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial {
            exps: SmallVec::from_elem(0, nvars),
        }
    }

    pub fn from_exponents(exps: &[u16]) -> Self {
        Monomial {
            exps: SmallVec::from_slice(exps),
        }
    }

    pub fn var(nvars: usize, idx: usize, power: u16) -> Self {
        let mut m = Self::one(nvars);
        m.exps[idx] = power;
        m
    }

    pub fn exponents(&self) -> &[u16] {
        &self.exps
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(&a, &b)| a.checked_add(b).expect("exponent overflow"))
                .collect(),
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self` when `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        if !self.divides(other) {
            return None;
        }
        Some(Monomial {
            exps: other.exps.iter().zip(&self.exps).map(|(&b, &a)| b - a).collect(),
        })
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(&a, &b)| a.max(b)).collect(),
        }
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(&a, &b)| a == 0 || b == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        grevlex_cmp(&self.exps, &other.exps)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn lex_cmp(a: &[u16], b: &[u16]) -> Ordering {
    a.cmp(b)
}

fn grevlex_cmp(a: &[u16], b: &[u16]) -> Ordering {
    let da: u32 = a.iter().map(|&e| e as u32).sum();
    let db: u32 = b.iter().map(|&e| e as u32).sum();
    da.cmp(&db).then_with(|| {
        for (x, y) in a.iter().rev().zip(b.iter().rev()) {
            if x != y {
                return y.cmp(x);
            }
        }
        Ordering::Equal
    })
}

/// A monomial order on exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum MonomialOrder {
    Lex,
    Grevlex,
    /// Variables `[0, split)` are compared first with `first`; ties are
    /// broken on `[split, n)` with `second`. Eliminates the first block.
    Block {
        split: usize,
        first: Box<MonomialOrder>,
        second: Box<MonomialOrder>,
    },
}

impl MonomialOrder {
    pub fn cmp(&self, a: &[u16], b: &[u16]) -> Ordering {
        match self {
            MonomialOrder::Lex => lex_cmp(a, b),
            MonomialOrder::Grevlex => grevlex_cmp(a, b),
            MonomialOrder::Block { split, first, second } => {
                let s = (*split).min(a.len());
                first
                    .cmp(&a[..s], &b[..s])
                    .then_with(|| second.cmp(&a[s..], &b[s..]))
            }
        }
    }

    pub fn cmp_monomials(&self, a: &Monomial, b: &Monomial) -> Ordering {
        self.cmp(&a.exps, &b.exps)
    }

    /// Block order eliminating the first `split` variables, grevlex inside blocks.
    pub fn elimination(split: usize) -> Self {
        MonomialOrder::Block {
            split,
            first: Box::new(MonomialOrder::Grevlex),
            second: Box::new(MonomialOrder::Grevlex),
        }
    }

    pub fn name(&self) -> String {
        match self {
            MonomialOrder::Lex => "lex".into(),
            MonomialOrder::Grevlex => "grevlex".into(),
            MonomialOrder::Block { split, first, second } => {
                format!("block({split},{},{})", first.name(), second.name())
            }
        }
    }
}

/// Sparse polynomial with Gaussian-rational coefficients.
#[derive(Clone)]
pub struct MultiPoly {
    universe: Arc<VarUniverse>,
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        same_universe(&self.universe, &other.universe) && self.terms == other.terms
    }
}

impl Eq for MultiPoly {}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({self})")
    }
}

impl MultiPoly {
    pub fn zero(universe: &Arc<VarUniverse>) -> Self {
        MultiPoly {
            universe: universe.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(universe: &Arc<VarUniverse>, c: GaussianRational) -> Self {
        let mut p = Self::zero(universe);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(universe.len()), c);
        }
        p
    }

    pub fn one(universe: &Arc<VarUniverse>) -> Self {
        Self::constant(universe, GaussianRational::one())
    }

    pub fn var(universe: &Arc<VarUniverse>, name: &str) -> Result<Self, PolyError> {
        let idx = universe
            .index_of(name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        Ok(Self::var_index(universe, idx))
    }

    pub fn var_index(universe: &Arc<VarUniverse>, idx: usize) -> Self {
        Self::term(universe, Monomial::var(universe.len(), idx, 1), GaussianRational::one())
    }

    pub fn term(universe: &Arc<VarUniverse>, m: Monomial, c: GaussianRational) -> Self {
        assert_eq!(m.len(), universe.len(), "monomial length does not match universe");
        let mut p = Self::zero(universe);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// Builds from raw terms, combining duplicates and dropping zeros.
    pub fn from_terms(
        universe: &Arc<VarUniverse>,
        terms: impl IntoIterator<Item = (Monomial, GaussianRational)>,
    ) -> Self {
        let mut p = Self::zero(universe);
        for (m, c) in terms {
            assert_eq!(m.len(), universe.len(), "monomial length does not match universe");
            p.add_term(m, &c);
        }
        p
    }

    pub fn universe(&self) -> &Arc<VarUniverse> {
        &self.universe
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The constant value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        if self.is_zero() {
            return Some(GaussianRational::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, var: usize) -> u16 {
        self.terms.keys().map(|m| m.exps[var]).max().unwrap_or(0)
    }

    /// Terms in decreasing grevlex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &GaussianRational)> + '_ {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, m: &Monomial) -> GaussianRational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Leading term under `order`.
    pub fn leading_term(&self, order: &MonomialOrder) -> Option<(&Monomial, &GaussianRational)> {
        self.terms
            .iter()
            .max_by(|a, b| order.cmp_monomials(a.0, b.0))
    }

    pub fn add_term(&mut self, m: Monomial, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check(&self, other: &MultiPoly) -> Result<(), PolyError> {
        if same_universe(&self.universe, &other.universe) {
            Ok(())
        } else {
            Err(PolyError::UniverseMismatch)
        }
    }

    pub fn checked_add(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &-c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check(other)?;
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc: HashMap<Monomial, GaussianRational> = HashMap::new();
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                let c = ca * cb;
                acc.entry(ma.mul(mb))
                    .and_modify(|e| *e += &c)
                    .or_insert(c);
            }
        }
        Ok(MultiPoly {
            universe: self.universe.clone(),
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn scale(&self, c: &GaussianRational) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(&self.universe);
        }
        MultiPoly {
            universe: self.universe.clone(),
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
        }
    }

    /// Multiplies by a single term.
    pub fn mul_term(&self, m: &Monomial, c: &GaussianRational) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(&self.universe);
        }
        MultiPoly {
            universe: self.universe.clone(),
            terms: self.terms.iter().map(|(t, d)| (t.mul(m), d * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> MultiPoly {
        let mut base = self.clone();
        let mut acc = Self::one(&self.universe);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Makes the leading coefficient (under `order`) equal to one.
    pub fn monic(&self, order: &MonomialOrder) -> MultiPoly {
        match self.leading_term(order) {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.inv()),
        }
    }

    pub fn derivative(&self, var: usize) -> MultiPoly {
        let mut out = Self::zero(&self.universe);
        for (m, c) in &self.terms {
            let e = m.exps[var];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.exps[var] -= 1;
            out.add_term(dm, &(c * &GaussianRational::from_int(e as i64)));
        }
        out
    }

    /// Evaluates at a full point (one value per universe variable).
    pub fn evaluate(&self, point: &[GaussianRational]) -> GaussianRational {
        assert_eq!(point.len(), self.universe.len());
        let mut powers: Vec<Vec<GaussianRational>> = point.iter().map(|v| vec![GaussianRational::one(), v.clone()]).collect();
        let mut total = GaussianRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let cache = &mut powers[v];
                while cache.len() <= e as usize {
                    let next = cache.last().unwrap() * &point[v];
                    cache.push(next);
                }
                t *= &cache[e as usize];
            }
            total += &t;
        }
        total
    }

    /// Substitutes polynomials for variables. Images live in `target`;
    /// unassigned variables map to the same-named variable of `target`.
    pub fn substitute(
        &self,
        assignment: &HashMap<usize, MultiPoly>,
        target: &Arc<VarUniverse>,
    ) -> Result<MultiPoly, PolyError> {
        let mut images = Vec::with_capacity(self.universe.len());
        for idx in 0..self.universe.len() {
            let used = self.terms.keys().any(|m| m.exps[idx] > 0);
            let image = match assignment.get(&idx) {
                Some(p) => {
                    if !same_universe(p.universe(), target) {
                        return Err(PolyError::UniverseMismatch);
                    }
                    Some(p.clone())
                }
                None if used => Some(MultiPoly::var(target, self.universe.name(idx))?),
                None => None,
            };
            images.push(image);
        }
        let mut cache: Vec<Vec<MultiPoly>> = images
            .iter()
            .map(|img| match img {
                Some(p) => vec![MultiPoly::one(target), p.clone()],
                None => Vec::new(),
            })
            .collect();
        let mut out = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(target, c.clone());
            for (v, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pows = &mut cache[v];
                while pows.len() <= e as usize {
                    let next = pows.last().unwrap() * &pows[1];
                    pows.push(next);
                }
                t = &t * &pows[e as usize];
            }
            for (tm, tc) in t.terms {
                out.add_term(tm, &tc);
            }
        }
        Ok(out)
    }

    /// Substitution by variable name.
    pub fn substitute_named(
        &self,
        assignment: &[(&str, MultiPoly)],
        target: &Arc<VarUniverse>,
    ) -> Result<MultiPoly, PolyError> {
        let mut map = HashMap::new();
        for (name, p) in assignment {
            let idx = self
                .universe
                .index_of(name)
                .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
            map.insert(idx, p.clone());
        }
        self.substitute(&map, target)
    }

    /// Re-expresses the polynomial in another universe containing every
    /// variable it actually uses.
    pub fn embed(&self, target: &Arc<VarUniverse>) -> Result<MultiPoly, PolyError> {
        if same_universe(&self.universe, target) {
            return Ok(self.clone());
        }
        let mut map = Vec::with_capacity(self.universe.len());
        for idx in 0..self.universe.len() {
            map.push(target.index_of(self.universe.name(idx)));
        }
        let mut out = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut nm = Monomial::one(target.len());
            for (v, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let tv = map[v].ok_or_else(|| PolyError::UnknownVariable(self.universe.name(v).to_string()))?;
                nm.exps[tv] = e;
            }
            out.add_term(nm, c);
        }
        Ok(out)
    }

    /// Groups terms by their exponents in `pivots`. Returns, for each distinct
    /// pivot exponent tuple (ascending lexicographic in the given pivot order),
    /// the coefficient polynomial in the remaining variables.
    pub fn collect_coefficients(&self, pivots: &[usize]) -> Vec<(Vec<u16>, MultiPoly)> {
        let mut groups: BTreeMap<Vec<u16>, MultiPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let key: Vec<u16> = pivots.iter().map(|&v| m.exps[v]).collect();
            let mut rest = m.clone();
            for &v in pivots {
                rest.exps[v] = 0;
            }
            groups
                .entry(key)
                .or_insert_with(|| MultiPoly::zero(&self.universe))
                .add_term(rest, c);
        }
        groups.into_iter().filter(|(_, p)| !p.is_zero()).collect()
    }

    /// Variables with a positive exponent somewhere.
    pub fn support(&self) -> Vec<usize> {
        (0..self.universe.len())
            .filter(|&v| self.terms.keys().any(|m| m.exps[v] > 0))
            .collect()
    }

    /// Parses the canonical text form (and general `+ - * / ^ ( )`
    /// expressions with constant divisors).
    pub fn parse(text: &str, universe: &Arc<VarUniverse>) -> Result<MultiPoly, PolyError> {
        let mut parser = Parser {
            src: text.as_bytes(),
            pos: 0,
            universe,
        };
        let p = parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.err("trailing input"));
        }
        Ok(p)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms().enumerate() {
            let negative_real = c.is_real() && c.re() < &num_rational::BigRational::zero();
            let magnitude = if negative_real { -c } else { c.clone() };
            if k == 0 {
                if negative_real {
                    write!(f, "-")?;
                }
            } else if negative_real {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mono: Vec<String> = m
                .exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| {
                    if e == 1 {
                        self.universe.name(v).to_string()
                    } else {
                        format!("{}^{}", self.universe.name(v), e)
                    }
                })
                .collect();
            let coeff_text = if magnitude.is_real() {
                magnitude.to_string()
            } else {
                format!("({magnitude})")
            };
            if mono.is_empty() {
                write!(f, "{coeff_text}")?;
            } else if magnitude.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{coeff_text}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    universe: &'a Arc<VarUniverse>,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> PolyError {
        PolyError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.power()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.power()?;
                    let c = d.as_constant().ok_or(PolyError::Parse {
                        pos: at,
                        msg: "divisor must be constant".into(),
                    })?;
                    let inv = c.checked_inv().map_err(|_| PolyError::DivisionByZero)?;
                    acc = acc.scale(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<MultiPoly, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("expected exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.power()?)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let v = GaussianRational::parse(text).map_err(|e| PolyError::Parse {
                    pos: start,
                    msg: e.to_string(),
                })?;
                Ok(MultiPoly::constant(self.universe, v))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if name == "i" {
                    return Ok(MultiPoly::constant(self.universe, GaussianRational::i()));
                }
                MultiPoly::var(self.universe, name)
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;

    /// Panics on universe mismatch; see [`MultiPoly::checked_add`].
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_add(rhs).expect("universe mismatch")
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;

    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_sub(rhs).expect("universe mismatch")
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;

    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_mul(rhs).expect("universe mismatch")
    }
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: MultiPoly) -> MultiPoly {
        &self + &rhs
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: MultiPoly) -> MultiPoly {
        &self - &rhs
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: MultiPoly) -> MultiPoly {
        &self * &rhs
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(mut self) -> MultiPoly {
        for c in self.terms.values_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -self.clone()
    }
}
