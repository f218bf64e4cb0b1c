//! Deterministic Buchberger engine with cofactor tracking.
//!
//! Pair selection uses the normal strategy (smallest lcm first) with sugar
//! degree and then pair indices as tie-breaks. The Gebauer-Moller criteria
//! (coprime leading monomials; chain) can be switched off individually for
//! cross-checking. Every run is bounded by a [`ResourceBudget`]; exhausting
//! it yields [`GbError::Budget`], never a basis.

mod certificate;
mod engine;
mod field;

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use certificate::{verify_certificate, Certificate, CertificateError};
use engine::{Criteria, Elem, Guidance, Layout, Poly, Tracker};
use field::{Field, Fp, Rat};

use crate::exactnum::GaussianRational;
use crate::multipoly::{same_universe, Monomial, MonomialOrder, MultiPoly, VarUniverse};

/// Limits for a single Groebner computation. `None` means unlimited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceBudget {
    #[serde(with = "opt_secs")]
    pub wall_clock: Option<Duration>,
    pub max_pairs: Option<usize>,
    pub max_terms: Option<usize>,
}

impl Default for ResourceBudget {
    fn default() -> Self {
        ResourceBudget {
            wall_clock: Some(Duration::from_secs(300)),
            max_pairs: None,
            max_terms: None,
        }
    }
}

impl ResourceBudget {
    pub fn unlimited() -> Self {
        ResourceBudget {
            wall_clock: None,
            max_pairs: None,
            max_terms: None,
        }
    }

    pub fn with_wall_clock(secs: f64) -> Self {
        ResourceBudget {
            wall_clock: Some(Duration::from_secs_f64(secs)),
            ..Self::default()
        }
    }

    fn tracker(&self) -> Tracker {
        Tracker::new(self.wall_clock, self.max_pairs, self.max_terms)
    }

    /// Tracker for the part of the budget left after `spent`.
    fn remaining(&self, spent: Duration) -> Tracker {
        let left = self.wall_clock.map(|w| w.saturating_sub(spent));
        Tracker::new(left, self.max_pairs, self.max_terms)
    }
}

mod opt_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(v: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(d) => s.serialize_some(&d.as_secs_f64()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.map(Duration::from_secs_f64))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GbConfig {
    pub order: MonomialOrder,
    pub budget: ResourceBudget,
    pub track_cofactors: bool,
    /// Skip pairs with coprime leading monomials.
    pub product_criterion: bool,
    /// Gebauer-Moller chain criteria.
    pub chain_criterion: bool,
    /// For rational inputs, run first modulo a prime and skip over Q the
    /// pairs that reduced to zero there. The result is re-verified exactly.
    #[serde(default = "default_true")]
    pub modular_trace: bool,
}

fn default_true() -> bool {
    true
}

impl Default for GbConfig {
    fn default() -> Self {
        GbConfig {
            order: MonomialOrder::Grevlex,
            budget: ResourceBudget::default(),
            track_cofactors: false,
            product_criterion: true,
            chain_criterion: true,
            modular_trace: true,
        }
    }
}

impl GbConfig {
    pub fn with_order(order: MonomialOrder) -> Self {
        GbConfig {
            order,
            ..Self::default()
        }
    }
}

/// Counters from one run. Timings are excluded from equality.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GbStats {
    pub pairs_created: u64,
    pub pairs_pruned: u64,
    pub pairs_reduced: u64,
    pub zero_reductions: u64,
    /// Pairs skipped because a modular run reduced them to zero.
    #[serde(default)]
    pub pairs_skipped: u64,
    pub reduction_steps: u64,
    pub max_basis: usize,
    pub max_terms: usize,
    pub basis_size: usize,
    #[serde(with = "secs")]
    pub elapsed: Duration,
}

impl PartialEq for GbStats {
    fn eq(&self, o: &Self) -> bool {
        (
            self.pairs_created,
            self.pairs_pruned,
            self.pairs_reduced,
            self.zero_reductions,
            self.reduction_steps,
            self.max_basis,
            self.max_terms,
            self.basis_size,
        ) == (
            o.pairs_created,
            o.pairs_pruned,
            o.pairs_reduced,
            o.zero_reductions,
            o.reduction_steps,
            o.max_basis,
            o.max_terms,
            o.basis_size,
        )
    }
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(v: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(v.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetKind {
    WallClock,
    Pairs,
    Terms,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("resource budget exhausted ({kind:?}) after {:.3}s", stats.elapsed.as_secs_f64())]
pub struct BudgetExceeded {
    pub kind: BudgetKind,
    pub stats: GbStats,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GbError {
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("generators live in different variable universes")]
    UniverseMismatch,
    #[error("the variable universe is empty")]
    EmptyUniverse,
    #[error("{0}")]
    Argument(String),
}

/// Reduced Groebner basis: monic, inter-reduced, sorted by increasing
/// leading monomial.
#[derive(Debug, Clone, PartialEq)]
pub struct GroebnerResult {
    universe: Arc<VarUniverse>,
    order: MonomialOrder,
    basis: Vec<MultiPoly>,
    cofactors: Option<Vec<Vec<MultiPoly>>>,
    stats: GbStats,
}

impl GroebnerResult {
    pub fn universe(&self) -> &Arc<VarUniverse> {
        &self.universe
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn basis(&self) -> &[MultiPoly] {
        &self.basis
    }

    /// `cofactors[i][j]` multiplies generator `j` in the expression of basis element `i`.
    pub fn cofactors(&self) -> Option<&[Vec<MultiPoly>]> {
        self.cofactors.as_deref()
    }

    pub fn stats(&self) -> &GbStats {
        &self.stats
    }

    pub fn is_unit(&self) -> bool {
        ideal_contains_one(self)
    }

    /// Leading monomials of the basis, in basis order.
    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.basis
            .iter()
            .map(|p| p.leading_term(&self.order).expect("zero basis element").0.clone())
            .collect()
    }

    pub fn reducer(&self) -> Reducer {
        Reducer::new(&self.basis, &self.order, &self.universe)
    }
}

fn check_inputs(generators: &[MultiPoly], universe: &Arc<VarUniverse>) -> Result<(), GbError> {
    if universe.is_empty() {
        return Err(GbError::EmptyUniverse);
    }
    if generators.iter().any(|g| !same_universe(g.universe(), universe)) {
        return Err(GbError::UniverseMismatch);
    }
    Ok(())
}

fn to_internal<F: Field>(p: &MultiPoly, layout: &Layout) -> Poly<F> {
    Poly::from_unsorted(
        p.terms()
            .map(|(m, c)| {
                (
                    layout.encode(m.exponents()),
                    F::from_gaussian(c).expect("coefficient outside the engine field"),
                )
            })
            .collect(),
    )
}

fn from_internal<F: Field>(p: &Poly<F>, layout: &Layout, universe: &Arc<VarUniverse>) -> MultiPoly {
    MultiPoly::from_terms(
        universe,
        p.terms
            .iter()
            .map(|(k, c)| (Monomial::from_exponents(&layout.decode(k)), c.to_gaussian())),
    )
}

/// Computes the reduced Groebner basis of the ideal generated by `generators`.
pub fn buchberger(
    universe: &Arc<VarUniverse>,
    generators: &[MultiPoly],
    config: &GbConfig,
) -> Result<GroebnerResult, GbError> {
    check_inputs(generators, universe)?;
    let real = generators.iter().all(|g| g.terms().all(|(_, c)| c.is_real()));
    let result = if real {
        run_rational(universe, generators, config)
    } else {
        run_in::<GaussianRational>(universe, generators, config, Guidance::Off, config.budget.tracker())
            .map(|(r, _)| r)
    };
    #[cfg(any(test, feature = "verify-invariants"))]
    if let Ok(r) = &result {
        if let Err(e) = check_invariants(r, generators) {
            panic!("Groebner invariant violated: {e}");
        }
    }
    result
}

/// Prime for the modular trace.
const TRACE_PRIME: u64 = 9_223_372_036_854_775_783;

fn run_rational(
    universe: &Arc<VarUniverse>,
    generators: &[MultiPoly],
    config: &GbConfig,
) -> Result<GroebnerResult, GbError> {
    let started = Instant::now();
    let reducible = generators
        .iter()
        .all(|g| g.terms().all(|(_, c)| Fp::<TRACE_PRIME>::from_gaussian(c).is_some()));
    if !config.modular_trace || !reducible {
        return run_in::<Rat>(universe, generators, config, Guidance::Off, config.budget.tracker()).map(|(r, _)| r);
    }
    let (_, modular) =
        run_in::<Fp<TRACE_PRIME>>(universe, generators, config, Guidance::Record, config.budget.tracker())?;
    let trace = modular.trace.expect("recording run returns its trace");
    let tracker = config.budget.remaining(started.elapsed());
    let (mut result, outcome) = run_in::<Rat>(universe, generators, config, Guidance::Follow(trace), tracker)?;
    if outcome.unchecked {
        let layout = Layout::new(&config.order, universe.len());
        let inputs: Vec<Poly<Rat>> = generators.iter().map(|g| to_internal(g, &layout)).collect();
        let mut tracker = config.budget.remaining(started.elapsed());
        let verified = engine::verify_basis(&layout, &inputs, &outcome.basis, &mut tracker, &mut result.stats)
            .map_err(|kind| BudgetExceeded {
                kind,
                stats: result.stats.clone(),
            })?;
        if !verified {
            let tracker = config.budget.remaining(started.elapsed());
            result = run_in::<Rat>(universe, generators, config, Guidance::Off, tracker)?.0;
        }
    }
    result.stats.elapsed = started.elapsed();
    Ok(result)
}

fn run_in<F: Field>(
    universe: &Arc<VarUniverse>,
    generators: &[MultiPoly],
    config: &GbConfig,
    guidance: Guidance,
    tracker: Tracker,
) -> Result<(GroebnerResult, engine::Outcome<F>), GbError> {
    let layout = Layout::new(&config.order, universe.len());
    let inputs: Vec<Poly<F>> = generators.iter().map(|g| to_internal(g, &layout)).collect();
    let mut stats = GbStats::default();
    let criteria = Criteria {
        product: config.product_criterion,
        chain: config.chain_criterion,
    };
    let outcome = engine::run(&layout, inputs, config.track_cofactors, criteria, tracker, guidance, &mut stats);
    let outcome = match outcome {
        Ok(o) => o,
        Err(abort) => return Err(BudgetExceeded { kind: abort.kind, stats }.into()),
    };
    stats.basis_size = outcome.basis.len();
    let basis = outcome
        .basis
        .iter()
        .map(|p| from_internal(p, &layout, universe))
        .collect();
    let cofactors = outcome.cofactors.as_ref().map(|rows| {
        rows.iter()
            .map(|row| {
                let mut row: Vec<MultiPoly> = row.iter().map(|p| from_internal(p, &layout, universe)).collect();
                row.resize(generators.len(), MultiPoly::zero(universe));
                row
            })
            .collect()
    });
    let result = GroebnerResult {
        universe: universe.clone(),
        order: config.order.clone(),
        basis,
        cofactors,
        stats,
    };
    Ok((result, outcome))
}

/// Reusable division by a fixed set of polynomials (normally a Groebner basis).
pub struct Reducer {
    universe: Arc<VarUniverse>,
    layout: Layout,
    elems: Vec<Elem<GaussianRational>>,
}

impl Reducer {
    pub fn new(polys: &[MultiPoly], order: &MonomialOrder, universe: &Arc<VarUniverse>) -> Self {
        let layout = Layout::new(order, universe.len());
        let elems = polys
            .iter()
            .filter(|p| !p.is_zero())
            .map(|p| {
                let poly: Poly<GaussianRational> = to_internal(p, &layout);
                let inv = Field::inv(poly.lc());
                Elem::new(poly.scale(&inv), 0, None, &layout)
            })
            .collect();
        Reducer {
            universe: universe.clone(),
            layout,
            elems,
        }
    }

    /// Full remainder of `p`: no term is divisible by a leading monomial.
    pub fn normal_form(&self, p: &MultiPoly) -> MultiPoly {
        let poly: Poly<GaussianRational> = to_internal(p, &self.layout);
        let all: Vec<usize> = (0..self.elems.len()).collect();
        let red = engine::reduce(
            &self.layout,
            &self.elems,
            &all,
            poly,
            None,
            0,
            true,
            &mut Tracker::unlimited(),
        )
        .expect("unlimited tracker");
        from_internal(&red.poly, &self.layout, &self.universe)
    }

    pub fn reduces_to_zero(&self, p: &MultiPoly) -> bool {
        self.normal_form(p).is_zero()
    }
}

/// Normal form of `p` modulo the basis of `result`.
pub fn normal_form(p: &MultiPoly, result: &GroebnerResult) -> MultiPoly {
    result.reducer().normal_form(p)
}

/// True iff the reduced basis is `{1}`.
pub fn ideal_contains_one(result: &GroebnerResult) -> bool {
    result.basis.len() == 1 && result.basis[0].as_constant().is_some_and(|c| One::is_one(&c))
}

/// How a radical-membership answer was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MembershipMethod {
    /// `p^power` reduced to zero modulo a basis of the ideal itself.
    Power { power: u32 },
    /// Decided by the basis of `I + (1 - w*p)`.
    Rabinowitsch { basis_size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    #[serde(flatten)]
    pub method: MembershipMethod,
}

/// Highest power tried by the normal-form pre-test.
pub const POWER_PRETEST_LIMIT: u32 = 4;

/// Decides whether `p` lies in the radical of the ideal of `generators`.
pub fn radical_membership(
    p: &MultiPoly,
    universe: &Arc<VarUniverse>,
    generators: &[MultiPoly],
    config: &GbConfig,
) -> Result<Membership, GbError> {
    let basis = buchberger(universe, generators, config)?;
    radical_membership_with_basis(p, universe, generators, &basis, config)
}

/// As [`radical_membership`], reusing an already computed basis of the ideal.
pub fn radical_membership_with_basis(
    p: &MultiPoly,
    universe: &Arc<VarUniverse>,
    generators: &[MultiPoly],
    basis: &GroebnerResult,
    config: &GbConfig,
) -> Result<Membership, GbError> {
    if p.is_zero() {
        return Err(GbError::Argument("radical membership of the zero polynomial".into()));
    }
    let reducer = basis.reducer();
    let mut power = p.clone();
    for k in 1..=POWER_PRETEST_LIMIT {
        if reducer.reduces_to_zero(&power) {
            return Ok(Membership {
                member: true,
                method: MembershipMethod::Power { power: k },
            });
        }
        power = &power * p;
    }
    rabinowitsch(p, universe, generators, config)
}

/// Picks a variable name not present in `universe`.
pub fn fresh_variable(universe: &VarUniverse, stem: &str) -> String {
    if universe.index_of(stem).is_none() {
        return stem.to_string();
    }
    (1..)
        .map(|k| format!("{stem}_{k}"))
        .find(|name| universe.index_of(name).is_none())
        .expect("unbounded search")
}

fn rabinowitsch(
    p: &MultiPoly,
    universe: &Arc<VarUniverse>,
    generators: &[MultiPoly],
    config: &GbConfig,
) -> Result<Membership, GbError> {
    let w = fresh_variable(universe, "w");
    let extended = universe.extended([w.as_str()]).map_err(|e| GbError::Argument(e.to_string()))?;
    let lift = |q: &MultiPoly| q.embed(&extended).expect("universe extension keeps every variable");
    let mut gens: Vec<MultiPoly> = generators.iter().map(lift).collect();
    let wvar = MultiPoly::var(&extended, &w).expect("fresh variable");
    gens.push(&MultiPoly::one(&extended) - &(&wvar * &lift(p)));
    let cfg = GbConfig {
        track_cofactors: false,
        ..config.clone()
    };
    let result = buchberger(&extended, &gens, &cfg)?;
    Ok(Membership {
        member: ideal_contains_one(&result),
        method: MembershipMethod::Rabinowitsch {
            basis_size: result.basis.len(),
        },
    })
}

/// Outcome of [`express_one`].
#[derive(Debug, Clone, PartialEq)]
pub enum OneExpression {
    /// `sum_j cofactors[j] * generators[j] = 1`, verified exactly.
    Certificate(Vec<MultiPoly>),
    /// The ideal is proper; carries the size of its reduced basis.
    NotTrivial { basis_size: usize },
}

/// Writes 1 as a combination of the generators when the ideal is trivial.
pub fn express_one(
    universe: &Arc<VarUniverse>,
    generators: &[MultiPoly],
    config: &GbConfig,
) -> Result<OneExpression, GbError> {
    check_inputs(generators, universe)?;
    let cofactors = if let Some((j, c)) = generators
        .iter()
        .enumerate()
        .find_map(|(j, g)| g.as_constant().filter(|c| !Zero::is_zero(c)).map(|c| (j, c)))
    {
        let mut cof = vec![MultiPoly::zero(universe); generators.len()];
        cof[j] = MultiPoly::constant(universe, c.inv());
        cof
    } else {
        let cfg = GbConfig {
            track_cofactors: true,
            ..config.clone()
        };
        let result = buchberger(universe, generators, &cfg)?;
        if !ideal_contains_one(&result) {
            return Ok(OneExpression::NotTrivial {
                basis_size: result.basis.len(),
            });
        }
        result.cofactors.expect("tracked run").swap_remove(0)
    };
    if !combination_equals(universe, &cofactors, generators, &MultiPoly::one(universe)) {
        return Err(GbError::Argument("cofactor certificate failed verification".into()));
    }
    Ok(OneExpression::Certificate(cofactors))
}

/// Checks `sum_j cofactors[j] * generators[j] == target` exactly.
pub fn combination_equals(
    universe: &Arc<VarUniverse>,
    cofactors: &[MultiPoly],
    generators: &[MultiPoly],
    target: &MultiPoly,
) -> bool {
    if cofactors.len() != generators.len() {
        return false;
    }
    let mut acc = MultiPoly::zero(universe);
    for (c, g) in cofactors.iter().zip(generators) {
        if !c.is_zero() {
            acc = &acc + &(c * g);
        }
    }
    acc == *target
}

/// Generators of the elimination ideal `I ∩ k[keep]`, expressed in the
/// original universe.
pub fn eliminate(
    universe: &Arc<VarUniverse>,
    generators: &[MultiPoly],
    keep: &[usize],
    config: &GbConfig,
) -> Result<Vec<MultiPoly>, GbError> {
    check_inputs(generators, universe)?;
    if let Some(&bad) = keep.iter().find(|&&v| v >= universe.len()) {
        return Err(GbError::Argument(format!("variable index {bad} out of range")));
    }
    let dropped: Vec<usize> = (0..universe.len()).filter(|v| !keep.contains(v)).collect();
    let kept: Vec<usize> = (0..universe.len()).filter(|v| keep.contains(v)).collect();
    let names: Vec<&str> = dropped.iter().chain(&kept).map(|&v| universe.name(v)).collect();
    let permuted = VarUniverse::new(names).expect("names are distinct");
    let gens: Vec<MultiPoly> = generators
        .iter()
        .map(|g| g.embed(&permuted).expect("same variable set"))
        .collect();
    let cfg = GbConfig {
        order: MonomialOrder::elimination(dropped.len()),
        track_cofactors: false,
        ..config.clone()
    };
    let result = buchberger(&permuted, &gens, &cfg)?;
    let drop_set: Vec<usize> = (0..dropped.len()).collect();
    Ok(result
        .basis
        .iter()
        .filter(|p| p.support().iter().all(|v| !drop_set.contains(v)))
        .map(|p| p.embed(universe).expect("same variable set"))
        .collect())
}

/// Exhaustively checks the defining properties of a reduced Groebner basis
/// of the ideal of `generators`: membership of every generator, reduction of
/// every S-polynomial, reducedness, monicity and the cofactor identities.
pub fn check_invariants(result: &GroebnerResult, generators: &[MultiPoly]) -> Result<(), String> {
    let order = &result.order;
    let reducer = result.reducer();
    for (j, g) in generators.iter().enumerate() {
        if !reducer.reduces_to_zero(g) {
            return Err(format!("generator {j} does not reduce to zero"));
        }
    }
    let lms = result.leading_monomials();
    for (i, p) in result.basis.iter().enumerate() {
        if !p.leading_term(order).is_some_and(|(_, c)| One::is_one(c)) {
            return Err(format!("basis element {i} is not monic"));
        }
        for (m, _) in p.terms() {
            for (k, lm) in lms.iter().enumerate() {
                if k != i && lm.divides(m) {
                    return Err(format!("basis element {i} has a term divisible by leading monomial {k}"));
                }
            }
        }
    }
    for i in 0..result.basis.len() {
        if i > 0 && order.cmp_monomials(&lms[i - 1], &lms[i]) != std::cmp::Ordering::Less {
            return Err("basis is not sorted by leading monomial".into());
        }
        for j in i + 1..result.basis.len() {
            let s = s_polynomial(&result.basis[i], &result.basis[j], order);
            if !reducer.reduces_to_zero(&s) {
                return Err(format!("S-polynomial of {i} and {j} does not reduce to zero"));
            }
        }
    }
    if let Some(cofs) = &result.cofactors {
        if cofs.len() != result.basis.len() {
            return Err("cofactor matrix has the wrong number of rows".into());
        }
        for (i, row) in cofs.iter().enumerate() {
            if !combination_equals(&result.universe, row, generators, &result.basis[i]) {
                return Err(format!("cofactor identity fails for basis element {i}"));
            }
        }
    }
    Ok(())
}

/// S-polynomial of two nonzero polynomials under `order`.
pub fn s_polynomial(f: &MultiPoly, g: &MultiPoly, order: &MonomialOrder) -> MultiPoly {
    let (mf, cf) = f.leading_term(order).expect("nonzero");
    let (mg, cg) = g.leading_term(order).expect("nonzero");
    let lcm = mf.lcm(mg);
    let sf = mf.quotient_of(&lcm).expect("lcm is a multiple");
    let sg = mg.quotient_of(&lcm).expect("lcm is a multiple");
    &f.mul_term(&sf, &cf.inv()) - &g.mul_term(&sg, &cg.inv())
}
