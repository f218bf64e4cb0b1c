//! Polynomial systems attached to a matrix: the Keller polynomial, the
//! determinant pencil, the cubic rows of the two witness varieties, the
//! fixed-witness systems and the rank-parametrized slice.
//!
//! Generators are always ordered cubic rows first (row ascending), then
//! pencil coefficients in ascending `(s-degree, t-degree)` order. Variables
//! are ordered `z`, then `y`, then auxiliaries.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use keller_algebra::exactla::combinations;
use keller_algebra::{ExactMatrix, GaussianRational, MultiPoly, PolyError, PolyMatrix, VarUniverse};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::verdict::{Evidence, Status, Verdict};

/// Largest dimension for which the Keller polynomial is expanded symbolically.
pub const DEFAULT_SYMBOLIC_LIMIT: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SysError {
    #[error("dimension {n} exceeds the symbolic limit {limit}; use the randomized test")]
    SymbolicLimit { n: usize, limit: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// What a generator encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    KellerCoefficient,
    PencilCoefficient { s_degree: u16, t_degree: u16 },
    CubicRow { row: usize },
    Auxiliary,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::KellerCoefficient => write!(f, "keller"),
            Provenance::PencilCoefficient { s_degree, t_degree } => write!(f, "pencil(s^{s_degree} t^{t_degree})"),
            Provenance::CubicRow { row } => write!(f, "row({row})"),
            Provenance::Auxiliary => write!(f, "aux"),
        }
    }
}

/// Ordered generators over a shared universe, each tagged with its origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem {
    universe: Arc<VarUniverse>,
    generators: Vec<MultiPoly>,
    provenance: Vec<Provenance>,
}

#[derive(Serialize, Deserialize)]
struct SystemFile {
    variables: Vec<String>,
    generators: Vec<TaggedPoly>,
}

#[derive(Serialize, Deserialize)]
struct TaggedPoly {
    poly: String,
    tag: Provenance,
}

impl PolySystem {
    pub fn new(universe: &Arc<VarUniverse>) -> Self {
        PolySystem {
            universe: universe.clone(),
            generators: Vec::new(),
            provenance: Vec::new(),
        }
    }

    /// Appends a generator; zero polynomials are dropped.
    pub fn push(&mut self, p: MultiPoly, tag: Provenance) -> Result<(), SysError> {
        let p = p.embed(&self.universe)?;
        if !p.is_zero() {
            self.generators.push(p);
            self.provenance.push(tag);
        }
        Ok(())
    }

    pub fn universe(&self) -> &Arc<VarUniverse> {
        &self.universe
    }

    pub fn generators(&self) -> &[MultiPoly] {
        &self.generators
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Generators carrying a given kind of tag.
    pub fn count_where(&self, pred: impl Fn(&Provenance) -> bool) -> usize {
        self.provenance.iter().filter(|p| pred(p)).count()
    }

    /// Index of a named variable; panics if absent.
    pub fn var(&self, name: &str) -> usize {
        self.universe
            .index_of(name)
            .unwrap_or_else(|| panic!("variable {name} not in system"))
    }

    /// Canonical JSON text: variables, then generators with tags.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.file()).expect("system serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SysError> {
        let file: SystemFile = serde_json::from_str(text).map_err(|e| SysError::Argument(e.to_string()))?;
        let universe = VarUniverse::new(&file.variables)?;
        let mut sys = PolySystem::new(&universe);
        for g in file.generators {
            sys.push(MultiPoly::parse(&g.poly, &universe)?, g.tag)?;
        }
        Ok(sys)
    }

    /// SHA-256 of the canonical JSON text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    fn file(&self) -> SystemFile {
        SystemFile {
            variables: self.universe.names().to_vec(),
            generators: self
                .generators
                .iter()
                .zip(&self.provenance)
                .map(|(g, t)| TaggedPoly {
                    poly: g.to_string(),
                    tag: *t,
                })
                .collect(),
        }
    }
}

impl Serialize for PolySystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.file().serialize(s)
    }
}

/// The 0/1 vector with `k` leading ones out of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZkVector {
    n: usize,
    k: usize,
}

impl ZkVector {
    pub fn new(n: usize, k: usize) -> Result<Self, SysError> {
        if k == 0 || k > n {
            return Err(SysError::Argument(format!("k = {k} outside 1..={n}")));
        }
        Ok(ZkVector { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> Vec<GaussianRational> {
        (0..self.n)
            .map(|i| GaussianRational::from_int(i64::from(i < self.k)))
            .collect()
    }

    pub fn as_constants(&self, universe: &Arc<VarUniverse>) -> Vec<MultiPoly> {
        self.entries()
            .into_iter()
            .map(|c| MultiPoly::constant(universe, c))
            .collect()
    }
}

fn require_square(a: &ExactMatrix) -> Result<usize, SysError> {
    if a.is_square() {
        Ok(a.rows())
    } else {
        Err(SysError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}

/// Names `stem1..stemn`.
pub fn indexed_names(stem: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{stem}{i}")).collect()
}

/// Universe `z1..zn, y1..yn`.
pub fn zy_universe(n: usize) -> Arc<VarUniverse> {
    let mut names = indexed_names("z", n);
    names.extend(indexed_names("y", n));
    VarUniverse::new(names).expect("distinct names")
}

fn vars(universe: &Arc<VarUniverse>, idx: impl IntoIterator<Item = usize>) -> Vec<MultiPoly> {
    idx.into_iter().map(|v| MultiPoly::var_index(universe, v)).collect()
}

fn add_into(acc: &mut MultiPoly, p: &MultiPoly) {
    for (m, c) in p.terms() {
        acc.add_term(m.clone(), c);
    }
}

fn sum_polys(universe: &Arc<VarUniverse>, parts: Vec<MultiPoly>) -> MultiPoly {
    let mut acc = MultiPoly::zero(universe);
    for p in &parts {
        add_into(&mut acc, p);
    }
    acc
}

/// `A * v` for a vector of polynomials.
pub fn apply_matrix(a: &ExactMatrix, v: &[MultiPoly], universe: &Arc<VarUniverse>) -> Vec<MultiPoly> {
    (0..a.rows())
        .map(|i| {
            let mut acc = MultiPoly::zero(universe);
            for (j, vj) in v.iter().enumerate() {
                let c = a.get(i, j);
                if !Zero::is_zero(c) {
                    add_into(&mut acc, &vj.scale(c));
                }
            }
            acc
        })
        .collect()
}

/// `sum_S minor_S * prod_{i in S} factors[i]` over the given subsets.
fn minor_expansion(
    minors: &[(Vec<usize>, MultiPoly)],
    factors: &[MultiPoly],
    universe: &Arc<VarUniverse>,
) -> MultiPoly {
    let parts: Vec<MultiPoly> = minors
        .par_chunks(64)
        .map(|chunk| {
            let mut acc = MultiPoly::zero(universe);
            for (subset, minor) in chunk {
                let mut prod = minor.clone();
                for &i in subset {
                    prod = &prod * &factors[i];
                    if prod.is_zero() {
                        break;
                    }
                }
                add_into(&mut acc, &prod);
            }
            acc
        })
        .collect();
    sum_polys(universe, parts)
}

/// Nonzero principal minors of size `1..=rank(A)` as constants of `universe`.
fn scalar_minors(a: &ExactMatrix, universe: &Arc<VarUniverse>) -> Vec<(Vec<usize>, MultiPoly)> {
    a.principal_minors_up_to(a.rank())
        .into_iter()
        .filter(|(_, m)| !Zero::is_zero(m))
        .map(|(s, m)| (s, MultiPoly::constant(universe, m)))
        .collect()
}

/// Universe `x1..xn` used by [`keller_polynomial`].
pub fn keller_universe(n: usize) -> Arc<VarUniverse> {
    VarUniverse::new(indexed_names("x", n)).expect("distinct names")
}

/// `det(Id + diag((A x)^2) A) - 1` over the variables `xvars` of `universe`.
pub fn keller_polynomial(
    a: &ExactMatrix,
    universe: &Arc<VarUniverse>,
    xvars: &[usize],
    symbolic_limit: usize,
) -> Result<MultiPoly, SysError> {
    let n = require_square(a)?;
    if n > symbolic_limit {
        return Err(SysError::SymbolicLimit { n, limit: symbolic_limit });
    }
    if xvars.len() != n || xvars.iter().any(|&v| v >= universe.len()) {
        return Err(SysError::Argument(format!("need {n} valid variable indices")));
    }
    let x = vars(universe, xvars.iter().copied());
    let squares: Vec<MultiPoly> = apply_matrix(a, &x, universe).iter().map(|u| u.pow(2)).collect();
    Ok(minor_expansion(&scalar_minors(a, universe), &squares, universe))
}

/// Options for [`is_druzkowski`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DruzkowskiMode {
    Exact { symbolic_limit: usize },
    Randomized { trials: u32, seed: u64, bound: u64 },
}

impl Default for DruzkowskiMode {
    fn default() -> Self {
        DruzkowskiMode::Exact {
            symbolic_limit: DEFAULT_SYMBOLIC_LIMIT,
        }
    }
}

/// `det(Id + diag((A v)^2) A)` at a scalar point.
pub fn keller_determinant_at(a: &ExactMatrix, v: &[GaussianRational]) -> GaussianRational {
    let n = a.rows();
    let u = a.mul_vec(v);
    let mut m = ExactMatrix::identity(n);
    for i in 0..n {
        let sq = &u[i] * &u[i];
        if Zero::is_zero(&sq) {
            continue;
        }
        for j in 0..n {
            let e = m.get(i, j) + &(&sq * a.get(i, j));
            m.set(i, j, e);
        }
    }
    m.det()
}

/// Base-2 logarithm of the Schwartz-Zippel failure probability for
/// `trials` independent points from a box of `2*bound + 1` integers per
/// coordinate, for a polynomial of total degree `degree`.
pub fn schwartz_zippel_log2(degree: usize, bound: u64, trials: u32) -> f64 {
    if degree == 0 {
        return f64::NEG_INFINITY;
    }
    let width = 2.0 * bound as f64 + 1.0;
    (trials as f64 * (degree as f64 / width).log2()).min(0.0)
}

/// Decides whether `F(x) = x + (A x)^3` is a Keller map.
pub fn is_druzkowski(a: &ExactMatrix, mode: &DruzkowskiMode) -> Result<Verdict, SysError> {
    let n = require_square(a)?;
    let started = std::time::Instant::now();
    match *mode {
        DruzkowskiMode::Exact { symbolic_limit } => {
            let universe = keller_universe(n.max(1));
            let p = keller_polynomial(a, &universe, &(0..n).collect::<Vec<_>>(), symbolic_limit)?;
            let verdict = if p.is_zero() {
                Verdict::new(Status::Holds, Some(Evidence::KellerPolynomialZero))
            } else {
                let point = nonvanishing_point(&p, n);
                let value = p.evaluate(&point);
                Verdict::new(Status::Fails, Some(Evidence::WitnessPoint { point, value }))
            };
            Ok(verdict.timed(started))
        }
        DruzkowskiMode::Randomized { trials, seed, bound } => {
            if bound == 0 {
                return Err(SysError::Argument("point bound must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = bound as i64;
            for _ in 0..trials {
                let point: Vec<GaussianRational> =
                    (0..n).map(|_| GaussianRational::from_int(rng.gen_range(-b..=b))).collect();
                let det = keller_determinant_at(a, &point);
                if !One::is_one(&det) {
                    let value = &det - &GaussianRational::from_int(1);
                    return Ok(Verdict::new(Status::Fails, Some(Evidence::WitnessPoint { point, value })).timed(started));
                }
            }
            let degree = 2 * a.rank().min(n);
            let evidence = Evidence::SchwartzZippel {
                trials,
                seed,
                bound,
                degree,
                log2_failure_bound: schwartz_zippel_log2(degree, bound, trials),
            };
            Ok(Verdict::new(Status::Holds, Some(evidence)).timed(started))
        }
    }
}

/// A small integer point where a nonzero polynomial does not vanish.
fn nonvanishing_point(p: &MultiPoly, n: usize) -> Vec<GaussianRational> {
    let degree = p.total_degree().unwrap_or(0) as i64;
    let mut point = vec![GaussianRational::from_int(1); n];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    loop {
        if !Zero::is_zero(&p.evaluate(&point)) {
            return point;
        }
        let span = degree + 1;
        for c in point.iter_mut() {
            *c = GaussianRational::from_int(rng.gen_range(-span..=span));
        }
    }
}

/// Coefficients in `(s, t)` of `sum_S minor_S prod_{i in S} (s z_i + t y_i)^2`.
fn pencil_generators(
    minors: &[(Vec<usize>, MultiPoly)],
    z: &[MultiPoly],
    y: &[MultiPoly],
    universe: &Arc<VarUniverse>,
) -> Result<Vec<(Provenance, MultiPoly)>, SysError> {
    if minors.is_empty() {
        return Ok(Vec::new());
    }
    let s_name = keller_algebra::groebner::fresh_variable(universe, "s");
    let with_s = universe.extended([s_name.as_str()])?;
    let t_name = keller_algebra::groebner::fresh_variable(&with_s, "t");
    let ext = with_s.extended([t_name.as_str()])?;
    let (s_idx, t_idx) = (universe.len(), universe.len() + 1);
    let s = MultiPoly::var_index(&ext, s_idx);
    let t = MultiPoly::var_index(&ext, t_idx);
    let mut factors = Vec::with_capacity(z.len());
    for (zi, yi) in z.iter().zip(y) {
        let lin = &(&s * &zi.embed(&ext)?) + &(&t * &yi.embed(&ext)?);
        factors.push(lin.pow(2));
    }
    let lifted: Vec<(Vec<usize>, MultiPoly)> = minors
        .iter()
        .map(|(subset, m)| Ok((subset.clone(), m.embed(&ext)?)))
        .collect::<Result<_, PolyError>>()?;
    let total = minor_expansion(&lifted, &factors, &ext);
    let mut out = Vec::new();
    for (exps, coeff) in total.collect_coefficients(&[s_idx, t_idx]) {
        let tag = Provenance::PencilCoefficient {
            s_degree: exps[0],
            t_degree: exps[1],
        };
        out.push((tag, coeff.embed(universe)?));
    }
    Ok(out)
}

/// The pencil condition `det(Id + diag((s z + t y)^2) A) = 1` for all `s, t`,
/// as the list of its `(s, t)`-coefficients. `z` and `y` are arbitrary
/// polynomial vectors of `universe` (variables, constants or linear forms).
pub fn pencil_system(
    a: &ExactMatrix,
    universe: &Arc<VarUniverse>,
    z: &[MultiPoly],
    y: &[MultiPoly],
) -> Result<PolySystem, SysError> {
    let n = require_square(a)?;
    if z.len() != n || y.len() != n {
        return Err(SysError::Argument(format!("pencil vectors must have length {n}")));
    }
    let mut sys = PolySystem::new(universe);
    for (tag, g) in pencil_generators(&scalar_minors(a, universe), z, y, universe)? {
        sys.push(g, tag)?;
    }
    Ok(sys)
}

/// Rows of `z + A (z^3 + z * w^2)`.
fn cubic_rows(a: &ExactMatrix, z: &[MultiPoly], w: &[MultiPoly], universe: &Arc<VarUniverse>) -> Vec<MultiPoly> {
    let inner: Vec<MultiPoly> = z
        .iter()
        .zip(w)
        .map(|(zj, wj)| &zj.pow(3) + &(zj * &wj.pow(2)))
        .collect();
    let image = apply_matrix(a, &inner, universe);
    z.iter().zip(image).map(|(zi, ri)| zi + &ri).collect()
}

fn push_rows(sys: &mut PolySystem, rows: Vec<MultiPoly>) -> Result<(), SysError> {
    for (row, p) in rows.into_iter().enumerate() {
        sys.push(p, Provenance::CubicRow { row })?;
    }
    Ok(())
}

/// Membership in the witness variety with `y^2` inside:
/// cubic rows of `z + A (z^3 + z * y^2)` and the pencil in `(z, y)`.
pub fn c1_system(a: &ExactMatrix) -> Result<PolySystem, SysError> {
    let n = require_square(a)?;
    let universe = zy_universe(n);
    let z = vars(&universe, 0..n);
    let y = vars(&universe, n..2 * n);
    let mut sys = PolySystem::new(&universe);
    push_rows(&mut sys, cubic_rows(a, &z, &y, &universe))?;
    for (tag, g) in pencil_generators(&scalar_minors(a, &universe), &z, &y, &universe)? {
        sys.push(g, tag)?;
    }
    Ok(sys)
}

/// Membership in the witness variety with `(A y)^2` inside. The pencil part
/// (with `A y` for `y`) is omitted when `A` is known to be Druzkowski.
pub fn c2_system(a: &ExactMatrix, assume_druzkowski: bool) -> Result<PolySystem, SysError> {
    let n = require_square(a)?;
    let universe = zy_universe(n);
    let z = vars(&universe, 0..n);
    let y = vars(&universe, n..2 * n);
    let ay = apply_matrix(a, &y, &universe);
    let mut sys = PolySystem::new(&universe);
    push_rows(&mut sys, cubic_rows(a, &z, &ay, &universe))?;
    if !assume_druzkowski {
        for (tag, g) in pencil_generators(&scalar_minors(a, &universe), &z, &ay, &universe)? {
            sys.push(g, tag)?;
        }
    }
    Ok(sys)
}

/// Untransformed injectivity rows `x + (A x)^3 + (A x) * (A y)^2` over
/// `x1..xn, y1..yn`.
pub fn injective_direct_system(a: &ExactMatrix) -> Result<PolySystem, SysError> {
    let n = require_square(a)?;
    let mut names = indexed_names("x", n);
    names.extend(indexed_names("y", n));
    let universe = VarUniverse::new(names)?;
    let x = vars(&universe, 0..n);
    let y = vars(&universe, n..2 * n);
    let ax = apply_matrix(a, &x, &universe);
    let ay = apply_matrix(a, &y, &universe);
    let mut sys = PolySystem::new(&universe);
    for (row, ((xi, u), v)) in x.iter().zip(&ax).zip(&ay).enumerate() {
        let p = &(xi + &u.pow(3)) + &(u * &v.pow(2));
        sys.push(p, Provenance::CubicRow { row })?;
    }
    Ok(sys)
}

/// Which fixed-witness criterion to encode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZkVariant {
    /// Rows `Z_k + A (Z_k + Z_k * (A y)^2)`; necessary and sufficient.
    Thm18,
    /// Rows `Z_k + A (Z_k + Z_k * y^2)` plus the pencil at `z = Z_k`; sufficient.
    Thm19,
}

impl std::str::FromStr for ZkVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "thm18" => Ok(ZkVariant::Thm18),
            "thm19" => Ok(ZkVariant::Thm19),
            other => Err(format!("unknown variant {other:?} (expected thm18 or thm19)")),
        }
    }
}

impl fmt::Display for ZkVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ZkVariant::Thm18 => "thm18",
            ZkVariant::Thm19 => "thm19",
        })
    }
}

/// Witness system at `z = Z_k` over `y1..yn`; `k` must lie in `3..=n`.
pub fn zk_system(a: &ExactMatrix, k: usize, variant: ZkVariant) -> Result<PolySystem, SysError> {
    let n = require_square(a)?;
    if k < 3 || k > n {
        return Err(SysError::Argument(format!("k = {k} outside 3..={n}")));
    }
    let universe = VarUniverse::new(indexed_names("y", n))?;
    let y = vars(&universe, 0..n);
    let z = ZkVector::new(n, k)?.as_constants(&universe);
    let mut sys = PolySystem::new(&universe);
    match variant {
        ZkVariant::Thm18 => {
            let ay = apply_matrix(a, &y, &universe);
            push_rows(&mut sys, cubic_rows(a, &z, &ay, &universe))?;
        }
        ZkVariant::Thm19 => {
            push_rows(&mut sys, cubic_rows(a, &z, &y, &universe))?;
            for (tag, g) in pencil_generators(&scalar_minors(a, &universe), &z, &y, &universe)? {
                sys.push(g, tag)?;
            }
        }
    }
    Ok(sys)
}

/// Symbolic matrix whose first `r` rows are free (`a_i_j`) and whose other
/// rows are combinations `sum_j b_i_j * row_j` of them.
pub fn slice_matrix(n: usize, r: usize, universe: &Arc<VarUniverse>) -> Result<PolyMatrix, SysError> {
    let mut entries = Vec::with_capacity(n * n);
    for i in 1..=r {
        for j in 1..=n {
            entries.push(MultiPoly::var(universe, &format!("a_{i}_{j}"))?);
        }
    }
    for i in r + 1..=n {
        for col in 0..n {
            let mut acc = MultiPoly::zero(universe);
            for j in 1..=r {
                let b = MultiPoly::var(universe, &format!("b_{i}_{j}"))?;
                add_into(&mut acc, &(&b * &entries[(j - 1) * n + col]));
            }
            entries.push(acc);
        }
    }
    PolyMatrix::new(n, universe, entries).map_err(|e| SysError::Argument(e.to_string()))
}

/// Witness-variety membership at `z = Z_k` for a rank-`<= r` matrix with
/// symbolic entries. Unknowns are `y1..yn`, then the `a` and `b` parameters.
pub fn vn_slice_system(n: usize, k: usize, r: usize) -> Result<PolySystem, SysError> {
    if r == 0 || r >= n {
        return Err(SysError::Argument(format!("rank r = {r} outside 1..{n}")));
    }
    let zk = ZkVector::new(n, k)?;
    let mut names = indexed_names("y", n);
    for i in 1..=r {
        names.extend((1..=n).map(|j| format!("a_{i}_{j}")));
    }
    for i in r + 1..=n {
        names.extend((1..=r).map(|j| format!("b_{i}_{j}")));
    }
    let universe = VarUniverse::new(names)?;
    let a = slice_matrix(n, r, &universe)?;
    let y = vars(&universe, 0..n);
    let z = zk.as_constants(&universe);

    let mut sys = PolySystem::new(&universe);
    for i in 0..n {
        let mut row = z[i].clone();
        for j in 0..zk.k() {
            add_into(&mut row, &(a.get(i, j) * &(&MultiPoly::one(&universe) + &y[j].pow(2))));
        }
        sys.push(row, Provenance::CubicRow { row: i })?;
    }
    let mut minors = Vec::new();
    for size in 1..=r {
        for subset in combinations(n, size) {
            let m = a.minor(&subset, &subset);
            if !m.is_zero() {
                minors.push((subset, m));
            }
        }
    }
    for (tag, g) in pencil_generators(&minors, &z, &y, &universe)? {
        sys.push(g, tag)?;
    }
    Ok(sys)
}

/// Substitutes `z := A x` into the rows of `z + A (z^3 + z * y^2)` over a
/// universe holding `x`, `y` and `z`; used to check the transform identity.
pub fn transformed_rows(a: &ExactMatrix) -> Result<(Vec<MultiPoly>, Vec<MultiPoly>), SysError> {
    let n = require_square(a)?;
    let mut names = indexed_names("z", n);
    names.extend(indexed_names("y", n));
    names.extend(indexed_names("x", n));
    let universe = VarUniverse::new(names)?;
    let z = vars(&universe, 0..n);
    let y = vars(&universe, n..2 * n);
    let x = vars(&universe, 2 * n..3 * n);
    let rows = cubic_rows(a, &z, &y, &universe);
    let ax = apply_matrix(a, &x, &universe);
    let assignment: HashMap<usize, MultiPoly> = (0..n).zip(ax.iter().cloned()).collect();
    let substituted = rows
        .iter()
        .map(|r| r.substitute(&assignment, &universe))
        .collect::<Result<Vec<_>, _>>()?;
    let direct: Vec<MultiPoly> = x
        .iter()
        .zip(&ax)
        .zip(&y)
        .map(|((xi, u), yi)| &(xi + &u.pow(3)) + &(u * &yi.pow(2)))
        .collect();
    Ok((substituted, apply_matrix(a, &direct, &universe)))
}
