//! Verdict pipelines: structural fast paths, prefilters, system builders and
//! the Groebner engine combined into the C1, C2, JC and `Z_k` checks.
//!
//! Budgets apply per Groebner call. A pipeline with any unknown sub-result
//! and no failing one reports UNKNOWN.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use keller_algebra::{
    buchberger, express_one, ideal_contains_one, radical_membership_with_basis, Certificate, ExactMatrix,
    GbConfig, GbError, MultiPoly, OneExpression,
};
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sysbuild::{
    c1_system, c2_system, injective_direct_system, is_druzkowski, vn_slice_system, zk_system, DruzkowskiMode,
    PolySystem, SysError, ZkVariant, DEFAULT_SYMBOLIC_LIMIT,
};
use crate::transform::{zk_image_prefilter, Obstruction};
use crate::verdict::{Evidence, FastPath, RadicalCheck, Status, Verdict, VerdictStats};

/// Largest dimension accepted by [`explore_slice`] by default.
pub const DEFAULT_SLICE_LIMIT: usize = 4;

/// How the Keller property is decided inside the pipelines: exactly up to
/// `symbolic_limit`, by random evaluation above it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DruzkowskiPolicy {
    pub symbolic_limit: usize,
    pub trials: u32,
    pub seed: u64,
    pub bound: u64,
}

impl Default for DruzkowskiPolicy {
    fn default() -> Self {
        DruzkowskiPolicy {
            symbolic_limit: DEFAULT_SYMBOLIC_LIMIT,
            trials: 64,
            seed: 0,
            bound: 1_000_000,
        }
    }
}

impl DruzkowskiPolicy {
    pub fn mode_for(&self, n: usize) -> DruzkowskiMode {
        if n <= self.symbolic_limit {
            DruzkowskiMode::Exact {
                symbolic_limit: self.symbolic_limit,
            }
        } else {
            DruzkowskiMode::Randomized {
                trials: self.trials,
                seed: self.seed,
                bound: self.bound,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub gb: GbConfig,
    /// Try structural rules and prefilters before any Groebner run.
    pub fast_paths: bool,
    pub druzkowski: DruzkowskiPolicy,
    pub slice_limit: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            gb: GbConfig::default(),
            fast_paths: true,
            druzkowski: DruzkowskiPolicy::default(),
            slice_limit: DEFAULT_SLICE_LIMIT,
        }
    }
}

impl CheckConfig {
    pub fn without_fast_paths(mut self) -> Self {
        self.fast_paths = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error(transparent)]
    System(#[from] SysError),
    #[error("the matrix is not Druzkowski (is_druzkowski: {})", .0.status)]
    NotDruzkowski(Box<Verdict>),
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Engine(GbError),
}

fn require_square(a: &ExactMatrix) -> Result<usize, CheckError> {
    if a.is_square() {
        Ok(a.rows())
    } else {
        Err(CheckError::Argument(format!("matrix must be square, got {}x{}", a.rows(), a.cols())))
    }
}

/// Structural rule guaranteeing C1, if one applies.
pub fn c1_fast_path(a: &ExactMatrix) -> Option<FastPath> {
    let n = a.rows();
    if a.rank() <= 1 {
        return Some(FastPath::RankAtMostOne);
    }
    if a.is_upper_triangular() || a.is_lower_triangular() {
        return Some(FastPath::Triangular);
    }
    if n <= 3 && a.det().is_zero() {
        return Some(FastPath::SmallSingular);
    }
    if a.first_vanishing_principal_minor().is_none() {
        return Some(FastPath::AllPrincipalMinorsNonzero);
    }
    None
}

/// Checks that each `z` variable of `sys` lies in the radical of its ideal.
fn radical_verdict(sys: &PolySystem, z_vars: &[usize], cfg: &CheckConfig) -> Result<Verdict, CheckError> {
    let universe = sys.universe();
    let gb_cfg = GbConfig {
        track_cofactors: false,
        ..cfg.gb.clone()
    };
    let basis = match buchberger(universe, sys.generators(), &gb_cfg) {
        Ok(b) => b,
        Err(GbError::Budget(b)) => return Ok(Verdict::unknown(b)),
        Err(e) => return Err(CheckError::Engine(e)),
    };
    let mut stats = VerdictStats::default();
    stats.absorb(basis.stats());
    let mut checks = Vec::with_capacity(z_vars.len());
    let mut status = Status::Holds;
    for &v in z_vars {
        let p = MultiPoly::var_index(universe, v);
        match radical_membership_with_basis(&p, universe, sys.generators(), &basis, &gb_cfg) {
            Ok(m) => {
                let member = m.member;
                checks.push(RadicalCheck {
                    variable: universe.name(v).to_string(),
                    membership: m,
                });
                if !member {
                    status = Status::Fails;
                    break;
                }
            }
            Err(GbError::Budget(b)) => {
                let mut v = Verdict::unknown(b);
                v.stats.merge(&stats);
                return Ok(v);
            }
            Err(e) => return Err(CheckError::Engine(e)),
        }
    }
    let mut verdict = Verdict::new(
        status,
        Some(Evidence::Radical {
            system_hash: sys.hash(),
            basis_size: basis.basis().len(),
            checks,
        }),
    );
    verdict.stats = stats;
    Ok(verdict)
}

/// C1: every solution of the `y^2` witness system has `z = 0`.
pub fn check_c1(a: &ExactMatrix, cfg: &CheckConfig) -> Result<Verdict, CheckError> {
    let started = Instant::now();
    let n = require_square(a)?;
    if cfg.fast_paths {
        if let Some(path) = c1_fast_path(a) {
            return Ok(Verdict::fast(Status::Holds, path, None).timed(started));
        }
    }
    let sys = c1_system(a)?;
    Ok(radical_verdict(&sys, &(0..n).collect::<Vec<_>>(), cfg)?.timed(started))
}

fn c2_pipeline(a: &ExactMatrix, cfg: &CheckConfig, require_druzkowski: bool) -> Result<Verdict, CheckError> {
    let started = Instant::now();
    let n = require_square(a)?;
    let druz = is_druzkowski(a, &cfg.druzkowski.mode_for(n))?;
    if require_druzkowski && !druz.holds() {
        return Err(CheckError::NotDruzkowski(Box::new(druz)));
    }
    let main = match cfg.fast_paths.then(|| c1_fast_path(a)).flatten() {
        Some(path) => Verdict::fast(Status::Holds, path, None),
        None => radical_verdict(&c2_system(a, druz.holds())?, &(0..n).collect::<Vec<_>>(), cfg)?,
    };
    let mut out = Verdict {
        status: main.status,
        certificate: None,
        fast_path: main.fast_path,
        stats: main.stats.clone(),
    };
    out.certificate = Some(Evidence::Parts {
        parts: vec![("druzkowski".into(), druz), ("radical".into(), main)],
    });
    Ok(out.timed(started))
}

/// C2: every solution of the `(A y)^2` witness system has `z = 0`. The
/// pencil part is included unless `A` passes the Druzkowski test.
pub fn check_c2(a: &ExactMatrix, cfg: &CheckConfig) -> Result<Verdict, CheckError> {
    c2_pipeline(a, cfg, false)
}

/// Injectivity of `x + (A x)^3` for Druzkowski `A`, via the transformed system.
pub fn check_jc(a: &ExactMatrix, cfg: &CheckConfig) -> Result<Verdict, CheckError> {
    c2_pipeline(a, cfg, true)
}

/// Wall-clock time and outcome of one Groebner run on a system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimedRun {
    pub elapsed_secs: f64,
    pub completed: bool,
    pub basis_size: Option<usize>,
    pub generators: usize,
}

pub fn timed_groebner(sys: &PolySystem, gb: &GbConfig) -> Result<TimedRun, CheckError> {
    let started = Instant::now();
    let result = buchberger(sys.universe(), sys.generators(), gb);
    // Engine time only; excludes any post-run verification.
    let elapsed = started.elapsed();
    match result {
        Ok(r) => Ok(TimedRun {
            elapsed_secs: r.stats().elapsed.as_secs_f64(),
            completed: true,
            basis_size: Some(r.basis().len()),
            generators: sys.len(),
        }),
        Err(GbError::Budget(b)) => Ok(TimedRun {
            elapsed_secs: b.stats.elapsed.max(elapsed).as_secs_f64(),
            completed: false,
            basis_size: None,
            generators: sys.len(),
        }),
        Err(e) => Err(CheckError::Engine(e)),
    }
}

/// Runs the transformed (`z = A x`) and the direct injectivity systems of
/// `A` under the same configuration.
pub fn transform_benchmark(a: &ExactMatrix, gb: &GbConfig) -> Result<(TimedRun, TimedRun), CheckError> {
    let transformed = timed_groebner(&c2_system(a, true)?, gb)?;
    let direct = timed_groebner(&injective_direct_system(a)?, gb)?;
    Ok((transformed, direct))
}

/// Per-`k` fixed-witness criterion: HOLDS when no witness `(y, Z_k, A)`
/// exists, shown by a prefilter obstruction or by `1` in the ideal.
pub fn check_zk(
    a: &ExactMatrix,
    ks: &[usize],
    variant: ZkVariant,
    cfg: &CheckConfig,
) -> Result<BTreeMap<usize, Verdict>, CheckError> {
    let n = require_square(a)?;
    if let Some(&k) = ks.iter().find(|&&k| k < 3 || k > n) {
        return Err(CheckError::Argument(format!("k = {k} outside 3..={n}")));
    }
    // Without the pencil equations nilpotency of the leading block is only
    // necessary for Druzkowski matrices.
    let nilpotency_sound = match variant {
        ZkVariant::Thm19 => true,
        ZkVariant::Thm18 => cfg.fast_paths && is_druzkowski(a, &cfg.druzkowski.mode_for(n))?.holds(),
    };
    ks.par_iter()
        .map(|&k| Ok((k, zk_single(a, k, variant, nilpotency_sound, cfg)?)))
        .collect()
}

fn zk_single(
    a: &ExactMatrix,
    k: usize,
    variant: ZkVariant,
    nilpotency_sound: bool,
    cfg: &CheckConfig,
) -> Result<Verdict, CheckError> {
    let started = Instant::now();
    if cfg.fast_paths && !cfg.gb.track_cofactors {
        let obstruction = zk_image_prefilter(a, k);
        let usable = match obstruction {
            Obstruction::ObstructionImage => true,
            Obstruction::ObstructionNilpotency => nilpotency_sound,
            Obstruction::NoObstruction => false,
        };
        if usable {
            return Ok(
                Verdict::fast(Status::Holds, FastPath::Prefilter, Some(Evidence::Obstruction { obstruction }))
                    .timed(started),
            );
        }
    }
    let sys = zk_system(a, k, variant)?;
    let order = cfg.gb.order.clone();
    let verdict = if cfg.gb.track_cofactors {
        match express_one(sys.universe(), sys.generators(), &cfg.gb) {
            Ok(OneExpression::Certificate(cofactors)) => Verdict::new(
                Status::Holds,
                Some(Evidence::Basis {
                    system_hash: sys.hash(),
                    basis_size: 1,
                    is_unit: true,
                    certificate: Some(Box::new(Certificate::for_one(sys.generators(), &cofactors, &order))),
                }),
            ),
            Ok(OneExpression::NotTrivial { basis_size }) => Verdict::new(
                Status::Fails,
                Some(Evidence::Basis {
                    system_hash: sys.hash(),
                    basis_size,
                    is_unit: false,
                    certificate: None,
                }),
            ),
            Err(GbError::Budget(b)) => Verdict::unknown(b),
            Err(e) => return Err(CheckError::Engine(e)),
        }
    } else {
        match buchberger(sys.universe(), sys.generators(), &cfg.gb) {
            Ok(r) => {
                let unit = ideal_contains_one(&r);
                let mut v = Verdict::new(
                    if unit { Status::Holds } else { Status::Fails },
                    Some(Evidence::Basis {
                        system_hash: sys.hash(),
                        basis_size: r.basis().len(),
                        is_unit: unit,
                        certificate: None,
                    }),
                );
                v.stats.absorb(r.stats());
                v
            }
            Err(GbError::Budget(b)) => Verdict::unknown(b),
            Err(e) => return Err(CheckError::Engine(e)),
        }
    };
    Ok(verdict.timed(started))
}

/// Combined status of a per-`k` map.
pub fn overall_status(verdicts: &BTreeMap<usize, Verdict>) -> Status {
    verdicts.values().fold(Status::Holds, |acc, v| acc.combine(v.status))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Feasibility {
    /// The ideal is the unit ideal: no witness exists.
    Infeasible,
    Feasible,
    Unknown,
}

impl Feasibility {
    /// 0 infeasible, 1 feasible, 2 unknown.
    pub fn exit_code(self) -> i32 {
        match self {
            Feasibility::Infeasible => 0,
            Feasibility::Feasible => 1,
            Feasibility::Unknown => 2,
        }
    }
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Feasibility::Infeasible => "INFEASIBLE",
            Feasibility::Feasible => "FEASIBLE",
            Feasibility::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceReport {
    pub n: usize,
    pub k: usize,
    pub rank: usize,
    pub outcome: Feasibility,
    pub generators: usize,
    pub variables: usize,
    pub system_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<Evidence>,
    pub elapsed_secs: f64,
}

/// Searches the rank-`r` slice of the witness variety at `z = Z_k`.
pub fn explore_slice(n: usize, k: usize, r: usize, cfg: &CheckConfig) -> Result<SliceReport, CheckError> {
    if n > cfg.slice_limit {
        return Err(CheckError::Argument(format!(
            "n = {n} exceeds the slice limit {}",
            cfg.slice_limit
        )));
    }
    let started = Instant::now();
    let sys = vn_slice_system(n, k, r)?;
    let gb = GbConfig {
        track_cofactors: false,
        ..cfg.gb.clone()
    };
    let (outcome, basis_size, budget) = match buchberger(sys.universe(), sys.generators(), &gb) {
        Ok(res) if ideal_contains_one(&res) => (Feasibility::Infeasible, Some(1), None),
        Ok(res) => (Feasibility::Feasible, Some(res.basis().len()), None),
        Err(GbError::Budget(b)) => (Feasibility::Unknown, None, Some(Evidence::from(b))),
        Err(e) => return Err(CheckError::Engine(e)),
    };
    Ok(SliceReport {
        n,
        k,
        rank: r,
        outcome,
        generators: sys.len(),
        variables: sys.universe().len(),
        system_hash: sys.hash(),
        basis_size,
        budget,
        elapsed_secs: started.elapsed().as_secs_f64(),
    })
}

/// Converts a duration budget into a configuration.
pub fn with_timeout(mut cfg: CheckConfig, timeout: Option<Duration>) -> CheckConfig {
    cfg.gb.budget.wall_clock = timeout;
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::load_example;
    use keller_algebra::{verify_certificate, ResourceBudget};

    fn a0() -> ExactMatrix {
        ExactMatrix::from_int_rows(&[&[1, -1], &[1, -1]])
    }

    #[test]
    fn fast_path_rules() {
        assert_eq!(c1_fast_path(&ExactMatrix::zeros(3, 3)), Some(FastPath::RankAtMostOne));
        assert_eq!(c1_fast_path(&a0()), Some(FastPath::RankAtMostOne));
        let tri = ExactMatrix::from_int_rows(&[&[1, 2, 3], &[0, 4, 5], &[0, 0, 6]]);
        assert_eq!(c1_fast_path(&tri), Some(FastPath::Triangular));
        let small = ExactMatrix::from_int_rows(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        assert_eq!(c1_fast_path(&small), Some(FastPath::SmallSingular));
        let minors = ExactMatrix::from_int_rows(&[&[2, 1, 0, 1], &[1, 2, 1, 0], &[0, 1, 2, 1], &[1, 0, 1, 3]]);
        assert_eq!(c1_fast_path(&minors), Some(FastPath::AllPrincipalMinorsNonzero));
        let e3 = load_example("example3").unwrap().matrix;
        assert_eq!(c1_fast_path(&e3), None);
    }

    #[test]
    fn zero_matrix_verdicts() {
        let zero = ExactMatrix::zeros(4, 4);
        let cfg = CheckConfig::default();
        for v in [check_c1(&zero, &cfg), check_c2(&zero, &cfg), check_jc(&zero, &cfg)] {
            let v = v.unwrap();
            assert_eq!(v.status, Status::Holds);
            assert_eq!(v.fast_path, Some(FastPath::RankAtMostOne));
        }
        let slow = cfg.without_fast_paths();
        let v = check_c1(&zero, &slow).unwrap();
        assert_eq!(v.status, Status::Holds);
        assert!(matches!(v.certificate, Some(Evidence::Radical { .. })));
    }

    #[test]
    fn a0_through_the_engine() {
        let cfg = CheckConfig::default().without_fast_paths();
        assert_eq!(check_c1(&a0(), &cfg).unwrap().status, Status::Holds);
        assert_eq!(check_c2(&a0(), &cfg).unwrap().status, Status::Holds);
        assert_eq!(check_jc(&a0(), &cfg).unwrap().status, Status::Holds);
    }

    #[test]
    fn corpus_c1_small_examples() {
        let cfg = CheckConfig::default();
        for id in ["example3", "example5"] {
            let a = load_example(id).unwrap().matrix;
            let v = check_c1(&a, &cfg).unwrap();
            assert_eq!(v.status, Status::Holds, "{id}");
        }
    }

    #[test]
    fn jc_requires_druzkowski() {
        let err = check_jc(&ExactMatrix::identity(2), &CheckConfig::default()).unwrap_err();
        match err {
            CheckError::NotDruzkowski(v) => assert_eq!(v.status, Status::Fails),
            other => panic!("unexpected {other:?}"),
        }
        // C2 itself is defined for any matrix.
        let v = check_c2(&ExactMatrix::identity(2), &CheckConfig::default()).unwrap();
        assert_ne!(v.status, Status::Unknown);
        assert!(check_c1(&ExactMatrix::zeros(2, 3), &CheckConfig::default()).is_err());
    }

    #[test]
    fn budget_gives_unknown() {
        let e1 = load_example("example1").unwrap().matrix;
        let mut cfg = CheckConfig::default();
        cfg.gb.budget = ResourceBudget {
            max_pairs: Some(1),
            ..ResourceBudget::unlimited()
        };
        let v = check_c1(&e1, &cfg).unwrap();
        assert_eq!(v.status, Status::Unknown);
        assert!(matches!(v.certificate, Some(Evidence::Budget { .. })));
    }

    #[test]
    fn zk_prefilter_and_engine() {
        let minors = ExactMatrix::from_int_rows(&[&[2, 1, 0, 1], &[1, 2, 1, 0], &[0, 1, 2, 1], &[1, 0, 1, 3]]);
        let out = check_zk(&minors, &[3, 4], ZkVariant::Thm19, &CheckConfig::default()).unwrap();
        for v in out.values() {
            assert_eq!(v.status, Status::Holds);
            assert_eq!(v.fast_path, Some(FastPath::Prefilter));
        }
        let zero = ExactMatrix::zeros(3, 3);
        let cfg = CheckConfig::default().without_fast_paths();
        let out = check_zk(&zero, &[3], ZkVariant::Thm18, &cfg).unwrap();
        assert_eq!(overall_status(&out), Status::Holds);
        assert!(check_zk(&zero, &[2], ZkVariant::Thm18, &cfg).is_err());
    }

    #[test]
    fn zk_certificate_example2() {
        let e2 = load_example("example2").unwrap().matrix;
        let mut cfg = CheckConfig::default();
        cfg.gb.track_cofactors = true;
        let out = check_zk(&e2, &[17], ZkVariant::Thm19, &cfg).unwrap();
        match &out[&17].certificate {
            Some(Evidence::Basis { is_unit: true, certificate: Some(cert), .. }) => {
                verify_certificate(cert).unwrap();
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn small_slices_are_infeasible() {
        let cfg = CheckConfig::default();
        for (n, k, r) in [(2, 2, 1), (3, 3, 1)] {
            let report = explore_slice(n, k, r, &cfg).unwrap();
            assert_eq!(report.outcome, Feasibility::Infeasible, "({n},{k},{r})");
        }
        assert!(explore_slice(5, 3, 2, &cfg).is_err());
    }

    #[test]
    fn status_rules() {
        use Status::*;
        assert_eq!(Holds.combine(Unknown), Unknown);
        assert_eq!(Unknown.combine(Fails), Fails);
        assert_eq!(Feasibility::Unknown.exit_code(), 2);
        let cfg = with_timeout(CheckConfig::default(), Some(Duration::from_secs(3)));
        assert_eq!(cfg.gb.budget.wall_clock, Some(Duration::from_secs(3)));
    }

    #[test]
    fn transformed_system_is_faster_on_example1() {
        let e1 = load_example("example1").unwrap().matrix;
        let (transformed, direct) = transform_benchmark(&e1, &GbConfig::default()).unwrap();
        assert!(transformed.completed && direct.completed);
        assert!(transformed.elapsed_secs < direct.elapsed_secs);
    }
}
