//! Independent invertibility test for small cubic-linear maps.
//!
//! For `F(x) = x + (A x)^3` with `det JF = 1` the inverse Jacobian is the
//! adjugate, so `D = sum_i y_i d/dF_i = sum_j c_j d/dx_j` with
//! `c_j = sum_i y_i adj(JF)_{j,i}` is a polynomial derivation. `F` is
//! invertible iff `D^N x_i = 0` for every `i`, with `N = 3^(n-1) + 1`.

use std::sync::Arc;
use std::time::{Duration, Instant};

use keller_algebra::{ExactMatrix, MultiPoly, PolyMatrix, VarUniverse};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sysbuild::{apply_matrix, indexed_names};

/// Largest dimension accepted by default.
pub const DEFAULT_ORACLE_LIMIT: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub limit: usize,
    pub max_terms: Option<usize>,
    pub wall_clock: Option<Duration>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            limit: DEFAULT_ORACLE_LIMIT,
            max_terms: Some(2_000_000),
            wall_clock: Some(Duration::from_secs(300)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {n} exceeds the oracle limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("not a Keller map: det JF = {det}")]
    NotKeller { det: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OracleOutcome {
    Invertible,
    NotInvertible,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub outcome: OracleOutcome,
    pub iterations: u32,
    pub max_terms: usize,
    pub elapsed_secs: f64,
}

/// The map, its Jacobian adjugate and the derivation coefficients over
/// `x1..xn, y1..yn`.
#[derive(Debug, Clone)]
pub struct DerivationState {
    universe: Arc<VarUniverse>,
    n: usize,
    map: Vec<MultiPoly>,
    adjugate: PolyMatrix,
    coefficients: Vec<MultiPoly>,
    iterations: u32,
}

impl DerivationState {
    /// Builds the state; fails unless `det JF = 1` exactly.
    pub fn new(a: &ExactMatrix) -> Result<Self, OracleError> {
        if !a.is_square() {
            return Err(OracleError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let mut names = indexed_names("x", n);
        names.extend(indexed_names("y", n));
        let universe = VarUniverse::new(names).expect("distinct names");
        let x: Vec<MultiPoly> = (0..n).map(|i| MultiPoly::var_index(&universe, i)).collect();
        let map: Vec<MultiPoly> = x
            .iter()
            .zip(apply_matrix(a, &x, &universe))
            .map(|(xi, u)| xi + &u.pow(3))
            .collect();
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| map[i].derivative(j))
            .collect();
        let jacobian = PolyMatrix::new(n, &universe, entries).expect("n x n entries");
        let det = jacobian.det();
        if det != MultiPoly::one(&universe) {
            return Err(OracleError::NotKeller { det: det.to_string() });
        }
        let adjugate = jacobian.adjugate();
        debug_assert!((&jacobian * &adjugate).is_identity());
        let coefficients = (0..n)
            .map(|j| {
                let mut c = MultiPoly::zero(&universe);
                for i in 0..n {
                    c = &c + &(&MultiPoly::var_index(&universe, n + i) * adjugate.get(j, i));
                }
                c
            })
            .collect();
        let iterations = 3u32.pow(n.saturating_sub(1) as u32) + 1;
        Ok(DerivationState {
            universe,
            n,
            map,
            adjugate,
            coefficients,
            iterations,
        })
    }

    pub fn universe(&self) -> &Arc<VarUniverse> {
        &self.universe
    }

    pub fn map(&self) -> &[MultiPoly] {
        &self.map
    }

    pub fn adjugate(&self) -> &PolyMatrix {
        &self.adjugate
    }

    /// `N = 3^(n-1) + 1`.
    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    /// `D p = sum_j c_j dp/dx_j`.
    pub fn apply(&self, p: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.universe);
        for (j, c) in self.coefficients.iter().enumerate().take(self.n) {
            let d = p.derivative(j);
            if !d.is_zero() {
                out = &out + &(c * &d);
            }
        }
        out
    }
}

/// Decides invertibility by iterating the derivation on each coordinate.
pub fn derivation_check(a: &ExactMatrix, cfg: &OracleConfig) -> Result<OracleReport, OracleError> {
    let started = Instant::now();
    if a.is_square() && a.rows() > cfg.limit {
        return Err(OracleError::TooLarge {
            n: a.rows(),
            limit: cfg.limit,
        });
    }
    let state = DerivationState::new(a)?;
    let mut max_terms = 0;
    let mut outcome = OracleOutcome::Invertible;
    'coords: for i in 0..state.n {
        let mut p = MultiPoly::var_index(&state.universe, i);
        for _ in 0..state.iterations {
            p = state.apply(&p);
            max_terms = max_terms.max(p.num_terms());
            if p.is_zero() {
                continue 'coords;
            }
            let over_terms = cfg.max_terms.is_some_and(|m| p.num_terms() > m);
            let over_time = cfg.wall_clock.is_some_and(|w| started.elapsed() > w);
            if over_terms || over_time {
                outcome = OracleOutcome::Unknown;
                break 'coords;
            }
        }
        outcome = OracleOutcome::NotInvertible;
        break;
    }
    Ok(OracleReport {
        outcome,
        iterations: state.iterations,
        max_terms,
        elapsed_secs: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randgen::random_rank_one_druzkowski;

    #[test]
    fn one_dimensional_zero() {
        let report = derivation_check(&ExactMatrix::zeros(1, 1), &OracleConfig::default()).unwrap();
        assert_eq!(report.outcome, OracleOutcome::Invertible);
        assert_eq!(report.iterations, 2);
    }

    #[test]
    fn a0_is_invertible() {
        let a0 = ExactMatrix::from_int_rows(&[&[1, -1], &[1, -1]]);
        let state = DerivationState::new(&a0).unwrap();
        assert_eq!(state.iterations(), 4);
        let u = state.universe().clone();
        let expected = MultiPoly::parse("x1 + (x1 - x2)^3", &u).unwrap();
        assert_eq!(state.map()[0], expected);
        let report = derivation_check(&a0, &OracleConfig::default()).unwrap();
        assert_eq!(report.outcome, OracleOutcome::Invertible);
    }

    #[test]
    fn rank_one_instances_are_invertible() {
        for seed in 0..5 {
            let a = random_rank_one_druzkowski(2, 5, seed);
            let report = derivation_check(&a, &OracleConfig::default()).unwrap();
            assert_eq!(report.outcome, OracleOutcome::Invertible, "seed {seed}");
        }
    }

    #[test]
    fn rejects_non_keller_and_large_inputs() {
        let id = ExactMatrix::identity(2);
        assert!(matches!(derivation_check(&id, &OracleConfig::default()), Err(OracleError::NotKeller { .. })));
        let big = ExactMatrix::zeros(4, 4);
        assert!(matches!(derivation_check(&big, &OracleConfig::default()), Err(OracleError::TooLarge { .. })));
    }

    #[test]
    fn derivation_laws() {
        let a0 = ExactMatrix::from_int_rows(&[&[1, -1], &[1, -1]]);
        let state = DerivationState::new(&a0).unwrap();
        let u = state.universe().clone();
        assert!(state.apply(&MultiPoly::parse("7/3", &u).unwrap()).is_zero());
        let p = MultiPoly::parse("x1^2*y2 - 3*x2", &u).unwrap();
        let q = MultiPoly::parse("x1*x2 + y1", &u).unwrap();
        let lhs = state.apply(&(&p * &q));
        let rhs = &(&p * &state.apply(&q)) + &(&q * &state.apply(&p));
        assert_eq!(lhs, rhs);
        // D F_i = y_i.
        for i in 0..2 {
            assert_eq!(state.apply(&state.map()[i]), MultiPoly::var_index(&u, 2 + i));
        }
    }
}
