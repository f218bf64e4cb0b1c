//! Seeded generators for the matrix families used in experiments.
//!
//! The source is ChaCha8 seeded with `seed_from_u64(seed)`; integers are
//! drawn uniformly with `gen_range`. Identical specs give identical output.

use keller_algebra::{ExactMatrix, GaussianRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transform::DiagonalAction;

/// Default entry bound.
pub const DEFAULT_BOUND: u64 = 25;
const MAX_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// First `rank` rows free, the rest integer combinations of them.
    RankR,
    /// Upper triangular.
    Triangular,
    /// Diagonal with nonzero entries.
    DiagonalInvertible,
    /// `[[A11, A12], [0, 0]]` with `A11` of size `rank`.
    BlockZeroBottom,
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rank_r" => Ok(Family::RankR),
            "triangular" => Ok(Family::Triangular),
            "diagonal_invertible" => Ok(Family::DiagonalInvertible),
            "block_zero_bottom" => Ok(Family::BlockZeroBottom),
            other => Err(format!(
                "unknown family {other:?} (rank_r, triangular, diagonal_invertible, block_zero_bottom)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    pub rank: usize,
    /// Entries lie in `[-bound, bound]`, or `[0, bound]` when `nonnegative`.
    pub bound: u64,
    pub nonnegative: bool,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(family: Family, n: usize, rank: usize, seed: u64) -> Self {
        GenSpec {
            family,
            n,
            rank,
            bound: DEFAULT_BOUND,
            nonnegative: false,
            seed,
        }
    }

    pub fn with_bound(mut self, bound: u64) -> Self {
        self.bound = bound;
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n == 0 || self.rank == 0 || self.rank > self.n {
            return Err(GenError::Invalid(format!("need 1 <= rank <= n, got n = {}, rank = {}", self.n, self.rank)));
        }
        if self.bound == 0 || self.bound > i64::MAX as u64 {
            return Err(GenError::Invalid(format!("bound {} out of range", self.bound)));
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> GaussianRational {
        let b = self.bound as i64;
        let lo = if self.nonnegative { 0 } else { -b };
        GaussianRational::from_int(rng.gen_range(lo..=b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid spec: {0}")]
    Invalid(String),
    #[error("no matrix of the requested rank after {0} attempts")]
    Exhausted(usize),
}

/// Random matrix of exact rank `spec.rank`.
pub fn random_rank_r(spec: &GenSpec) -> Result<ExactMatrix, GenError> {
    spec.validate()?;
    if spec.family != Family::RankR {
        return Err(GenError::Invalid("family must be rank_r".into()));
    }
    let (n, r) = (spec.n, spec.rank);
    let mut rng = spec.rng();
    for _ in 0..MAX_ATTEMPTS {
        let mut a = ExactMatrix::zeros(n, n);
        for i in 0..r {
            for j in 0..n {
                a.set(i, j, spec.draw(&mut rng));
            }
        }
        for i in r..n {
            let weights: Vec<GaussianRational> = (0..r).map(|_| spec.draw(&mut rng)).collect();
            for j in 0..n {
                let mut acc = GaussianRational::from_int(0);
                for (l, w) in weights.iter().enumerate() {
                    acc += &(w * a.get(l, j));
                }
                a.set(i, j, acc);
            }
        }
        if a.rank() == r {
            return Ok(a);
        }
    }
    Err(GenError::Exhausted(MAX_ATTEMPTS))
}

/// Diagonal action with nonzero entries in `[-bound, bound]`.
pub fn random_diagonal(n: usize, bound: u64, seed: u64) -> DiagonalAction {
    assert!(bound >= 1, "bound must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = bound.min(i64::MAX as u64) as i64;
    let diag = (0..n)
        .map(|_| loop {
            let v = rng.gen_range(-b..=b);
            if v != 0 {
                return GaussianRational::from_int(v);
            }
        })
        .collect();
    DiagonalAction::new(diag).expect("entries are nonzero")
}

/// Triangular, diagonal-invertible and block-zero-bottom families.
pub fn random_structured(spec: &GenSpec) -> Result<ExactMatrix, GenError> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = spec.rng();
    let mut a = ExactMatrix::zeros(n, n);
    match spec.family {
        Family::Triangular => {
            for i in 0..n {
                for j in i..n {
                    a.set(i, j, spec.draw(&mut rng));
                }
            }
        }
        Family::DiagonalInvertible => {
            let d = random_diagonal(n, spec.bound, spec.seed);
            return Ok(d.matrix());
        }
        Family::BlockZeroBottom => {
            for i in 0..spec.rank {
                for j in 0..n {
                    a.set(i, j, spec.draw(&mut rng));
                }
            }
        }
        Family::RankR => return random_rank_r(spec),
    }
    Ok(a)
}

/// Dispatches on the family.
pub fn generate(spec: &GenSpec) -> Result<ExactMatrix, GenError> {
    match spec.family {
        Family::RankR => random_rank_r(spec),
        _ => random_structured(spec),
    }
}

/// Dense matrix with entries in `[-bound, bound]`.
pub fn random_dense(n: usize, bound: u64, seed: u64) -> ExactMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = bound.min(i64::MAX as u64) as i64;
    let mut a = ExactMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a.set(i, j, GaussianRational::from_int(rng.gen_range(-b..=b)));
        }
    }
    a
}

/// Rank-one Druzkowski matrix `u v^t` with `sum_i u_i^3 v_i = 0`, which is
/// exactly the Keller condition for rank one. `n` must be at least 2.
pub fn random_rank_one_druzkowski(n: usize, bound: u64, seed: u64) -> ExactMatrix {
    assert!(n >= 2, "rank-one Druzkowski matrices need n >= 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = bound.max(1) as i64;
    let mut nonzero = || loop {
        let v = rng.gen_range(-b..=b);
        if v != 0 {
            return GaussianRational::from_int(v);
        }
    };
    let u: Vec<GaussianRational> = (0..n).map(|_| nonzero()).collect();
    let mut v: Vec<GaussianRational> = (0..n).map(|_| nonzero()).collect();
    let mut rest = GaussianRational::from_int(0);
    for i in 1..n {
        rest += &(&u[i].pow(3) * &v[i]);
    }
    v[0] = -&(&rest / &u[0].pow(3));
    let mut a = ExactMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a.set(i, j, &u[i] * &v[j]);
        }
    }
    a
}
