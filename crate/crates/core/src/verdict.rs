//! Outcome of a check: status, the evidence backing it and run statistics.

use std::fmt;
use std::time::Instant;

use keller_algebra::{BudgetExceeded, BudgetKind, Certificate, GaussianRational, GbStats, Membership};
use serde::{Deserialize, Serialize};

use crate::transform::Obstruction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Holds,
    Fails,
    Unknown,
}

impl Status {
    /// Process exit code: 0 holds, 1 fails, 2 unknown.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Holds => 0,
            Status::Fails => 1,
            Status::Unknown => 2,
        }
    }

    /// Combines sub-results: any failure fails, otherwise any unknown is unknown.
    pub fn combine(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fails, _) | (_, Status::Fails) => Status::Fails,
            (Status::Unknown, _) | (_, Status::Unknown) => Status::Unknown,
            _ => Status::Holds,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Holds => "HOLDS",
            Status::Fails => "FAILS",
            Status::Unknown => "UNKNOWN",
        })
    }
}

/// Structural rule that settled a verdict without a Groebner run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FastPath {
    RankAtMostOne,
    Triangular,
    AllPrincipalMinorsNonzero,
    SmallSingular,
    Prefilter,
}

impl fmt::Display for FastPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FastPath::RankAtMostOne => "rank_at_most_one",
            FastPath::Triangular => "triangular",
            FastPath::AllPrincipalMinorsNonzero => "all_principal_minors_nonzero",
            FastPath::SmallSingular => "small_singular",
            FastPath::Prefilter => "prefilter",
        })
    }
}

/// Radical-membership outcome for one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadicalCheck {
    pub variable: String,
    #[serde(flatten)]
    pub membership: Membership,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// The Keller polynomial expanded to zero.
    KellerPolynomialZero,
    /// Every random evaluation matched; failure probability at most `2^log2_failure_bound`.
    SchwartzZippel {
        trials: u32,
        seed: u64,
        bound: u64,
        degree: usize,
        log2_failure_bound: f64,
    },
    /// A point where an identity fails, with the offending value.
    WitnessPoint {
        point: Vec<GaussianRational>,
        value: GaussianRational,
    },
    /// Per-variable radical membership in the ideal of a system.
    Radical {
        system_hash: String,
        basis_size: usize,
        checks: Vec<RadicalCheck>,
    },
    /// A Groebner basis and, when tracked, its cofactor certificate.
    Basis {
        system_hash: String,
        basis_size: usize,
        is_unit: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        certificate: Option<Box<Certificate>>,
    },
    /// A necessary condition for a witness fails.
    Obstruction { obstruction: Obstruction },
    /// The computation ran out of budget.
    Budget { budget_kind: BudgetKind, partial: GbStats },
    /// Sub-verdicts of a composite check.
    Parts { parts: Vec<(String, Verdict)> },
}

impl From<BudgetExceeded> for Evidence {
    fn from(b: BudgetExceeded) -> Self {
        Evidence::Budget {
            budget_kind: b.kind,
            partial: b.stats,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerdictStats {
    pub elapsed_secs: f64,
    pub gb_runs: u32,
    pub pairs_reduced: u64,
    pub max_basis: usize,
}

impl VerdictStats {
    pub fn absorb(&mut self, gb: &GbStats) {
        self.gb_runs += 1;
        self.pairs_reduced += gb.pairs_reduced;
        self.max_basis = self.max_basis.max(gb.max_basis);
    }

    pub fn merge(&mut self, other: &VerdictStats) {
        self.gb_runs += other.gb_runs;
        self.pairs_reduced += other.pairs_reduced;
        self.max_basis = self.max_basis.max(other.max_basis);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Evidence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fast_path: Option<FastPath>,
    pub stats: VerdictStats,
}

impl Verdict {
    pub fn new(status: Status, certificate: Option<Evidence>) -> Self {
        Verdict {
            status,
            certificate,
            fast_path: None,
            stats: VerdictStats::default(),
        }
    }

    pub fn fast(status: Status, path: FastPath, certificate: Option<Evidence>) -> Self {
        Verdict {
            fast_path: Some(path),
            ..Verdict::new(status, certificate)
        }
    }

    pub fn unknown(budget: BudgetExceeded) -> Self {
        let mut v = Verdict::new(Status::Unknown, None);
        v.stats.absorb(&budget.stats);
        v.certificate = Some(budget.into());
        v
    }

    /// Records the wall-clock time since `started`.
    pub fn timed(mut self, started: Instant) -> Self {
        self.stats.elapsed_secs = started.elapsed().as_secs_f64();
        self
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }
}
