//! Replayable certificate files.
//!
//! A certificate stores the generators, a basis and the cofactor matrix as
//! canonical polynomial strings. Verification re-parses everything and checks
//! each cofactor identity with plain ring arithmetic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{combination_equals, GbStats, GroebnerResult};
use crate::multipoly::{MonomialOrder, MultiPoly, PolyError, VarUniverse};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub variables: Vec<String>,
    pub order: MonomialOrder,
    pub generators: Vec<String>,
    pub basis: Vec<String>,
    pub cofactors: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<GbStats>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertificateError {
    #[error("malformed polynomial: {0}")]
    Parse(#[from] PolyError),
    #[error("certificate carries no cofactors")]
    MissingCofactors,
    #[error("cofactor matrix shape does not match generators and basis")]
    Shape,
    #[error("cofactor identity fails for basis element {0}")]
    Identity(usize),
}

fn strings(polys: &[MultiPoly]) -> Vec<String> {
    polys.iter().map(ToString::to_string).collect()
}

impl Certificate {
    pub fn from_result(result: &GroebnerResult, generators: &[MultiPoly]) -> Self {
        Certificate {
            variables: result.universe().names().to_vec(),
            order: result.order().clone(),
            generators: strings(generators),
            basis: strings(result.basis()),
            cofactors: result.cofactors().map(|rows| rows.iter().map(|r| strings(r)).collect()),
            stats: Some(result.stats().clone()),
        }
    }

    /// Certificate for `sum_j cofactors[j] * generators[j] = 1`.
    pub fn for_one(generators: &[MultiPoly], cofactors: &[MultiPoly], order: &MonomialOrder) -> Self {
        let universe = generators
            .first()
            .map(|g| g.universe().names().to_vec())
            .unwrap_or_default();
        Certificate {
            variables: universe,
            order: order.clone(),
            generators: strings(generators),
            basis: vec!["1".to_string()],
            cofactors: Some(vec![strings(cofactors)]),
            stats: None,
        }
    }

    /// True when the certified basis is `{1}`.
    pub fn claims_unit(&self) -> bool {
        self.basis.len() == 1 && self.basis[0].trim() == "1"
    }
}

/// Re-derives every basis element from the generators via the cofactors.
pub fn verify_certificate(cert: &Certificate) -> Result<(), CertificateError> {
    let universe = VarUniverse::new(&cert.variables)?;
    let parse = |s: &String| MultiPoly::parse(s, &universe);
    let generators = cert.generators.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
    let basis = cert.basis.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
    let rows = cert.cofactors.as_ref().ok_or(CertificateError::MissingCofactors)?;
    if rows.len() != basis.len() || rows.iter().any(|r| r.len() != generators.len()) {
        return Err(CertificateError::Shape);
    }
    for (i, (row, target)) in rows.iter().zip(&basis).enumerate() {
        let cofs = row.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
        if !combination_equals(&universe, &cofs, &generators, target) {
            return Err(CertificateError::Identity(i));
        }
    }
    Ok(())
}
