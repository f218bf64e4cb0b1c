//! Exact algebra kernel: Gaussian-rational scalars, sparse multivariate
//! polynomials, dense exact linear algebra and a Buchberger engine that can
//! certify its output.

pub mod exactla;
pub mod exactnum;
pub mod groebner;
pub mod multipoly;

pub use exactla::{ExactMatrix, PolyMatrix};
pub use exactnum::{GaussianRational, ParseScalarError};
pub use exactla::LinalgError;
pub use groebner::{
    buchberger, check_invariants, eliminate, express_one, ideal_contains_one, normal_form,
    radical_membership, radical_membership_with_basis, verify_certificate, BudgetExceeded,
    BudgetKind, Certificate, CertificateError, GbConfig, GbError, GbStats, GroebnerResult,
    Membership, MembershipMethod, OneExpression, Reducer, ResourceBudget,
};
pub use multipoly::{Monomial, MonomialOrder, MultiPoly, PolyError, VarUniverse};
