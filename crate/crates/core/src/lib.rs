//! Polynomial systems, transformations and verdict pipelines for
//! cubic-linear maps `x + (A x)^3`.

pub mod checker;
pub mod corpus;
pub mod matrixio;
pub mod oracle;
pub mod randgen;
pub mod sysbuild;
pub mod transform;
pub mod verdict;

pub use sysbuild::{PolySystem, Provenance, SysError, ZkVariant, ZkVector};
pub use verdict::{Evidence, FastPath, Status, Verdict};
