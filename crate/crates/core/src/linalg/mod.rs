//! Exact integer linear algebra: sparse matrices, Smith normal form, ranks and
//! nullspaces modulo a prime, and solution groups over `Q/Z`.

mod dense;
mod eliminate;
pub mod int;
mod modp;
mod qz;
mod smith;
mod sparse;

use thiserror::Error;

pub use dense::DenseIntMatrix;
pub use int::Int;
pub use modp::{is_prime, nullspace_mod_p, rank_mod_p, ModpEchelon};
pub use qz::{qz_solution_group, qz_torsion_generators, TorsionGenerator};
pub use smith::{smith_normal_form, smith_normal_form_with, SmithLimits, SmithResult, SmithTransforms, PREPASS_PRIME};
pub use sparse::SparseIntMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("dimension mismatch: {left:?} times {right:?}")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("M*B is not zero")]
    ProductNotZero,
    #[error("the quotient is not finite: image of B has rank {image_rank}, kernel has rank {kernel_rank}")]
    NonFiniteQuotient { image_rank: usize, kernel_rank: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("internal error: {0}")]
    Internal(String),
}
