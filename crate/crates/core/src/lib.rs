//! Polyhedral approximations to cones of nonnegative homogeneous polynomials.
//!
//! The library works with the compact base of the nonnegative cone on a
//! subspace `E` of degree-`2d` forms containing `r = (x_1^2 + ... + x_n^2)^d`.
//! Evaluation functionals on the sphere are turned into vectors through a
//! reproducing kernel, and the convex body `B(E)` spanned by those vectors is
//! approximated by polytopes three ways:
//!
//! * a deterministic construction that sparsifies a near-John decomposition
//!   with the Batson–Spielman–Srivastava barrier method,
//! * a tensor-power refinement that trades more facets for a better ratio,
//! * a randomized construction sampling from a simplex/sphere mixture measure.
//!
//! Every constructed polytope can be certified a posteriori with the
//! support-function oracles in [`verifier`].
//!
//! Core numerics are generic over the scalar type through [`scalar::Real`];
//! `f64` aliases are exported at the crate root.

pub mod gaussbench;
pub mod kernel;
pub mod mc;
pub mod polyspace;
pub mod polytope;
pub mod scalar;
pub mod sparsifier;
pub mod verifier;

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("rank deficiency: {0}")]
    RankDeficient(String),
    #[error("sampling grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use kernel::{EvalVector, Subspace};
pub use polyspace::{ExponentVector, HomogeneousPolynomial, SphereMomentCache};
pub use polytope::{LoewnerTransform, PolytopeH, PolytopeV};
pub use scalar::Real;
pub use sparsifier::{VectorSystem, WeightedDecomposition};
pub use verifier::{ContainmentReport, SupportOracle};

/// `f64` concrete aliases for the generic core types.
pub type Poly64 = HomogeneousPolynomial<f64>;
pub type Subspace64 = Subspace<f64>;
pub type EvalVector64 = EvalVector<f64>;
pub type PolytopeV64 = PolytopeV<f64>;
pub type PolytopeH64 = PolytopeH<f64>;
pub type VectorSystem64 = VectorSystem<f64>;

/// `f32` aliases; mostly useful for memory-bound experiments.
pub type Poly32 = HomogeneousPolynomial<f32>;
pub type Subspace32 = Subspace<f32>;
