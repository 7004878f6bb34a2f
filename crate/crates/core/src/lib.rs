//! Low-rank tensor recovery toolkit.
//!
//! Implements dense tensor algebra (unfoldings, mode products, balanced
//! square reshaping), measurement operators for linear inverse problems,
//! convex-geometry sample-complexity analysis, and two recovery solvers:
//! accelerated linearized Bregman for the sum-of-nuclear-norms model and
//! inexact augmented Lagrangian nuclear-norm completion for the square-norm
//! model, together with a phase-transition experiment harness.

pub mod experiment;
pub mod geometry;
pub mod linalg;
pub mod measure;
pub mod solver;
pub mod tensor;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
