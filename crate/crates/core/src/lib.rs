//! Sparse recovery under noise folding with multi-penalty regularization.
//!
//! The measurement model is `y = A(u† + v) + ξ`. The multi-penalty program
//!
//! ```text
//! minimize ½‖A(u + v) − y‖² + (α/q)‖u‖_q^q + (β/2)‖v‖²
//! ```
//!
//! is solved three ways: alternating minimization, thresholding on the
//! augmented single-penalty reduction, and proximal descent on the
//! infimal-convolution reduction. The crate also computes the linear
//! convergence constants for the latter two and drives the experiments
//! that compare them.

pub mod analysis;
pub mod augmented;
#[cfg(feature = "cli")]
pub mod cli;
mod error;
pub mod experiments;
pub mod linalg;
pub mod prox;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, ProblemInstance, RealVector};
