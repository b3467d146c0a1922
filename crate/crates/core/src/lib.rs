//! Logistic regression trained with quadratic gradients: a diagonal bound
//! on the Hessian rescales the gradient, which speeds up first-order methods
//! such as Nesterov's accelerated gradient and Adagrad.
//!
//! Also included: low-degree polynomial sigmoid approximations, a plaintext
//! simulator of packed SIMD slot arithmetic that reproduces encrypted training,
//! and a small harness for cross-validated comparisons.

pub mod bounds;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod lrmodel;
pub mod optimizers;
pub mod packedsim;
pub mod polyapprox;

pub use error::{Error, Result};
