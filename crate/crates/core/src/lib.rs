//! Finite-model maximal truncation operators, oscillatory principal-value
//! integrals, and desk-scale experiments on maximal partial Fourier integrals
//! and mollified Fourier restriction.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod christ_kiselev;
pub mod error;
pub mod fefferman;
pub mod mpz_max;
pub mod oscillatory;
pub mod par;
pub mod quadrature;
pub mod restriction_lab;
pub mod spaces;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spaces::{Exponent, Kernel, Signal, WeightedSpace};
