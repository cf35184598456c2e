//! Numerical laboratory for the configurations `x, x + t, x + P(t)` inside
//! compactly supported measures on the circle with polynomial Fourier decay.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod bump;
pub mod corpus;
pub mod error;
pub mod experiment;
pub mod fourier;
pub mod grid;
pub mod measures;
pub mod oscillatory;
pub mod patterns;
pub mod polynomial;
pub mod quad;
pub mod trilinear;

pub use error::{Error, Result};
pub use polynomial::{DensePoly, Polynomial, Term};
