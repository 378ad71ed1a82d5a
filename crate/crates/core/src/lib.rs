//! Numerical laboratory for Lorentz and Morrey-Lorentz spaces, fractional integrals,
//! half-space layer potentials and a Picard solver for a nonlinear Neumann problem.

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bvp;
pub mod cli;
pub mod corpus;
pub mod error;
mod fft;
pub mod grid;
pub mod lorentz;
pub mod maximal;
pub mod morrey;
pub mod potential;
mod quad;
pub mod sharpness;

pub use error::{Error, Result};
