//! Contour-integral solvers for the heat equation and the linear KdV equation
//! on the quarter-plane `x > 0, t > 0`, with tools for checking the resulting
//! fields against independent oracles.

pub mod airy;
pub mod cli;
pub mod contours;
pub mod counterexamples;
pub mod error;
pub mod fdm;
pub mod jet;
pub mod profiles;
pub mod quadrature;
pub mod reductions;
pub mod solvers;
pub mod transforms;
pub mod verification;

pub use error::{Error, Result};
