//! Finite-sample verification of metric axioms, positive definiteness and
//! conditional negative definiteness for similarity metrics and kernels.

pub mod cli;
pub mod counterexample;
pub mod error;
pub mod function_space;
pub mod graph;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod sampling;
pub mod validators;

pub use error::{Error, Result};
