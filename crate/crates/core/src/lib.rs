//! High-precision quantum D-module computations for Fano spaces.
//!
//! The crate evaluates Gamma classes, J-functions and framed flat sections of
//! the quantum connection, builds asymptotic bases and Stokes matrices near the
//! irregular singularity, and checks the lattice identities (Euler pairings,
//! mutations, blowup decompositions) that tie them to K-theory.

// Index loops mirror the matrix formulas; `!(x < tol)` is deliberate so NaN fails.
#![allow(clippy::needless_range_loop, clippy::too_many_arguments, clippy::neg_cmp_op_on_partial_ord)]

pub mod birational;
pub mod charclasses;
pub mod cohomology;
pub mod conjectures;
pub mod data;
pub mod error;
pub mod exact;
pub mod numerics;
pub mod parallel;
pub mod quantum;
pub mod sections;
pub mod space;
pub mod stokes;

pub use error::{Error, Result};
/// Library version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use numerics::PrecisionContext;
