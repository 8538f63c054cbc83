//! Spin-j quantum dynamics under sharp and coarse-grained measurements.
//!
//! The crate is organised bottom-up:
//!
//! - [`spin`]: angular-momentum operators in the `J_z` basis and the
//!   `exp(-i angle J_x)` rotation kernels.
//! - [`states`]: density matrices, spin coherent states and the Husimi
//!   Q-function.
//! - [`measurement`]: slot partitions, Lüders reduction and two-time
//!   correlations.
//! - [`lg`]: the four-time Leggett–Garg protocol.
//! - [`classical`]: rotating classical spins, Q-function ensembles and
//!   coarse-grained classical predictions.
//! - [`cli`]: the experiment drivers behind the `macrospin` binary.
//!
//! All operators use the basis `m = j, j-1, ..., -j` (index 0 is `m = j`).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod cli;
pub mod error;
pub mod lg;
pub mod measurement;
pub mod numeric;
pub mod sphere;
pub mod spin;
pub mod states;

pub use error::{Error, Result};

/// Double-precision complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Crate version embedded in every emitted file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
