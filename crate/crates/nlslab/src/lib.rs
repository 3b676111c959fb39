//! `nlslab` is a numerical laboratory for the focusing nonlinear Schrödinger
//! equation `i u_t + Laplacian(u) + |u|^{p-1} u = 0` restricted to radial
//! profiles on `R^N`.
//!
//! The crate solves the radial ground-state profile by shooting, extracts the
//! sharp interpolation constant and the scale-invariant threshold quantities
//! built from it, classifies initial data against those thresholds, evolves
//! profiles with a split-step spectral scheme, and wraps everything in a
//! sweep harness with reproducible on-disk artifacts.

pub mod batch;
pub mod classifier;
pub mod cutoff;
pub mod error;
pub mod evolver;
pub mod field;
pub mod grid;
pub mod groundstate;
pub mod harness;
pub mod invariants;

pub use error::{NlsError, Result};
pub use field::RadialField;
pub use grid::RadialGrid;
