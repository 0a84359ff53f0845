//! Numerical core for guidance-law (de Broglie–Bohm) trajectories, complex-potential
//! detectors, arrival-time statistics and pointer-model POVMs.
//!
//! Units: ħ = 1. Masses default to 1. The crate is `no_std` and needs only `alloc`.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod arrivals;
pub mod detectors;
mod error;
pub mod fields;
pub mod guidance;
pub mod povm;
pub mod quad;

pub use error::{Error, ErrorClass, Result};
pub use nalgebra::Vector3;
pub use num_complex::Complex64;

/// Densities at or below this value are treated as nodal.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Step used by every central finite difference in the crate.
pub const FD_STEP: f64 = 1e-4;
