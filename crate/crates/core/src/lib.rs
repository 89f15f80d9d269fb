//! Zero-mode (rigid unit mode) spectra of planar bar-joint frameworks.
//!
//! The crate covers three connected pieces of machinery:
//!
//! - periodic ("crystal") frameworks: the symbol matrix of the first-order
//!   flex condition under the multiphase ansatz, torus scans of its smallest
//!   singular value, spectral line detection, and the constructive passage
//!   between spectral lines and linearly localised flexes;
//! - regular multigrid parallelogram frameworks (Penrose, Ammann-Beenker,
//!   rhombille and friends) built by de Bruijn dualisation, with their ribbons,
//!   ribbon figures and slippage flexes;
//! - line figures in ambient and reciprocal space, phase fields, and the
//!   slippage / limit spectra of multigrid frameworks.
//!
//! Everything here is pure computation on in-memory values and builds with
//! `alloc` only. File formats, rendering and the command line live in the
//! companion `rumkit` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod fixtures;
pub mod framework;
pub mod geometry;
pub mod linalg;
pub mod localisation;
pub mod math;
pub mod multigrid;
pub mod spectra;
pub mod symbol;

pub use error::{Error, Result};
pub use framework::{CrystalFramework, FiniteFramework, Realization, VelocityField};
pub use geometry::{Basis2, IntegralMatrix2, LineFigure, ProjLine, Rational, Vector2};
pub use num_complex::Complex64;

/// Angular tolerance used for equality of lines through the origin.
pub const TOL_ANGLE: f64 = 1e-9;
