//! Anyon fields on the universal covering of the circle.
//!
//! The fields are assembled from a charge shift and a second-quantized
//! multiplication operator on a truncated fermionic Fock space. Everything is
//! finite-dimensional: a [`modes::ModeWindow`] keeps the Fourier modes
//! `-M..=M`, and claims that only hold in infinite volume are checked as
//! convergence in `M`.
//!
//! Module overview:
//!
//! - [`covering`]: points and intervals on the covering line, winding numbers.
//! - [`modes`]: Fourier analysis, one-particle operators, HS norms, index.
//! - [`blip`]: mollifier and the smeared sawtooth.
//! - [`schwinger`]: Schwinger term by trace, quadrature and closed form.
//! - [`fock`]: Fock basis, CAR operators, implementers, Slater-determinant route.
//! - [`anyon`]: the anyon field, rotation representation, commutation checks.
//! - [`cones`]: planar cones, Fermi field with a Gram matrix, tensor fields.
//! - [`campaign`]: configuration-driven verification runs behind the CLI.

pub mod anyon;
pub mod blip;
pub mod campaign;
pub mod cones;
pub mod covering;
pub mod error;
pub mod fock;
pub mod modes;
pub mod schwinger;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub const TAU: f64 = std::f64::consts::TAU;
