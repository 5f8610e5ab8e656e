//! Off-center coherent-state representations.
//!
//! The crate is organised bottom-up:
//!
//! * [`cs`] – coherent and squeezed state algebra (labels, Fock coefficients, overlaps).
//! * [`special`] – log-factorials and the regularized incomplete gamma function for complex argument.
//! * [`quadrature`] – deterministic phase-space and circle quadrature.
//! * [`resolution`] – off-center resolutions of unity and their numerical verification.
//! * [`bargmann`] – Bargmann functions and the ladders of reproducing kernels.
//! * [`semiclassics`] – complex trajectories and the λ-family of van Vleck type propagators.
//!
//! All quantities are expressed in an [`OscillatorFrame`] (ħ, m, b); the default frame is
//! dimensionless with ħ = m = b = 1.

pub mod bargmann;
pub mod cs;
mod error;
pub mod quadrature;
pub mod resolution;
pub mod semiclassics;
pub mod special;

pub use num_complex::Complex64 as C64;

pub use cs::{FockVector, OscillatorFrame, PhaseLabel, SqueezedLabel};
pub use error::{Error, Result};
pub use quadrature::{IntegralResult, QuadratureSpec, Scheme};
