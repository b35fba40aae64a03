//! Probe-field propagation through a Λ-type atomic medium driven under
//! ultra-narrow coherent population oscillation (CPO) conditions.
//!
//! The crate is organised bottom-up:
//!
//! - [`medium`]: physical parameters and the pump-only steady state.
//! - [`pump`]: depth profile of the saturation parameter `s(z)`.
//! - [`probe`]: classical phase-sensitive transmission, propagation
//!   eigenvalues and mean-quadrature transport.
//! - [`noise`]: Langevin diffusion coefficients and the closed-form output
//!   squeezing spectra.
//! - [`oracle`]: independent numerical checks of the closed forms
//!   (noise integrals, Monte Carlo, Einstein relations).
//! - [`dataset`] and [`fit`]: transmission-vs-power data and the
//!   four-parameter least-squares fit.
//!
//! All rates are angular frequencies (rad/s); lengths are metres.

pub mod dataset;
mod error;
pub mod fit;
pub mod medium;
pub mod noise;
pub mod numerics;
pub mod oracle;
pub mod probe;
pub mod pump;

pub use error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Converts a frequency in Hz to an angular frequency in rad/s.
pub fn hz_to_rad(hz: f64) -> f64 {
    2.0 * std::f64::consts::PI * hz
}

/// Converts an angular frequency in rad/s to Hz.
pub fn rad_to_hz(rad: f64) -> f64 {
    rad / (2.0 * std::f64::consts::PI)
}

/// Shortest decimal form that parses back to the same `f64`, switching to
/// exponent notation for very large or small magnitudes.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}
