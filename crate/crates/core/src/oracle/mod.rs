//! Independent numerical checks of the closed-form noise spectra.
//!
//! The oracles integrate the linear fluctuation transport directly, either
//! deterministically (nested adaptive quadrature of the noise integrals) or
//! by Monte Carlo sampling of the stochastic transport equation. The
//! diffusion coefficients themselves are checked against the generalised
//! Einstein relation in [`einstein`].

mod channels;
mod deterministic;
pub mod einstein;
mod monte_carlo;
mod resolve;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::medium::MediumParams;
use crate::noise::InputFieldState;
use crate::probe::DeltaModel;
use crate::pump::SaturationProfile;
use crate::{Error, Result};

pub use deterministic::deterministic_noise_integral;
pub use monte_carlo::monte_carlo_fluctuations;
pub use resolve::{resolve_delta_model, DeltaDeviation, DeltaResolution, RESOLVE_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrature {
    P,
    Q,
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quadrature::P => "P",
            Quadrature::Q => "Q",
        })
    }
}

impl FromStr for Quadrature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" | "p" => Ok(Quadrature::P),
            "Q" | "q" => Ok(Quadrature::Q),
            _ => Err(Error::domain(format!("unknown quadrature `{s}` (expected P or Q)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    Deterministic,
    MonteCarlo,
}

impl fmt::Display for OracleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleMode::Deterministic => "deterministic",
            OracleMode::MonteCarlo => "monte-carlo",
        })
    }
}

impl FromStr for OracleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deterministic" => Ok(OracleMode::Deterministic),
            "monte-carlo" | "monte_carlo" => Ok(OracleMode::MonteCarlo),
            _ => Err(Error::domain(format!(
                "unknown oracle mode `{s}` (expected deterministic or monte-carlo)"
            ))),
        }
    }
}

/// Growth rate used for the Q quadrature's transport.
///
/// `Adiabatic` keeps the low-frequency gain `2A`; `Exact` uses
/// `Λ₁(ν) + Λ₁(−ν) = 2A(Δ² − ν²)/(Δ² + ν²)`. The P quadrature does not
/// depend on this choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagator {
    #[default]
    Adiabatic,
    Exact,
}

impl FromStr for Propagator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adiabatic" => Ok(Propagator::Adiabatic),
            "exact" => Ok(Propagator::Exact),
            _ => Err(Error::domain(format!(
                "unknown propagator `{s}` (expected adiabatic or exact)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub n_trajectories: usize,
    pub spatial_steps: usize,
    pub seed: u64,
    pub delta_model: DeltaModel,
    pub mode: OracleMode,
    pub propagator: Propagator,
    /// Switches the Langevin forces on or off.
    pub noise: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_trajectories: 100_000,
            spatial_steps: 512,
            seed: 0x5eed,
            delta_model: DeltaModel::default(),
            mode: OracleMode::Deterministic,
            propagator: Propagator::default(),
            noise: true,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trajectories < 1 {
            return Err(Error::domain("n_trajectories must be >= 1"));
        }
        if self.spatial_steps < 16 {
            return Err(Error::domain(format!(
                "spatial_steps must be >= 16, got {}",
                self.spatial_steps
            )));
        }
        Ok(())
    }
}

/// What to evaluate: one quadrature at depth `z` (m) and analysis
/// frequency `nu` (rad/s) for a given input state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleTarget {
    pub quadrature: Quadrature,
    pub z: f64,
    pub nu: f64,
    pub input: InputFieldState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub mode: OracleMode,
    pub quadrature: Quadrature,
    /// Analysis frequency (rad/s).
    pub nu: f64,
    pub nu_over_gamma0: f64,
    pub z: f64,
    pub s0: f64,
    pub closed_form: f64,
    pub oracle: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    /// Standard error of the Monte Carlo mean.
    pub sigma: Option<f64>,
    pub seed: Option<u64>,
    pub delta_model: DeltaModel,
    pub propagator: Propagator,
    pub noise: bool,
}

impl OracleReport {
    /// Deviation in units of the Monte Carlo standard error.
    pub fn deviation_in_sigma(&self) -> Option<f64> {
        self.sigma.map(|s| self.abs_error / s)
    }
}

/// Runs whichever oracle `config.mode` selects.
pub fn run_oracle(
    target: OracleTarget,
    profile: &SaturationProfile,
    params: &MediumParams,
    config: &OracleConfig,
) -> Result<OracleReport> {
    match config.mode {
        OracleMode::Deterministic => deterministic_noise_integral(target, profile, params, config),
        OracleMode::MonteCarlo => monte_carlo_fluctuations(target, profile, params, config),
    }
}

fn report(
    target: &OracleTarget,
    profile: &SaturationProfile,
    params: &MediumParams,
    config: &OracleConfig,
    mode: OracleMode,
    closed_form: f64,
    oracle: f64,
    sigma: Option<f64>,
) -> OracleReport {
    let abs_error = (oracle - closed_form).abs();
    OracleReport {
        mode,
        quadrature: target.quadrature,
        nu: target.nu,
        nu_over_gamma0: target.nu / params.gamma0,
        z: target.z,
        s0: profile.s0(),
        closed_form,
        oracle,
        abs_error,
        rel_error: if closed_form == 0.0 { abs_error } else { abs_error / closed_form.abs() },
        sigma,
        seed: (mode == OracleMode::MonteCarlo).then_some(config.seed),
        delta_model: config.delta_model,
        propagator: config.propagator,
        noise: config.noise,
    }
}
