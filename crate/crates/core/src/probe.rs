//! Classical probe propagation: phase-sensitive transmission, the
//! quadrature eigenvalues Λ₁/Λ₂ and mean-quadrature transport.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::medium::MediumParams;
use crate::numerics::{integrate, QuadOptions};
use crate::pump::SaturationProfile;
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Largest |ν|/Δ for which the adiabatic (narrow-spectrum) treatment is
/// considered valid.
pub const PROBE_WINDOW: f64 = 0.3;

/// Model for the CPO half-width Δ as a function of the local saturation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaModel {
    /// Δ = Γ₀·s.
    Gamma0S,
    /// Δ = 2Γ₀·s/(1+3s).
    SaturatedRatio,
}

impl DeltaModel {
    pub const ALL: [DeltaModel; 2] = [DeltaModel::Gamma0S, DeltaModel::SaturatedRatio];

    pub fn delta(self, s: f64, gamma0: f64) -> f64 {
        match self {
            DeltaModel::Gamma0S => gamma0 * s,
            DeltaModel::SaturatedRatio => 2.0 * gamma0 * s / (1.0 + 3.0 * s),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DeltaModel::Gamma0S => "gamma0_s",
            DeltaModel::SaturatedRatio => "saturated_ratio",
        }
    }
}

impl Default for DeltaModel {
    fn default() -> Self {
        DeltaModel::Gamma0S
    }
}

impl fmt::Display for DeltaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DeltaModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DeltaModel::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::domain(format!(
                    "unknown delta model `{s}` (expected gamma0_s or saturated_ratio)"
                ))
            })
    }
}

/// True when `|ν| ≤ 0.3·Δ`.
pub fn within_probe_window(nu: f64, delta: f64) -> bool {
    nu.abs() <= PROBE_WINDOW * delta
}

/// Probe depth and transit ratio entering the two transmissions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionModel {
    /// g²NL/(2Γc).
    pub optical_depth: f64,
    /// γ_t/Γ₀.
    pub gamma_ratio: f64,
}

impl TransmissionModel {
    pub fn from_params(params: &MediumParams) -> Self {
        Self {
            optical_depth: params.optical_depth(),
            gamma_ratio: params.gamma_ratio(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.optical_depth.is_finite() && self.optical_depth >= 0.0) {
            return Err(Error::domain(format!(
                "optical depth must be finite and >= 0, got {}",
                self.optical_depth
            )));
        }
        if !(self.gamma_ratio.is_finite() && self.gamma_ratio >= 0.0) {
            return Err(Error::domain(format!(
                "gamma_t/gamma0 must be finite and >= 0, got {}",
                self.gamma_ratio
            )));
        }
        Ok(())
    }

    /// Transmissions for a probe in phase (Θ = π/2) and in quadrature
    /// (Θ = 0) with the pump, over the given saturation profile.
    pub fn evaluate(&self, profile: &SaturationProfile) -> Result<TransmissionResult> {
        self.validate()?;
        let length = profile.length();
        if length == 0.0 || self.optical_depth == 0.0 {
            return Ok(TransmissionResult {
                t_parallel: 1.0,
                t_orthogonal: 1.0,
                pump_power: None,
            });
        }
        let a = self.gamma_ratio;
        let opts = QuadOptions::with_rel_tol(1e-12);
        let s_at = |z: f64| profile.saturation_at(z.clamp(0.0, length)).unwrap_or(0.0);

        let absorb = integrate(|z| 1.0 / (1.0 + 3.0 * s_at(z)), 0.0, length, opts)?;
        let net = integrate(
            |z| {
                let s = s_at(z);
                parallel_integrand(s, a)
            },
            0.0,
            length,
            opts,
        )?;
        let scale = self.optical_depth / length;
        Ok(TransmissionResult {
            t_parallel: (scale * net.value).exp(),
            t_orthogonal: (-scale * absorb.value).exp(),
            pump_power: None,
        })
    }
}

/// `(2s/(a+3s) − 1)/(1+3s)`, written as `−(a+s)/((a+3s)(1+3s))`, with the
/// unpumped value −1 when `a = s = 0`.
fn parallel_integrand(s: f64, a: f64) -> f64 {
    if s == 0.0 {
        return -1.0;
    }
    -(a + s) / ((a + 3.0 * s) * (1.0 + 3.0 * s))
}

/// Phase-sensitive transmission coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransmissionResult {
    /// Θ = π/2.
    pub t_parallel: f64,
    /// Θ = 0.
    pub t_orthogonal: f64,
    /// Pump power in watts, when the profile came from a power setting.
    pub pump_power: Option<f64>,
}

impl TransmissionResult {
    pub fn at_power(mut self, watts: f64) -> Self {
        self.pump_power = Some(watts);
        self
    }
}

/// Transmissions over `profile` for the medium `params`.
pub fn transmission(profile: &SaturationProfile, params: &MediumParams) -> Result<TransmissionResult> {
    params.validate()?;
    TransmissionModel::from_params(params).evaluate(profile)
}

/// Local propagation coefficients of the two quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagationEigenvalues {
    /// Q quadrature (1/m).
    pub lambda1: Complex64,
    /// P quadrature (1/m).
    pub lambda2: Complex64,
    pub nu: f64,
    pub delta_cpo: f64,
}

fn check_saturation(s: f64) -> Result<()> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::domain(format!("saturation must be finite and >= 0, got {s}")));
    }
    Ok(())
}

/// Amplitude rate g²N/(cΓ₀(1+3s)) shared by both eigenvalues.
pub fn coupling_rate(s: f64, params: &MediumParams) -> f64 {
    params.coupling_density / (params.gamma0 * (1.0 + 3.0 * s))
}

/// Λ₁ = A(Δ+iν)/(Δ−iν) and Λ₂ = −A with A = g²N/(cΓ₀(1+3s)).
pub fn eigenvalues(s: f64, nu: f64, delta_cpo: f64, params: &MediumParams) -> Result<PropagationEigenvalues> {
    check_saturation(s)?;
    if !(delta_cpo.is_finite() && delta_cpo > 0.0) {
        return Err(Error::domain(format!("CPO half-width must be > 0, got {delta_cpo}")));
    }
    if !nu.is_finite() {
        return Err(Error::domain("analysis frequency must be finite"));
    }
    let a = coupling_rate(s, params);
    let phase = Complex64::new(delta_cpo, nu) / Complex64::new(delta_cpo, -nu);
    Ok(PropagationEigenvalues {
        lambda1: a * phase,
        lambda2: Complex64::new(-a, 0.0),
        nu,
        delta_cpo,
    })
}

/// Low-frequency expansion of Λ₁ + iν/c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdiabaticExpansion {
    /// Amplification rate (1/m).
    pub gain_rate: f64,
    /// Inverse group velocity (s/m).
    pub group_delay_rate: f64,
    /// Spectral narrowing term (1/m).
    pub curvature_rate: f64,
    pub nu: f64,
    pub within_window: bool,
}

impl AdiabaticExpansion {
    /// The expansion's estimate of Λ₁ + iν/c.
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.gain_rate + self.curvature_rate, self.nu * self.group_delay_rate)
    }
}

/// Second-order expansion of Λ₁ + iν/c in ν/Δ.
///
/// The real part is `A(1 − 2ν²/Δ²)`; the group term uses the pump Rabi
/// frequency and matches the Taylor series when Δ = 2Ω_D²/Γ₀.
pub fn adiabatic_expansion(s: f64, nu: f64, delta_cpo: f64, params: &MediumParams) -> Result<AdiabaticExpansion> {
    check_saturation(s)?;
    if !(delta_cpo.is_finite() && delta_cpo > 0.0) {
        return Err(Error::domain(format!("CPO half-width must be > 0, got {delta_cpo}")));
    }
    if s == 0.0 {
        return Err(Error::domain(
            "slow-light divergence: group term is infinite without pump (s = 0)",
        ));
    }
    let within_window = within_probe_window(nu, delta_cpo);
    if !within_window {
        log::warn!(
            "nu/delta = {} exceeds the adiabatic window {PROBE_WINDOW}",
            nu / delta_cpo
        );
    }
    let gain = coupling_rate(s, params);
    let omega_sq = params.pump_rabi(s).powi(2);
    let group = (1.0 + params.coupling_density * SPEED_OF_LIGHT / (omega_sq * (1.0 + 3.0 * s)))
        / SPEED_OF_LIGHT;
    let x = nu / delta_cpo;
    Ok(AdiabaticExpansion {
        gain_rate: gain,
        group_delay_rate: group,
        curvature_rate: -2.0 * gain * x * x,
        nu,
        within_window,
    })
}

/// Complex mean amplitudes of the two quadratures at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanQuadratures {
    pub p: Complex64,
    pub q: Complex64,
}

/// Mean quadratures after propagation to `z`, plus whether ν lies in the
/// probe window at that depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanPropagation {
    pub quadratures: MeanQuadratures,
    pub within_window: bool,
}

/// Transports mean quadratures: Q grows as √G, P shrinks as 1/√G, and both
/// acquire the vacuum phase e^{iνz/c}.
pub fn propagate_mean_quadratures(
    input: MeanQuadratures,
    profile: &SaturationProfile,
    z: f64,
    nu: f64,
    delta_model: DeltaModel,
    gamma0: f64,
) -> Result<MeanPropagation> {
    let gain = profile.exact_gain(z)?.value;
    let s = profile.saturation_at(z)?;
    let within_window = within_probe_window(nu, delta_model.delta(s, gamma0));
    if !within_window {
        log::warn!("nu = {nu} rad/s lies outside the CPO window at z = {z} m");
    }
    let phase = Complex64::from_polar(1.0, nu * z / SPEED_OF_LIGHT);
    let root = gain.sqrt();
    Ok(MeanPropagation {
        quadratures: MeanQuadratures {
            p: input.p * phase / root,
            q: input.q * phase * root,
        },
        within_window,
    })
}
