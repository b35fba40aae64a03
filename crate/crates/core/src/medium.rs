//! Medium parameters and the pump-only steady state of the Λ system.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{hz_to_rad, rad_to_hz, Error, Result};

/// Physical rates and coupling of the Λ medium. All rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    /// Excited-state population decay Γ₀.
    pub gamma0: f64,
    /// Optical-coherence decay Γ.
    pub gamma_opt: f64,
    /// Transit-induced ground-state relaxation γ_t.
    pub gamma_t: f64,
    /// Collective coupling g²N/c, in (rad/s) per metre.
    pub coupling_density: f64,
    /// Cell length L in metres.
    pub length: f64,
    /// Zeeman shift Δ_z of the ground sublevels.
    pub zeeman_shift: f64,
}

impl MediumParams {
    pub fn new(
        gamma0: f64,
        gamma_opt: f64,
        gamma_t: f64,
        coupling_density: f64,
        length: f64,
        zeeman_shift: f64,
    ) -> Result<Self> {
        let p = Self {
            gamma0,
            gamma_opt,
            gamma_t,
            coupling_density,
            length,
            zeeman_shift,
        };
        p.validate()?;
        Ok(p)
    }

    /// Quantum-noise regime: spontaneous emission is the only decoherence,
    /// so Γ = Γ₀/2 and γ_t = 0.
    pub fn quantum(gamma0: f64, coupling_density: f64, length: f64, zeeman_shift: f64) -> Result<Self> {
        Self::new(gamma0, 0.5 * gamma0, 0.0, coupling_density, length, zeeman_shift)
    }

    /// Metastable-helium cell with the classical fit values: Γ/2π = 0.8 GHz,
    /// Γ₀/2π = 1.6 MHz, γ_t/Γ₀ = 0.096, L = 6 cm and g²NL/2Γc = 2.8.
    ///
    /// The Zeeman shift (1 MHz) is illustrative; it only enters validity
    /// flags.
    pub fn helium_classical() -> Self {
        let gamma0 = hz_to_rad(1.6e6);
        let gamma_opt = hz_to_rad(0.8e9);
        let length = 0.06;
        Self {
            gamma0,
            gamma_opt,
            gamma_t: 0.096 * gamma0,
            coupling_density: 2.8 * 2.0 * gamma_opt / length,
            length,
            zeeman_shift: hz_to_rad(1.0e6),
        }
    }

    /// Quantum-regime reference medium: helium Γ₀, Γ = Γ₀/2, γ_t = 0 and a
    /// total pump depth ζ(L) = 8.
    pub fn quantum_reference() -> Self {
        let gamma0 = hz_to_rad(1.6e6);
        let length = 0.06;
        Self {
            gamma0,
            gamma_opt: 0.5 * gamma0,
            gamma_t: 0.0,
            coupling_density: 4.0 * gamma0 / length,
            length,
            zeeman_shift: hz_to_rad(1.0e6),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma0", self.gamma0),
            ("gamma_opt", self.gamma_opt),
            ("coupling_density", self.coupling_density),
            ("length", self.length),
            ("zeeman_shift", self.zeeman_shift),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(self.gamma_t.is_finite() && self.gamma_t >= 0.0) {
            return Err(Error::domain(format!(
                "gamma_t must be finite and >= 0, got {}",
                self.gamma_t
            )));
        }
        Ok(())
    }

    /// True when Γ = Γ₀/2 and γ_t = 0 (to relative precision 1e-12).
    pub fn is_quantum_regime(&self) -> bool {
        (self.gamma_opt - 0.5 * self.gamma0).abs() <= 1e-12 * self.gamma0 && self.gamma_t == 0.0
    }

    pub fn require_quantum_regime(&self) -> Result<()> {
        if self.is_quantum_regime() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "quantum-noise mode requires gamma_opt = gamma0/2 and gamma_t = 0 \
                 (got gamma_opt/gamma0 = {}, gamma_t = {})",
                self.gamma_opt / self.gamma0,
                self.gamma_t
            )))
        }
    }

    /// Pump depth per metre, dζ/dz = 2g²N/(cΓ₀).
    pub fn zeta_rate(&self) -> f64 {
        2.0 * self.coupling_density / self.gamma0
    }

    /// Unsaturated probe depth g²NL/(2Γc).
    pub fn optical_depth(&self) -> f64 {
        self.coupling_density * self.length / (2.0 * self.gamma_opt)
    }

    pub fn gamma_ratio(&self) -> f64 {
        self.gamma_t / self.gamma0
    }

    /// Real pump Rabi frequency Ω_D = √(s Γ Γ₀) for saturation `s`.
    pub fn pump_rabi(&self, s: f64) -> f64 {
        (s * self.gamma_opt * self.gamma0).sqrt()
    }

    /// Loads parameters from a flat `key = value` file. Frequencies are
    /// given in Hz and converted to rad/s.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        MediumConfig::parse(&text)?.into_params()
    }
}

/// On-disk representation of [`MediumParams`]. Missing keys fall back to
/// a base parameter set when merged with [`MediumConfig::apply_to`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub gamma0_hz: Option<f64>,
    pub gamma_opt_hz: Option<f64>,
    pub gamma_t_hz: Option<f64>,
    pub coupling_density: Option<f64>,
    pub length_m: Option<f64>,
    pub zeeman_shift_hz: Option<f64>,
}

impl MediumConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_params(p: &MediumParams) -> Self {
        Self {
            gamma0_hz: Some(rad_to_hz(p.gamma0)),
            gamma_opt_hz: Some(rad_to_hz(p.gamma_opt)),
            gamma_t_hz: Some(rad_to_hz(p.gamma_t)),
            coupling_density: Some(p.coupling_density),
            length_m: Some(p.length),
            zeeman_shift_hz: Some(rad_to_hz(p.zeeman_shift)),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serialises")
    }

    /// Overrides the fields of `base` that are present in this config.
    pub fn apply_to(&self, base: MediumParams) -> Result<MediumParams> {
        let p = MediumParams {
            gamma0: self.gamma0_hz.map_or(base.gamma0, hz_to_rad),
            gamma_opt: self.gamma_opt_hz.map_or(base.gamma_opt, hz_to_rad),
            gamma_t: self.gamma_t_hz.map_or(base.gamma_t, hz_to_rad),
            coupling_density: self.coupling_density.unwrap_or(base.coupling_density),
            length: self.length_m.unwrap_or(base.length),
            zeeman_shift: self.zeeman_shift_hz.map_or(base.zeeman_shift, hz_to_rad),
        };
        p.validate()?;
        Ok(p)
    }

    /// Converts a complete config; every key must be present.
    pub fn into_params(self) -> Result<MediumParams> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::Config(format!("missing key `{key}`")))
        };
        MediumParams::new(
            hz_to_rad(need(self.gamma0_hz, "gamma0_hz")?),
            hz_to_rad(need(self.gamma_opt_hz, "gamma_opt_hz")?),
            hz_to_rad(need(self.gamma_t_hz, "gamma_t_hz")?),
            need(self.coupling_density, "coupling_density")?,
            need(self.length_m, "length_m")?,
            hz_to_rad(need(self.zeeman_shift_hz, "zeeman_shift_hz")?),
        )
    }
}

/// Basis ordering of the 3×3 density matrix.
pub const EXCITED: usize = 0;
pub const GROUND_PLUS: usize = 1;
pub const GROUND_MINUS: usize = 2;

/// Zeroth-order (pump only) density matrix over the basis (e, +1, −1).
///
/// Entry `(i, j)` is ⟨σ_ij⟩ = ⟨|i⟩⟨j|⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateDensityMatrix {
    pub entries: [[Complex64; 3]; 3],
    pub saturation: f64,
}

impl SteadyStateDensityMatrix {
    pub fn trace(&self) -> Complex64 {
        (0..3).map(|i| self.entries[i][i]).sum()
    }

    pub fn excited_population(&self) -> f64 {
        self.entries[EXCITED][EXCITED].re
    }

    pub fn ground_population(&self) -> f64 {
        self.entries[GROUND_PLUS][GROUND_PLUS].re
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..3).all(|i| {
            (0..3).all(|j| (self.entries[i][j] - self.entries[j][i].conj()).norm() <= tol)
        })
    }
}

/// Steady state of the pumped Λ system at saturation `s`, with a real pump
/// Rabi frequency Ω_D = √(sΓΓ₀).
///
/// Both optical coherences carry the factor √2 so that the matrix is
/// Hermitian: ⟨σ_e,±1⟩ = i√2 Ω_D / (Γ₀(1+3s)).
pub fn steady_state(s: f64, params: &MediumParams) -> Result<SteadyStateDensityMatrix> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::domain(format!("saturation must be finite and >= 0, got {s}")));
    }
    let denom = 1.0 + 3.0 * s;
    let excited = s / denom;
    let ground = (1.0 + 2.0 * s) / (2.0 + 6.0 * s);
    let coherence = Complex64::new(
        0.0,
        std::f64::consts::SQRT_2 * params.pump_rabi(s) / (params.gamma0 * denom),
    );
    let zero = Complex64::new(0.0, 0.0);
    let entries = [
        [Complex64::new(excited, 0.0), coherence, coherence],
        [-coherence, Complex64::new(ground, 0.0), zero],
        [-coherence, zero, Complex64::new(ground, 0.0)],
    ];
    Ok(SteadyStateDensityMatrix {
        entries,
        saturation: s,
    })
}

/// Saturation parameter produced by an optical pump power: s = κ·P.
pub fn saturation_from_power(power: f64, conversion: f64) -> Result<f64> {
    if !(power.is_finite() && power >= 0.0) {
        return Err(Error::domain(format!("pump power must be finite and >= 0, got {power}")));
    }
    if !(conversion.is_finite() && conversion > 0.0) {
        return Err(Error::domain(format!(
            "power-to-saturation conversion must be > 0, got {conversion}"
        )));
    }
    Ok(conversion * power)
}
