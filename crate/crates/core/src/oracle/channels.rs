use std::cell::RefCell;

use crate::medium::MediumParams;
use crate::noise::{diffusion_coefficients, spectrum_p_closed, spectrum_q_closed};
use crate::numerics::{integrate, QuadOptions};
use crate::probe::{coupling_rate, eigenvalues};
use crate::pump::SaturationProfile;
use crate::{Error, Result};

use super::{OracleConfig, OracleTarget, Propagator, Quadrature};

/// Records the first error raised inside an integrand and returns NaN in
/// its place so the quadrature aborts.
#[derive(Default)]
pub(super) struct ErrorSlot(RefCell<Option<Error>>);

impl ErrorSlot {
    pub fn value(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    /// Prefers the recorded integrand error over the quadrature's own.
    pub fn check<T>(&self, r: Result<T>) -> Result<T> {
        match self.0.borrow_mut().take() {
            Some(e) => Err(e),
            None => r,
        }
    }
}

/// Local growth rate of the spectrum and noise injection density for one
/// quadrature, both per metre.
pub(super) struct Channel<'a> {
    profile: &'a SaturationProfile,
    params: &'a MediumParams,
    quadrature: Quadrature,
    nu: f64,
    config: &'a OracleConfig,
}

impl<'a> Channel<'a> {
    pub fn new(
        target: &OracleTarget,
        profile: &'a SaturationProfile,
        params: &'a MediumParams,
        config: &'a OracleConfig,
    ) -> Result<Self> {
        params.require_quantum_regime()?;
        let mismatch = (profile.zeta_rate() - params.zeta_rate()).abs();
        if mismatch > 1e-12 * params.zeta_rate() {
            return Err(Error::domain(format!(
                "profile depth rate {} 1/m does not match the medium ({} 1/m)",
                profile.zeta_rate(),
                params.zeta_rate()
            )));
        }
        if !(target.z >= 0.0 && target.z <= profile.length()) {
            return Err(Error::domain(format!(
                "depth {} m outside the medium [0, {}] m",
                target.z,
                profile.length()
            )));
        }
        if target.quadrature == Quadrature::Q && profile.s0() == 0.0 {
            return Err(Error::domain(
                "Q noise transport needs a pumped medium: the CPO width vanishes at s = 0",
            ));
        }
        if !target.nu.is_finite() {
            return Err(Error::domain("analysis frequency must be finite"));
        }
        Ok(Self {
            profile,
            params,
            quadrature: target.quadrature,
            nu: target.nu,
            config,
        })
    }

    /// Growth rate `r(z)` of the spectrum: `2 Re Λ` of the quadrature.
    pub fn rate(&self, z: f64) -> Result<f64> {
        let s = self.profile.saturation_at(z)?;
        let a = coupling_rate(s, self.params);
        match self.quadrature {
            Quadrature::P => Ok(-2.0 * a),
            Quadrature::Q => match self.config.propagator {
                Propagator::Adiabatic => Ok(2.0 * a),
                Propagator::Exact => {
                    let delta = self.config.delta_model.delta(s, self.params.gamma0);
                    let plus = eigenvalues(s, self.nu, delta, self.params)?.lambda1;
                    let minus = eigenvalues(s, -self.nu, delta, self.params)?.lambda1;
                    Ok((plus + minus).re)
                }
            },
        }
    }

    /// Spectral density of injected noise per metre, `K(z)`.
    ///
    /// A force `c_k F_k` in the transport equation contributes
    /// `(4c/L)(L/N)|c_k|² D_k`: the shot-noise factor times one slice of
    /// `N` atoms. With `c_k ∝ gN/(cΓ₀)` this is `(4g²N/(cΓ₀²)) w_k D_k`.
    pub fn injection(&self, z: f64) -> Result<f64> {
        if !self.config.noise {
            return Ok(0.0);
        }
        let p = self.params;
        let s = self.profile.saturation_at(z)?;
        let d = diffusion_coefficients(s, p)?;
        let unit = 4.0 * p.coupling_density / (p.gamma0 * p.gamma0);
        match self.quadrature {
            // β = gN/(√2 cΓ₀) on F₋ + F₋†.
            Quadrature::P => Ok(unit * 0.5 * d.d_minus_minus),
            Quadrature::Q => {
                let delta = self.config.delta_model.delta(s, p.gamma0);
                let omega_sq = p.pump_rabi(s).powi(2);
                // α_Δ = gNΩ_D/(cΓ₀Δ) on F_Δ; α_ν = gNν/(√2 cΓ₀Δ) on F₋† − F₋.
                let population = omega_sq / (delta * delta) * d.d_delta_delta;
                let coherence = 0.5 * (self.nu / delta).powi(2) * d.d_minus_minus;
                Ok(unit * (population + coherence))
            }
        }
    }

    /// `∫_a^b r(z) dz` by adaptive quadrature.
    pub fn growth(&self, a: f64, b: f64) -> Result<f64> {
        let slot = ErrorSlot::default();
        let r = integrate(|z| slot.value(self.rate(z)), a, b, inner_opts());
        Ok(slot.check(r)?.value)
    }

    /// Noise accumulated over `[a, b]` and carried to `b`:
    /// `∫_a^b K(x) exp(∫_x^b r) dx`.
    pub fn accumulated_noise(&self, a: f64, b: f64) -> Result<f64> {
        if !self.config.noise {
            return Ok(0.0);
        }
        let slot = ErrorSlot::default();
        let r = integrate(
            |x| {
                let k = slot.value(self.injection(x));
                let g = slot.value(self.growth(x, b));
                k * g.exp()
            },
            a,
            b,
            outer_opts(),
        );
        Ok(slot.check(r)?.value)
    }

    /// Closed-form spectrum to compare against at depth `z`.
    pub fn closed_form(&self, target: &OracleTarget) -> Result<f64> {
        let u = self.profile.log_saturation_at(target.z)?;
        let ln_gain = if self.profile.s0() == 0.0 { 0.0 } else { self.profile.s0().ln() - u };
        let s = u.exp();
        Ok(match (self.quadrature, self.config.noise) {
            (Quadrature::P, true) => spectrum_p_closed(target.input.s_p_input, s, ln_gain),
            (Quadrature::P, false) => target.input.s_p_input * (-ln_gain).exp(),
            (Quadrature::Q, true) => spectrum_q_closed(
                target.input.s_q_input,
                self.profile.s0(),
                s,
                ln_gain,
                self.nu / self.params.gamma0,
            )?,
            (Quadrature::Q, false) => target.input.s_q_input * ln_gain.exp(),
        })
    }

    pub fn input_spectrum(&self, target: &OracleTarget) -> f64 {
        match self.quadrature {
            Quadrature::P => target.input.s_p_input,
            Quadrature::Q => target.input.s_q_input,
        }
    }
}

fn inner_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_intervals: 2000,
    }
}

fn outer_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-11,
        max_intervals: 2000,
    }
}
