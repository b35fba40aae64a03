//! Langevin diffusion coefficients and closed-form output squeezing
//! spectra of the probe quadratures.
//!
//! Spectra are normalised so that vacuum (shot noise) equals 1. Analysis
//! frequencies are passed as `ν/Γ₀`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::medium::MediumParams;
use crate::probe::{within_probe_window, DeltaModel};
use crate::pump::{log_saturation_at_depth, SaturationProfile};
use crate::{format_float, Error, Result};

/// Diffusion coefficients of the Langevin forces at saturation `s`.
///
/// `F_Δ` drives the population difference, `F_±` the symmetric and
/// antisymmetric optical coherences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffusionMatrix {
    pub saturation: f64,
    pub d_delta_delta: f64,
    pub d_plus_plus: f64,
    pub d_minus_minus: f64,
    /// (Δ,+), (Δ,−), (+,−).
    pub cross: [f64; 3],
}

/// Tabulated diffusion coefficients for the spontaneous-emission-limited
/// medium: D_ΔΔ = Γ₀s/(1+3s), D₊₊ = 0, D₋₋ = Γ₀, no cross terms.
pub fn diffusion_coefficients(s: f64, params: &MediumParams) -> Result<DiffusionMatrix> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::domain(format!("saturation must be finite and >= 0, got {s}")));
    }
    params.require_quantum_regime()?;
    Ok(DiffusionMatrix {
        saturation: s,
        d_delta_delta: params.gamma0 * s / (1.0 + 3.0 * s),
        d_plus_plus: 0.0,
        d_minus_minus: params.gamma0,
        cross: [0.0; 3],
    })
}

/// Input spectra of the probe quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputFieldState {
    pub s_p_input: f64,
    pub s_q_input: f64,
}

impl InputFieldState {
    pub fn new(s_p_input: f64, s_q_input: f64) -> Result<Self> {
        for (name, v) in [("S_P", s_p_input), ("S_Q", s_q_input)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!("input {name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self { s_p_input, s_q_input })
    }

    pub fn coherent() -> Self {
        Self {
            s_p_input: 1.0,
            s_q_input: 1.0,
        }
    }
}

/// Named input states: coherent, or `r` dB squeezing of one quadrature
/// (factor 10^(−r/10)) with the conjugate anti-squeezed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputPreset {
    Coherent,
    PSqueezed(f64),
    QSqueezed(f64),
}

impl InputPreset {
    pub fn state(self) -> InputFieldState {
        match self {
            InputPreset::Coherent => InputFieldState::coherent(),
            InputPreset::PSqueezed(db) => InputFieldState {
                s_p_input: 10f64.powf(-db / 10.0),
                s_q_input: 10f64.powf(db / 10.0),
            },
            InputPreset::QSqueezed(db) => InputFieldState {
                s_p_input: 10f64.powf(db / 10.0),
                s_q_input: 10f64.powf(-db / 10.0),
            },
        }
    }

    /// Coherent, 10 dB P-squeezed and 10 dB Q-squeezed.
    pub fn standard_set() -> [InputPreset; 3] {
        [
            InputPreset::Coherent,
            InputPreset::PSqueezed(10.0),
            InputPreset::QSqueezed(10.0),
        ]
    }
}

impl fmt::Display for InputPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputPreset::Coherent => f.write_str("coherent"),
            InputPreset::PSqueezed(db) => write!(f, "p_squeezed_{db}"),
            InputPreset::QSqueezed(db) => write!(f, "q_squeezed_{db}"),
        }
    }
}

impl FromStr for InputPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::domain(format!(
                "unknown input preset `{s}` (expected coherent, p_squeezed_<dB> or q_squeezed_<dB>)"
            ))
        };
        if s == "coherent" {
            return Ok(InputPreset::Coherent);
        }
        let (ctor, db): (fn(f64) -> InputPreset, &str) = if let Some(db) = s.strip_prefix("p_squeezed_") {
            (InputPreset::PSqueezed, db)
        } else if let Some(db) = s.strip_prefix("q_squeezed_") {
            (InputPreset::QSqueezed, db)
        } else {
            return Err(bad());
        };
        let db: f64 = db.parse().map_err(|_| bad())?;
        if !(db.is_finite() && db >= 0.0) {
            return Err(bad());
        }
        Ok(ctor(db))
    }
}

/// `S_P = S_P(0)/G + 1 − 1/G + 3s ln G`, with `ln G` passed directly.
pub fn spectrum_p_closed(s_p_input: f64, s: f64, ln_gain: f64) -> f64 {
    s_p_input * (-ln_gain).exp() - (-ln_gain).exp_m1() + 3.0 * s * ln_gain
}

/// `S_Q = G S_Q(0) − 1 + G + x²(3 ln G − 1/s₀ + 1/s)/s` with `x = ν/Γ₀`.
pub fn spectrum_q_closed(s_q_input: f64, s0: f64, s: f64, ln_gain: f64, nu_over_gamma0: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain(
            "thick-medium limit: Q spectrum is singular where the pump is fully absorbed (s = 0)",
        ));
    }
    let g = ln_gain.exp();
    let x2 = nu_over_gamma0 * nu_over_gamma0;
    let dispersive = if x2 == 0.0 {
        0.0
    } else {
        x2 * (3.0 * ln_gain - 1.0 / s0 + 1.0 / s) / s
    };
    Ok(g * s_q_input + ln_gain.exp_m1() + dispersive)
}

fn warn_outside_window(nu_over_gamma0: f64, s: f64) {
    if !within_probe_window(nu_over_gamma0, DeltaModel::default().delta(s, 1.0)) {
        log::warn!("nu/gamma0 = {nu_over_gamma0} lies outside the CPO window at s = {s}");
    }
}

fn local_state(profile: &SaturationProfile, z: f64) -> Result<(f64, f64)> {
    let u = profile.log_saturation_at(z)?;
    let ln_gain = if profile.s0() == 0.0 { 0.0 } else { profile.s0().ln() - u };
    Ok((u.exp(), ln_gain))
}

/// Output P spectrum at depth `z`. Independent of ν.
pub fn squeezing_spectrum_p(
    input: InputFieldState,
    profile: &SaturationProfile,
    z: f64,
    nu_over_gamma0: f64,
) -> Result<f64> {
    let (s, ln_gain) = local_state(profile, z)?;
    warn_outside_window(nu_over_gamma0, s);
    Ok(spectrum_p_closed(input.s_p_input, s, ln_gain))
}

/// Output Q spectrum at depth `z`.
pub fn squeezing_spectrum_q(
    input: InputFieldState,
    profile: &SaturationProfile,
    z: f64,
    nu_over_gamma0: f64,
) -> Result<f64> {
    let (s, ln_gain) = local_state(profile, z)?;
    warn_outside_window(nu_over_gamma0, s);
    spectrum_q_closed(input.s_q_input, profile.s0(), s, ln_gain, nu_over_gamma0)
}

/// Both spectra on a frequency grid at one depth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureSpectrum {
    pub z: f64,
    pub nu_over_gamma0: Vec<f64>,
    pub s_p: Vec<f64>,
    pub s_q: Vec<f64>,
}

impl QuadratureSpectrum {
    pub fn evaluate(
        input: InputFieldState,
        profile: &SaturationProfile,
        z: f64,
        nu_over_gamma0: &[f64],
    ) -> Result<Self> {
        let mut s_p = Vec::with_capacity(nu_over_gamma0.len());
        let mut s_q = Vec::with_capacity(nu_over_gamma0.len());
        for &x in nu_over_gamma0 {
            s_p.push(squeezing_spectrum_p(input, profile, z, x)?);
            s_q.push(squeezing_spectrum_q(input, profile, z, x)?);
        }
        Ok(Self {
            z,
            nu_over_gamma0: nu_over_gamma0.to_vec(),
            s_p,
            s_q,
        })
    }
}

/// One row of a depth sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionRow {
    pub zeta: f64,
    pub s: f64,
    pub gain: f64,
    pub s_p: f64,
    pub s_q: f64,
}

/// Spectra at ν = 0 along a grid of pump depths ζ.
pub fn variance_evolution(input: InputFieldState, s0: f64, depth_grid: &[f64]) -> Result<Vec<EvolutionRow>> {
    variance_evolution_at(input, s0, depth_grid, 0.0)
}

/// Spectra at `ν/Γ₀` along a grid of pump depths ζ.
pub fn variance_evolution_at(
    input: InputFieldState,
    s0: f64,
    depth_grid: &[f64],
    nu_over_gamma0: f64,
) -> Result<Vec<EvolutionRow>> {
    depth_grid
        .iter()
        .map(|&zeta| {
            let u = log_saturation_at_depth(s0, zeta)?;
            let ln_gain = s0.ln() - u;
            let s = u.exp();
            Ok(EvolutionRow {
                zeta,
                s,
                gain: ln_gain.exp(),
                s_p: spectrum_p_closed(input.s_p_input, s, ln_gain),
                s_q: spectrum_q_closed(input.s_q_input, s0, s, ln_gain, nu_over_gamma0)?,
            })
        })
        .collect()
}

/// Writes depth sweeps as CSV with columns
/// `zeta, nu_over_gamma0, S_P, S_Q, input_preset`.
pub fn write_evolution_csv<W: Write>(out: W, sweeps: &[(String, f64, Vec<EvolutionRow>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Data(e.to_string());
    w.write_record(["zeta", "nu_over_gamma0", "S_P", "S_Q", "input_preset"])
        .map_err(io)?;
    for (label, nu, rows) in sweeps {
        for r in rows {
            w.write_record([
                format_float(r.zeta),
                format_float(*nu),
                format_float(r.s_p),
                format_float(r.s_q),
                label.clone(),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pump::depth_between;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn half_depletion_profile() -> (SaturationProfile, f64) {
        let z = depth_between(1.0, 0.5).unwrap();
        (SaturationProfile::with_rate(1.0, 1.0, 2.0 * z, 64).unwrap(), z)
    }

    #[test]
    fn table_values() {
        let p = MediumParams::quantum_reference();
        let d = diffusion_coefficients(1.0, &p).unwrap();
        assert_relative_eq!(d.d_delta_delta, p.gamma0 / 4.0, max_relative = 1e-15);
        for s in [0.0, 0.5, 10.0] {
            let d = diffusion_coefficients(s, &p).unwrap();
            assert_eq!(d.d_plus_plus, 0.0);
            assert_eq!(d.d_minus_minus, p.gamma0);
            assert_eq!(d.cross, [0.0; 3]);
        }
        assert!(diffusion_coefficients(1.0, &MediumParams::helium_classical()).is_err());
        assert!(diffusion_coefficients(-1.0, &p).is_err());
    }

    #[test]
    fn presets_parse_and_invert() {
        assert_eq!("coherent".parse::<InputPreset>().unwrap(), InputPreset::Coherent);
        let p: InputPreset = "p_squeezed_10".parse().unwrap();
        let st = p.state();
        assert_relative_eq!(st.s_p_input, 0.1, max_relative = 1e-15);
        assert_relative_eq!(st.s_q_input, 10.0, max_relative = 1e-15);
        assert_eq!(p.to_string(), "p_squeezed_10");
        let q: InputPreset = "q_squeezed_3.5".parse().unwrap();
        assert_eq!(q, InputPreset::QSqueezed(3.5));
        assert_relative_eq!(q.state().s_p_input * q.state().s_q_input, 1.0, max_relative = 1e-15);
        for bad in ["", "squeezed", "p_squeezed_", "p_squeezed_x", "q_squeezed_-3"] {
            assert!(bad.parse::<InputPreset>().is_err(), "{bad}");
        }
    }

    #[test]
    fn entry_face_is_identity() {
        let (prof, _) = half_depletion_profile();
        let input = InputPreset::PSqueezed(10.0).state();
        assert_eq!(squeezing_spectrum_p(input, &prof, 0.0, 0.0).unwrap(), input.s_p_input);
        assert_eq!(squeezing_spectrum_q(input, &prof, 0.0, 0.1).unwrap(), input.s_q_input);
        let c = InputFieldState::coherent();
        assert_eq!(squeezing_spectrum_p(c, &prof, 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(squeezing_spectrum_q(c, &prof, 0.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn half_depletion_examples() {
        let (prof, z) = half_depletion_profile();
        let c = InputFieldState::coherent();
        assert_relative_eq!(squeezing_spectrum_p(c, &prof, z, 0.0).unwrap(), 1.0 + 1.5 * LN_2, max_relative = 1e-12);
        assert_relative_eq!(squeezing_spectrum_q(c, &prof, z, 0.0).unwrap(), 3.0, max_relative = 1e-12);
        let q = InputFieldState::new(10.0, 0.1).unwrap();
        assert_relative_eq!(squeezing_spectrum_q(q, &prof, z, 0.0).unwrap(), 1.2, max_relative = 1e-12);
        let term = 0.01 * (3.0 * LN_2 + 1.0) / 0.5;
        assert_relative_eq!(term, 0.0616, max_relative = 1e-3);
        assert_relative_eq!(squeezing_spectrum_q(c, &prof, z, 0.1).unwrap(), 3.0 + term, max_relative = 1e-12);
    }

    #[test]
    fn thick_medium_limits() {
        let rows = variance_evolution(InputFieldState::coherent(), 1.0, &[200.0, 600.0]).unwrap();
        assert!((rows[0].s_p - 1.0).abs() < 1e-80);
        let q = spectrum_q_closed(1.0, 1.0, 0.0, 1.0, 0.0);
        assert!(matches!(q, Err(Error::Domain(m)) if m.contains("thick-medium")));
        let unpumped = SaturationProfile::uniform(0.0, 1.0, 4).unwrap();
        assert!(squeezing_spectrum_q(InputFieldState::coherent(), &unpumped, 0.5, 0.0).is_err());
    }

    #[test]
    fn evolution_first_row_echoes_input() {
        for preset in InputPreset::standard_set() {
            let st = preset.state();
            let rows = variance_evolution(st, 1.0, &[0.0, 1.0]).unwrap();
            assert_eq!((rows[0].s_p, rows[0].s_q), (st.s_p_input, st.s_q_input));
        }
    }

    #[test]
    fn p_squeezed_overshoots_then_relaxes() {
        // S_P − 1 = s(3 ln G − 0.9) for s0 = 1: above vacuum once ln G > 0.3.
        let st = InputPreset::PSqueezed(10.0).state();
        let grid: Vec<f64> = (1..400).map(|i| i as f64 * 0.1).collect();
        let rows = variance_evolution(st, 1.0, &grid).unwrap();
        assert!(rows.iter().all(|r| r.s_p > 0.1));
        let peak = rows.iter().position(|r| r.s_p > 1.0).unwrap();
        assert!(rows[..peak].windows(2).all(|w| w[1].s_p > w[0].s_p));
        let tail = &rows[rows.len() - 100..];
        assert!(tail.iter().all(|r| r.s_p >= 1.0));
        assert!(tail.windows(2).all(|w| w[1].s_p <= w[0].s_p));
        assert!((rows.last().unwrap().s_p - 1.0).abs() < 1e-10);
    }

    #[test]
    fn csv_layout() {
        let rows = variance_evolution(InputFieldState::coherent(), 1.0, &[0.0]).unwrap();
        let mut buf = Vec::new();
        write_evolution_csv(&mut buf, &[("coherent".into(), 0.0, rows)]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "zeta,nu_over_gamma0,S_P,S_Q,input_preset\n0.0,0.0,1.0,1.0,coherent\n"
        );
    }

    proptest! {
        #[test]
        fn q_spectrum_increases_with_gain(sq0 in 0.0f64..20.0, g in 1.0f64..100.0, dg in 1e-6f64..10.0) {
            let s0 = 1.0;
            let q = |gain: f64| spectrum_q_closed(sq0, s0, s0 / gain, gain.ln(), 0.0).unwrap();
            prop_assert!(q(g + dg) > q(g));
            let slope = (q(g + 1e-4) - q(g)) / 1e-4;
            prop_assert!((slope - (sq0 + 1.0)).abs() < 1e-6 * (sq0 + 1.0));
        }

        #[test]
        fn coherent_noise_is_added(s0 in 1e-3f64..20.0, zeta in 0.0f64..50.0, x in 0.0f64..0.3) {
            let rows = variance_evolution_at(InputFieldState::coherent(), s0, &[zeta], x).unwrap();
            prop_assert!(rows[0].s_p >= 1.0 - 1e-12);
            prop_assert!(rows[0].s_q >= 1.0 - 1e-12);
            let nu_term = rows[0].s_q - (2.0 * rows[0].gain - 1.0);
            prop_assert!(nu_term >= -1e-9 * rows[0].s_q);
        }

        #[test]
        fn squeezing_is_degraded(db in 0.1f64..20.0, p_side in any::<bool>(), s0 in 1e-2f64..10.0, zeta in 1e-3f64..40.0) {
            let preset = if p_side { InputPreset::PSqueezed(db) } else { InputPreset::QSqueezed(db) };
            let st = preset.state();
            let rows = variance_evolution(st, s0, &[zeta]).unwrap();
            let before = st.s_p_input.min(st.s_q_input);
            prop_assert!(rows[0].s_p.min(rows[0].s_q) > before);
        }

        #[test]
        fn nonnegative_spectra(sp in 0.0f64..10.0, sq in 0.0f64..10.0, zeta in 0.0f64..30.0, x in -0.3f64..0.3) {
            let st = InputFieldState::new(sp, sq).unwrap();
            let rows = variance_evolution_at(st, 1.0, &[zeta], x).unwrap();
            prop_assert!(rows[0].s_p >= 0.0 && rows[0].s_q >= 0.0);
        }
    }
}
