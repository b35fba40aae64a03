//! Pump saturation profile `s(z)` along the medium.
//!
//! The pump obeys `ds/dz = -(2g²N/cΓ₀) s/(1+3s)`, whose solution is the
//! implicit relation `ln s + 3s = ln s₀ + 3s₀ - ζ` with the optical depth
//! `ζ = (2g²N/cΓ₀) z`. Profiles are solved point by point from it.

use std::io::Write;

use serde::Serialize;

use crate::medium::MediumParams;
use crate::numerics::{newton_bisect, MonotoneCubic, RootOptions};
use crate::{format_float, Error, Result};

/// Pump gain factor `G = s(0)/s(z)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct GainFactor {
    pub value: f64,
}

/// Saturation after a pump depth `zeta`, starting from `s0`.
pub fn saturation_at_depth(s0: f64, zeta: f64) -> Result<f64> {
    Ok(log_saturation_at_depth(s0, zeta)?.exp())
}

/// `ln s` after depth `zeta`. Stays accurate where `s` itself underflows.
pub fn log_saturation_at_depth(s0: f64, zeta: f64) -> Result<f64> {
    if !(s0.is_finite() && s0 > 0.0) {
        return Err(Error::domain(format!("s0 must be finite and > 0, got {s0}")));
    }
    if !(zeta.is_finite() && zeta >= 0.0) {
        return Err(Error::domain(format!("depth must be finite and >= 0, got {zeta}")));
    }
    let u0 = s0.ln();
    if zeta == 0.0 {
        return Ok(u0);
    }
    let target = u0 + 3.0 * s0 - zeta;
    // u + 3e^u is increasing; Beer-Lambert and the saturated slope bound it.
    let lo = u0 - zeta;
    let hi = u0.min(target);
    newton_bisect(
        |u| {
            let e = 3.0 * u.exp();
            (u + e - target, 1.0 + e)
        },
        lo,
        hi,
        RootOptions {
            rel_tol: 1e-15,
            abs_tol: 1e-15,
            max_iter: 300,
        },
    )
}

/// Depth `ζ` needed to bring the saturation from `s0` down to `s`.
pub fn depth_between(s0: f64, s: f64) -> Result<f64> {
    if !(s0 > 0.0 && s > 0.0 && s <= s0) {
        return Err(Error::domain(format!(
            "need 0 < s <= s0, got s0 = {s0}, s = {s}"
        )));
    }
    Ok((s0.ln() + 3.0 * s0) - (s.ln() + 3.0 * s))
}

/// Saturation parameter sampled on a uniform grid `z ∈ [0, L]`.
#[derive(Debug, Clone)]
pub struct SaturationProfile {
    grid: Vec<f64>,
    values: Vec<f64>,
    log_values: Vec<f64>,
    s0: f64,
    zeta_rate: f64,
    length: f64,
    interp: Option<MonotoneCubic>,
}

/// Solves the profile for the pump depth rate of `params` over its length.
pub fn solve_profile(s0: f64, params: &MediumParams, n_points: usize) -> Result<SaturationProfile> {
    if !(s0.is_finite() && s0 > 0.0) {
        return Err(Error::domain(format!("s0 must be finite and > 0, got {s0}")));
    }
    SaturationProfile::with_rate(s0, params.zeta_rate(), params.length, n_points)
}

impl SaturationProfile {
    /// Profile with an explicit depth rate `dζ/dz` (1/m). A zero rate gives a
    /// uniform profile; `s0 = 0` gives the unpumped medium.
    pub fn with_rate(s0: f64, zeta_rate: f64, length: f64, n_points: usize) -> Result<Self> {
        if !(s0.is_finite() && s0 >= 0.0) {
            return Err(Error::domain(format!("s0 must be finite and >= 0, got {s0}")));
        }
        if !(zeta_rate.is_finite() && zeta_rate >= 0.0) {
            return Err(Error::domain(format!("depth rate must be finite and >= 0, got {zeta_rate}")));
        }
        if !(length.is_finite() && length >= 0.0) {
            return Err(Error::domain(format!("length must be finite and >= 0, got {length}")));
        }
        if n_points < 2 {
            return Err(Error::domain(format!("need at least 2 grid points, got {n_points}")));
        }
        let last = (n_points - 1) as f64;
        let grid: Vec<f64> = (0..n_points).map(|i| length * i as f64 / last).collect();
        let log_values = if s0 == 0.0 {
            vec![f64::NEG_INFINITY; n_points]
        } else {
            grid.iter()
                .map(|&z| log_saturation_at_depth(s0, zeta_rate * z))
                .collect::<Result<Vec<_>>>()?
        };
        let values = log_values.iter().map(|u| u.exp()).collect();
        let interp = if s0 > 0.0 && length > 0.0 {
            Some(MonotoneCubic::new(grid.clone(), log_values.clone())?)
        } else {
            None
        };
        Ok(Self {
            grid,
            values,
            log_values,
            s0,
            zeta_rate,
            length,
            interp,
        })
    }

    /// Undepleted profile `s(z) = s` everywhere.
    pub fn uniform(s: f64, length: f64, n_points: usize) -> Result<Self> {
        Self::with_rate(s, 0.0, length, n_points)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn zeta_rate(&self) -> f64 {
        self.zeta_rate
    }

    /// Total depth `ζ(L)`.
    pub fn total_depth(&self) -> f64 {
        self.zeta_rate * self.length
    }

    fn check_z(&self, z: f64) -> Result<()> {
        if !(z >= 0.0 && z <= self.length) {
            return Err(Error::domain(format!(
                "position {z} m outside the medium [0, {}] m",
                self.length
            )));
        }
        Ok(())
    }

    pub fn depth_at(&self, z: f64) -> Result<f64> {
        self.check_z(z)?;
        Ok(self.zeta_rate * z)
    }

    /// `ln s(z)` from the implicit relation (not interpolated).
    pub fn log_saturation_at(&self, z: f64) -> Result<f64> {
        self.check_z(z)?;
        if self.s0 == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        log_saturation_at_depth(self.s0, self.zeta_rate * z)
    }

    /// `s(z)` from the implicit relation (not interpolated).
    pub fn saturation_at(&self, z: f64) -> Result<f64> {
        Ok(self.log_saturation_at(z)?.exp())
    }

    /// `G(z)` interpolated on the grid with a monotone cubic in `ln s`.
    pub fn gain_at(&self, z: f64) -> Result<GainFactor> {
        self.check_z(z)?;
        let value = match &self.interp {
            Some(interp) => (self.log_values[0] - interp.eval(z)?).exp().max(1.0),
            None => 1.0,
        };
        Ok(GainFactor { value })
    }

    /// `G(z)` from the implicit relation.
    pub fn exact_gain(&self, z: f64) -> Result<GainFactor> {
        if self.s0 == 0.0 {
            self.check_z(z)?;
            return Ok(GainFactor { value: 1.0 });
        }
        let u = self.log_saturation_at(z)?;
        Ok(GainFactor {
            value: (self.s0.ln() - u).exp(),
        })
    }

    /// Writes the grid as CSV with columns `z_m, zeta, s, G`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["z_m", "zeta", "s", "G"]).map_err(csv_err)?;
        for (i, &z) in self.grid.iter().enumerate() {
            let gain = if self.s0 == 0.0 {
                1.0
            } else {
                (self.log_values[0] - self.log_values[i]).exp()
            };
            w.write_record([
                format_float(z),
                format_float(self.zeta_rate * z),
                format_float(self.values[i]),
                format_float(gain),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Data(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_adaptive, OdeOptions};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Principal branch of Lambert W for x >= 0 by Halley iteration.
    fn lambert_w(x: f64) -> f64 {
        let mut w = if x < 1.0 { x } else { x.ln() - x.ln().ln().max(0.0) };
        for _ in 0..100 {
            let e = w.exp();
            let f = w * e - x;
            let step = f / (e * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0));
            w -= step;
            if step.abs() <= 1e-16 * w.abs().max(1e-300) {
                break;
            }
        }
        w
    }

    fn params() -> MediumParams {
        MediumParams::quantum_reference()
    }

    #[test]
    fn zero_depth_is_identity() {
        assert_eq!(saturation_at_depth(0.7, 0.0).unwrap(), 0.7);
        let p = solve_profile(0.7, &params(), 11).unwrap();
        assert_eq!(p.values()[0], 0.7);
        assert_eq!(p.gain_at(0.0).unwrap().value, 1.0);
    }

    #[test]
    fn half_depletion_depth() {
        let zeta = depth_between(1.0, 0.5).unwrap();
        assert_relative_eq!(zeta, 1.5 + std::f64::consts::LN_2, max_relative = 1e-15);
        assert_relative_eq!(saturation_at_depth(1.0, zeta).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn matches_lambert_w() {
        for &(s0, zeta) in &[(1.0, 2.0), (0.3, 5.0), (3.0, 0.5), (10.0, 40.0), (1e-3, 1.0)] {
            let exact = lambert_w(3.0 * s0 * f64::exp(3.0 * s0 - zeta)) / 3.0;
            assert_relative_eq!(saturation_at_depth(s0, zeta).unwrap(), exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn beer_lambert_limit() {
        let s0 = 1e-6;
        for &zeta in &[0.1, 1.0, 5.0] {
            let s = saturation_at_depth(s0, zeta).unwrap();
            assert_relative_eq!(s, s0 * (-zeta).exp(), max_relative = 1e-5);
        }
    }

    #[test]
    fn gain_examples() {
        let rate = 1.0;
        let z_half = depth_between(1.0, 0.5).unwrap();
        let z_quarter = depth_between(1.0, 0.25).unwrap();
        let p = SaturationProfile::with_rate(1.0, rate, 5.0, 2001).unwrap();
        assert_relative_eq!(p.gain_at(z_half).unwrap().value, 2.0, max_relative = 1e-7);
        assert_relative_eq!(p.gain_at(z_quarter).unwrap().value, 4.0, max_relative = 1e-7);
        assert_relative_eq!(p.exact_gain(z_half).unwrap().value, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(solve_profile(0.0, &params(), 10).is_err());
        assert!(solve_profile(-1.0, &params(), 10).is_err());
        assert!(solve_profile(1.0, &params(), 1).is_err());
        let p = solve_profile(1.0, &params(), 10).unwrap();
        assert!(p.gain_at(-1e-9).is_err());
        assert!(p.gain_at(p.length() * 1.0001).is_err());
    }

    #[test]
    fn deep_profile_does_not_underflow_gain() {
        let p = SaturationProfile::with_rate(1.0, 1.0, 800.0, 101).unwrap();
        let g = p.exact_gain(700.0).unwrap().value;
        assert!(g.is_finite() && g > 1e290);
    }

    #[test]
    fn agrees_with_ode_integration() {
        let p = params();
        let prof = solve_profile(1.0, &p, 201).unwrap();
        let k = p.zeta_rate();
        let sol = integrate_adaptive(
            |_, s| -k * s / (1.0 + 3.0 * s),
            0.0,
            1.0,
            prof.grid(),
            OdeOptions {
                rel_tol: 1e-12,
                abs_tol: 1e-16,
                ..OdeOptions::default()
            },
        )
        .unwrap();
        for (a, b) in prof.values().iter().zip(&sol.y) {
            assert_relative_eq!(*a, *b, max_relative = 1e-9);
        }
    }

    #[test]
    fn derivative_matches_rate_equation() {
        let p = params();
        let prof = solve_profile(2.0, &p, 101).unwrap();
        let h = 1e-5 * p.length;
        for &z in &prof.grid()[1..100] {
            let ds = (prof.saturation_at(z + h).unwrap() - prof.saturation_at(z - h).unwrap()) / (2.0 * h);
            let s = prof.saturation_at(z).unwrap();
            let rhs = -p.zeta_rate() * s / (1.0 + 3.0 * s);
            assert_relative_eq!(ds, rhs, max_relative = 1e-6);
        }
    }

    #[test]
    fn csv_export_has_expected_columns() {
        let prof = solve_profile(1.0, &params(), 3).unwrap();
        let mut buf = Vec::new();
        prof.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("z_m,zeta,s,G"));
        assert_eq!(lines.next(), Some("0.0,0.0,1.0,1.0"));
        assert_eq!(text.lines().count(), 4);
    }

    proptest! {
        #[test]
        fn implicit_invariant_holds(s0 in 1e-4f64..50.0, zeta in 0.0f64..30.0) {
            let s = saturation_at_depth(s0, zeta).unwrap();
            let lhs = s.ln() + 3.0 * s + zeta;
            let rhs = s0.ln() + 3.0 * s0;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }

        #[test]
        fn profile_strictly_decreasing(s0 in 1e-3f64..20.0) {
            let prof = solve_profile(s0, &params(), 64).unwrap();
            prop_assert!(prof.values().windows(2).all(|w| w[1] < w[0]));
            prop_assert!(prof.values().iter().all(|&v| v > 0.0));
        }

        #[test]
        fn gain_non_decreasing(s0 in 1e-3f64..20.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let prof = solve_profile(s0, &params(), 64).unwrap();
            let (lo, hi) = (a.min(b) * prof.length(), a.max(b) * prof.length());
            let g_lo = prof.gain_at(lo).unwrap().value;
            let g_hi = prof.gain_at(hi).unwrap().value;
            prop_assert!(g_lo >= 1.0);
            prop_assert!(g_hi >= g_lo);
        }
    }
}
