use crate::medium::MediumParams;
use crate::pump::SaturationProfile;
use crate::Result;

use super::channels::Channel;
use super::{report, OracleConfig, OracleMode, OracleReport, OracleTarget};

/// Evaluates `S(z) = S(0) exp(∫₀^z r) + ∫₀^z K(x) exp(∫_x^z r) dx` by nested
/// adaptive quadrature and compares it with the closed form.
///
/// The δ-correlation of the forces in frequency and position collapses the
/// double noise integral to the single integral above.
pub fn deterministic_noise_integral(
    target: OracleTarget,
    profile: &SaturationProfile,
    params: &MediumParams,
    config: &OracleConfig,
) -> Result<OracleReport> {
    let channel = Channel::new(&target, profile, params, config)?;
    let closed = channel.closed_form(&target)?;
    let carried = channel.input_spectrum(&target) * channel.growth(0.0, target.z)?.exp();
    let added = channel.accumulated_noise(0.0, target.z)?;
    Ok(report(
        &target,
        profile,
        params,
        config,
        OracleMode::Deterministic,
        closed,
        carried + added,
        None,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::InputFieldState;
    use crate::oracle::{Propagator, Quadrature};
    use crate::probe::DeltaModel;
    use crate::pump::{depth_between, solve_profile};
    use std::f64::consts::LN_2;

    fn setup(s0: f64) -> (MediumParams, SaturationProfile) {
        let p = MediumParams::quantum_reference();
        (p, solve_profile(s0, &p, 64).unwrap())
    }

    fn target(q: Quadrature, z: f64, nu: f64) -> OracleTarget {
        OracleTarget {
            quadrature: q,
            z,
            nu,
            input: InputFieldState::coherent(),
        }
    }

    #[test]
    fn p_matches_closed_form() {
        let (p, prof) = setup(1.0);
        let cfg = OracleConfig::default();
        for frac in [0.1, 0.4, 1.0] {
            let r = deterministic_noise_integral(target(Quadrature::P, frac * p.length, 0.0), &prof, &p, &cfg).unwrap();
            assert!(r.rel_error < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn q_at_zero_frequency_is_two_g_minus_one() {
        let (p, prof) = setup(1.0);
        let z = depth_between(1.0, 0.5).unwrap() / p.zeta_rate();
        let r = deterministic_noise_integral(target(Quadrature::Q, z, 0.0), &prof, &p, &OracleConfig::default()).unwrap();
        assert!((r.closed_form - 3.0).abs() < 1e-9);
        assert!(r.rel_error < 1e-6, "{r:?}");
        let rp = deterministic_noise_integral(target(Quadrature::P, z, 0.0), &prof, &p, &OracleConfig::default()).unwrap();
        assert!((rp.oracle - (1.0 + 1.5 * LN_2)).abs() < 1e-6);
    }

    #[test]
    fn q_with_frequency_matches_for_gamma0_s() {
        let (p, prof) = setup(1.0);
        let r = deterministic_noise_integral(
            target(Quadrature::Q, p.length, 0.1 * p.gamma0),
            &prof,
            &p,
            &OracleConfig::default(),
        )
        .unwrap();
        assert!(r.rel_error < 1e-6, "{r:?}");
    }

    #[test]
    fn saturated_ratio_model_deviates() {
        let (p, prof) = setup(1.0);
        let cfg = OracleConfig {
            delta_model: DeltaModel::SaturatedRatio,
            ..OracleConfig::default()
        };
        let r = deterministic_noise_integral(target(Quadrature::Q, p.length, 0.0), &prof, &p, &cfg).unwrap();
        assert!(r.rel_error > 1e-3, "{r:?}");
    }

    #[test]
    fn exact_propagator_deviates_at_finite_frequency() {
        let (p, prof) = setup(1.0);
        let cfg = OracleConfig {
            propagator: Propagator::Exact,
            ..OracleConfig::default()
        };
        let at0 = deterministic_noise_integral(target(Quadrature::Q, p.length, 0.0), &prof, &p, &cfg).unwrap();
        assert!(at0.rel_error < 1e-6);
        let off = deterministic_noise_integral(target(Quadrature::Q, p.length, 0.05 * p.gamma0), &prof, &p, &cfg).unwrap();
        assert!(off.oracle < off.closed_form);
    }

    #[test]
    fn zero_diffusion_scales_input() {
        let (p, prof) = setup(1.0);
        let cfg = OracleConfig {
            noise: false,
            ..OracleConfig::default()
        };
        let g = prof.exact_gain(p.length).unwrap().value;
        let t = OracleTarget {
            quadrature: Quadrature::Q,
            z: p.length,
            nu: 0.0,
            input: InputFieldState::new(0.1, 10.0).unwrap(),
        };
        let q = deterministic_noise_integral(t, &prof, &p, &cfg).unwrap();
        assert!((q.oracle - 10.0 * g).abs() < 1e-8 * 10.0 * g);
        let pr = deterministic_noise_integral(OracleTarget { quadrature: Quadrature::P, ..t }, &prof, &p, &cfg).unwrap();
        assert!((pr.oracle - 0.1 / g).abs() < 1e-8 * 0.1 / g);
    }

    #[test]
    fn vacuum_preserved_without_pump_saturation() {
        let (p, prof) = setup(1e-12);
        let r = deterministic_noise_integral(target(Quadrature::P, p.length, 0.0), &prof, &p, &OracleConfig::default()).unwrap();
        assert!((r.oracle - 1.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn rejects_classical_medium_and_bad_depth() {
        let p = MediumParams::helium_classical();
        let prof = solve_profile(1.0, &p, 8).unwrap();
        assert!(deterministic_noise_integral(target(Quadrature::P, 0.0, 0.0), &prof, &p, &OracleConfig::default()).is_err());
        let (p, prof) = setup(1.0);
        assert!(deterministic_noise_integral(target(Quadrature::P, 2.0 * p.length, 0.0), &prof, &p, &OracleConfig::default()).is_err());
    }
}
