use serde::Serialize;

use crate::medium::MediumParams;
use crate::noise::InputFieldState;
use crate::probe::DeltaModel;
use crate::pump::SaturationProfile;
use crate::Result;

use super::{deterministic_noise_integral, OracleConfig, OracleTarget, Propagator, Quadrature};

/// Worst-case relative deviation below which a Δ model counts as
/// reproducing the closed-form Q spectrum.
pub const RESOLVE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaDeviation {
    pub delta_model: DeltaModel,
    pub nu_over_gamma0: f64,
    pub closed_form: f64,
    pub oracle: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaResolution {
    pub winner: DeltaModel,
    pub worst_case: Vec<(DeltaModel, f64)>,
    /// No model reached [`RESOLVE_TOLERANCE`].
    pub inconclusive: bool,
    pub table: Vec<DeltaDeviation>,
}

/// Compares the deterministic Q oracle at the exit face against the closed
/// form for every Δ model over a grid of `ν/Γ₀` and picks the model with
/// the smallest worst-case deviation (coherent input).
pub fn resolve_delta_model(
    profile: &SaturationProfile,
    params: &MediumParams,
    nu_over_gamma0: &[f64],
    propagator: Propagator,
) -> Result<DeltaResolution> {
    let mut table = Vec::new();
    let mut worst_case = Vec::new();
    for model in DeltaModel::ALL {
        let config = OracleConfig {
            delta_model: model,
            propagator,
            ..OracleConfig::default()
        };
        let mut worst = 0.0f64;
        for &x in nu_over_gamma0 {
            let target = OracleTarget {
                quadrature: Quadrature::Q,
                z: profile.length(),
                nu: x * params.gamma0,
                input: InputFieldState::coherent(),
            };
            let r = deterministic_noise_integral(target, profile, params, &config)?;
            worst = worst.max(r.rel_error);
            table.push(DeltaDeviation {
                delta_model: model,
                nu_over_gamma0: x,
                closed_form: r.closed_form,
                oracle: r.oracle,
                rel_error: r.rel_error,
            });
        }
        worst_case.push((model, worst));
    }
    let (winner, best) = worst_case
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one model");
    let inconclusive = !(best <= RESOLVE_TOLERANCE);
    if inconclusive {
        log::warn!("no CPO width model reproduces the Q spectrum (best worst-case {best:e})");
    }
    Ok(DeltaResolution {
        winner,
        worst_case,
        inconclusive,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pump::solve_profile;

    #[test]
    fn gamma0_s_wins() {
        let p = MediumParams::quantum_reference();
        let prof = solve_profile(1.0, &p, 32).unwrap();
        let r = resolve_delta_model(&prof, &p, &[0.0, 0.05, 0.1, 0.2], Propagator::Adiabatic).unwrap();
        assert_eq!(r.winner, DeltaModel::Gamma0S);
        assert!(!r.inconclusive);
        assert_eq!(r.table.len(), 8);
        assert!(r.worst_case[0].1 < 1e-6);
        assert!(r.worst_case[1].1 > RESOLVE_TOLERANCE);
    }

    #[test]
    fn empty_medium_has_no_deviation() {
        let mut p = MediumParams::quantum_reference();
        p.length = 0.0;
        let prof = SaturationProfile::with_rate(1.0, p.zeta_rate(), 0.0, 2).unwrap();
        let r = resolve_delta_model(&prof, &p, &[0.0, 0.1], Propagator::Adiabatic).unwrap();
        assert!(r.table.iter().all(|d| d.rel_error == 0.0));
    }
}
