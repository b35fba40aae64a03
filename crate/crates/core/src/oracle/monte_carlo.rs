use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::medium::MediumParams;
use crate::pump::SaturationProfile;
use crate::Result;

use super::channels::Channel;
use super::{report, OracleConfig, OracleMode, OracleReport, OracleTarget};

/// Samples the linear stochastic transport `dy = ½r y dz + √K dW` on
/// `spatial_steps` equal steps up to `target.z`.
///
/// Each step applies the exact drift propagator and a Gaussian increment
/// whose variance is the noise accumulated over the step. Trajectory `i`
/// draws from stream `i` of a ChaCha8 generator seeded with `config.seed`,
/// so the result does not depend on thread scheduling.
pub fn monte_carlo_fluctuations(
    target: OracleTarget,
    profile: &SaturationProfile,
    params: &MediumParams,
    config: &OracleConfig,
) -> Result<OracleReport> {
    config.validate()?;
    let channel = Channel::new(&target, profile, params, config)?;
    let closed = channel.closed_form(&target)?;

    let n = config.spatial_steps;
    let edges: Vec<f64> = (0..=n).map(|i| target.z * i as f64 / n as f64).collect();
    let steps = edges
        .windows(2)
        .map(|w| {
            let drift = (0.5 * channel.growth(w[0], w[1])?).exp();
            let kick = channel.accumulated_noise(w[0], w[1])?.max(0.0).sqrt();
            Ok((drift, kick))
        })
        .collect::<Result<Vec<_>>>()?;
    let input_sd = channel.input_spectrum(&target).sqrt();

    let squares: Vec<f64> = (0..config.n_trajectories as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i);
            let z0: f64 = StandardNormal.sample(&mut rng);
            let mut y = input_sd * z0;
            for &(drift, kick) in &steps {
                let xi: f64 = StandardNormal.sample(&mut rng);
                y = drift * y + kick * xi;
            }
            y * y
        })
        .collect();

    let count = squares.len() as f64;
    let mean = squares.iter().sum::<f64>() / count;
    let sigma = if squares.len() > 1 {
        let var = squares.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(report(
        &target,
        profile,
        params,
        config,
        OracleMode::MonteCarlo,
        closed,
        mean,
        Some(sigma),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::InputFieldState;
    use crate::oracle::{deterministic_noise_integral, Quadrature};
    use crate::pump::{depth_between, solve_profile};

    fn setup() -> (MediumParams, SaturationProfile, f64) {
        let p = MediumParams::quantum_reference();
        let z = depth_between(1.0, 0.5).unwrap() / p.zeta_rate();
        (p, solve_profile(1.0, &p, 64).unwrap(), z)
    }

    fn cfg(n: usize, seed: u64) -> OracleConfig {
        OracleConfig {
            n_trajectories: n,
            spatial_steps: 64,
            seed,
            mode: OracleMode::MonteCarlo,
            ..OracleConfig::default()
        }
    }

    fn target(q: Quadrature, z: f64) -> OracleTarget {
        OracleTarget {
            quadrature: q,
            z,
            nu: 0.0,
            input: InputFieldState::coherent(),
        }
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let (p, prof, z) = setup();
        let a = monte_carlo_fluctuations(target(Quadrature::Q, z), &prof, &p, &cfg(2000, 7)).unwrap();
        let b = monte_carlo_fluctuations(target(Quadrature::Q, z), &prof, &p, &cfg(2000, 7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.oracle.to_bits(), b.oracle.to_bits());
        let c = monte_carlo_fluctuations(target(Quadrature::Q, z), &prof, &p, &cfg(2000, 8)).unwrap();
        assert_ne!(a.oracle, c.oracle);
    }

    #[test]
    fn agrees_with_deterministic_oracle() {
        let (p, prof, z) = setup();
        for q in [Quadrature::P, Quadrature::Q] {
            let mc = monte_carlo_fluctuations(target(q, z), &prof, &p, &cfg(20_000, 3)).unwrap();
            let det = deterministic_noise_integral(target(q, z), &prof, &p, &OracleConfig::default()).unwrap();
            let sigma = mc.sigma.unwrap();
            assert!((mc.oracle - det.oracle).abs() < 3.0 * sigma, "{mc:?} vs {det:?}");
        }
    }

    #[test]
    fn standard_error_scales_as_inverse_root_n() {
        let (p, prof, z) = setup();
        let small = monte_carlo_fluctuations(target(Quadrature::P, z), &prof, &p, &cfg(5_000, 11)).unwrap();
        let large = monte_carlo_fluctuations(target(Quadrature::P, z), &prof, &p, &cfg(20_000, 11)).unwrap();
        let ratio = large.sigma.unwrap() / small.sigma.unwrap();
        assert!((ratio - 0.5).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn zero_noise_scales_each_trajectory_by_gain() {
        let (p, prof, z) = setup();
        let config = OracleConfig {
            noise: false,
            ..cfg(1000, 5)
        };
        let g = prof.exact_gain(z).unwrap().value;
        let q = monte_carlo_fluctuations(target(Quadrature::Q, z), &prof, &p, &config).unwrap();
        // Same input draws, no kicks: the sample mean scales exactly.
        let pr = monte_carlo_fluctuations(target(Quadrature::P, z), &prof, &p, &config).unwrap();
        assert!((q.oracle / pr.oracle - g * g).abs() < 1e-9 * g * g);
        assert!((q.oracle / q.closed_form - pr.oracle / pr.closed_form).abs() < 1e-9);
    }

    #[test]
    fn rejects_invalid_config() {
        let (p, prof, z) = setup();
        let mut c = cfg(10, 1);
        c.spatial_steps = 8;
        assert!(monte_carlo_fluctuations(target(Quadrature::P, z), &prof, &p, &c).is_err());
        c.spatial_steps = 16;
        c.n_trajectories = 0;
        assert!(monte_carlo_fluctuations(target(Quadrature::P, z), &prof, &p, &c).is_err());
    }
}
