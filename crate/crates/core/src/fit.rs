//! Four-parameter least-squares fit of transmission-versus-power data.
//!
//! Residuals are taken in log-transmission, weighted by `sigma/T` when
//! uncertainties are given, and minimised by a bounded Levenberg-Marquardt
//! iteration with a central-difference Jacobian.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataRow, Theta, TransmissionDataset};
use crate::medium::saturation_from_power;
use crate::probe::{TransmissionModel, TransmissionResult};
use crate::pump::SaturationProfile;
use crate::{Error, Result};

pub const PARAM_NAMES: [&str; 4] = [
    "gamma_ratio",
    "optical_depth",
    "s_per_watt",
    "residual_transmission",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    /// γ_t/Γ₀.
    pub gamma_ratio: f64,
    /// g²NL/(2Γc).
    pub optical_depth: f64,
    /// Saturation per watt of pump (1/W).
    pub s_per_watt: f64,
    /// Transmission left after the off-resonant residual absorption.
    pub residual_transmission: f64,
}

impl FitParams {
    /// Values fitted on the metastable-helium cell: γ_t/Γ₀ = 0.096,
    /// depth 2.8, 0.47 W⁻¹ and 20 % residual absorption.
    pub fn nominal() -> Self {
        Self {
            gamma_ratio: 0.096,
            optical_depth: 2.8,
            s_per_watt: 0.47,
            residual_transmission: 0.80,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in PARAM_NAMES.iter().zip(self.to_array()) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if self.residual_transmission > 1.0 {
            return Err(Error::domain(format!(
                "residual_transmission must be <= 1, got {}",
                self.residual_transmission
            )));
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 4] {
        [
            self.gamma_ratio,
            self.optical_depth,
            self.s_per_watt,
            self.residual_transmission,
        ]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            gamma_ratio: a[0],
            optical_depth: a[1],
            s_per_watt: a[2],
            residual_transmission: a[3],
        }
    }
}

impl Default for FitParams {
    fn default() -> Self {
        Self::nominal()
    }
}

/// Pump-propagation setting for the transmission model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FitModel {
    /// Total pump depth ζ(L) across the cell; 0 keeps the pump uniform.
    pub pump_depth: f64,
}

impl FitModel {
    /// Both transmissions, including the residual factor.
    pub fn transmissions(&self, params: &FitParams, power: f64) -> Result<TransmissionResult> {
        if !(self.pump_depth.is_finite() && self.pump_depth >= 0.0) {
            return Err(Error::domain(format!("pump depth must be >= 0, got {}", self.pump_depth)));
        }
        let s0 = saturation_from_power(power, params.s_per_watt)?;
        let profile = SaturationProfile::with_rate(s0, self.pump_depth, 1.0, 2)?;
        let t = TransmissionModel {
            optical_depth: params.optical_depth,
            gamma_ratio: params.gamma_ratio,
        }
        .evaluate(&profile)?;
        Ok(TransmissionResult {
            t_parallel: params.residual_transmission * t.t_parallel,
            t_orthogonal: params.residual_transmission * t.t_orthogonal,
            pump_power: Some(power),
        })
    }

    pub fn transmission(&self, params: &FitParams, power: f64, theta: Theta) -> Result<f64> {
        let t = self.transmissions(params, power)?;
        Ok(match theta {
            Theta::Zero => t.t_orthogonal,
            Theta::HalfPi => t.t_parallel,
        })
    }
}

/// Transmission at pump power `power` (W) with a uniform pump.
pub fn model_transmission(params: &FitParams, power: f64, theta: Theta) -> Result<f64> {
    FitModel::default().transmission(params, power, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop when the cost changes by less than this relative amount.
    pub cost_tol: f64,
    /// Stop when every parameter step is below this relative amount.
    pub step_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            cost_tol: 1e-15,
            step_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: FitParams,
    pub covariance: Vec<Vec<f64>>,
    pub std_errors: Vec<f64>,
    /// Log-transmission residuals (model − data), in input row order.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Half the weighted sum of squared residuals.
    pub cost: f64,
    /// The data leave at least one parameter direction unconstrained.
    pub degenerate: bool,
    pub degenerate_parameters: Vec<String>,
}

const LOWER: f64 = 1e-12;

fn project(p: &mut [f64; 4]) {
    for v in p.iter_mut() {
        *v = v.max(LOWER);
    }
    p[3] = p[3].min(1.0);
}

struct Problem<'a> {
    rows: Vec<&'a DataRow>,
    model: FitModel,
}

impl Problem<'_> {
    fn weight(row: &DataRow) -> f64 {
        row.sigma.map_or(1.0, |s| row.transmission / s)
    }

    fn residuals(&self, p: &[f64; 4]) -> Result<DVector<f64>> {
        let params = FitParams::from_array(*p);
        let values = self
            .rows
            .par_iter()
            .map(|r| {
                let t = self.model.transmission(&params, r.pump_power, r.theta)?;
                Ok((t.ln() - r.transmission.ln()) * Self::weight(r))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(DVector::from_vec(values))
    }

    fn jacobian(&self, p: &[f64; 4]) -> Result<DMatrix<f64>> {
        let mut jac = DMatrix::zeros(self.rows.len(), 4);
        for j in 0..4 {
            let h = 1e-6 * p[j].abs().max(1e-8);
            let mut up = *p;
            let mut down = *p;
            up[j] += h;
            down[j] -= h;
            let col = (self.residuals(&up)? - self.residuals(&down)?) / (2.0 * h);
            jac.set_column(j, &col);
        }
        Ok(jac)
    }
}

fn cost_of(r: &DVector<f64>) -> f64 {
    0.5 * r.norm_squared()
}

/// Canonical row order so the fit does not depend on input ordering.
fn canonical_order(rows: &[DataRow]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ra, rb) = (&rows[a], &rows[b]);
        ra.theta
            .cmp(&rb.theta)
            .then(ra.pump_power.total_cmp(&rb.pump_power))
            .then(ra.transmission.total_cmp(&rb.transmission))
            .then(ra.sigma.unwrap_or(0.0).total_cmp(&rb.sigma.unwrap_or(0.0)))
    });
    idx
}

/// Fits the four model parameters to `dataset` starting from `initial`.
///
/// Deterministic for identical inputs. Fails with
/// [`Error::FitNotConverged`] (carrying the best parameters found) when the
/// iteration budget runs out.
pub fn fit(
    dataset: &TransmissionDataset,
    initial: &FitParams,
    model: &FitModel,
    options: &FitOptions,
) -> Result<FitResult> {
    dataset.validate()?;
    initial.validate()?;
    let order = canonical_order(&dataset.rows);
    let problem = Problem {
        rows: order.iter().map(|&i| &dataset.rows[i]).collect(),
        model: *model,
    };

    let mut p = initial.to_array();
    project(&mut p);
    let mut r = problem.residuals(&p)?;
    let mut cost = cost_of(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        let jac = problem.jacobian(&p)?;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        let max_diag = (0..4).map(|i| jtj[(i, i)]).fold(0.0, f64::max);
        let floor = 1e-12 * max_diag.max(f64::MIN_POSITIVE);

        let mut improved = false;
        while lambda <= 1e12 {
            let mut lhs = jtj.clone();
            for i in 0..4 {
                lhs[(i, i)] += lambda * jtj[(i, i)].max(floor);
            }
            let step = lhs
                .clone()
                .svd(true, true)
                .solve(&(-&grad), 1e-14 * max_diag.max(f64::MIN_POSITIVE))
                .map_err(|m| Error::numerical("fit", m))?;
            let mut trial = p;
            for i in 0..4 {
                trial[i] += step[i];
            }
            project(&mut trial);
            let r_trial = problem.residuals(&trial)?;
            let c_trial = cost_of(&r_trial);
            if c_trial.is_finite() && c_trial <= cost {
                let small_step = (0..4).all(|i| (trial[i] - p[i]).abs() <= options.step_tol * p[i].abs());
                let small_gain = cost - c_trial <= options.cost_tol * cost + f64::MIN_POSITIVE;
                p = trial;
                r = r_trial;
                cost = c_trial;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                converged = small_step || small_gain;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            // No descent possible along any damped step: stationary point.
            converged = true;
        }
        if converged {
            break;
        }
    }

    if !converged {
        return Err(Error::FitNotConverged {
            best: Box::new(FitParams::from_array(p)),
            iterations,
            diagnostic: format!("cost {cost:e} still decreasing; lambda {lambda:e}"),
        });
    }

    let jac = problem.jacobian(&p)?;
    let svd = jac.clone().svd(false, true);
    let sv = &svd.singular_values;
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let s_max = sv.max();
    let cutoff = 1e-8 * s_max;
    let mut degenerate_parameters = Vec::new();
    let mut cov = DMatrix::<f64>::zeros(4, 4);
    for k in 0..sv.len() {
        let row = v_t.row(k);
        if sv[k] > cutoff {
            cov += row.transpose() * row / (sv[k] * sv[k]);
        } else {
            for j in 0..4 {
                if row[j].abs() > 0.1 && !degenerate_parameters.contains(&PARAM_NAMES[j].to_string()) {
                    degenerate_parameters.push(PARAM_NAMES[j].to_string());
                }
            }
        }
    }
    let n = problem.rows.len();
    let all_sigma = problem.rows.iter().all(|r| r.sigma.is_some());
    if !all_sigma && n > 4 {
        cov *= 2.0 * cost / (n - 4) as f64;
    }
    let degenerate = !degenerate_parameters.is_empty();
    if degenerate {
        log::warn!("fit is degenerate in {degenerate_parameters:?}");
    }

    let mut residuals = vec![0.0; n];
    for (k, &i) in order.iter().enumerate() {
        residuals[i] = r[k] / Problem::weight(problem.rows[k]);
    }
    Ok(FitResult {
        params: FitParams::from_array(p),
        covariance: (0..4).map(|i| (0..4).map(|j| cov[(i, j)]).collect()).collect(),
        std_errors: (0..4).map(|i| cov[(i, i)].sqrt()).collect(),
        residuals,
        converged,
        iterations,
        cost,
        degenerate,
        degenerate_parameters,
    })
}

/// Model data at both phases for every power in `powers` (W), with
/// multiplicative Gaussian noise of relative size `rel_noise`.
pub fn synthetic_dataset(
    truth: &FitParams,
    model: &FitModel,
    powers: &[f64],
    rel_noise: f64,
    seed: u64,
) -> Result<TransmissionDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(2 * powers.len());
    for theta in [Theta::Zero, Theta::HalfPi] {
        for &power in powers {
            let t = model.transmission(truth, power, theta)?;
            let xi: f64 = StandardNormal.sample(&mut rng);
            rows.push(DataRow {
                pump_power: power,
                theta,
                transmission: (t * (1.0 + rel_noise * xi)).max(f64::MIN_POSITIVE),
                sigma: None,
            });
        }
    }
    TransmissionDataset::new(rows)
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn powers() -> Vec<f64> {
        log_grid(0.3e-3, 100e-3, 30)
    }

    #[test]
    fn zero_power_limit() {
        let p = FitParams::nominal();
        let t = model_transmission(&p, 0.0, Theta::Zero).unwrap();
        assert_relative_eq!(t, 0.8 * (-2.8f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn saturated_limit() {
        let p = FitParams::nominal();
        for theta in [Theta::Zero, Theta::HalfPi] {
            let t = model_transmission(&p, 1e12, theta).unwrap();
            assert_relative_eq!(t, 0.8, max_relative = 1e-6);
        }
    }

    #[test]
    fn ten_milliwatt_parallel_value() {
        let p = FitParams::nominal();
        let s = 0.47 * 10e-3;
        let a = 0.096;
        let expected = 0.8 * (2.8f64 * (2.0 * s / (a + 3.0 * s) - 1.0) / (1.0 + 3.0 * s)).exp();
        assert_relative_eq!(model_transmission(&p, 10e-3, Theta::HalfPi).unwrap(), expected, max_relative = 1e-10);
    }

    #[test]
    fn depleted_pump_model_is_consistent() {
        let p = FitParams::nominal();
        let m = FitModel { pump_depth: 3.0 };
        let t = m.transmissions(&p, 0.05).unwrap();
        let flat = FitModel::default().transmissions(&p, 0.05).unwrap();
        assert!(t.t_orthogonal < flat.t_orthogonal);
        assert!(t.t_parallel >= t.t_orthogonal);
    }

    #[test]
    fn noiseless_round_trip() {
        let truth = FitParams::nominal();
        let ds = synthetic_dataset(&truth, &FitModel::default(), &powers(), 0.0, 1).unwrap();
        let start = FitParams {
            gamma_ratio: 0.12,
            optical_depth: 2.5,
            s_per_watt: 0.4,
            residual_transmission: 0.7,
        };
        let r = fit(&ds, &start, &FitModel::default(), &FitOptions::default()).unwrap();
        assert!(r.converged && !r.degenerate);
        for (a, b) in r.params.to_array().iter().zip(truth.to_array()) {
            assert_relative_eq!(*a, b, max_relative = 1e-6);
        }
        assert!(r.residuals.iter().all(|v| v.abs() <= 1e-8));
    }

    #[test]
    fn noisy_round_trip_within_reported_uncertainty() {
        let truth = FitParams::nominal();
        let ds = synthetic_dataset(&truth, &FitModel::default(), &powers(), 0.01, 2024).unwrap();
        let r = fit(&ds, &truth, &FitModel::default(), &FitOptions::default()).unwrap();
        assert!(r.converged && !r.degenerate);
        for ((a, b), se) in r.params.to_array().iter().zip(truth.to_array()).zip(&r.std_errors) {
            assert!(se.is_finite() && *se > 0.0);
            assert!((a - b).abs() <= 3.0 * se, "{:?} +- {:?}", r.params, r.std_errors);
        }
    }

    #[test]
    fn single_phase_data_is_degenerate() {
        let truth = FitParams::nominal();
        let mut ds = synthetic_dataset(&truth, &FitModel::default(), &powers(), 0.0, 1).unwrap();
        ds.rows.retain(|r| r.theta == Theta::Zero);
        let r = fit(&ds, &truth, &FitModel::default(), &FitOptions::default()).unwrap();
        assert!(r.degenerate);
        assert!(r.degenerate_parameters.contains(&"gamma_ratio".to_string()));
    }

    #[test]
    fn iteration_budget_exhaustion_reports_best() {
        let truth = FitParams::nominal();
        let ds = synthetic_dataset(&truth, &FitModel::default(), &powers(), 0.01, 3).unwrap();
        let start = FitParams {
            gamma_ratio: 0.5,
            optical_depth: 1.0,
            s_per_watt: 2.0,
            residual_transmission: 0.5,
        };
        let opts = FitOptions {
            max_iterations: 1,
            ..FitOptions::default()
        };
        match fit(&ds, &start, &FitModel::default(), &opts) {
            Err(Error::FitNotConverged { best, iterations, .. }) => {
                assert_eq!(iterations, 1);
                assert!(best.validate().is_ok());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn row_order_does_not_matter() {
        let truth = FitParams::nominal();
        let ds = synthetic_dataset(&truth, &FitModel::default(), &log_grid(0.3e-3, 100e-3, 8), 0.01, 9).unwrap();
        let mut rev = ds.clone();
        rev.rows.reverse();
        let a = fit(&ds, &truth, &FitModel::default(), &FitOptions::default()).unwrap();
        let b = fit(&rev, &truth, &FitModel::default(), &FitOptions::default()).unwrap();
        assert_eq!(a.params, b.params);
        let mut rb = b.residuals.clone();
        rb.reverse();
        assert_eq!(a.residuals, rb);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-4, 0.1, 200);
        assert_eq!((g[0], g[199]), (1e-4, 0.1));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    proptest! {
        #[test]
        fn parallel_at_least_orthogonal(power in 0.0f64..1.0, a in 0.01f64..1.0, d in 0.1f64..5.0) {
            let p = FitParams { gamma_ratio: a, optical_depth: d, s_per_watt: 0.47, residual_transmission: 0.8 };
            let t = FitModel::default().transmissions(&p, power).unwrap();
            prop_assert!(t.t_parallel >= t.t_orthogonal * (1.0 - 1e-12));
        }
    }
}
