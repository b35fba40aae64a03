use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            initial_step: None,
            max_steps: 1_000_000,
        }
    }
}

/// Values of the solution at the requested output abscissae.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates the scalar ODE `y' = f(t, y)` from `(t0, y0)` with an adaptive
/// Dormand-Prince 5(4) scheme, landing exactly on every abscissa in
/// `outputs` (which must be non-decreasing and start at or after `t0`).
pub fn integrate_adaptive<F>(
    mut f: F,
    t0: f64,
    y0: f64,
    outputs: &[f64],
    opts: OdeOptions,
) -> Result<OdeSolution>
where
    F: FnMut(f64, f64) -> f64,
{
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::domain("ODE output abscissae must be sorted and >= t0"));
    }
    let span = outputs.last().map_or(0.0, |&t| t - t0);
    let mut h = opts.initial_step.unwrap_or(if span > 0.0 { span * 1e-4 } else { 1.0 });
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, y);
    let mut accepted = 0;
    let mut rejected = 0;
    let mut out_y = Vec::with_capacity(outputs.len());

    for &target in outputs {
        while t < target {
            if accepted + rejected >= opts.max_steps {
                return Err(Error::numerical(
                    "integrate_adaptive",
                    format!("step budget of {} exhausted at t = {t:e}", opts.max_steps),
                ));
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            let k2 = f(t + C2 * step, y + step * A21 * k1);
            let k3 = f(t + C3 * step, y + step * (A31 * k1 + A32 * k2));
            let k4 = f(t + C4 * step, y + step * (A41 * k1 + A42 * k2 + A43 * k3));
            let k5 = f(
                t + C5 * step,
                y + step * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
            );
            let k6 = f(
                t + step,
                y + step * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
            );
            let y_new = y + step * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
            let k7 = f(t + step, y_new);
            let err = step * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
            let scale = opts.abs_tol + opts.rel_tol * y.abs().max(y_new.abs());
            let ratio = (err / scale).abs();
            if !ratio.is_finite() {
                return Err(Error::numerical("integrate_adaptive", "non-finite derivative"));
            }
            let factor = if ratio == 0.0 {
                5.0
            } else {
                (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
            };
            if ratio <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                k1 = k7;
                accepted += 1;
                if !last {
                    h = step * factor;
                }
            } else {
                rejected += 1;
                h = step * factor.min(1.0);
            }
        }
        out_y.push(y);
    }

    Ok(OdeSolution {
        t: outputs.to_vec(),
        y: out_y,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}
