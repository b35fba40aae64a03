use crate::{Error, Result};

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson slopes.
///
/// Monotone data yields a monotone interpolant, so no overshoot appears
/// between grid points.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::domain(
                "interpolation needs at least two points of matching length",
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("interpolation abscissae must be strictly increasing"));
        }
        let n = x.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (d0, d1) = (secants[i - 1], secants[i]);
            if d0 * d1 <= 0.0 {
                slopes[i] = 0.0;
            } else {
                // Weighted harmonic mean (Fritsch-Butland / PCHIP form).
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                slopes[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
        }
        for (i, d) in secants.iter().enumerate() {
            if *d == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / d;
            let b = slopes[i + 1] / d;
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[i] = tau * a * d;
                slopes[i + 1] = tau * b * d;
            }
        }
        Ok(Self { x, y, slopes })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().expect("non-empty"))
    }

    /// Evaluates the interpolant; `t` must lie within the grid.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&t) {
            return Err(Error::domain(format!(
                "interpolation point {t} outside [{lo}, {hi}]"
            )));
        }
        let i = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            k if k >= self.x.len() => self.x.len() - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        Ok(h00 * self.y[i]
            + h10 * h * self.slopes[i]
            + h01 * self.y[i + 1]
            + h11 * h * self.slopes[i + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes() {
        let x = vec![0.0, 1.0, 2.5, 4.0];
        let y = vec![1.0, 0.5, 0.2, 0.1];
        let m = MonotoneCubic::new(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(m.eval(*xi).unwrap(), *yi);
        }
    }

    #[test]
    fn preserves_monotonicity_on_step_like_data() {
        let x: Vec<f64> = (0..8).map(f64::from).collect();
        let y = vec![10.0, 10.0, 9.9, 5.0, 0.2, 0.1, 0.1, 0.0];
        let m = MonotoneCubic::new(x, y).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=700 {
            let v = m.eval(k as f64 * 0.01).unwrap();
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn rejects_out_of_range() {
        let m = MonotoneCubic::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(m.eval(1.5).is_err());
    }
}
