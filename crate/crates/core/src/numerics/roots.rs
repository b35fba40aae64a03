use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop once the bracket (or Newton step) is below `rel_tol * |x|`.
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-15,
            abs_tol: 1e-300,
            max_iter: 200,
        }
    }
}

/// Safeguarded Newton iteration on a sign-changing bracket `[lo, hi]`.
///
/// `f` returns the function value and its derivative. A Newton step that
/// leaves the current bracket, or fails to shrink it fast enough, is
/// replaced by bisection, so convergence is guaranteed for any continuous
/// `f` with `f(lo) * f(hi) <= 0`.
pub fn newton_bisect<F>(mut f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket(format!(
            "f({lo:e}) = {f_lo:e} and f({hi:e}) = {f_hi:e} do not bracket a root"
        )));
    }
    let rising = f_hi > 0.0;

    let mut x = 0.5 * (lo + hi);
    for iter in 0..opts.max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == rising {
            hi = x;
        } else {
            lo = x;
        }
        let tol = opts.abs_tol.max(opts.rel_tol * x.abs());
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let newton = x - fx / dfx;
        // After many iterations Newton is evidently not converging; bisect.
        let next = if iter < 60 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= tol {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::numerical(
        "newton_bisect",
        format!("no convergence in {} iterations; bracket [{lo:e}, {hi:e}]", opts.max_iter),
    ))
}
