//! Numerical quadrature used by the analytic divergence oracle and by tests.
//!
//! One-dimensional integrals use adaptive Simpson bisection; two-dimensional
//! integrals use a tensor Simpson grid with Richardson refinement for the
//! error estimate.

use crate::error::{Error, Result};

/// Cap on integrand evaluations per [`integrate_1d`] call. Smooth densities
/// settle in a few thousand; hitting the cap signals a divergent or wildly
/// misbehaved integrand.
const MAX_EVALS_1D: usize = 2_000_000;

/// Adaptive Simpson integration of `f` over `[lo, hi]` to absolute
/// tolerance `tol`. Returns the value and an error estimate.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::NonIntegrable(format!("bad interval [{lo}, {hi}]")));
    }
    let mut evals = 0usize;
    let mut eval = |x: f64| -> Result<f64> {
        evals += 1;
        if evals > MAX_EVALS_1D {
            return Err(Error::NonIntegrable(
                "evaluation budget exhausted (divergent or ill-behaved integrand)".into(),
            ));
        }
        let v = f(x);
        if v.is_nan() || v.is_infinite() {
            return Err(Error::NonIntegrable(format!("integrand not finite at {x}")));
        }
        Ok(v)
    };
    // Seed the work stack with a fixed panel split so narrow features away
    // from the interval ends are not missed.
    const PANELS: usize = 32;
    struct Panel {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    }
    let h = (hi - lo) / PANELS as f64;
    let mut stack: Vec<Panel> = Vec::with_capacity(64);
    for i in (0..PANELS).rev() {
        let a = lo + i as f64 * h;
        let b = a + h;
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (eval(a)?, eval(m)?, eval(b)?);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        stack.push(Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
            tol: tol / PANELS as f64,
            depth: 48,
        });
    }
    let mut total = 0.0;
    let mut err_total = 0.0;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = eval(lm)?;
        let frm = eval(rm)?;
        let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let delta = left + right - p.whole;
        if delta.abs() <= 15.0 * p.tol || p.depth == 0 {
            total += left + right + delta / 15.0;
            err_total += delta.abs() / 15.0;
        } else {
            stack.push(Panel {
                a: m,
                b: p.b,
                fa: p.fm,
                fm: frm,
                fb: p.fb,
                whole: right,
                tol: p.tol / 2.0,
                depth: p.depth - 1,
            });
            stack.push(Panel {
                a: p.a,
                b: m,
                fa: p.fa,
                fm: flm,
                fb: p.fm,
                whole: left,
                tol: p.tol / 2.0,
                depth: p.depth - 1,
            });
        }
    }
    Ok((total, err_total))
}

/// Composite Simpson rule on a tensor grid over a rectangle, with one
/// refinement step for the error estimate. `n` is the panel count per axis
/// at the finer level and must be even.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: &F,
    xr: (f64, f64),
    yr: (f64, f64),
    n: usize,
) -> Result<(f64, f64)> {
    let coarse = simpson_2d(f, xr, yr, n / 2)?;
    let fine = simpson_2d(f, xr, yr, n)?;
    // Richardson: Simpson error shrinks ~16x per halving.
    let err = (fine - coarse).abs() / 15.0;
    Ok((fine + (fine - coarse) / 15.0, err))
}

fn simpson_2d<F: Fn(f64, f64) -> f64>(
    f: &F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    n: usize,
) -> Result<f64> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::NonIntegrable("panel count must be even and >= 2".into()));
    }
    let hx = (x1 - x0) / n as f64;
    let hy = (y1 - y0) / n as f64;
    let w = |i: usize| -> f64 {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut sum = 0.0;
    for i in 0..=n {
        let x = x0 + i as f64 * hx;
        let wi = w(i);
        let mut row = 0.0;
        for j in 0..=n {
            let y = y0 + j as f64 * hy;
            let v = f(x, y);
            if v.is_nan() || v.is_infinite() {
                return Err(Error::NonIntegrable(format!(
                    "integrand not finite at ({x}, {y})"
                )));
            }
            row += w(j) * v;
        }
        sum += wi * row;
    }
    Ok(sum * hx * hy / 9.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_mass_is_one() {
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let (v, e) = integrate_1d(&f, -12.0, 12.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "v = {v}, err = {e}");
    }

    #[test]
    fn polynomial_exact() {
        let f = |x: f64| 3.0 * x * x;
        let (v, _) = integrate_1d(&f, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 8.0).abs() < 1e-10);
    }

    #[test]
    fn two_dim_gaussian_mass() {
        let f = |x: f64, y: f64| {
            (-0.5 * (x * x + y * y)).exp() / (2.0 * std::f64::consts::PI)
        };
        let (v, e) = integrate_2d(&f, (-8.0, 8.0), (-8.0, 8.0), 256).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "v = {v}, err = {e}");
    }

    #[test]
    fn nonfinite_integrand_is_error() {
        let f = |x: f64| 1.0 / x;
        assert!(integrate_1d(&f, -1.0, 1.0, 1e-8).is_err());
    }
}
