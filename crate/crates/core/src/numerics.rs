//! Small scalar numerics shared by several modules: adaptive quadrature,
//! bracketed bisection and a numerically stable log-mean-exp.

use crate::error::{Error, Result};

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    if !whole.is_finite() {
        return whole;
    }
    // Tolerance is absolute for small integrals and relative for large ones.
    let tol = tol * whole.abs().max(1.0);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 24)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || !delta.is_finite() || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Finds the boundary point of a monotone predicate on `(0, inf)`.
///
/// `accept(t)` must be false for small `t` and true for large `t`. Starting
/// from `[lo, hi]` the bracket is widened by `growth` until it straddles the
/// boundary, then bisected (geometrically) until `(hi - lo) <= rel_tol * hi`.
/// Returns the accepted end `hi`.
pub fn bisect_threshold<F: FnMut(f64) -> bool>(
    mut accept: F,
    mut lo: f64,
    mut hi: f64,
    growth: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut iter = 0;
    while accept(lo) {
        lo /= growth;
        iter += 1;
        if iter >= max_iter || lo == 0.0 {
            return Err(Error::Defect("could not bracket threshold from below".into()));
        }
    }
    while !accept(hi) {
        hi *= growth;
        iter += 1;
        if iter >= max_iter || !hi.is_finite() {
            return Err(Error::Defect("could not bracket threshold from above".into()));
        }
    }
    while hi - lo > rel_tol * hi {
        iter += 1;
        if iter > max_iter {
            return Err(Error::Defect(format!(
                "bisection did not reach tolerance {rel_tol} within {max_iter} iterations"
            )));
        }
        // Geometric midpoint keeps the relative resolution uniform.
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
        let mid = if mid <= lo || mid >= hi { 0.5 * (lo + hi) } else { mid };
        if accept(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `log(mean(exp(u_i)))` without overflow.
pub fn log_mean_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += (v - max).exp();
        count += 1;
    }
    max + (sum / count as f64).ln()
}

/// Mean and standard error of the mean.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_gaussian() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-12);
        assert!((v - 9.0).abs() < 1e-10);
        let g = integrate(|x| (-0.5 * x * x).exp(), -12.0, 12.0, 1e-12);
        assert!((g - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn bisect_finds_sqrt_two() {
        let r = bisect_threshold(|t| t * t >= 2.0, 0.1, 0.2, 2.0, 1e-12, 500).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
        assert!(r * r >= 2.0);
    }

    #[test]
    fn log_mean_exp_is_stable() {
        let v = [1000.0, 1000.0];
        assert!((log_mean_exp(v.iter().copied()) - 1000.0).abs() < 1e-12);
        let w = [0.0, 2f64.ln()];
        assert!((log_mean_exp(w.iter().copied()) - 1.5f64.ln()).abs() < 1e-12);
    }
}
