//! Exact (Clopper–Pearson) confidence limits for a binomial proportion.

use statrs::function::beta::beta_reg;

use crate::error::{invalid, Result};

fn check(k: u64, n: u64, level: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", "at least one trial is required"));
    }
    if k > n {
        return Err(invalid("k", format!("{k} successes out of {n} trials")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid("level", format!("must lie in (0, 1), got {level}")));
    }
    Ok(())
}

/// Solves `I_x(a, b) = target` for `x` in `[0, 1]`.
fn beta_quantile(a: f64, b: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sided equal-tailed interval with coverage at least `level`.
pub fn clopper_pearson(k: u64, n: u64, level: f64) -> Result<(f64, f64)> {
    check(k, n, level)?;
    let tail = 0.5 * (1.0 - level);
    let (kf, nf) = (k as f64, n as f64);
    let low = if k == 0 {
        0.0
    } else if k == n {
        tail.powf(1.0 / nf)
    } else {
        beta_quantile(kf, nf - kf + 1.0, tail)
    };
    let high = if k == n {
        1.0
    } else if k == 0 {
        1.0 - tail.powf(1.0 / nf)
    } else {
        beta_quantile(kf + 1.0, nf - kf, 1.0 - tail)
    };
    Ok((low, high))
}

/// One-sided upper limit: `P(p <= high) >= level`.
pub fn clopper_pearson_upper(k: u64, n: u64, level: f64) -> Result<f64> {
    check(k, n, level)?;
    let (kf, nf) = (k as f64, n as f64);
    Ok(if k == n {
        1.0
    } else if k == 0 {
        1.0 - (1.0 - level).powf(1.0 / nf)
    } else {
        beta_quantile(kf + 1.0, nf - kf, level)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// `P(Bin(n, p) <= k)` by direct summation of log-space terms.
    fn binom_cdf(k: u64, n: u64, p: f64) -> f64 {
        use statrs::function::gamma::ln_gamma;
        let nf = n as f64;
        (0..=k)
            .map(|i| {
                let i = i as f64;
                let log_choose = ln_gamma(nf + 1.0) - ln_gamma(i + 1.0) - ln_gamma(nf - i + 1.0);
                (log_choose + i * p.ln() + (nf - i) * (1.0 - p).ln()).exp()
            })
            .sum()
    }

    #[test]
    fn zero_successes_upper_limit() {
        let u = clopper_pearson_upper(0, 100, 0.95).unwrap();
        assert!((u - (1.0 - 0.05f64.powf(0.01))).abs() < 1e-15);
        assert!((u - 0.02951).abs() < 1e-5);
    }

    #[test]
    fn limits_invert_the_binomial_cdf() {
        for (k, n) in [(5u64, 10u64), (1, 50), (37, 400), (99, 100)] {
            let (lo, hi) = clopper_pearson(k, n, 0.95).unwrap();
            assert!((binom_cdf(k, n, hi) - 0.025).abs() < 1e-9, "k={k} n={n}");
            assert!((1.0 - binom_cdf(k - 1, n, lo) - 0.025).abs() < 1e-9, "k={k} n={n}");
            let up = clopper_pearson_upper(k, n, 0.95).unwrap();
            assert!((binom_cdf(k, n, up) - 0.05).abs() < 1e-9);
        }
        let (lo, hi) = clopper_pearson(5, 10, 0.95).unwrap();
        assert!((lo - 0.187086).abs() < 1e-6 && (hi - 0.812914).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(clopper_pearson(1, 0, 0.95).is_err());
        assert!(clopper_pearson(3, 2, 0.95).is_err());
        assert!(clopper_pearson_upper(0, 2, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn interval_contains_estimate_and_is_monotone(n in 1u64..5000, frac in 0.0f64..=1.0) {
            let k = ((n as f64) * frac).floor() as u64;
            let (lo, hi) = clopper_pearson(k, n, 0.95).unwrap();
            let p = k as f64 / n as f64;
            prop_assert!(lo <= p && p <= hi);
            prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
            if k < n {
                let (lo2, hi2) = clopper_pearson(k + 1, n, 0.95).unwrap();
                prop_assert!(lo2 >= lo && hi2 >= hi);
            }
            prop_assert!(clopper_pearson_upper(k, n, 0.95).unwrap() <= hi + 1e-12);
        }
    }
}
