//! Seedable samplers for the scalar laws, random vectors and simple random
//! tensors used throughout the crate, plus the truncation decomposition.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{check_finite, invalid, Error, Result};
use crate::numerics::{integrate, mean_and_se};
use crate::rng::StreamId;

/// Default cap on the number of entries of a materialized tensor.
pub const DEFAULT_TENSOR_BUDGET: usize = 1 << 24;

/// A scalar sampling law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistributionSpec {
    Constant { value: f64 },
    Rademacher,
    UniformBounded { a: f64, b: f64 },
    StandardGaussian,
    /// Symmetric sign times a Weibull magnitude: `P(|w| >= t) = exp(-t^shape)`.
    SymmetricWeibull { shape: f64 },
    /// `X * 1{|X| <= level}`.
    Truncated { base: Box<DistributionSpec>, level: f64 },
    /// `factor * X`.
    Scaled { base: Box<DistributionSpec>, factor: f64 },
}

impl DistributionSpec {
    pub fn weibull(shape: f64) -> Self {
        Self::SymmetricWeibull { shape }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::Scaled {
            base: Box::new(self),
            factor,
        }
    }

    pub fn truncated(self, level: f64) -> Self {
        Self::Truncated {
            base: Box::new(self),
            level,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { value } if !value.is_finite() => {
                Err(invalid("value", "constant must be finite"))
            }
            Self::UniformBounded { a, b } if !(a.is_finite() && b.is_finite() && a < b) => {
                Err(invalid("a,b", format!("need finite a < b, got a={a}, b={b}")))
            }
            Self::SymmetricWeibull { shape } if !(*shape > 0.0 && *shape <= 2.0) => {
                Err(invalid("shape", format!("must lie in (0, 2], got {shape}")))
            }
            Self::Truncated { base, level } => {
                if !(*level > 0.0 && level.is_finite()) {
                    return Err(invalid("level", format!("must be positive and finite, got {level}")));
                }
                base.validate()
            }
            Self::Scaled { base, factor } => {
                if !factor.is_finite() {
                    return Err(invalid("factor", "must be finite"));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Self::Constant { value } => *value == 0.0,
            Self::UniformBounded { a, b } => a == &-b,
            Self::Truncated { base, .. } | Self::Scaled { base, .. } => base.is_symmetric(),
            _ => true,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::UniformBounded { a, b } => 0.5 * (a + b),
            Self::Scaled { base, factor } => factor * base.mean(),
            Self::Truncated { base, level } => base.truncated_mean(*level),
            _ => 0.0,
        }
    }

    /// Second moment `E X^2`.
    pub fn second_moment(&self) -> f64 {
        match self {
            Self::Constant { value } => value * value,
            Self::Rademacher | Self::StandardGaussian => 1.0,
            Self::UniformBounded { a, b } => (a * a + a * b + b * b) / 3.0,
            Self::SymmetricWeibull { shape } => gamma(1.0 + 2.0 / shape),
            Self::Scaled { base, factor } => factor * factor * base.second_moment(),
            Self::Truncated { base, level } => base.truncated_second_moment(*level),
        }
    }

    pub fn variance(&self) -> f64 {
        (self.second_moment() - self.mean().powi(2)).max(0.0)
    }

    /// `E[X 1{|X| <= m}]`.
    fn truncated_mean(&self, m: f64) -> f64 {
        match self {
            _ if self.is_symmetric() => 0.0,
            Self::Constant { value } => {
                if value.abs() <= m {
                    *value
                } else {
                    0.0
                }
            }
            Self::UniformBounded { a, b } => {
                let lo = a.max(-m);
                let hi = b.min(m);
                if hi <= lo {
                    0.0
                } else {
                    0.5 * (hi * hi - lo * lo) / (b - a)
                }
            }
            Self::Scaled { base, factor } => factor * base.truncated_mean(m / factor.abs()),
            Self::Truncated { base, level } => base.truncated_mean(m.min(*level)),
            _ => 0.0,
        }
    }

    /// `E[X^2 1{|X| <= m}]`.
    fn truncated_second_moment(&self, m: f64) -> f64 {
        match self {
            Self::Constant { value } => {
                if value.abs() <= m {
                    value * value
                } else {
                    0.0
                }
            }
            Self::Rademacher => {
                if m >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::UniformBounded { a, b } => {
                let lo = a.max(-m);
                let hi = b.min(m);
                if hi <= lo {
                    0.0
                } else {
                    (hi.powi(3) - lo.powi(3)) / (3.0 * (b - a))
                }
            }
            Self::StandardGaussian => {
                let phi = (-0.5 * m * m).exp() / (2.0 * std::f64::consts::PI).sqrt();
                (2.0 * normal_cdf(m) - 1.0) - 2.0 * m * phi
            }
            Self::SymmetricWeibull { shape } => {
                // E[w^2; |w| <= m] = Gamma(1 + 2/s) * P(1 + 2/s, m^s)
                let a = 1.0 + 2.0 / shape;
                gamma(a) * gamma_lr(a, m.powf(*shape))
            }
            Self::Scaled { base, factor } => {
                if *factor == 0.0 {
                    0.0
                } else {
                    factor * factor * base.truncated_second_moment(m / factor.abs())
                }
            }
            Self::Truncated { base, level } => base.truncated_second_moment(m.min(*level)),
        }
    }

    /// Draws one value.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::UniformBounded { a, b } => a + (b - a) * rng.random::<f64>(),
            Self::StandardGaussian => rng.sample(StandardNormal),
            Self::SymmetricWeibull { shape } => {
                // Inverse CDF of the magnitude; U in (0, 1].
                let u = 1.0 - rng.random::<f64>();
                let magnitude = (-u.ln()).powf(1.0 / shape);
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
            Self::Truncated { base, level } => {
                let x = base.draw(rng);
                if x.abs() <= *level {
                    x
                } else {
                    0.0
                }
            }
            Self::Scaled { base, factor } => factor * base.draw(rng),
        }
    }

    /// Rescaled copy with unit variance. Requires a centered law with
    /// positive variance.
    pub fn unit_variance(&self) -> Result<DistributionSpec> {
        self.validate()?;
        if self.mean().abs() > 1e-12 {
            return Err(invalid("coord", format!("law must be centered, mean is {}", self.mean())));
        }
        let var = self.variance();
        if var <= 0.0 {
            return Err(invalid("coord", "law must have positive variance"));
        }
        if (var - 1.0).abs() < 1e-15 {
            return Ok(self.clone());
        }
        Ok(self.clone().scaled(1.0 / var.sqrt()))
    }

    /// Exact tail `P(|X| >= t)` for the families where it is available.
    pub fn abs_tail(&self, t: f64) -> Option<f64> {
        match self {
            Self::SymmetricWeibull { shape } => Some(if t <= 0.0 { 1.0 } else { (-t.powf(*shape)).exp() }),
            Self::StandardGaussian => Some(if t <= 0.0 { 1.0 } else { 2.0 * (1.0 - normal_cdf(t)) }),
            Self::Rademacher => Some(if t <= 1.0 { 1.0 } else { 0.0 }),
            Self::Scaled { base, factor } => {
                if *factor == 0.0 {
                    Some(if t <= 0.0 { 1.0 } else { 0.0 })
                } else {
                    base.abs_tail(t / factor.abs())
                }
            }
            _ => None,
        }
    }

    /// `E[exp(log_f(|X|)) 1{|X| <= cutoff}]` by closed form or quadrature.
    ///
    /// Returns `+inf` when the integral overflows.
    pub(crate) fn expect_abs_log(&self, log_f: &dyn Fn(f64) -> f64, cutoff: f64) -> f64 {
        const TOL: f64 = 1e-13;
        match self {
            Self::Constant { value } => {
                if value.abs() <= cutoff {
                    log_f(value.abs()).exp()
                } else {
                    0.0
                }
            }
            Self::Rademacher => {
                if cutoff >= 1.0 {
                    log_f(1.0).exp()
                } else {
                    0.0
                }
            }
            Self::UniformBounded { a, b } => {
                let lo = a.max(-cutoff);
                let hi = b.min(cutoff);
                if hi <= lo {
                    return 0.0;
                }
                let w = 1.0 / (b - a);
                let f = |x: f64| (log_f(x.abs())).exp() * w;
                if lo < 0.0 && hi > 0.0 {
                    panels(&f, lo, 0.0, TOL) + panels(&f, 0.0, hi, TOL)
                } else {
                    panels(&f, lo, hi, TOL)
                }
            }
            Self::StandardGaussian => {
                let upper = cutoff.min(60.0);
                let c = (2.0 / std::f64::consts::PI).sqrt();
                panels(&|x: f64| (log_f(x) - 0.5 * x * x).exp() * c, 0.0, upper, TOL)
            }
            Self::SymmetricWeibull { shape } => {
                // Substitute u = |w|^shape, so that u ~ Exp(1).
                let upper = cutoff.powf(*shape).min(800.0);
                let s = *shape;
                panels(&|u: f64| (log_f(u.powf(1.0 / s)) - u).exp(), 0.0, upper, TOL)
            }
            Self::Scaled { base, factor } => {
                let k = factor.abs();
                if k == 0.0 {
                    return log_f(0.0).exp();
                }
                base.expect_abs_log(&|x| log_f(k * x), cutoff / k)
            }
            Self::Truncated { base, level } => {
                let inside = base.expect_abs_log(log_f, cutoff.min(*level));
                let kept = base.expect_abs_log(&|_| 0.0, *level);
                inside + log_f(0.0).exp() * (1.0 - kept).max(0.0)
            }
        }
    }
}

fn panels(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const PANELS: usize = 64;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let lo = a + i as f64 * h;
            integrate(f, lo, lo + h, tol)
        })
        .sum()
}

pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { value } => write!(f, "constant:{value}"),
            Self::Rademacher => write!(f, "rademacher"),
            Self::UniformBounded { a, b } => write!(f, "uniform:{a}:{b}"),
            Self::StandardGaussian => write!(f, "gaussian"),
            Self::SymmetricWeibull { shape } => write!(f, "weibull:{shape}"),
            Self::Truncated { base, level } => write!(f, "truncated:{level}:{base}"),
            Self::Scaled { base, factor } => write!(f, "scaled:{factor}:{base}"),
        }
    }
}

/// Compact textual form used on the command line, e.g. `gaussian`,
/// `weibull:1.5`, `uniform:-1:1`, `scaled:0.5:rademacher`,
/// `truncated:3:gaussian`, or `unit:weibull:1` for the unit-variance rescaling.
impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let (spec, rest) = parse_parts(&parts)?;
        if !rest.is_empty() {
            return Err(Error::Parse(format!("trailing input in distribution `{s}`")));
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_parts<'a>(parts: &'a [&'a str]) -> Result<(DistributionSpec, &'a [&'a str])> {
    let num = |i: usize| -> Result<f64> {
        parts
            .get(i)
            .ok_or_else(|| Error::Parse(format!("missing parameter for `{}`", parts[0])))?
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("bad number `{}`: {e}", parts[i])))
    };
    let head = parts.first().copied().unwrap_or("");
    Ok(match head {
        "constant" => (DistributionSpec::Constant { value: num(1)? }, &parts[2..]),
        "rademacher" => (DistributionSpec::Rademacher, &parts[1..]),
        "gaussian" | "normal" => (DistributionSpec::StandardGaussian, &parts[1..]),
        "uniform" => (
            DistributionSpec::UniformBounded { a: num(1)?, b: num(2)? },
            &parts[3..],
        ),
        "weibull" => (DistributionSpec::weibull(num(1)?), &parts[2..]),
        "scaled" => {
            let factor = num(1)?;
            let (base, rest) = parse_parts(&parts[2..])?;
            (base.scaled(factor), rest)
        }
        "truncated" => {
            let level = num(1)?;
            let (base, rest) = parse_parts(&parts[2..])?;
            (base.truncated(level), rest)
        }
        "unit" => {
            let (base, rest) = parse_parts(&parts[1..])?;
            (base.unit_variance()?, rest)
        }
        other => return Err(Error::Parse(format!("unknown distribution family `{other}`"))),
    })
}

/// Draws `count` values from the stream.
pub fn sample(spec: &DistributionSpec, count: usize, stream: StreamId) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut rng = stream.rng();
    Ok((0..count).map(|_| spec.draw(&mut rng)).collect())
}

/// A simple random tensor `X_1 ⊗ ... ⊗ X_d` with i.i.d. coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub n: usize,
    pub d: usize,
    coord: DistributionSpec,
}

impl TensorSpec {
    /// The coordinate law is rescaled to unit variance; it must be centered.
    pub fn new(n: usize, d: usize, coord: &DistributionSpec) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid("n,d", "tensor dimensions must be at least 1"));
        }
        Ok(Self {
            n,
            d,
            coord: coord.unit_variance()?,
        })
    }

    pub fn coord(&self) -> &DistributionSpec {
        &self.coord
    }

    /// `n^d`, or `None` on overflow.
    pub fn entries(&self) -> Option<usize> {
        u32::try_from(self.d).ok().and_then(|d| self.n.checked_pow(d))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimpleTensor {
    pub factors: Vec<Vec<f64>>,
    /// Row-major entries, last index fastest.
    pub entries: Vec<f64>,
}

pub fn sample_tensor(spec: &TensorSpec, stream: StreamId) -> Result<SimpleTensor> {
    sample_tensor_with_budget(spec, stream, DEFAULT_TENSOR_BUDGET)
}

pub fn sample_tensor_with_budget(spec: &TensorSpec, stream: StreamId, budget: usize) -> Result<SimpleTensor> {
    check_tensor_budget(spec.n, spec.d, budget)?;
    let mut rng = stream.rng();
    let factors: Vec<Vec<f64>> = (0..spec.d)
        .map(|_| (0..spec.n).map(|_| spec.coord.draw(&mut rng)).collect())
        .collect();
    let entries = kronecker(&factors);
    Ok(SimpleTensor { factors, entries })
}

pub(crate) fn check_tensor_budget(n: usize, d: usize, budget: usize) -> Result<usize> {
    let size = u32::try_from(d).ok().and_then(|d| n.checked_pow(d));
    match size {
        Some(s) if s <= budget => Ok(s),
        _ => Err(Error::Resource(format!(
            "tensor with n={n}, d={d} exceeds the budget of {budget} entries"
        ))),
    }
}

/// Kronecker (outer) product of the factors in row-major order.
pub fn kronecker(factors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![1.0];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.len());
        for &a in &out {
            next.extend(f.iter().map(|&b| a * b));
        }
        out = next;
    }
    out
}

/// Splits `x` into its bounded part `Y = X 1{|X| <= M}` and remainder
/// `Z = X 1{|X| > M}`.
pub fn truncate(x: &[f64], level: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(level > 0.0 && level.is_finite()) {
        return Err(invalid("level", format!("must be positive and finite, got {level}")));
    }
    check_finite(x)?;
    Ok(x.iter()
        .map(|&v| if v.abs() <= level { (v, 0.0) } else { (0.0, v) })
        .unzip())
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Estimates the truncation level `8 E max_i |X_i|` for i.i.d. coordinates.
pub fn truncation_level(
    coord: &DistributionSpec,
    n: usize,
    stream: StreamId,
    repetitions: usize,
) -> Result<Estimate> {
    if repetitions == 0 {
        return Err(invalid("repetitions", "must be at least 1"));
    }
    coord.validate()?;
    let mut rng = stream.rng();
    let maxima: Vec<f64> = (0..repetitions)
        .map(|_| (0..n).map(|_| coord.draw(&mut rng).abs()).fold(0.0, f64::max))
        .collect();
    let (mean, se) = mean_and_se(&maxima);
    Ok(Estimate {
        value: 8.0 * mean,
        std_error: 8.0 * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_zero_samples() {
        let v = sample(&DistributionSpec::Constant { value: 0.0 }, 3, StreamId::new(1, 0)).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn rademacher_moments() {
        let n = 200_000;
        let v = sample(&DistributionSpec::Rademacher, n, StreamId::new(11, 0)).unwrap();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| x * x).sum::<f64>() / n as f64 - mean * mean;
        let tol = 3.0 / (n as f64).sqrt();
        assert!(mean.abs() < tol);
        assert!((var - 1.0).abs() < tol);
        assert!(v.iter().all(|x| x.abs() == 1.0));
    }

    #[test]
    fn weibull_one_tail_at_two() {
        let n = 400_000;
        let v = sample(&DistributionSpec::weibull(1.0), n, StreamId::new(5, 2)).unwrap();
        let p = v.iter().filter(|x| x.abs() >= 2.0).count() as f64 / n as f64;
        let truth = (-2.0f64).exp();
        let se = (truth * (1.0 - truth) / n as f64).sqrt();
        assert!((p - truth).abs() < 4.0 * se, "p={p} truth={truth}");
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(DistributionSpec::UniformBounded { a: 1.0, b: 1.0 }.validate().is_err());
        assert!(DistributionSpec::weibull(2.5).validate().is_err());
        assert!(DistributionSpec::weibull(0.0).validate().is_err());
        assert!(sample(&DistributionSpec::weibull(-1.0), 1, StreamId::new(0, 0)).is_err());
    }

    #[test]
    fn variances_match_closed_forms() {
        assert!((DistributionSpec::weibull(1.0).variance() - 2.0).abs() < 1e-12);
        assert!((DistributionSpec::weibull(2.0).variance() - 1.0).abs() < 1e-12);
        let u = DistributionSpec::UniformBounded { a: -1.0, b: 1.0 };
        assert!((u.variance() - 1.0 / 3.0).abs() < 1e-12);
        let unit = DistributionSpec::weibull(0.5).unit_variance().unwrap();
        assert!((unit.variance() - 1.0).abs() < 1e-12);
        // Truncated gaussian second moment against quadrature.
        let tg = DistributionSpec::StandardGaussian.truncated(1.5);
        let quad = DistributionSpec::StandardGaussian.expect_abs_log(&|x: f64| 2.0 * x.ln(), 1.5);
        assert!((tg.variance() - quad).abs() < 1e-9);
        let tw = DistributionSpec::weibull(1.0).truncated(2.0);
        let quadw = DistributionSpec::weibull(1.0).expect_abs_log(&|x: f64| 2.0 * x.ln(), 2.0);
        assert!((tw.variance() - quadw).abs() < 1e-9);
    }

    #[test]
    fn non_centered_law_cannot_be_unit_variance() {
        assert!(DistributionSpec::UniformBounded { a: 0.0, b: 1.0 }.unit_variance().is_err());
        assert!(DistributionSpec::Constant { value: 0.0 }.unit_variance().is_err());
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["gaussian", "rademacher", "weibull:1.5", "uniform:-2:3", "constant:0", "scaled:0.5:truncated:3:gaussian"] {
            let spec: DistributionSpec = s.parse().unwrap();
            let again: DistributionSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again);
        }
        let unit: DistributionSpec = "unit:weibull:1".parse().unwrap();
        assert!((unit.variance() - 1.0).abs() < 1e-12);
        assert!("weibull".parse::<DistributionSpec>().is_err());
        assert!("cauchy".parse::<DistributionSpec>().is_err());
    }

    #[test]
    fn kronecker_by_hand() {
        let t = kronecker(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(t, vec![3.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn tensor_single_entry_and_norm_factorization() {
        let spec = TensorSpec::new(1, 3, &DistributionSpec::StandardGaussian).unwrap();
        let t = sample_tensor(&spec, StreamId::new(3, 0)).unwrap();
        assert_eq!(t.entries.len(), 1);
        let prod: f64 = t.factors.iter().map(|f| f[0]).product();
        assert_eq!(t.entries[0], prod);

        let spec = TensorSpec::new(4, 3, &DistributionSpec::weibull(1.0)).unwrap();
        let t = sample_tensor(&spec, StreamId::new(3, 1)).unwrap();
        assert_eq!(t.entries.len(), 64);
        let norm = t.entries.iter().map(|v| v * v).sum::<f64>().sqrt();
        let prod: f64 = t
            .factors
            .iter()
            .map(|f| f.iter().map(|v| v * v).sum::<f64>().sqrt())
            .product();
        assert!((norm - prod).abs() <= 1e-12 * prod);
        // entry (i1, i2, i3) with i3 fastest
        let (i1, i2, i3) = (2, 1, 3);
        let idx = (i1 * 4 + i2) * 4 + i3;
        assert_eq!(t.entries[idx], t.factors[0][i1] * t.factors[1][i2] * t.factors[2][i3]);
    }

    #[test]
    fn tensor_over_budget_is_resource_error() {
        let spec = TensorSpec::new(100, 5, &DistributionSpec::Rademacher).unwrap();
        assert!(matches!(sample_tensor(&spec, StreamId::new(0, 0)), Err(Error::Resource(_))));
    }

    #[test]
    fn truncate_examples() {
        let (y, z) = truncate(&[3.0, -1.0, 5.0], 4.0).unwrap();
        assert_eq!(y, vec![3.0, -1.0, 0.0]);
        assert_eq!(z, vec![0.0, 0.0, 5.0]);
        let (y, z) = truncate(&[0.0, 0.0], 1.0).unwrap();
        assert_eq!((y, z), (vec![0.0, 0.0], vec![0.0, 0.0]));
        let x = [1.5, -2.5, 0.25];
        let (_, z) = truncate(&x, 2.5).unwrap();
        assert!(z.iter().all(|v| *v == 0.0));
        assert!(truncate(&x, f64::INFINITY).is_err());
        assert!(truncate(&x, 0.0).is_err());
    }

    #[test]
    fn truncation_level_examples() {
        let zero = truncation_level(&DistributionSpec::Constant { value: 0.0 }, 10, StreamId::new(0, 0), 10).unwrap();
        assert_eq!(zero.value, 0.0);
        let rad = truncation_level(&DistributionSpec::Rademacher, 5, StreamId::new(0, 0), 10).unwrap();
        assert_eq!(rad.value, 8.0);
        assert_eq!(rad.std_error, 0.0);
    }
}
