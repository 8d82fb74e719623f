//! Tail and moment bounds as explicit functions of their parameters.
//!
//! Unspecified absolute constants (`C` or `c`) are ordinary parameters; the
//! [`calibrate`](crate::calibrate) module searches for working values. Every
//! tail bound is clamped to `[0, 1]`, and a bound that is only stated on an
//! interval of `t` returns [`BoundValue::OutOfRange`] outside of it.

use std::f64::consts::{LN_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::orlicz::AlphaParam;

/// `(√2 + 1)/(√2 − 1)`, the fixed branch of the max-Orlicz bound.
pub const MAX_ORLICZ_RATIO: f64 = (SQRT_2 + 1.0) / (SQRT_2 - 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundFamily {
    HansonWright,
    ConvexConc,
    ClassicalConvex,
    UniformHw,
    Tensor,
    TensorPi,
    TensorLsi,
    EuclidNorm,
    ProductTail,
    MaxProductTail,
    MaxOrliczShift,
    AlphaTail,
}

impl BoundFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::HansonWright => "hanson-wright",
            Self::ConvexConc => "convex-conc",
            Self::ClassicalConvex => "classical-convex",
            Self::UniformHw => "uniform-hw",
            Self::Tensor => "tensor",
            Self::TensorPi => "tensor-pi",
            Self::TensorLsi => "tensor-lsi",
            Self::EuclidNorm => "euclid-norm",
            Self::ProductTail => "product-tail",
            Self::MaxProductTail => "max-product-tail",
            Self::MaxOrliczShift => "max-orlicz-shift",
            Self::AlphaTail => "alpha-tail",
        }
    }
}

impl std::fmt::Display for BoundFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which deviation event a bound controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    /// `P(|S − center| ≥ t)`.
    TwoSided,
    /// `P(S − center ≥ t)`.
    Upper,
}

impl std::fmt::Display for Sidedness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::TwoSided => "two-sided",
            Self::Upper => "upper",
        })
    }
}

/// The closed interval `[lo, hi]` of `t` on which a bound is stated;
/// `hi = None` means unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub lo: f64,
    pub hi: Option<f64>,
}

impl Validity {
    pub const ALL: Validity = Validity { lo: 0.0, hi: None };

    pub fn upto(hi: f64) -> Self {
        Self { lo: 0.0, hi: Some(hi) }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && self.hi.is_none_or(|h| t <= h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundValue {
    Value(f64),
    OutOfRange,
}

impl BoundValue {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(v),
            Self::OutOfRange => None,
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(invalid("t", format!("must be >= 0, got {t}")));
    }
    Ok(())
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(name, format!("must be positive and finite, got {v}")));
    }
    Ok(())
}

fn nonnegative(name: &'static str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(invalid(name, format!("must be nonnegative and finite, got {v}")));
    }
    Ok(())
}

fn at_least_one(name: &'static str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(invalid(name, "must be at least 1"));
    }
    Ok(())
}

/// `min(1, prefactor · exp(−rate))`, with `rate = +∞` giving 0.
fn clamp_exp(prefactor: f64, rate: f64) -> f64 {
    if rate.is_nan() {
        return 1.0;
    }
    (prefactor * (-rate).exp()).clamp(0.0, 1.0)
}

/// `log n` floored at `log 2`, so that `n = 1` does not zero out a scale.
pub fn floored_log(n: u64) -> f64 {
    (n as f64).ln().max(LN_2)
}

/// Quadratic-form tail:
/// `min(1, 2 exp(−(1/C) min(t²/(K⁴ hs²), (t/(K² op))^(α/2))))`.
pub fn hw_tail_bound(t: f64, k: f64, hs: f64, op: f64, alpha: AlphaParam, c: f64) -> Result<f64> {
    check_t(t)?;
    positive("K", k)?;
    positive("C", c)?;
    nonnegative("hs", hs)?;
    nonnegative("op", op)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    Ok(clamp_exp(2.0, hw_exponent(t, k, hs, op, alpha.value()) / c))
}

/// The exponent `min(t²/(K⁴ hs²), (t/(K² op))^(α/2))` before the `1/C`
/// factor; a vanishing norm removes its branch.
pub fn hw_exponent(t: f64, k: f64, hs: f64, op: f64, alpha: f64) -> f64 {
    let k2 = k * k;
    let gauss = if hs > 0.0 { (t / (k2 * hs)).powi(2) } else { f64::INFINITY };
    let heavy = if op > 0.0 { (t / (k2 * op)).powf(alpha / 2.0) } else { f64::INFINITY };
    gauss.min(heavy)
}

/// The classical form `min(t²/(K⁴ hs²), t/(K² op))`, written independently
/// of [`hw_exponent`] for comparison at α = 2.
pub fn classical_hw_exponent(t: f64, k: f64, hs: f64, op: f64) -> f64 {
    let a = t * t / (k.powi(4) * hs * hs);
    let b = t / (k * k * op);
    if a < b {
        a
    } else {
        b
    }
}

/// `C K² (p^(1/2) hs + p^(2/α) op)`.
pub fn hw_moment_bound(p: f64, k: f64, hs: f64, op: f64, alpha: AlphaParam, c: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(invalid("p", format!("must be >= 2, got {p}")));
    }
    positive("K", k)?;
    positive("C", c)?;
    nonnegative("hs", hs)?;
    nonnegative("op", op)?;
    Ok(c * k * k * (p.sqrt() * hs + p.powf(2.0 / alpha.value()) * op))
}

/// The three convex-concentration regimes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConvexMode {
    /// Coordinates in `[a, b]`, convex Lipschitz `f`: two-sided Gaussian tail.
    BoundedClassical { a: f64, b: f64 },
    /// Coordinates in `[a, b]`, separately convex `f`: upper tail only.
    SeparatelyConvexBounded { a: f64, b: f64 },
    /// Orlicz-bounded coordinates with `K* = ||max_i |X_i| ||_{Ψ_α}`.
    ConvexOrlicz { k_star: f64, alpha: AlphaParam, c: f64 },
}

pub fn convex_concentration_bound(t: f64, mode: ConvexMode) -> Result<f64> {
    check_t(t)?;
    match mode {
        ConvexMode::BoundedClassical { a, b } | ConvexMode::SeparatelyConvexBounded { a, b } => {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(invalid("interval", format!("need finite a < b, got [{a}, {b}]")));
            }
            let rate = t * t / (2.0 * (b - a).powi(2));
            let pre = if matches!(mode, ConvexMode::BoundedClassical { .. }) { 2.0 } else { 1.0 };
            Ok(clamp_exp(pre, rate))
        }
        ConvexMode::ConvexOrlicz { k_star, alpha, c } => {
            positive("K*", k_star)?;
            positive("c", c)?;
            let a = alpha.value();
            Ok(clamp_exp(2.0, c * (t / k_star).powf(a)))
        }
    }
}

/// Upper tail of a supremum of quadratic forms:
/// `min(1, 2 exp(−(C/K*^α) min(t^α/E^α, t^(α/2)/op^(α/2))))` where
/// `E = E sup ||AX||₂` and `op = sup ||A||_op`.
pub fn uniform_hw_bound(t: f64, k_star: f64, e_sup: f64, sup_op: f64, alpha: AlphaParam, c: f64) -> Result<f64> {
    check_t(t)?;
    positive("K*", k_star)?;
    positive("C", c)?;
    nonnegative("E sup ||AX||", e_sup)?;
    nonnegative("sup op", sup_op)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let a = alpha.value();
    let first = if e_sup > 0.0 { (t / e_sup).powf(a) } else { f64::INFINITY };
    let second = if sup_op > 0.0 { (t / sup_op).powf(a / 2.0) } else { f64::INFINITY };
    Ok(clamp_exp(2.0, c / k_star.powf(a) * first.min(second)))
}

/// Scale and validity endpoint of the tensor convex-concentration bound.
fn tensor_scales(n: u64, d: u64, k: f64, alpha: f64, c_range: f64) -> (f64, f64) {
    let (nf, df) = (n as f64, d as f64);
    let log_term = floored_log(n).powf(1.0 / alpha);
    let spread = nf.powf((df - 1.0) / 2.0);
    if alpha >= 1.0 {
        let scale = df.sqrt() * spread * log_term * k;
        let hi = c_range * nf.powf(df / 2.0) * log_term / k;
        (scale, hi)
    } else {
        let scale = df.powf(1.0 / alpha) * spread * log_term * k;
        let hi = c_range * nf.powf(df / 2.0) * log_term * df.powf(1.0 / alpha - 0.5) / k;
        (scale, hi)
    }
}

/// Convex Lipschitz functions of a simple random tensor:
/// `min(1, 2 exp(−c (t/scale)^α))` on `[0, C_range · …]`, with
/// `log n` floored at `log 2`.
pub fn tensor_bound(t: f64, n: u64, d: u64, k: f64, alpha: AlphaParam, c: f64, c_range: f64) -> Result<BoundValue> {
    TailBoundCurve::new(CurveParams::Tensor {
        n,
        d,
        k,
        alpha: alpha.value(),
        c,
        c_range,
    })?
    .eval(t)
}

/// The sharper tensor bound driven by per-factor `||max_j |X_ij| ||_{Ψ_α}`.
#[allow(clippy::too_many_arguments)]
pub fn tensor_bound_sharp(
    t: f64,
    n: u64,
    k: f64,
    max_norms: &[f64],
    alpha: AlphaParam,
    c: f64,
    c_range: f64,
) -> Result<BoundValue> {
    TailBoundCurve::new(CurveParams::TensorSharp {
        n,
        k,
        max_norms: max_norms.to_vec(),
        alpha: alpha.value(),
        c,
        c_range,
    })?
    .eval(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalInequality {
    Poincare,
    Lsi,
}

/// Lipschitz functions of a simple random tensor whose factors satisfy a
/// Poincaré (exponential tail) or log-Sobolev (Gaussian tail) inequality.
pub fn tensor_functional_bound(
    t: f64,
    n: u64,
    d: u64,
    sigma: f64,
    which: FunctionalInequality,
    c: f64,
    c_range: f64,
) -> Result<BoundValue> {
    let params = match which {
        FunctionalInequality::Poincare => CurveParams::TensorPi { n, d, sigma, c, c_range },
        FunctionalInequality::Lsi => CurveParams::TensorLsi { n, d, sigma, c, c_range },
    };
    TailBoundCurve::new(params)?.eval(t)
}

/// `min(1, 2 exp(−c t^α))` for `| ||BX||₂ − ||B||_HS | ≥ t K² ||B||_op`.
pub fn euclidean_norm_bound(t: f64, alpha: AlphaParam, c: f64) -> Result<f64> {
    check_t(t)?;
    positive("c", c)?;
    Ok(clamp_exp(2.0, c * t.powf(alpha.value())))
}

/// Upper tail of `∏ ||X_i||₂ − n^(d/2)`, stated for `t ∈ [0, 2 n^(d/2)]`.
pub fn product_tail_bound(t: f64, n: u64, d: u64, k: f64, alpha: AlphaParam, c: f64) -> Result<BoundValue> {
    TailBoundCurve::new(CurveParams::ProductTail {
        n,
        d,
        k,
        alpha: alpha.value(),
        c,
    })?
    .eval(t)
}

/// Upper tail of `max_k n^(−k/2) ∏_{i≤k} ||X_i||₂ − 1`, stated for `u ∈ [0, 2]`.
pub fn max_product_tail_bound(u: f64, n: u64, d: u64, k: f64, alpha: AlphaParam, c: f64) -> Result<BoundValue> {
    TailBoundCurve::new(CurveParams::MaxProductTail {
        n,
        d,
        k,
        alpha: alpha.value(),
        c,
    })?
    .eval(u)
}

/// Explicit bound on `||max_i |X_i| ||_{Ψ_α}` for `n` centered coordinates
/// with `||X_i||_{Ψ_α} <= K`:
/// `C K max{ratio^(1/α), (log n)^(1/α) (2/log 2)^(1/α)}` with
/// `C = max{2^(1/α−1), 2^(1−1/α)}`.
pub fn max_orlicz_bound(n: u64, k: f64, alpha: AlphaParam) -> Result<f64> {
    at_least_one("n", n)?;
    positive("K", k)?;
    let a = alpha.value();
    let c = 2f64.powf(1.0 / a - 1.0).max(2f64.powf(1.0 - 1.0 / a));
    let fixed = MAX_ORLICZ_RATIO.powf(1.0 / a);
    let growing = ((n as f64).ln() * 2.0 / LN_2).powf(1.0 / a);
    Ok(c * k * fixed.max(growing))
}

/// Shift `(log n / c_α)^(1/α)` of the max-coordinate tail bound.
pub fn max_tail_shift(n: u64, alpha: AlphaParam) -> Result<f64> {
    at_least_one("n", n)?;
    Ok(((n as f64).ln() / alpha.lower_split()).powf(1.0 / alpha.value()))
}

/// `min(1, 2 exp(−c_α t^α))` for the event
/// `max_i |X_i| ≥ max_tail_shift(n, α) + t` with unit Orlicz norms.
pub fn max_tail_bound(t: f64, n: u64, alpha: AlphaParam) -> Result<f64> {
    check_t(t)?;
    at_least_one("n", n)?;
    Ok(clamp_exp(2.0, alpha.lower_split() * t.powf(alpha.value())))
}

/// Orlicz norm bound for `Y >= 0` with `P(Y ≥ c + t) <= 2 exp(−t^α)`:
/// `C_α^(1/α) max{ratio^(1/α), c (2/log 2)^(1/α)}`.
pub fn shifted_tail_to_orlicz(c_shift: f64, alpha: AlphaParam) -> Result<f64> {
    nonnegative("c", c_shift)?;
    let a = alpha.value();
    let fixed = MAX_ORLICZ_RATIO.powf(1.0 / a);
    let shifted = c_shift * (2.0 / LN_2).powf(1.0 / a);
    Ok(alpha.upper_split().powf(1.0 / a) * fixed.max(shifted))
}

/// Rate `(log c2 / log c1) c` such that
/// `c1 exp(−c r) <= c2 exp(−rate r)` whenever the left side is at most 1.
pub fn prefactor_adjust(c1: f64, c2: f64, c: f64) -> Result<f64> {
    if !(c1 > c2 && c2 > 1.0) || !c1.is_finite() {
        return Err(invalid("c1, c2", format!("need c1 > c2 > 1, got c1={c1}, c2={c2}")));
    }
    positive("c", c)?;
    Ok(c2.ln() / c1.ln() * c)
}

/// Curve `2 exp(−c (t/γ)^α)` dominating `exp(−(t/γ)²)`; the rate follows
/// from `exp(−s²) <= e · exp(−s^α)` and [`prefactor_adjust`]`(e, 2, 1)`.
pub fn subgaussian_to_alpha(gamma: f64, alpha: AlphaParam) -> Result<TailBoundCurve> {
    positive("gamma", gamma)?;
    if alpha.value() >= 2.0 {
        return Err(invalid("alpha", "the conversion is stated for alpha in (0, 2)"));
    }
    let c = prefactor_adjust(std::f64::consts::E, 2.0, 1.0)?;
    TailBoundCurve::new(CurveParams::AlphaTail {
        gamma,
        alpha: alpha.value(),
        c,
    })
}

/// Parameters of a tail curve, one variant per bound family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveParams {
    HansonWright { k: f64, hs: f64, op: f64, alpha: f64, c: f64 },
    /// `mode = 1`: convex, two-sided. `mode = 2`: separately convex, upper.
    ClassicalConvex { a: f64, b: f64, mode: u8 },
    ConvexConc { k_star: f64, alpha: f64, c: f64 },
    UniformHw { k_star: f64, e_sup: f64, sup_op: f64, alpha: f64, c: f64 },
    Tensor { n: u64, d: u64, k: f64, alpha: f64, c: f64, c_range: f64 },
    TensorSharp { n: u64, k: f64, max_norms: Vec<f64>, alpha: f64, c: f64, c_range: f64 },
    TensorPi { n: u64, d: u64, sigma: f64, c: f64, c_range: f64 },
    TensorLsi { n: u64, d: u64, sigma: f64, c: f64, c_range: f64 },
    EuclidNorm { alpha: f64, c: f64 },
    ProductTail { n: u64, d: u64, k: f64, alpha: f64, c: f64 },
    MaxProductTail { n: u64, d: u64, k: f64, alpha: f64, c: f64 },
    MaxOrliczShift { n: u64, alpha: f64 },
    AlphaTail { gamma: f64, alpha: f64, c: f64 },
}

impl CurveParams {
    pub fn family(&self) -> BoundFamily {
        match self {
            Self::HansonWright { .. } => BoundFamily::HansonWright,
            Self::ClassicalConvex { .. } => BoundFamily::ClassicalConvex,
            Self::ConvexConc { .. } => BoundFamily::ConvexConc,
            Self::UniformHw { .. } => BoundFamily::UniformHw,
            Self::Tensor { .. } | Self::TensorSharp { .. } => BoundFamily::Tensor,
            Self::TensorPi { .. } => BoundFamily::TensorPi,
            Self::TensorLsi { .. } => BoundFamily::TensorLsi,
            Self::EuclidNorm { .. } => BoundFamily::EuclidNorm,
            Self::ProductTail { .. } => BoundFamily::ProductTail,
            Self::MaxProductTail { .. } => BoundFamily::MaxProductTail,
            Self::MaxOrliczShift { .. } => BoundFamily::MaxOrliczShift,
            Self::AlphaTail { .. } => BoundFamily::AlphaTail,
        }
    }

    fn alpha(&self) -> Option<f64> {
        match self {
            Self::HansonWright { alpha, .. }
            | Self::ConvexConc { alpha, .. }
            | Self::UniformHw { alpha, .. }
            | Self::Tensor { alpha, .. }
            | Self::TensorSharp { alpha, .. }
            | Self::EuclidNorm { alpha, .. }
            | Self::ProductTail { alpha, .. }
            | Self::MaxProductTail { alpha, .. }
            | Self::MaxOrliczShift { alpha, .. }
            | Self::AlphaTail { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }
}

/// A validated tail curve `t ↦ bound(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "CurveRecord", try_from = "CurveRecord")]
pub struct TailBoundCurve {
    params: CurveParams,
    validity: Validity,
}

/// Serialized form: the derived fields are written for readers and checked
/// on load.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveRecord {
    family: BoundFamily,
    sidedness: Sidedness,
    validity: Validity,
    constant_name: Option<String>,
    params: CurveParams,
}

impl From<TailBoundCurve> for CurveRecord {
    fn from(c: TailBoundCurve) -> Self {
        Self {
            family: c.family(),
            sidedness: c.sidedness(),
            validity: c.validity,
            constant_name: c.constant_name().map(str::to_owned),
            params: c.params,
        }
    }
}

impl TryFrom<CurveRecord> for TailBoundCurve {
    type Error = Error;
    fn try_from(r: CurveRecord) -> Result<Self> {
        let curve = TailBoundCurve::new(r.params)?;
        if curve.family() != r.family || curve.sidedness() != r.sidedness {
            return Err(Error::Parse(format!(
                "curve record says {} / {}, parameters describe {} / {}",
                r.family,
                r.sidedness,
                curve.family(),
                curve.sidedness()
            )));
        }
        Ok(curve)
    }
}

impl TailBoundCurve {
    pub fn new(params: CurveParams) -> Result<Self> {
        if let Some(a) = params.alpha() {
            AlphaParam::new(a)?;
        }
        let validity = match &params {
            CurveParams::HansonWright { k, hs, op, c, .. } => {
                positive("K", *k)?;
                positive("C", *c)?;
                nonnegative("hs", *hs)?;
                nonnegative("op", *op)?;
                Validity::ALL
            }
            CurveParams::ClassicalConvex { a, b, mode } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(invalid("interval", format!("need finite a < b, got [{a}, {b}]")));
                }
                if !matches!(mode, 1 | 2) {
                    return Err(invalid("mode", format!("must be 1 or 2, got {mode}")));
                }
                Validity::ALL
            }
            CurveParams::ConvexConc { k_star, c, .. } => {
                positive("K*", *k_star)?;
                positive("c", *c)?;
                Validity::ALL
            }
            CurveParams::UniformHw { k_star, e_sup, sup_op, c, .. } => {
                positive("K*", *k_star)?;
                positive("C", *c)?;
                nonnegative("E sup ||AX||", *e_sup)?;
                nonnegative("sup op", *sup_op)?;
                Validity::ALL
            }
            CurveParams::Tensor { n, d, k, alpha, c, c_range } => {
                at_least_one("n", *n)?;
                at_least_one("d", *d)?;
                positive("K", *k)?;
                positive("c", *c)?;
                positive("C_range", *c_range)?;
                Validity::upto(tensor_scales(*n, *d, *k, *alpha, *c_range).1)
            }
            CurveParams::TensorSharp { n, k, max_norms, alpha, c, c_range } => {
                at_least_one("n", *n)?;
                if max_norms.is_empty() {
                    return Err(invalid("max_norms", "one norm per tensor factor is required"));
                }
                for m in max_norms {
                    positive("max_norms", *m)?;
                }
                positive("K", *k)?;
                positive("c", *c)?;
                positive("C_range", *c_range)?;
                let (_, hi) = sharp_scales(*n, *k, max_norms, *alpha, *c_range);
                Validity::upto(hi)
            }
            CurveParams::TensorPi { n, d, sigma, c, c_range } | CurveParams::TensorLsi { n, d, sigma, c, c_range } => {
                at_least_one("n", *n)?;
                at_least_one("d", *d)?;
                positive("sigma", *sigma)?;
                positive("c", *c)?;
                positive("C_range", *c_range)?;
                Validity::upto(c_range * (*n as f64).powf(*d as f64 / 2.0) * sigma)
            }
            CurveParams::EuclidNorm { c, .. } => {
                positive("c", *c)?;
                Validity::ALL
            }
            CurveParams::ProductTail { n, d, k, c, .. } => {
                at_least_one("n", *n)?;
                at_least_one("d", *d)?;
                positive("K", *k)?;
                positive("c", *c)?;
                Validity::upto(2.0 * (*n as f64).powf(*d as f64 / 2.0))
            }
            CurveParams::MaxProductTail { n, d, k, c, .. } => {
                at_least_one("n", *n)?;
                at_least_one("d", *d)?;
                positive("K", *k)?;
                positive("c", *c)?;
                Validity::upto(2.0)
            }
            CurveParams::MaxOrliczShift { n, .. } => {
                at_least_one("n", *n)?;
                Validity::ALL
            }
            CurveParams::AlphaTail { gamma, c, .. } => {
                positive("gamma", *gamma)?;
                positive("c", *c)?;
                Validity::ALL
            }
        };
        Ok(Self { params, validity })
    }

    pub fn family(&self) -> BoundFamily {
        self.params.family()
    }

    pub fn params(&self) -> &CurveParams {
        &self.params
    }

    pub fn validity(&self) -> Validity {
        self.validity
    }

    pub fn sidedness(&self) -> Sidedness {
        match &self.params {
            CurveParams::UniformHw { .. }
            | CurveParams::ProductTail { .. }
            | CurveParams::MaxProductTail { .. }
            | CurveParams::MaxOrliczShift { .. }
            | CurveParams::ClassicalConvex { mode: 2, .. } => Sidedness::Upper,
            _ => Sidedness::TwoSided,
        }
    }

    pub fn eval(&self, t: f64) -> Result<BoundValue> {
        check_t(t)?;
        if !self.validity.contains(t) {
            return Ok(BoundValue::OutOfRange);
        }
        let v = match &self.params {
            CurveParams::HansonWright { k, hs, op, alpha, c } => {
                if t == 0.0 {
                    1.0
                } else {
                    clamp_exp(2.0, hw_exponent(t, *k, *hs, *op, *alpha) / c)
                }
            }
            CurveParams::ClassicalConvex { a, b, mode } => {
                let rate = t * t / (2.0 * (b - a).powi(2));
                clamp_exp(if *mode == 1 { 2.0 } else { 1.0 }, rate)
            }
            CurveParams::ConvexConc { k_star, alpha, c } => clamp_exp(2.0, c * (t / k_star).powf(*alpha)),
            CurveParams::UniformHw { k_star, e_sup, sup_op, alpha, c } => {
                uniform_hw_bound(t, *k_star, *e_sup, *sup_op, AlphaParam::new(*alpha)?, *c)?
            }
            CurveParams::Tensor { n, d, k, alpha, c, c_range } => {
                let (scale, _) = tensor_scales(*n, *d, *k, *alpha, *c_range);
                clamp_exp(2.0, c * (t / scale).powf(*alpha))
            }
            CurveParams::TensorSharp { n, k, max_norms, alpha, c, c_range } => {
                let (scale, _) = sharp_scales(*n, *k, max_norms, *alpha, *c_range);
                clamp_exp(2.0, c * (t / scale).powf(*alpha))
            }
            CurveParams::TensorPi { n, d, sigma, c, .. } => {
                let scale = (*d as f64).sqrt() * (*n as f64).powf((*d as f64 - 1.0) / 2.0) * sigma;
                clamp_exp(2.0, c * t / scale)
            }
            CurveParams::TensorLsi { n, d, sigma, c, .. } => {
                let scale = *d as f64 * (*n as f64).powf(*d as f64 - 1.0) * sigma * sigma;
                clamp_exp(2.0, c * t * t / scale)
            }
            CurveParams::EuclidNorm { alpha, c } => clamp_exp(2.0, c * t.powf(*alpha)),
            CurveParams::ProductTail { n, d, k, alpha, c } => {
                let scale = k * k * (*d as f64).sqrt() * (*n as f64).powf((*d as f64 - 1.0) / 2.0);
                clamp_exp(2.0, c * (t / scale).powf(*alpha))
            }
            CurveParams::MaxProductTail { n, d, k, alpha, c } => {
                let x = (*n as f64).sqrt() * t / (k * k * (*d as f64).sqrt());
                clamp_exp(2.0, c * x.powf(*alpha))
            }
            CurveParams::MaxOrliczShift { n, alpha } => max_tail_bound(t, *n, AlphaParam::new(*alpha)?)?,
            CurveParams::AlphaTail { gamma, alpha, c } => clamp_exp(2.0, c * (t / gamma).powf(*alpha)),
        };
        Ok(BoundValue::Value(v))
    }

    /// Name of the calibratable constant, if the family has one.
    pub fn constant_name(&self) -> Option<&'static str> {
        match &self.params {
            CurveParams::HansonWright { .. } | CurveParams::UniformHw { .. } => Some("C"),
            CurveParams::ClassicalConvex { .. } | CurveParams::MaxOrliczShift { .. } => None,
            _ => Some("c"),
        }
    }

    /// The calibration knob: a positive scalar that divides the exponent's
    /// rate, so that increasing it weakens the bound. It is `C` for the
    /// quadratic-form bound, `1/C` for the uniform bound (whose `C`
    /// multiplies the rate) and `1/c` for all `c` families.
    pub fn knob(&self) -> Option<f64> {
        match &self.params {
            CurveParams::HansonWright { c, .. } => Some(*c),
            CurveParams::UniformHw { c, .. } => Some(1.0 / c),
            CurveParams::ClassicalConvex { .. } | CurveParams::MaxOrliczShift { .. } => None,
            CurveParams::ConvexConc { c, .. }
            | CurveParams::Tensor { c, .. }
            | CurveParams::TensorSharp { c, .. }
            | CurveParams::TensorPi { c, .. }
            | CurveParams::TensorLsi { c, .. }
            | CurveParams::EuclidNorm { c, .. }
            | CurveParams::ProductTail { c, .. }
            | CurveParams::MaxProductTail { c, .. }
            | CurveParams::AlphaTail { c, .. } => Some(1.0 / c),
        }
    }

    /// Converts a knob value back to the family's named constant.
    pub fn constant_for_knob(&self, knob: f64) -> Option<f64> {
        match &self.params {
            CurveParams::HansonWright { .. } => Some(knob),
            CurveParams::ClassicalConvex { .. } | CurveParams::MaxOrliczShift { .. } => None,
            _ => Some(1.0 / knob),
        }
    }

    /// The same curve with its knob set to `knob`.
    pub fn with_knob(&self, knob: f64) -> Result<Self> {
        positive("knob", knob)?;
        let mut params = self.params.clone();
        let constant = self
            .constant_for_knob(knob)
            .ok_or_else(|| invalid("knob", format!("family {} has no free constant", self.family())))?;
        match &mut params {
            CurveParams::HansonWright { c, .. }
            | CurveParams::UniformHw { c, .. }
            | CurveParams::ConvexConc { c, .. }
            | CurveParams::Tensor { c, .. }
            | CurveParams::TensorSharp { c, .. }
            | CurveParams::TensorPi { c, .. }
            | CurveParams::TensorLsi { c, .. }
            | CurveParams::EuclidNorm { c, .. }
            | CurveParams::ProductTail { c, .. }
            | CurveParams::MaxProductTail { c, .. }
            | CurveParams::AlphaTail { c, .. } => *c = constant,
            CurveParams::ClassicalConvex { .. } | CurveParams::MaxOrliczShift { .. } => unreachable!(),
        }
        Self::new(params)
    }
}

fn sharp_scales(n: u64, k: f64, max_norms: &[f64], alpha: f64, c_range: f64) -> (f64, f64) {
    let nf = n as f64;
    let d = max_norms.len() as f64;
    let s = if alpha >= 1.0 {
        max_norms.iter().map(|m| m * m).sum::<f64>().sqrt()
    } else {
        max_norms.iter().map(|m| m.powf(alpha)).sum::<f64>().powf(1.0 / alpha)
    };
    let scale = nf.powf((d - 1.0) / 2.0) * s;
    let hi = c_range * nf.powf(d / 2.0) * s / (k * k * d.sqrt());
    (scale, hi)
}
