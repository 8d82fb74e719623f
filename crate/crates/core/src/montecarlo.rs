//! Statistics of random objects and a deterministic parallel harness that
//! turns a statistic and a grid of thresholds into exceedance counts with
//! exact binomial confidence bands.
//!
//! Draws are generated in chunks of [`CHUNK_SIZE`] samples; chunk `k` always
//! uses stream `k` of the experiment seed. Workers only change which thread
//! processes a chunk, so results are identical for any worker count.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binomial::clopper_pearson;
use crate::bounds::Sidedness;
use crate::distributions::{check_tensor_budget, DistributionSpec, Estimate, DEFAULT_TENSOR_BUDGET};
use crate::error::{check_finite, invalid, Error, Result};
use crate::rng::{derive_seed, StreamId, CHUNK_SIZE};
use crate::specnorms::{centering_term, quadratic_form, SymMatrix};

/// Default number of pilot draws for an estimated center:
/// `max(10^5, 10 · grid points)`.
pub fn default_pilot_samples(grid_points: usize) -> u64 {
    100_000u64.max(10 * grid_points as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesNorm {
    /// `||Σ x_i a_i||₂`.
    Euclidean,
    /// `max_j |<e_j, Σ x_i a_i>|`, a supremum of linear forms.
    SupLinear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TensorFunction {
    /// `||X||₂` over the `n^d` entries.
    EuclideanNorm,
    /// `max |X_i1..id|`.
    MaxAbs,
    /// `<w, X>` with `w` the normalized all-ones tensor.
    Linear,
}

/// The random functional to evaluate. Every kind is 1-Lipschitz in the
/// Euclidean norm of its input except the quadratic forms (whose scale is
/// carried by the matrix norms), the product kinds (controlled through
/// `K` and `n, d`) and `max-abs`.
#[derive(Clone, Debug, PartialEq)]
pub enum StatisticKind {
    /// `xᵀAx − Σ a_ii var_i`.
    QuadraticForm { matrix: SymMatrix, variances: Vec<f64> },
    /// `max_A (xᵀAx − Σ a_ii var_i)` over a finite family.
    SupQuadraticForms { family: Vec<SymMatrix>, variances: Vec<f64> },
    /// `||Bx||₂` for an `m × n` matrix `B`.
    EuclidDeviation { b: DMatrix<f64> },
    /// `||x||₂` in dimension `n`.
    NormDeviation { n: usize },
    /// Largest singular value of a `rows × cols` matrix of coordinates.
    LargestSingularValue { rows: usize, cols: usize },
    /// Norm of `Σ x_i a_i`, where `a_i` are the columns of `coefficients`.
    RandomSeries { coefficients: DMatrix<f64>, norm: SeriesNorm },
    /// A 1-Lipschitz function of a simple random tensor.
    TensorLipschitz { n: usize, d: usize, function: TensorFunction },
    /// `∏_i ||X_i||₂` over `d` vectors in dimension `n`.
    ProductOfNorms { n: usize, d: usize },
    /// `max_k n^(−k/2) ∏_{i≤k} ||X_i||₂`.
    MaxProduct { n: usize, d: usize },
    /// `max_i |x_i|` in dimension `n`.
    MaxAbs { n: usize },
    /// `<w, x>`.
    LinearForm { weights: Vec<f64> },
}

impl StatisticKind {
    /// Number of scalar coordinates one draw consumes.
    pub fn draw_len(&self) -> usize {
        match self {
            Self::QuadraticForm { matrix, .. } => matrix.n(),
            Self::SupQuadraticForms { family, .. } => family.first().map_or(0, SymMatrix::n),
            Self::EuclidDeviation { b } => b.ncols(),
            Self::NormDeviation { n } | Self::MaxAbs { n } => *n,
            Self::LargestSingularValue { rows, cols } => rows * cols,
            Self::RandomSeries { coefficients, .. } => coefficients.ncols(),
            Self::TensorLipschitz { n, d, .. } | Self::ProductOfNorms { n, d } | Self::MaxProduct { n, d } => n * d,
            Self::LinearForm { weights } => weights.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::QuadraticForm { .. } => "quadratic-form",
            Self::SupQuadraticForms { .. } => "sup-quadratic-forms",
            Self::EuclidDeviation { .. } => "euclid-deviation",
            Self::NormDeviation { .. } => "norm-deviation",
            Self::LargestSingularValue { .. } => "largest-singular-value",
            Self::RandomSeries { .. } => "random-series-norm",
            Self::TensorLipschitz { .. } => "tensor-lipschitz",
            Self::ProductOfNorms { .. } => "product-of-norms",
            Self::MaxProduct { .. } => "max-product",
            Self::MaxAbs { .. } => "max-abs",
            Self::LinearForm { .. } => "linear-form",
        }
    }

    /// Short human-readable descriptor with the shape parameters.
    pub fn describe(&self) -> String {
        let shape = match self {
            Self::QuadraticForm { matrix, .. } => format!("n={}", matrix.n()),
            Self::SupQuadraticForms { family, .. } => {
                format!("n={}, members={}", self.draw_len(), family.len())
            }
            Self::EuclidDeviation { b } => format!("m={}, n={}", b.nrows(), b.ncols()),
            Self::NormDeviation { n } | Self::MaxAbs { n } => format!("n={n}"),
            Self::LargestSingularValue { rows, cols } => format!("rows={rows}, cols={cols}"),
            Self::RandomSeries { coefficients, norm } => format!(
                "m={}, n={}, norm={}",
                coefficients.nrows(),
                coefficients.ncols(),
                match norm {
                    SeriesNorm::Euclidean => "euclidean",
                    SeriesNorm::SupLinear => "sup-linear",
                }
            ),
            Self::TensorLipschitz { n, d, function } => format!(
                "n={n}, d={d}, f={}",
                match function {
                    TensorFunction::EuclideanNorm => "euclidean-norm",
                    TensorFunction::MaxAbs => "max-abs",
                    TensorFunction::Linear => "linear",
                }
            ),
            Self::ProductOfNorms { n, d } | Self::MaxProduct { n, d } => format!("n={n}, d={d}"),
            Self::LinearForm { weights } => format!("n={}", weights.len()),
        };
        format!("{}({shape})", self.name())
    }

    fn is_tensor(&self) -> bool {
        matches!(
            self,
            Self::TensorLipschitz { .. } | Self::ProductOfNorms { .. } | Self::MaxProduct { .. }
        )
    }

    fn validate(&self) -> Result<()> {
        let check_vars = |n: usize, vars: &[f64]| -> Result<()> {
            if vars.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: vars.len() });
            }
            check_finite(vars)
        };
        match self {
            Self::QuadraticForm { matrix, variances } => check_vars(matrix.n(), variances),
            Self::SupQuadraticForms { family, variances } => {
                let n = family.first().ok_or(Error::Empty)?.n();
                if let Some(bad) = family.iter().find(|a| a.n() != n) {
                    return Err(Error::DimensionMismatch { expected: n, got: bad.n() });
                }
                check_vars(n, variances)
            }
            Self::EuclidDeviation { b } | Self::RandomSeries { coefficients: b, .. } => check_finite(b.as_slice()),
            Self::LinearForm { weights } => check_finite(weights),
            Self::TensorLipschitz { n, d, .. } => {
                check_tensor_budget(*n, *d, DEFAULT_TENSOR_BUDGET)?;
                Ok(())
            }
            _ => Ok(()),
        }
        .and_then(|_| {
            if self.draw_len() == 0 {
                Err(invalid("statistic", "dimension must be at least 1"))
            } else {
                Ok(())
            }
        })
    }

    /// `E f(X)` where it has a closed form for coordinates with the given
    /// mean and variance.
    pub fn analytic_center(&self, coord_mean: f64, coord_var: f64) -> Option<f64> {
        let centered = coord_mean == 0.0;
        match self {
            // The form already subtracts its mean when the variances match.
            Self::QuadraticForm { variances, .. } if centered && variances.iter().all(|v| *v == coord_var) => Some(0.0),
            Self::EuclidDeviation { b } if centered && coord_var == 1.0 => Some(b.norm()),
            Self::NormDeviation { n } if centered && coord_var == 1.0 => Some((*n as f64).sqrt()),
            Self::ProductOfNorms { n, d } if centered && coord_var == 1.0 => Some((*n as f64).powf(*d as f64 / 2.0)),
            Self::MaxProduct { .. } if centered && coord_var == 1.0 => Some(1.0),
            Self::LinearForm { weights } => Some(coord_mean * weights.iter().sum::<f64>()),
            _ => None,
        }
    }
}

/// Reference point `m` of the deviation `S − m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// Closed-form `E f(X)` (or the reference point the bound is stated for).
    Analytic,
    Fixed(f64),
    /// Pilot-run estimate; `None` uses [`default_pilot_samples`].
    Estimated { pilot_samples: Option<u64> },
}

/// A statistic together with its coordinate law and the event it is
/// compared on: `|S − m|/scale ≥ t` (two-sided) or `(S − m)/scale ≥ t`.
#[derive(Clone, Debug, PartialEq)]
pub struct StatisticSpec {
    pub kind: StatisticKind,
    pub coord: DistributionSpec,
    pub centering: Centering,
    pub sidedness: Sidedness,
    pub scale: f64,
}

impl StatisticSpec {
    /// Tensor kinds rescale the coordinate law to unit variance.
    pub fn new(kind: StatisticKind, coord: DistributionSpec, centering: Centering, sidedness: Sidedness) -> Result<Self> {
        coord.validate()?;
        kind.validate()?;
        let coord = if kind.is_tensor() { coord.unit_variance()? } else { coord };
        Ok(Self {
            kind,
            coord,
            centering,
            sidedness,
            scale: 1.0,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid("scale", format!("must be positive and finite, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn describe(&self) -> String {
        format!("{} with {} coordinates", self.kind.describe(), self.coord)
    }
}

/// Evaluates the statistic on one draw of `kind.draw_len()` coordinates.
pub fn evaluate_statistic(kind: &StatisticKind, draw: &[f64]) -> Result<f64> {
    if draw.len() != kind.draw_len() {
        return Err(Error::DimensionMismatch {
            expected: kind.draw_len(),
            got: draw.len(),
        });
    }
    Ok(evaluate_unchecked(kind, draw))
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn evaluate_unchecked(kind: &StatisticKind, x: &[f64]) -> f64 {
    match kind {
        StatisticKind::QuadraticForm { matrix, variances } => {
            quadratic_form(matrix.matrix(), x) - centering_term(matrix.matrix(), variances)
        }
        StatisticKind::SupQuadraticForms { family, variances } => family
            .iter()
            .map(|a| quadratic_form(a.matrix(), x) - centering_term(a.matrix(), variances))
            .fold(f64::NEG_INFINITY, f64::max),
        StatisticKind::EuclidDeviation { b } => {
            let mut total = 0.0;
            for i in 0..b.nrows() {
                let row: f64 = (0..b.ncols()).map(|j| b[(i, j)] * x[j]).sum();
                total += row * row;
            }
            total.sqrt()
        }
        StatisticKind::NormDeviation { .. } => euclid(x),
        StatisticKind::LargestSingularValue { rows, cols } => {
            let m = DMatrix::from_row_slice(*rows, *cols, x);
            m.singular_values().iter().fold(0.0, |acc, s| acc.max(*s))
        }
        StatisticKind::RandomSeries { coefficients, norm } => {
            let m = coefficients.nrows();
            let comps = (0..m).map(|i| (0..coefficients.ncols()).map(|j| coefficients[(i, j)] * x[j]).sum::<f64>());
            match norm {
                SeriesNorm::Euclidean => comps.map(|v| v * v).sum::<f64>().sqrt(),
                SeriesNorm::SupLinear => comps.fold(0.0, |acc, v| acc.max(v.abs())),
            }
        }
        StatisticKind::TensorLipschitz { n, d, function } => {
            let factors: Vec<Vec<f64>> = x.chunks_exact(*n).map(<[f64]>::to_vec).collect();
            let entries = crate::distributions::kronecker(&factors);
            match function {
                TensorFunction::EuclideanNorm => euclid(&entries),
                TensorFunction::MaxAbs => entries.iter().fold(0.0, |acc, v| acc.max(v.abs())),
                TensorFunction::Linear => entries.iter().sum::<f64>() / (*n as f64).powf(*d as f64 / 2.0),
            }
        }
        StatisticKind::ProductOfNorms { n, .. } => x.chunks_exact(*n).map(euclid).product(),
        StatisticKind::MaxProduct { n, .. } => {
            let root = (*n as f64).sqrt();
            let mut prod = 1.0;
            let mut best = f64::NEG_INFINITY;
            for f in x.chunks_exact(*n) {
                prod *= euclid(f) / root;
                best = best.max(prod);
            }
            best
        }
        StatisticKind::MaxAbs { .. } => x.iter().fold(0.0, |acc, v| acc.max(v.abs())),
        StatisticKind::LinearForm { weights } => weights.iter().zip(x).map(|(w, v)| w * v).sum(),
    }
}

/// Harness settings that do not affect results other than through
/// `conf_level`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarnessOptions {
    pub conf_level: f64,
    pub workers: usize,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            conf_level: 0.95,
            workers: 1,
        }
    }
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Err(invalid("workers", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn chunk_count(n: u64) -> u64 {
    n.div_ceil(CHUNK_SIZE as u64)
}

fn chunk_len(n: u64, k: u64) -> usize {
    (n - k * CHUNK_SIZE as u64).min(CHUNK_SIZE as u64) as usize
}

/// Runs `per_sample` on every draw of chunk `k`.
fn for_each_draw(spec: &StatisticSpec, seed: u64, n: u64, k: u64, mut per_sample: impl FnMut(f64) -> Result<()>) -> Result<()> {
    let mut rng = StreamId::new(seed, k).rng();
    let mut buf = vec![0.0; spec.kind.draw_len()];
    for _ in 0..chunk_len(n, k) {
        for v in buf.iter_mut() {
            *v = spec.coord.draw(&mut rng);
        }
        let s = evaluate_unchecked(&spec.kind, &buf);
        if s.is_nan() {
            return Err(Error::Defect(format!("{} evaluated to NaN", spec.kind.name())));
        }
        per_sample(s)?;
    }
    Ok(())
}

/// Draws `n` values of the statistic, in stream order.
pub fn sample_statistic(spec: &StatisticSpec, n: u64, seed: u64, workers: usize) -> Result<Vec<f64>> {
    let len = usize::try_from(n).map_err(|_| Error::Resource("sample count exceeds memory".into()))?;
    let chunks: Vec<Vec<f64>> = with_pool(workers, || {
        (0..chunk_count(n))
            .into_par_iter()
            .map(|k| {
                let mut out = Vec::with_capacity(chunk_len(n, k));
                for_each_draw(spec, seed, n, k, |s| {
                    out.push(s);
                    Ok(())
                })?;
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut all = Vec::with_capacity(len);
    for c in chunks {
        all.extend(c);
    }
    Ok(all)
}

/// Running count, mean and centered sum of squares, merged in chunk order.
#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }
}

/// Pilot-run estimate of `E f(X)` with its standard error, on a stream
/// family derived from `seed` and disjoint from the main run.
pub fn center_estimate(spec: &StatisticSpec, n_pilot: u64, seed: u64, workers: usize) -> Result<Estimate> {
    if n_pilot < 2 {
        return Err(invalid("pilot samples", "at least 2 are required"));
    }
    let pilot_seed = derive_seed(seed, "pilot");
    let parts: Vec<Moments> = with_pool(workers, || {
        (0..chunk_count(n_pilot))
            .into_par_iter()
            .map(|k| {
                let mut m = Moments::default();
                for_each_draw(spec, pilot_seed, n_pilot, k, |s| {
                    m.push(s);
                    Ok(())
                })?;
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = total.m2 / (total.n - 1.0);
    Ok(Estimate {
        value: total.mean,
        std_error: (var.max(0.0) / total.n).sqrt(),
    })
}

/// Resolves the centering of `spec` into a value and its standard error.
pub fn resolve_center(spec: &StatisticSpec, grid_points: usize, seed: u64, workers: usize) -> Result<Estimate> {
    match spec.centering {
        Centering::Fixed(m) => {
            if !m.is_finite() {
                return Err(invalid("center", "must be finite"));
            }
            Ok(Estimate { value: m, std_error: 0.0 })
        }
        Centering::Analytic => spec
            .kind
            .analytic_center(spec.coord.mean(), spec.coord.variance())
            .map(|value| Estimate { value, std_error: 0.0 })
            .ok_or_else(|| {
                invalid(
                    "centering",
                    format!("{} has no closed-form center for {} coordinates", spec.kind.name(), spec.coord),
                )
            }),
        Centering::Estimated { pilot_samples } => center_estimate(
            spec,
            pilot_samples.unwrap_or_else(|| default_pilot_samples(grid_points)),
            seed,
            workers,
        ),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridScale {
    Linear,
    Log,
}

/// `points` ascending thresholds from `min` to `max` inclusive.
pub fn t_grid(min: f64, max: f64, points: usize, scale: GridScale) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(invalid("points", "must be at least 1"));
    }
    if !(min.is_finite() && max.is_finite() && min <= max && min >= 0.0) {
        return Err(invalid("t_grid", format!("need 0 <= min <= max, got [{min}, {max}]")));
    }
    if scale == GridScale::Log && min <= 0.0 {
        return Err(invalid("t_grid", "a log-scale grid needs min > 0"));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let steps = (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points)
        .map(|i| {
            let f = i as f64 / steps;
            match scale {
                GridScale::Linear => min + (max - min) * f,
                GridScale::Log => (min.ln() + (max.ln() - min.ln()) * f).exp(),
            }
        })
        .collect();
    grid[0] = min;
    grid[points - 1] = max;
    Ok(grid)
}

/// Exceedance counts over a grid of thresholds with exact binomial bands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub statistic: String,
    pub sidedness: Sidedness,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub conf_level: f64,
    pub center: f64,
    pub center_std_error: f64,
    pub scale: f64,
    pub t_grid: Vec<f64>,
    pub counts: Vec<u64>,
    pub p_hat: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
}

impl TailEstimate {
    /// Builds the probability columns from raw counts.
    #[allow(clippy::too_many_arguments)]
    pub fn from_counts(
        statistic: String,
        sidedness: Sidedness,
        seed: u64,
        n: u64,
        conf_level: f64,
        center: Estimate,
        scale: f64,
        t_grid: Vec<f64>,
        counts: Vec<u64>,
    ) -> Result<Self> {
        if counts.len() != t_grid.len() {
            return Err(Error::DimensionMismatch {
                expected: t_grid.len(),
                got: counts.len(),
            });
        }
        let mut p_hat = Vec::with_capacity(counts.len());
        let mut ci_low = Vec::with_capacity(counts.len());
        let mut ci_high = Vec::with_capacity(counts.len());
        for &c in &counts {
            let (lo, hi) = clopper_pearson(c, n, conf_level)?;
            p_hat.push(c as f64 / n as f64);
            ci_low.push(lo);
            ci_high.push(hi);
        }
        Ok(Self {
            statistic,
            sidedness,
            seed,
            n,
            conf_level,
            center: center.value,
            center_std_error: center.std_error,
            scale,
            t_grid,
            counts,
            p_hat,
            ci_low,
            ci_high,
        })
    }

    /// CSV with columns `t,N,count,p_hat,ci_low,ci_high`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,N,count,p_hat,ci_low,ci_high\n");
        for i in 0..self.t_grid.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                self.t_grid[i], self.n, self.counts[i], self.p_hat[i], self.ci_low[i], self.ci_high[i]
            );
        }
        out
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Empty);
    }
    check_finite(t_grid)?;
    if t_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("t_grid", "must be ascending"));
    }
    Ok(())
}

/// Estimates `P(|S − m|/scale ≥ t)` (or the upper-tail version) for every
/// `t` in the ascending grid from `n` independent draws.
pub fn empirical_tail(
    spec: &StatisticSpec,
    t_grid: &[f64],
    n: u64,
    seed: u64,
    options: HarnessOptions,
) -> Result<TailEstimate> {
    if n == 0 {
        return Err(invalid("N", "at least one draw is required"));
    }
    if !(options.conf_level > 0.0 && options.conf_level < 1.0) {
        return Err(invalid("conf_level", format!("must lie in (0, 1), got {}", options.conf_level)));
    }
    check_grid(t_grid)?;
    let center = resolve_center(spec, t_grid.len(), seed, options.workers)?;
    let (m, scale, two_sided) = (center.value, spec.scale, spec.sidedness == Sidedness::TwoSided);
    let hists: Vec<Vec<u64>> = with_pool(options.workers, || {
        (0..chunk_count(n))
            .into_par_iter()
            .map(|k| {
                // hist[j] = number of draws whose deviation exceeds exactly j grid points.
                let mut hist = vec![0u64; t_grid.len() + 1];
                for_each_draw(spec, seed, n, k, |s| {
                    let dev = (s - m) / scale;
                    let dev = if two_sided { dev.abs() } else { dev };
                    hist[t_grid.partition_point(|&t| t <= dev)] += 1;
                    Ok(())
                })?;
                Ok(hist)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut hist = vec![0u64; t_grid.len() + 1];
    for h in hists {
        for (acc, v) in hist.iter_mut().zip(h) {
            *acc += v;
        }
    }
    let mut counts = vec![0u64; t_grid.len()];
    let mut above = 0;
    for j in (0..t_grid.len()).rev() {
        above += hist[j + 1];
        counts[j] = above;
    }
    TailEstimate::from_counts(
        spec.describe(),
        spec.sidedness,
        seed,
        n,
        options.conf_level,
        center,
        scale,
        t_grid.to_vec(),
        counts,
    )
}

/// Comparison of `E sup_A ||Diag(A) W||₂` with `E sup_A ||A W||₂`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagComparison {
    pub diag: Estimate,
    pub full: Estimate,
    pub pass: bool,
}

/// Estimates both expectations from the same draws and passes when
/// `diag <= full + 2 (SE_diag + SE_full)`.
pub fn diag_comparison_check(
    family: &[SymMatrix],
    coord: &DistributionSpec,
    n: u64,
    seed: u64,
    workers: usize,
) -> Result<DiagComparison> {
    let dim = family.first().ok_or(Error::Empty)?.n();
    if let Some(bad) = family.iter().find(|a| a.n() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.n() });
    }
    if n < 2 {
        return Err(invalid("N", "at least 2 draws are required"));
    }
    coord.validate()?;
    let diags: Vec<Vec<f64>> = family.iter().map(|a| a.matrix().diagonal().iter().copied().collect()).collect();
    let parts: Vec<(Moments, Moments)> = with_pool(workers, || {
        (0..chunk_count(n))
            .into_par_iter()
            .map(|k| {
                let mut rng = StreamId::new(seed, k).rng();
                let mut w = vec![0.0; dim];
                let (mut left, mut right) = (Moments::default(), Moments::default());
                for _ in 0..chunk_len(n, k) {
                    for v in w.iter_mut() {
                        *v = coord.draw(&mut rng);
                    }
                    let full = family
                        .iter()
                        .map(|a| (a.matrix() * nalgebra::DVector::from_column_slice(&w)).norm())
                        .fold(0.0, f64::max);
                    let diag = diags
                        .iter()
                        .map(|d| d.iter().zip(&w).map(|(a, x)| (a * x).powi(2)).sum::<f64>().sqrt())
                        .fold(0.0, f64::max);
                    left.push(diag);
                    right.push(full);
                }
                (left, right)
            })
            .collect()
    })?;
    let (left, right) = parts
        .into_iter()
        .fold((Moments::default(), Moments::default()), |(l, r), (a, b)| (l.merge(a), r.merge(b)));
    let est = |m: Moments| Estimate {
        value: m.mean,
        std_error: (m.m2 / (m.n - 1.0) / m.n).max(0.0).sqrt(),
    };
    let (diag, full) = (est(left), est(right));
    Ok(DiagComparison {
        pass: diag.value <= full.value + 2.0 * (diag.std_error + full.std_error),
        diag,
        full,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gauss_spec(kind: StatisticKind, centering: Centering, side: Sidedness) -> StatisticSpec {
        StatisticSpec::new(kind, DistributionSpec::StandardGaussian, centering, side).unwrap()
    }

    #[test]
    fn statistic_examples() {
        let zero = StatisticKind::QuadraticForm {
            matrix: SymMatrix::zeros(3),
            variances: vec![1.0; 3],
        };
        assert_eq!(evaluate_statistic(&zero, &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        let sv = StatisticKind::LargestSingularValue { rows: 2, cols: 2 };
        assert!((evaluate_statistic(&sv, &[1.0, 0.0, 0.0, 1.0]).unwrap() - 1.0).abs() < 1e-14);
        let pm = StatisticKind::SupQuadraticForms {
            family: vec![SymMatrix::identity(2), SymMatrix::new(-DMatrix::identity(2, 2)).unwrap()],
            variances: vec![1.0, 1.0],
        };
        assert_eq!(evaluate_statistic(&pm, &[1.0, 1.0]).unwrap(), 0.0);
        // At (1, 0) the centered forms are -1 and +1.
        assert_eq!(evaluate_statistic(&pm, &[1.0, 0.0]).unwrap(), 1.0);
        assert!(evaluate_statistic(&pm, &[1.0]).is_err());
    }

    #[test]
    fn tensor_statistics_factorize() {
        let x = [1.0, -2.0, 0.5, 3.0, 1.5, -1.0];
        let prod = evaluate_statistic(&StatisticKind::ProductOfNorms { n: 2, d: 3 }, &x).unwrap();
        let full = evaluate_statistic(
            &StatisticKind::TensorLipschitz {
                n: 2,
                d: 3,
                function: TensorFunction::EuclideanNorm,
            },
            &x,
        )
        .unwrap();
        let by_hand = 5f64.sqrt() * 9.25f64.sqrt() * 3.25f64.sqrt();
        assert!((prod - by_hand).abs() <= 1e-12 * by_hand);
        assert!((full - by_hand).abs() <= 1e-12 * by_hand);
        let mp = evaluate_statistic(&StatisticKind::MaxProduct { n: 2, d: 3 }, &x).unwrap();
        let steps = [5f64.sqrt() / 2f64.sqrt(), (5.0 * 9.25f64).sqrt() / 2.0, by_hand / 8f64.sqrt()];
        assert!((mp - steps.iter().cloned().fold(f64::MIN, f64::max)).abs() < 1e-12);
    }

    #[test]
    fn counts_are_monotone_and_reproducible() {
        let spec = gauss_spec(
            StatisticKind::QuadraticForm {
                matrix: SymMatrix::identity(5),
                variances: vec![1.0; 5],
            },
            Centering::Analytic,
            Sidedness::TwoSided,
        );
        let grid = t_grid(0.1, 10.0, 12, GridScale::Log).unwrap();
        let opts = HarnessOptions {
            conf_level: 0.95,
            workers: 1,
        };
        let a = empirical_tail(&spec, &grid, 10_000, 42, opts).unwrap();
        assert!(a.counts.windows(2).all(|w| w[0] >= w[1]));
        for i in 0..grid.len() {
            assert!(a.ci_low[i] <= a.p_hat[i] && a.p_hat[i] <= a.ci_high[i]);
        }
        for workers in [4, 16] {
            let b = empirical_tail(&spec, &grid, 10_000, 42, HarnessOptions { workers, ..opts }).unwrap();
            assert_eq!(a.to_csv(), b.to_csv());
            assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        }
    }

    #[test]
    fn gaussian_upper_tail_at_zero_is_half() {
        let spec = gauss_spec(
            StatisticKind::LinearForm { weights: vec![1.0] },
            Centering::Analytic,
            Sidedness::Upper,
        );
        let est = empirical_tail(&spec, &[0.0], 40_000, 3, HarnessOptions::default()).unwrap();
        assert!(est.ci_low[0] < 0.5 && 0.5 < est.ci_high[0], "{:?}", est.p_hat);
    }

    #[test]
    fn prefix_draws_are_shared() {
        let spec = gauss_spec(StatisticKind::NormDeviation { n: 3 }, Centering::Analytic, Sidedness::TwoSided);
        let short = sample_statistic(&spec, 5000, 11, 1).unwrap();
        let long = sample_statistic(&spec, 10_000, 11, 3).unwrap();
        assert_eq!(&long[..5000], &short[..]);
    }

    #[test]
    fn centering_examples() {
        let constant = StatisticSpec::new(
            StatisticKind::LinearForm { weights: vec![1.0] },
            DistributionSpec::Constant { value: 2.0 },
            Centering::Estimated { pilot_samples: None },
            Sidedness::TwoSided,
        )
        .unwrap();
        let c = center_estimate(&constant, 1000, 1, 1).unwrap();
        assert_eq!(c.value, 2.0);
        assert_eq!(c.std_error, 0.0);

        let rad = StatisticSpec::new(
            StatisticKind::LinearForm { weights: vec![1.0] },
            DistributionSpec::Rademacher,
            Centering::Estimated { pilot_samples: None },
            Sidedness::TwoSided,
        )
        .unwrap();
        let r = center_estimate(&rad, 40_000, 2, 1).unwrap();
        assert!((r.std_error - 1.0 / 200.0).abs() < 1e-4);
        assert!(r.value.abs() < 4.0 * r.std_error);

        // Chi distribution with 4 degrees of freedom: sqrt(2) Γ(5/2)/Γ(2).
        let chi = gauss_spec(
            StatisticKind::NormDeviation { n: 4 },
            Centering::Estimated { pilot_samples: None },
            Sidedness::TwoSided,
        );
        let e = center_estimate(&chi, 400_000, 3, 1).unwrap();
        let exact = 2f64.sqrt() * statrs::function::gamma::gamma(2.5);
        assert!((exact - 1.8799).abs() < 1e-4);
        assert!((e.value - exact).abs() < 4.0 * e.std_error, "{} vs {exact}", e.value);
    }

    #[test]
    fn binomial_bands_cover() {
        // P(U >= 0.8) = 0.1 for U uniform on [-1, 1].
        let spec = StatisticSpec::new(
            StatisticKind::LinearForm { weights: vec![1.0] },
            DistributionSpec::UniformBounded { a: -1.0, b: 1.0 },
            Centering::Fixed(0.0),
            Sidedness::Upper,
        )
        .unwrap();
        let covered = (0..200u64)
            .filter(|&trial| {
                let e = empirical_tail(&spec, &[0.8], 500, 1000 + trial, HarnessOptions::default()).unwrap();
                e.ci_low[0] <= 0.1 && 0.1 <= e.ci_high[0]
            })
            .count();
        assert!(covered >= 180, "covered {covered}/200");
    }

    #[test]
    fn diag_comparison_examples() {
        let g = DistributionSpec::StandardGaussian;
        let id = diag_comparison_check(&[SymMatrix::identity(3)], &g, 5000, 1, 1).unwrap();
        assert_eq!(id.diag.value, id.full.value);
        let d = diag_comparison_check(&[SymMatrix::diagonal(&[1.0, 0.0])], &g, 5000, 1, 1).unwrap();
        assert_eq!(d.diag.value, d.full.value);
        let swap = SymMatrix::from_row_slice(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let s = diag_comparison_check(&[swap], &g, 5000, 1, 1).unwrap();
        assert_eq!(s.diag.value, 0.0);
        assert!(s.pass && s.full.value > 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = gauss_spec(StatisticKind::NormDeviation { n: 2 }, Centering::Analytic, Sidedness::TwoSided);
        let o = HarnessOptions::default();
        assert!(empirical_tail(&spec, &[2.0, 1.0], 10, 1, o).is_err());
        assert!(empirical_tail(&spec, &[1.0], 0, 1, o).is_err());
        assert!(empirical_tail(&spec, &[1.0], 10, 1, HarnessOptions { workers: 0, ..o }).is_err());
        let unknown = gauss_spec(
            StatisticKind::LargestSingularValue { rows: 2, cols: 2 },
            Centering::Analytic,
            Sidedness::TwoSided,
        );
        assert!(empirical_tail(&unknown, &[1.0], 10, 1, o).is_err());
        let huge = StatisticSpec::new(
            StatisticKind::TensorLipschitz {
                n: 1000,
                d: 4,
                function: TensorFunction::MaxAbs,
            },
            DistributionSpec::StandardGaussian,
            Centering::Analytic,
            Sidedness::TwoSided,
        );
        assert!(matches!(huge, Err(Error::Resource(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn tail_estimates_are_consistent(seed in 0u64..1000, n in 1u64..9000, points in 1usize..20) {
            let spec = gauss_spec(StatisticKind::MaxAbs { n: 3 }, Centering::Fixed(0.0), Sidedness::TwoSided);
            let grid = t_grid(0.0, 4.0, points, GridScale::Linear).unwrap();
            let e = empirical_tail(&spec, &grid, n, seed, HarnessOptions::default()).unwrap();
            prop_assert!(e.counts.windows(2).all(|w| w[0] >= w[1]));
            prop_assert_eq!(e.counts[0], n);
            for i in 0..grid.len() {
                prop_assert_eq!(e.p_hat[i], e.counts[i] as f64 / n as f64);
                prop_assert!(e.ci_low[i] <= e.p_hat[i] && e.p_hat[i] <= e.ci_high[i]);
            }
        }
    }
}
