//! Matrix functionals used by the bounds: Hilbert–Schmidt, operator and
//! row-max norms, the diagonal part, centered quadratic forms, and the two
//! chaos norms that control `L^p` moments of quadratic forms in symmetric
//! Weibull variables.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, invalid, Error, Result};
use crate::orlicz::AlphaParam;
use crate::rng::{derive_seed, StreamId};

/// Largest dimension accepted by the chaos-norm optimizers.
pub const AL12_MAX_DIM: usize = 64;
/// Number of random restarts used by [`al12_norm_decoupled`].
pub const AL12_RESTARTS: usize = 10;

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_STEPS: usize = 100_000;
const POWER_RESTARTS: u64 = 3;
const DENSE_FALLBACK_MAX: usize = 512;

/// A real symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    m: DMatrix<f64>,
    symmetrized: bool,
}

impl SymMatrix {
    /// Wraps a square matrix, replacing it by `(A + Aᵀ)/2` if it is not
    /// exactly symmetric (see [`SymMatrix::was_symmetrized`]).
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        check_finite(m.as_slice())?;
        if m == m.transpose() {
            Ok(Self { m, symmetrized: false })
        } else {
            let sym = (&m + m.transpose()) * 0.5;
            Ok(Self { m: sym, symmetrized: true })
        }
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n, n),
            symmetrized: false,
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self {
            m: DMatrix::from_diagonal(&DVector::from_column_slice(values)),
            symmetrized: false,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: DMatrix::zeros(n, n),
            symmetrized: false,
        }
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn was_symmetrized(&self) -> bool {
        self.symmetrized
    }

    /// `Diag(A)`: the diagonal part with zero off-diagonal entries.
    pub fn diag_part(&self) -> SymMatrix {
        Self {
            m: DMatrix::from_diagonal(&self.m.diagonal()),
            symmetrized: false,
        }
    }
}

/// The norms of a symmetric matrix that enter the bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBundle {
    pub hs: f64,
    pub op: f64,
    /// `||A||_m = max_i (sum_j a_ij^2)^(1/2)`.
    pub row_max: f64,
    pub diag_hs: f64,
    pub max_abs_diag: f64,
}

pub fn norm_bundle(a: &SymMatrix) -> Result<NormBundle> {
    let m = a.matrix();
    let diag = m.diagonal();
    Ok(NormBundle {
        hs: hs_norm(m),
        op: operator_norm(m)?,
        row_max: row_max_norm(m),
        diag_hs: diag.norm(),
        max_abs_diag: diag.iter().fold(0.0, |acc, v| acc.max(v.abs())),
    })
}

pub fn hs_norm(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

pub fn row_max_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
}

/// Largest singular value by power iteration on `MᵀM` with three
/// deterministic random starts; falls back to a dense decomposition when the
/// iteration stalls.
pub fn operator_norm(m: &DMatrix<f64>) -> Result<f64> {
    check_finite(m.as_slice())?;
    let cols = m.ncols();
    if cols == 0 || m.nrows() == 0 {
        return Ok(0.0);
    }
    if m.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let seed = derive_seed(0x6f70_6e6f_726d, "power-iteration");
    let mut best: f64 = 0.0;
    for restart in 0..POWER_RESTARTS {
        let mut rng = StreamId::new(seed, restart).rng();
        let start = DVector::from_fn(cols, |_, _| rng.sample::<f64, _>(StandardNormal));
        match power_iteration(m, start) {
            Some(s) => best = best.max(s),
            None => {
                if m.nrows().max(cols) > DENSE_FALLBACK_MAX {
                    return Err(Error::Defect(format!(
                        "power iteration did not converge in {POWER_MAX_STEPS} steps"
                    )));
                }
                return Ok(dense_operator_norm(m));
            }
        }
    }
    Ok(best)
}

/// Returns `sqrt(λ_max(MᵀM))`, or `None` without convergence.
fn power_iteration(m: &DMatrix<f64>, start: DVector<f64>) -> Option<f64> {
    let mut v = start;
    let norm = v.norm();
    if norm == 0.0 {
        return None;
    }
    v /= norm;
    for _ in 0..POWER_MAX_STEPS {
        let mv = m * &v;
        let w = m.tr_mul(&mv);
        let lambda = mv.norm_squared();
        if lambda == 0.0 {
            // Start orthogonal to the row space; the caller tries other starts.
            return Some(0.0);
        }
        let residual = (&w - &v * lambda).norm();
        if residual <= POWER_TOL * lambda {
            return Some(lambda.sqrt());
        }
        let wn = w.norm();
        v = w / wn;
    }
    None
}

pub fn dense_operator_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().iter().fold(0.0, |acc, v| acc.max(*v))
}

/// `xᵀAx − Σ_i a_ii var_i`.
pub fn quadratic_form_centered(a: &SymMatrix, x: &[f64], variances: &[f64]) -> Result<f64> {
    let n = a.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    if variances.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: variances.len(),
        });
    }
    Ok(quadratic_form(a.matrix(), x) - centering_term(a.matrix(), variances))
}

pub(crate) fn quadratic_form(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * x[j];
        }
        total += x[i] * row;
    }
    total
}

pub(crate) fn centering_term(m: &DMatrix<f64>, variances: &[f64]) -> f64 {
    variances.iter().enumerate().map(|(i, v)| m[(i, i)] * v).sum()
}

/// Result of a chaos-norm maximization: the best value found (a certified
/// lower bound on the supremum) and the analytic upper bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Al12Estimate {
    pub value: f64,
    pub upper_bound: f64,
    /// Value reached from each start, in start order.
    pub restart_values: Vec<f64>,
}

fn check_al12(a: &DMatrix<f64>, p: f64, alpha: AlphaParam) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    if a.nrows() > AL12_MAX_DIM {
        return Err(invalid(
            "n",
            format!("chaos norms are limited to n <= {AL12_MAX_DIM}, got {}", a.nrows()),
        ));
    }
    if !(p >= 2.0 && p.is_finite()) {
        return Err(invalid("p", format!("must be >= 2, got {p}")));
    }
    if alpha.value() <= 1.0 {
        return Err(invalid("alpha", "chaos norms are defined here for alpha in (1, 2]"));
    }
    check_finite(a.as_slice())
}

/// `min(z^2, |z|^α)`, the constraint profile of both chaos norms.
pub fn constraint_profile(z: f64, alpha: f64) -> f64 {
    let z = z.abs();
    if z <= 1.0 {
        z * z
    } else {
        z.powf(alpha)
    }
}

/// Exact solution of `max Σ w_i z_i` subject to `Σ min(z_i², z_i^α) <= p`,
/// `z >= 0`, for nonnegative weights and α in (1, 2].
///
/// In budget variables `b_i = min(z_i², z_i^α)` the objective is concave on
/// each side of `b_i = 1`, and an exchange argument shows optimal budgets
/// are ordered like the weights. So the coordinates with `z_i > 1` are a
/// top-k set; for each k the problem is a concave program solved by one
/// Lagrange multiplier.
pub fn max_budgeted_sum(weights: &[f64], p: f64, alpha: AlphaParam) -> (f64, Vec<f64>) {
    let a = alpha.value();
    let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&i, &j| weights[j].total_cmp(&weights[i]).then(i.cmp(&j)));
    let mut best = (0.0, vec![0.0; weights.len()]);
    if order.is_empty() {
        return best;
    }
    let w: Vec<f64> = order.iter().map(|&i| weights[i]).collect();
    let max_high = (p.floor() as usize).min(w.len());
    for k in 0..=max_high {
        let budgets = regime_budgets(&w, k, p, a);
        let value: f64 = w.iter().zip(&budgets).map(|(wi, b)| wi * budget_to_z(*b, a)).sum();
        if value > best.0 {
            let mut z = vec![0.0; weights.len()];
            for (pos, &i) in order.iter().enumerate() {
                z[i] = budget_to_z(budgets[pos], a);
            }
            best = (value, z);
        }
    }
    best
}

fn budget_to_z(b: f64, a: f64) -> f64 {
    if b <= 1.0 {
        b.sqrt()
    } else {
        b.powf(1.0 / a)
    }
}

/// Budgets for the regime where the first `k` (largest) weights sit at or
/// above the kink and the rest at or below it.
fn regime_budgets(w: &[f64], k: usize, p: f64, a: f64) -> Vec<f64> {
    let high_exp = if a < 2.0 { a / (a - 1.0) } else { 2.0 };
    let budgets_at = |mu: f64| -> Vec<f64> {
        w.iter()
            .enumerate()
            .map(|(i, wi)| {
                if i < k {
                    (wi / (a * mu)).powf(high_exp).max(1.0)
                } else {
                    (wi / (2.0 * mu)).powi(2).min(1.0)
                }
            })
            .collect()
    };
    let total = |mu: f64| budgets_at(mu).iter().sum::<f64>();
    let floor = k as f64;
    if p <= floor {
        return w.iter().enumerate().map(|(i, _)| if i < k { 1.0 } else { 0.0 }).collect();
    }
    if k == 0 && (w.len() as f64) <= p {
        // Every coordinate saturates at the kink without exhausting the budget.
        return vec![1.0; w.len()];
    }
    // total(mu) is nonincreasing in mu; bracket total = p.
    let mut lo = 1.0;
    let mut hi = 1.0;
    while total(lo) < p {
        lo *= 0.5;
    }
    while total(hi) > p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if total(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    budgets_at(hi)
}

/// `||A||_{{1,2},p} = 2 sup{Σ a_ij x_ij : Σ_i min(Σ_j x_ij², (Σ_j x_ij²)^(α/2)) <= p}`.
///
/// Uses the factorization `x_ij = z_i y_ij` with unit rows `y_i`; the inner
/// maximum is `y_i = a_i / |a_i|`, leaving a budgeted problem over the row
/// magnitudes `z` that is solved exactly by [`max_budgeted_sum`].
pub fn al12_norm_coupled(a: &DMatrix<f64>, p: f64, alpha: AlphaParam) -> Result<Al12Estimate> {
    check_al12(a, p, alpha)?;
    let rows: Vec<f64> = a.row_iter().map(|r| r.norm()).collect();
    let (value, _) = max_budgeted_sum(&rows, p, alpha);
    let value = 2.0 * value;
    Ok(Al12Estimate {
        value,
        upper_bound: coupled_upper_bound(a, p),
        restart_values: vec![value],
    })
}

/// `2 p^(1/2) ||A||_HS + 2 p ||A||_m`.
pub fn coupled_upper_bound(a: &DMatrix<f64>, p: f64) -> f64 {
    2.0 * p.sqrt() * hs_norm(a) + 2.0 * p * row_max_norm(a)
}

/// `4 p^(2/α) ||A||_op`.
pub fn decoupled_upper_bound(a: &DMatrix<f64>, p: f64, alpha: AlphaParam) -> Result<f64> {
    Ok(4.0 * p.powf(2.0 / alpha.value()) * operator_norm(a)?)
}

/// `||A||_{{1},{2},p} = sup{Σ a_ij x_i y_j : Σ min(x_i², |x_i|^α) <= p, same for y}`.
///
/// Alternating maximization: for fixed `y` the optimal `x` is the budgeted
/// maximizer for the weights `|Ay|` with matching signs, and symmetrically.
/// Starts from the top singular pair and [`AL12_RESTARTS`] seeded random
/// vectors; returns the best value.
pub fn al12_norm_decoupled(a: &DMatrix<f64>, p: f64, alpha: AlphaParam) -> Result<Al12Estimate> {
    check_al12(a, p, alpha)?;
    let n = a.nrows();
    let upper_bound = decoupled_upper_bound(a, p, alpha)?;
    if n == 0 || a.iter().all(|v| *v == 0.0) {
        return Ok(Al12Estimate {
            value: 0.0,
            upper_bound,
            restart_values: vec![0.0],
        });
    }
    let mut starts: Vec<DVector<f64>> = Vec::with_capacity(AL12_RESTARTS + 1);
    let svd = a.clone().svd(false, true);
    if let Some(v_t) = svd.v_t.as_ref() {
        let (imax, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, s)| if *s > acc.1 { (i, *s) } else { acc });
        starts.push(v_t.row(imax).transpose());
    }
    let seed = derive_seed(0x616c_3132, "decoupled-restarts");
    for r in 0..AL12_RESTARTS {
        let mut rng = StreamId::new(seed, r as u64).rng();
        starts.push(DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal)));
    }
    let restart_values: Vec<f64> = starts.into_iter().map(|y0| alternate(a, y0, p, alpha)).collect();
    let value = restart_values.iter().copied().fold(0.0, f64::max);
    Ok(Al12Estimate {
        value,
        upper_bound,
        restart_values,
    })
}

/// Best response: the signed budgeted maximizer of `<v, x>`.
fn best_response(v: &DVector<f64>, p: f64, alpha: AlphaParam) -> (f64, DVector<f64>) {
    let weights: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let (value, z) = max_budgeted_sum(&weights, p, alpha);
    let x = DVector::from_fn(v.len(), |i, _| if v[i] < 0.0 { -z[i] } else { z[i] });
    (value, x)
}

fn alternate(a: &DMatrix<f64>, y0: DVector<f64>, p: f64, alpha: AlphaParam) -> f64 {
    let (_, mut y) = best_response(&y0, p, alpha);
    let mut value = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let (_, x) = best_response(&(a * &y), p, alpha);
        let (next, y_new) = best_response(&a.tr_mul(&x), p, alpha);
        y = y_new;
        if next <= value * (1.0 + 1e-14) {
            value = value.max(next);
            break;
        }
        value = next;
    }
    value.max(0.0)
}

/// The coupled norm optimized directly over the raw `n × n` variable `x`,
/// without the row factorization: the objective `2 <A, s(x) x>` is maximized
/// over directions `x`, where `s(x)` scales `x` onto the constraint boundary.
/// Gradient ascent with central differences and several seeded starts.
/// Intended for small `n` as an independent cross-check.
pub fn al12_norm_coupled_raw(a: &DMatrix<f64>, p: f64, alpha: AlphaParam, seed: u64) -> Result<f64> {
    check_al12(a, p, alpha)?;
    let n = a.nrows();
    if a.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let al = alpha.value();
    let objective = |x: &[f64]| -> f64 {
        let rows: Vec<f64> = (0..n)
            .map(|i| x[i * n..(i + 1) * n].iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        let load = |s: f64| rows.iter().map(|r| constraint_profile(s * r, al)).sum::<f64>();
        if rows.iter().all(|r| *r == 0.0) {
            return f64::NEG_INFINITY;
        }
        // load(s) is increasing in s; find load(s) = p.
        let (mut lo, mut hi) = (0.0, 1.0);
        while load(hi) < p {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if load(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        let s = lo;
        let inner: f64 = a.transpose().iter().zip(x).map(|(aij, xij)| aij * xij).sum();
        2.0 * s * inner
    };
    // `a.transpose().iter()` walks A in row-major order, matching x's layout.
    let start_a: Vec<f64> = a.transpose().iter().copied().collect();
    let mut starts = vec![start_a.clone()];
    // Rows of A with the k largest norms at full weight and the rest damped,
    // one start per k: the optimum puts the heavy rows above the kink at 1.
    let mut by_norm: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = a.row_iter().map(|r| r.norm()).collect();
    by_norm.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    for k in 1..n {
        let mut x = start_a.clone();
        for &i in &by_norm[k..] {
            for v in &mut x[i * n..(i + 1) * n] {
                *v *= 0.05;
            }
        }
        starts.push(x);
    }
    for r in 0..6u64 {
        let mut rng = StreamId::new(seed, r).rng();
        starts.push((0..n * n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
    }
    let mut best = f64::NEG_INFINITY;
    for mut x in starts {
        let mut fx = objective(&x);
        let mut step = 0.1;
        for _ in 0..20_000 {
            let scale = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let h = 1e-6 * scale.max(1e-12);
            let grad: Vec<f64> = (0..x.len())
                .map(|k| {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[k] += h;
                    xm[k] -= h;
                    (objective(&xp) - objective(&xm)) / (2.0 * h)
                })
                .collect();
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm == 0.0 || !gnorm.is_finite() {
                break;
            }
            let mut improved = false;
            while step > 1e-14 {
                let cand: Vec<f64> = x.iter().zip(&grad).map(|(xi, g)| xi + step * scale * g / gnorm).collect();
                let fc = objective(&cand);
                if fc > fx {
                    x = cand;
                    fx = fc;
                    step *= 1.5;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        best = best.max(fx);
    }
    Ok(best.max(0.0))
}

/// Random symmetric matrix ensembles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// Gaussian orthogonal ensemble scaled by `1/√n`: off-diagonal entries
    /// `N(0, 1/n)`, diagonal `N(0, 2/n)`.
    Goe,
    /// Diagonal matrix with `N(0, 1)` entries.
    Diag,
    /// Symmetric `±1` entries kept independently with probability
    /// [`SPARSE_SIGN_DENSITY`].
    SparseSign,
}

pub const SPARSE_SIGN_DENSITY: f64 = 0.1;

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "goe" => Ok(Self::Goe),
            "diag" => Ok(Self::Diag),
            "sparse-sign" => Ok(Self::SparseSign),
            _ => Err(Error::Parse(format!("unknown ensemble {s:?} (expected goe, diag or sparse-sign)"))),
        }
    }
}

/// Draws one `n × n` matrix from the ensemble.
pub fn sample_ensemble(ensemble: Ensemble, n: usize, stream: StreamId) -> Result<SymMatrix> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let mut rng = stream.rng();
    let mut m = DMatrix::zeros(n, n);
    match ensemble {
        Ensemble::Goe => {
            let s = (n as f64).sqrt().recip();
            for i in 0..n {
                for j in i..n {
                    let g: f64 = rng.sample(StandardNormal);
                    let v = if i == j { g * s * std::f64::consts::SQRT_2 } else { g * s };
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
        }
        Ensemble::Diag => {
            for i in 0..n {
                m[(i, i)] = rng.sample(StandardNormal);
            }
        }
        Ensemble::SparseSign => {
            for i in 0..n {
                for j in i..n {
                    if rng.random::<f64>() < SPARSE_SIGN_DENSITY {
                        let v = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        m[(i, j)] = v;
                        m[(j, i)] = v;
                    }
                }
            }
        }
    }
    SymMatrix::new(m)
}

/// Parses a dense row-major matrix from text: one row per line, entries
/// separated by commas and/or whitespace. Blank lines and `#` comments are
/// ignored.
pub fn parse_matrix_text(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: bad number `{s}`: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::Parse(format!(
            "row {} has {} entries, expected {ncols}",
            i + 1,
            r.len()
        )));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    check_finite(&flat)?;
    Ok(DMatrix::from_row_slice(flat.len() / ncols.max(1), ncols, &flat))
}

/// Binary layout: `n` as a little-endian u64, then `n²` little-endian f64
/// entries in row-major order.
pub fn encode_matrix_binary(m: &DMatrix<f64>) -> Result<Vec<u8>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let n = m.nrows();
    let mut out = Vec::with_capacity(8 + 8 * n * n);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for i in 0..n {
        for j in 0..n {
            out.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_matrix_binary(bytes: &[u8]) -> Result<DMatrix<f64>> {
    let header: [u8; 8] = bytes
        .get(..8)
        .and_then(|h| h.try_into().ok())
        .ok_or_else(|| Error::Parse("binary matrix shorter than its header".into()))?;
    let n = usize::try_from(u64::from_le_bytes(header))
        .map_err(|_| Error::Parse("matrix dimension does not fit in memory".into()))?;
    let expected = n
        .checked_mul(n)
        .and_then(|nn| nn.checked_mul(8))
        .and_then(|b| b.checked_add(8))
        .ok_or_else(|| Error::Parse("matrix dimension overflows".into()))?;
    if bytes.len() != expected {
        return Err(Error::Parse(format!(
            "binary matrix of dimension {n} needs {expected} bytes, got {}",
            bytes.len()
        )));
    }
    let data: Vec<f64> = bytes[8..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    check_finite(&data)?;
    Ok(DMatrix::from_row_slice(n, n, &data))
}

/// Reads a matrix file, accepting the binary layout when the size matches
/// its header and dense text otherwise.
pub fn read_matrix_file(path: &Path) -> Result<DMatrix<f64>> {
    let bytes = std::fs::read(path)?;
    if let Ok(m) = decode_matrix_binary(&bytes) {
        return Ok(m);
    }
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::Parse(format!("{} is neither a binary nor a text matrix", path.display())))?;
    parse_matrix_text(&text)
}
