//! Config → statistic → tail estimate → bound curve → calibration → files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use alphaconc_core::bounds::{max_orlicz_bound, BoundValue, CurveParams, Sidedness, TailBoundCurve};
use alphaconc_core::calibrate::{domination_report, min_dominating_constant, CalibrationStatus};
use alphaconc_core::distributions::DistributionSpec;
use alphaconc_core::montecarlo::{
    diag_comparison_check, empirical_tail, t_grid, Centering, HarnessOptions, StatisticKind, StatisticSpec,
    TailEstimate, TensorFunction,
};
use alphaconc_core::orlicz::{orlicz_norm_numeric, AlphaParam};
use alphaconc_core::rng::derive_seed;
use alphaconc_core::specnorms::{norm_bundle, read_matrix_file, sample_ensemble};
use alphaconc_core::{Ensemble, StreamId, SymMatrix};
use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use crate::config::{ExperimentConfig, ExperimentKind, GridUnits, SCHEMA};

/// Everything the sampler and the bound need, resolved from a config.
pub struct Prepared {
    pub spec: StatisticSpec,
    pub curve: TailBoundCurve,
    pub grid: Vec<f64>,
    /// Ψ_α norm of one coordinate.
    pub k: f64,
    /// Unit of `t_grid` endpoints when `units = "natural"`.
    pub natural_unit: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Dominated,
    Violated,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Dominated => 0,
            Self::Violated => 2,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Self::Dominated => "dominated",
            Self::Violated => "violated",
        }
    }
}

fn need(value: Option<usize>, name: &str, kind: ExperimentKind) -> Result<usize> {
    match value {
        Some(v) if v > 0 => Ok(v),
        Some(_) => bail!("{name} must be at least 1"),
        None => bail!("experiment kind {kind:?} needs `{name}`"),
    }
}

fn matrices(config: &ExperimentConfig, n: usize, count: usize) -> Result<Vec<SymMatrix>> {
    if let Some(path) = &config.matrix.file {
        let m = read_matrix_file(path).with_context(|| format!("cannot load matrix {}", path.display()))?;
        let a = SymMatrix::new(m)?;
        if a.was_symmetrized() {
            eprintln!("note: {} is not symmetric; using (A + Aᵀ)/2", path.display());
        }
        return Ok(vec![a]);
    }
    let ensemble = config.matrix.ensemble.unwrap_or(Ensemble::Goe);
    let seed = derive_seed(config.seed, "matrix");
    (0..count as u64)
        .map(|i| Ok(sample_ensemble(ensemble, n, StreamId::new(seed, i))?))
        .collect()
}

fn bounded_support(spec: &DistributionSpec) -> Result<(f64, f64)> {
    match spec {
        DistributionSpec::Rademacher => Ok((-1.0, 1.0)),
        DistributionSpec::UniformBounded { a, b } => Ok((*a, *b)),
        DistributionSpec::Scaled { base, factor } => {
            let (a, b) = bounded_support(base)?;
            let (x, y) = (a * factor, b * factor);
            Ok((x.min(y), x.max(y)))
        }
        DistributionSpec::Truncated { base, level } => {
            let (a, b) = bounded_support(base).unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
            Ok((a.max(-level), b.min(*level)))
        }
        other => bail!("classical-convex needs bounded coordinates, got {other}"),
    }
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let kind = config.experiment.kind;
    let alpha = AlphaParam::new(config.alpha)?;
    let a = alpha.value();
    let coord = if kind == ExperimentKind::ClassicalConvex {
        config.distribution.clone()
    } else {
        config.distribution.unit_variance()?
    };
    let k = match config.bound.k {
        Some(k) => k,
        None => orlicz_norm_numeric(&coord, alpha)?
            .ok_or_else(|| anyhow!("coordinate law {coord} has infinite Ψ_{a} norm; lower alpha or set bound.K"))?
            .value,
    };
    let c = config.bound.constant.unwrap_or(1.0);
    let c_range = config.bound.c_range.unwrap_or(1.0);
    let var = coord.variance();
    let two = Sidedness::TwoSided;
    let pilot = Centering::Estimated { pilot_samples: None };

    let (spec, curve, natural_unit) = match kind {
        ExperimentKind::HansonWright => {
            let n = need(config.n, "n", kind)?;
            let m = matrices(config, n, 1)?.remove(0);
            let b = norm_bundle(&m)?;
            let n = m.n();
            let stat = StatisticKind::QuadraticForm { matrix: m, variances: vec![var; n] };
            let curve = CurveParams::HansonWright { k, hs: b.hs, op: b.op, alpha: a, c };
            (StatisticSpec::new(stat, coord, Centering::Analytic, two)?, curve, k * k * b.hs)
        }
        ExperimentKind::UniformHw => {
            let n = need(config.n, "n", kind)?;
            let family = matrices(config, n, config.matrix.family_size.max(1))?;
            let n = family[0].n();
            let mut sup_op: f64 = 0.0;
            for m in &family {
                sup_op = sup_op.max(norm_bundle(m)?.op);
            }
            let e_sup = diag_comparison_check(
                &family,
                &coord,
                100_000,
                derive_seed(config.seed, "e-sup"),
                config.workers,
            )?
            .full
            .value;
            let k_star = max_orlicz_bound(n as u64, k, alpha)?;
            let stat = StatisticKind::SupQuadraticForms { family, variances: vec![var; n] };
            let curve = CurveParams::UniformHw { k_star, e_sup, sup_op, alpha: a, c };
            (StatisticSpec::new(stat, coord, pilot, Sidedness::Upper)?, curve, k_star * e_sup)
        }
        ExperimentKind::Convex => {
            let n = need(config.n, "n", kind)?;
            let k_star = max_orlicz_bound((n * n) as u64, k, alpha)?;
            let stat = StatisticKind::LargestSingularValue { rows: n, cols: n };
            let curve = CurveParams::ConvexConc { k_star, alpha: a, c };
            (StatisticSpec::new(stat, coord, pilot, two)?, curve, k_star)
        }
        ExperimentKind::EuclidNorm => {
            let n = need(config.n, "n", kind)?;
            let m = matrices(config, n, 1)?.remove(0);
            let b = norm_bundle(&m)?;
            if b.op == 0.0 {
                bail!("euclid-norm needs a nonzero matrix");
            }
            let stat = StatisticKind::EuclidDeviation { b: m.matrix().clone() };
            let spec = StatisticSpec::new(stat, coord, Centering::Fixed(b.hs), two)?.with_scale(k * k * b.op)?;
            (spec, CurveParams::EuclidNorm { alpha: a, c }, 1.0)
        }
        ExperimentKind::Tensor => {
            let n = need(config.n, "n", kind)?;
            let d = need(config.d, "d", kind)?;
            let stat = StatisticKind::TensorLipschitz { n, d, function: TensorFunction::EuclideanNorm };
            let curve = CurveParams::Tensor { n: n as u64, d: d as u64, k, alpha: a, c, c_range };
            let unit = (d as f64).sqrt() * (n as f64).powf((d as f64 - 1.0) / 2.0) * k;
            (StatisticSpec::new(stat, coord, pilot, two)?, curve, unit)
        }
        ExperimentKind::ProductTail => {
            let n = need(config.n, "n", kind)?;
            let d = need(config.d, "d", kind)?;
            let top = (n as f64).powf(d as f64 / 2.0);
            let stat = StatisticKind::ProductOfNorms { n, d };
            let curve = CurveParams::ProductTail { n: n as u64, d: d as u64, k, alpha: a, c };
            let unit = k * k * (d as f64).sqrt() * (n as f64).powf((d as f64 - 1.0) / 2.0);
            (StatisticSpec::new(stat, coord, Centering::Fixed(top), Sidedness::Upper)?, curve, unit)
        }
        ExperimentKind::MaxProduct => {
            let n = need(config.n, "n", kind)?;
            let d = need(config.d, "d", kind)?;
            let stat = StatisticKind::MaxProduct { n, d };
            let curve = CurveParams::MaxProductTail { n: n as u64, d: d as u64, k, alpha: a, c };
            let unit = k * k * (d as f64 / n as f64).sqrt();
            (StatisticSpec::new(stat, coord, Centering::Fixed(1.0), Sidedness::Upper)?, curve, unit)
        }
        ExperimentKind::ClassicalConvex => {
            let n = need(config.n, "n", kind)?;
            let (lo, hi) = bounded_support(&coord)?;
            let stat = StatisticKind::LinearForm { weights: vec![1.0 / (n as f64).sqrt(); n] };
            let curve = CurveParams::ClassicalConvex { a: lo, b: hi, mode: 1 };
            (StatisticSpec::new(stat, coord, Centering::Analytic, two)?, curve, 1.0)
        }
    };
    let unit = match config.t_grid.units {
        GridUnits::Natural => natural_unit,
        GridUnits::Absolute => 1.0,
    };
    if !(unit > 0.0 && unit.is_finite()) {
        bail!("the natural t unit of this experiment is {unit}; use t_grid.units = \"absolute\"");
    }
    let g = &config.t_grid;
    let grid = t_grid(g.min * unit, g.max * unit, g.points, g.scale)?;
    Ok(Prepared {
        spec,
        curve: TailBoundCurve::new(curve)?,
        grid,
        k,
        natural_unit,
    })
}

pub fn estimate(config: &ExperimentConfig, prepared: &Prepared) -> Result<TailEstimate> {
    let options = HarnessOptions { conf_level: config.conf_level, workers: config.workers };
    Ok(empirical_tail(&prepared.spec, &prepared.grid, config.samples, config.seed, options)?)
}

/// Output root: `--out`, then `$ALPHACONC_OUT`, then `./runs`.
pub fn output_root(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os("ALPHACONC_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn to_json(value: &serde_json::Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn prepare_dir(config: &ExperimentConfig, root: &Path) -> Result<PathBuf> {
    let dir = root.join(config.run_name()?);
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    write(&dir, "config.toml", &config.canonical()?)?;
    Ok(dir)
}

fn write_estimate(dir: &Path, est: &TailEstimate) -> Result<()> {
    write(dir, "estimate.csv", &est.to_csv())?;
    write(dir, "estimate.json", &to_json(&json!({ "schema": SCHEMA, "estimate": est }))?)
}

/// Runs the sampler only; returns the run directory.
pub fn simulate(config: &ExperimentConfig, root: &Path) -> Result<PathBuf> {
    let prepared = prepare(config)?;
    let est = estimate(config, &prepared)?;
    let dir = prepare_dir(config, root)?;
    write_estimate(&dir, &est)?;
    Ok(dir)
}

pub struct RunOutcome {
    pub dir: PathBuf,
    pub verdict: Verdict,
    pub summary: String,
}

/// Runs the full pipeline and writes every artifact.
pub fn run(config: &ExperimentConfig, root: &Path) -> Result<RunOutcome> {
    let prepared = prepare(config)?;
    let est = estimate(config, &prepared)?;
    let dir = prepare_dir(config, root)?;
    write_estimate(&dir, &est)?;

    let curve = &prepared.curve;
    let calibrate = config.calibration.enabled && curve.knob().is_some();
    let (plotted, verdict, calibration, summary) = if calibrate {
        let [lo, hi] = config.calibration.search;
        let r = min_dominating_constant(&est, curve, (lo, hi))?;
        let verdict = if r.status == CalibrationStatus::Dominated { Verdict::Dominated } else { Verdict::Violated };
        let plotted = match r.knob {
            Some(knob) => curve.with_knob(knob)?,
            None => curve.clone(),
        };
        let summary = match r.value {
            Some(v) => format!("{} = {v:.6} ({})", r.constant_name, curve.family()),
            None => format!("no {} in [{lo}, {hi}] dominates ({})", r.constant_name, curve.family()),
        };
        (plotted, verdict, json!({ "schema": SCHEMA, "mode": "calibrated", "verdict": verdict.as_str(), "result": r }), summary)
    } else {
        let r = domination_report(&est, curve)?;
        let verdict = if r.dominated() { Verdict::Dominated } else { Verdict::Violated };
        let summary = format!("{} bound {} as configured", curve.family(), verdict.as_str());
        (curve.clone(), verdict, json!({ "schema": SCHEMA, "mode": "report", "verdict": verdict.as_str(), "result": r }), summary)
    };

    let mut table = Vec::with_capacity(est.t_grid.len());
    let mut plot = String::from("t,p_hat,ci_high,bound\n");
    for (i, &t) in est.t_grid.iter().enumerate() {
        let b = match plotted.eval(t)? {
            BoundValue::Value(v) => Some(v),
            BoundValue::OutOfRange => None,
        };
        table.push(json!({ "t": t, "bound": b }));
        let cell = b.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(plot, "{t},{},{},{cell}", est.p_hat[i], est.ci_high[i]);
    }
    let bound = json!({
        "schema": SCHEMA,
        "curve": plotted,
        "K": prepared.k,
        "natural_unit": prepared.natural_unit,
        "table": table,
    });
    write(&dir, "bound.json", &to_json(&bound)?)?;
    write(&dir, "calibration.json", &to_json(&calibration)?)?;
    write(&dir, "plot.csv", &plot)?;
    Ok(RunOutcome { dir, verdict, summary })
}

/// Reads a run directory back and summarizes it.
pub fn report(dir: &Path) -> Result<(Verdict, String)> {
    let read = |name: &str| -> Result<serde_json::Value> {
        let path = dir.join(name);
        let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("bad JSON in {}", path.display()))?;
        if value["schema"] != SCHEMA {
            bail!("{} has schema {}, expected {SCHEMA}", path.display(), value["schema"]);
        }
        Ok(value)
    };
    let est: TailEstimate = serde_json::from_value(read("estimate.json")?["estimate"].clone())?;
    let cal = read("calibration.json")?;
    let bound = read("bound.json")?;
    let verdict = match cal["verdict"].as_str() {
        Some("dominated") => Verdict::Dominated,
        Some("violated") => Verdict::Violated,
        other => bail!("unknown verdict {other:?}"),
    };
    let mut out = String::new();
    let _ = writeln!(out, "statistic: {}", est.statistic);
    let _ = writeln!(out, "N = {}, seed = {}, center = {} ± {}", est.n, est.seed, est.center, est.center_std_error);
    let _ = writeln!(out, "family: {}", bound["curve"]["family"].as_str().unwrap_or("?"));
    if let Some(v) = cal["result"]["value"].as_f64() {
        let _ = writeln!(out, "calibrated {} = {v}", cal["result"]["constant_name"].as_str().unwrap_or("constant"));
    }
    let _ = writeln!(out, "verdict: {}", verdict.as_str());
    let _ = writeln!(out, "{:>14} {:>8} {:>12} {:>12} {:>12}", "t", "count", "p_hat", "ci_high", "bound");
    for (i, row) in bound["table"].as_array().into_iter().flatten().enumerate() {
        let b = row["bound"].as_f64().map_or_else(|| "-".to_owned(), |v| format!("{v:.4e}"));
        let _ = writeln!(
            out,
            "{:>14.6} {:>8} {:>12.4e} {:>12.4e} {:>12}",
            est.t_grid[i], est.counts[i], est.p_hat[i], est.ci_high[i], b
        );
    }
    Ok((verdict, out))
}
