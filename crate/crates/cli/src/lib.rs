//! The `alphaconc` command line: experiment pipelines and small utilities
//! around the core crate.

pub mod config;
pub mod pipeline;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use alphaconc_core::bounds::{BoundValue, CurveParams, TailBoundCurve};
use alphaconc_core::distributions::{sample, DistributionSpec};
use alphaconc_core::montecarlo::{t_grid, GridScale};
use alphaconc_core::orlicz::{orlicz_norm_empirical, orlicz_norm_numeric, AlphaParam, DEFAULT_TOL};
use alphaconc_core::specnorms::{
    al12_norm_coupled, al12_norm_decoupled, norm_bundle, read_matrix_file, AL12_MAX_DIM,
};
use alphaconc_core::{StreamId, SymMatrix};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

pub use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "alphaconc", version, about = "Concentration bounds for alpha-subexponential variables, checked by simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Experiment config (TOML).
    pub config: PathBuf,
    /// Override a config key, e.g. `--set experiment.kind=tensor` or `--set N=100000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Shorthand for `--set workers=W`.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output root (default: $ALPHACONC_OUT, then ./runs).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(w) = self.workers {
            overrides.push(format!("workers={w}"));
        }
        ExperimentConfig::load(&self.config, &overrides)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw values from a coordinate law, one per line.
    Sample {
        /// Law, e.g. `gaussian`, `weibull:1.5`, `uniform:-1:1`, `unit:weibull:0.5`.
        #[arg(long)]
        dist: DistributionSpec,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        /// Write to a file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Ψ_α norm of a sample file (empirical) or of a law (exact).
    Orlicz {
        #[arg(long)]
        alpha: f64,
        /// Whitespace- or comma-separated numbers; `#` starts a comment.
        #[arg(long, conflicts_with = "dist", required_unless_present = "dist")]
        file: Option<PathBuf>,
        #[arg(long)]
        dist: Option<DistributionSpec>,
    },
    /// Norms of a matrix file, plus the chaos norms for n <= 64.
    Norms {
        matrix: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long)]
        json: bool,
    },
    /// Tabulate a bound curve. Parameters default to 1 (alpha to 2) and are
    /// changed with `--set name=value`.
    Bound {
        /// hanson-wright, classical-convex, convex-conc, uniform-hw, tensor,
        /// tensor-sharp, tensor-pi, tensor-lsi, euclid-norm, product-tail,
        /// max-product-tail, max-orlicz-shift or alpha-tail.
        family: String,
        #[arg(long = "set", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Comma-separated thresholds.
        #[arg(long, value_delimiter = ',', conflicts_with = "grid")]
        t: Vec<f64>,
        /// `min:max:points` or `min:max:points:log`.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Estimate the tail of the experiment's statistic (no bound).
    Simulate(ConfigArgs),
    /// Full pipeline: estimate, bound, calibration, report files.
    #[command(alias = "run")]
    Calibrate(ConfigArgs),
    /// Summarize a finished run directory.
    Report { dir: PathBuf },
}

/// Runs a command, writing human output to `out`; returns the exit code.
pub fn execute(cli: Cli, out: &mut String) -> Result<i32> {
    match cli.command {
        Command::Sample { dist, count, seed, output } => {
            let xs = sample(&dist, count, StreamId::new(seed, 0))?;
            let mut text = String::with_capacity(24 * count);
            for x in xs {
                let _ = writeln!(text, "{x}");
            }
            match output {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?,
                None => out.push_str(&text),
            }
            Ok(0)
        }
        Command::Orlicz { alpha, file, dist } => {
            let alpha = AlphaParam::new(alpha)?;
            let value = match (file, dist) {
                (Some(path), _) => orlicz_norm_empirical(&read_samples(&path)?, alpha, DEFAULT_TOL)?,
                (None, Some(spec)) => orlicz_norm_numeric(&spec, alpha)?
                    .ok_or_else(|| anyhow!("{spec} has infinite Ψ_{} norm", alpha.value()))?,
                (None, None) => bail!("give --file or --dist"),
            };
            let method = serde_json::to_value(value.method)?;
            let _ = writeln!(out, "{} ({})", value.value, method.as_str().unwrap_or(""));
            Ok(0)
        }
        Command::Norms { matrix, p, alpha, json } => {
            let a = SymMatrix::new(read_matrix_file(&matrix)?)?;
            norms(&a, p, alpha, json, out)?;
            Ok(0)
        }
        Command::Bound { family, params, t, grid, json } => {
            let curve = bound_curve(&family, &params)?;
            let ts = match grid {
                Some(g) => parse_grid(&g)?,
                None if t.is_empty() => vec![0.0, 1.0, 2.0],
                None => t,
            };
            bound_table(&curve, &ts, json, out)?;
            Ok(0)
        }
        Command::Simulate(args) => {
            let config = args.load()?;
            let dir = pipeline::simulate(&config, &pipeline::output_root(args.out.as_deref()))?;
            let _ = writeln!(out, "{}", dir.display());
            Ok(0)
        }
        Command::Calibrate(args) => {
            let config = args.load()?;
            let outcome = pipeline::run(&config, &pipeline::output_root(args.out.as_deref()))?;
            let _ = writeln!(out, "{}", outcome.dir.display());
            let _ = writeln!(out, "{}", outcome.summary);
            Ok(outcome.verdict.exit_code())
        }
        Command::Report { dir } => {
            let (verdict, text) = pipeline::report(&dir)?;
            out.push_str(&text);
            Ok(verdict.exit_code())
        }
    }
}

fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut xs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
            xs.push(
                tok.parse::<f64>()
                    .with_context(|| format!("{}:{}: bad number `{tok}`", path.display(), i + 1))?,
            );
        }
    }
    Ok(xs)
}

fn norms(a: &SymMatrix, p: f64, alpha: f64, as_json: bool, out: &mut String) -> Result<()> {
    let b = norm_bundle(a)?;
    let mut report = json!({
        "n": a.n(),
        "symmetrized": a.was_symmetrized(),
        "hs": b.hs,
        "op": b.op,
        "row_max": b.row_max,
        "diag_hs": b.diag_hs,
        "max_abs_diag": b.max_abs_diag,
    });
    if a.n() <= AL12_MAX_DIM && alpha > 1.0 {
        let al = AlphaParam::new(alpha)?;
        let coupled = al12_norm_coupled(a.matrix(), p, al)?;
        let decoupled = al12_norm_decoupled(a.matrix(), p, al)?;
        report["p"] = json!(p);
        report["alpha"] = json!(alpha);
        report["coupled"] = json!(coupled.value);
        report["coupled_upper_bound"] = json!(coupled.upper_bound);
        report["decoupled"] = json!(decoupled.value);
        report["decoupled_upper_bound"] = json!(decoupled.upper_bound);
    }
    if as_json {
        out.push_str(&serde_json::to_string_pretty(&report)?);
        out.push('\n');
    } else {
        for (k, v) in report.as_object().expect("object literal") {
            let _ = writeln!(out, "{k} = {v}");
        }
    }
    Ok(())
}

fn default_params(family: &str) -> Result<Value> {
    let one = 1.0;
    let v = match family {
        "hanson-wright" => json!({ "k": one, "hs": one, "op": one, "alpha": 2.0, "c": one }),
        "classical-convex" => json!({ "a": -1.0, "b": one, "mode": 1 }),
        "convex-conc" => json!({ "k_star": one, "alpha": 2.0, "c": one }),
        "uniform-hw" => json!({ "k_star": one, "e_sup": one, "sup_op": one, "alpha": 2.0, "c": one }),
        "tensor" => json!({ "n": 10, "d": 2, "k": one, "alpha": 2.0, "c": one, "c_range": one }),
        "tensor-sharp" => json!({ "n": 10, "k": one, "max_norms": [one, one], "alpha": 2.0, "c": one, "c_range": one }),
        "tensor-pi" | "tensor-lsi" => json!({ "n": 10, "d": 2, "sigma": one, "c": one, "c_range": one }),
        "euclid-norm" => json!({ "alpha": 2.0, "c": one }),
        "product-tail" | "max-product-tail" => json!({ "n": 10, "d": 2, "k": one, "alpha": 2.0, "c": one }),
        "max-orlicz-shift" => json!({ "n": 10, "alpha": 2.0 }),
        "alpha-tail" => json!({ "gamma": one, "alpha": one, "c": std::f64::consts::LN_2 }),
        other => bail!("unknown bound family `{other}`"),
    };
    Ok(v)
}

/// Builds a curve from family defaults and `name=value` overrides.
pub fn bound_curve(family: &str, params: &[String]) -> Result<TailBoundCurve> {
    let mut v = default_params(family)?;
    for p in params {
        let (name, raw) = p
            .split_once('=')
            .ok_or_else(|| anyhow!("parameter `{p}` is not of the form name=value"))?;
        let name = name.trim();
        if v.get(name).is_none() {
            bail!("family {family} has no parameter `{name}`");
        }
        v[name] = serde_json::from_str(raw.trim()).with_context(|| format!("bad value for `{name}`: {raw}"))?;
    }
    v["form"] = json!(family);
    let params: CurveParams = serde_json::from_value(v)?;
    Ok(TailBoundCurve::new(params)?)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |i: usize| -> Result<f64> {
        parts
            .get(i)
            .ok_or_else(|| anyhow!("grid `{spec}` needs min:max:points"))?
            .parse::<f64>()
            .with_context(|| format!("bad grid `{spec}`"))
    };
    let points: usize = parts
        .get(2)
        .ok_or_else(|| anyhow!("grid `{spec}` needs min:max:points"))?
        .parse()
        .with_context(|| format!("bad point count in `{spec}`"))?;
    let scale = match parts.get(3).copied() {
        None | Some("linear") => GridScale::Linear,
        Some("log") => GridScale::Log,
        Some(other) => bail!("unknown grid scale `{other}`"),
    };
    Ok(t_grid(num(0)?, num(1)?, points, scale)?)
}

fn bound_table(curve: &TailBoundCurve, ts: &[f64], as_json: bool, out: &mut String) -> Result<()> {
    let mut rows = Vec::with_capacity(ts.len());
    for &t in ts {
        let v = match curve.eval(t)? {
            BoundValue::Value(v) => Some(v),
            BoundValue::OutOfRange => None,
        };
        rows.push((t, v));
    }
    if as_json {
        let table: Vec<Value> = rows.iter().map(|(t, v)| json!({ "t": t, "bound": v })).collect();
        let doc = json!({ "schema": config::SCHEMA, "curve": curve, "table": table });
        out.push_str(&serde_json::to_string_pretty(&doc)?);
        out.push('\n');
    } else {
        let _ = writeln!(out, "# {} ({})", curve.family(), curve.sidedness());
        let _ = writeln!(out, "t\tbound");
        for (t, v) in rows {
            match v {
                Some(v) => writeln!(out, "{t}\t{v}"),
                None => writeln!(out, "{t}\tout-of-range"),
            }
            .expect("writing to a String");
        }
    }
    Ok(())
}
