//! Experiment configuration: a TOML document with a mandatory seed.
//!
//! ```toml
//! seed = 7
//! alpha = 2.0
//! n = 50
//! N = 10000
//! distribution = "gaussian"
//!
//! [experiment]
//! kind = "hanson-wright"
//!
//! [t_grid]
//! min = 0.1
//! max = 20.0
//! points = 30
//! scale = "log"
//! units = "natural"
//!
//! [matrix]
//! ensemble = "goe"
//!
//! [calibration]
//! enabled = true
//! search = [0.001, 1000.0]
//! ```

use std::path::{Path, PathBuf};

use alphaconc_core::distributions::DistributionSpec;
use alphaconc_core::montecarlo::GridScale;
use alphaconc_core::Ensemble;
use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Identifies artifacts written by this version of the tool.
pub const SCHEMA: &str = "alphaconc/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Centered quadratic form against the generalized Hanson–Wright bound.
    HansonWright,
    /// Supremum of centered quadratic forms over a finite family.
    UniformHw,
    /// Largest singular value of an `n × n` matrix of coordinates.
    Convex,
    /// `| ||BX||₂ − ||B||_HS |` in units of `K² ||B||_op`.
    EuclidNorm,
    /// Euclidean norm of a simple random tensor.
    Tensor,
    /// Product of `d` Euclidean norms.
    ProductTail,
    /// Maximal normalized partial product of norms.
    MaxProduct,
    /// Normalized sum of bounded coordinates against the classical bound.
    ClassicalConvex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub kind: ExperimentKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridUnits {
    /// Endpoints are multiples of the experiment's natural deviation scale.
    Natural,
    Absolute,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "GridConfig::default_min")]
    pub min: f64,
    #[serde(default = "GridConfig::default_max")]
    pub max: f64,
    #[serde(default = "GridConfig::default_points")]
    pub points: usize,
    #[serde(default = "GridConfig::default_scale")]
    pub scale: GridScale,
    #[serde(default = "GridConfig::default_units")]
    pub units: GridUnits,
}

impl GridConfig {
    fn default_min() -> f64 {
        0.1
    }
    fn default_max() -> f64 {
        20.0
    }
    fn default_points() -> usize {
        30
    }
    fn default_scale() -> GridScale {
        GridScale::Log
    }
    fn default_units() -> GridUnits {
        GridUnits::Natural
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            min: Self::default_min(),
            max: Self::default_max(),
            points: Self::default_points(),
            scale: Self::default_scale(),
            units: Self::default_units(),
        }
    }
}

/// Where matrices come from: a random ensemble or a file (text or binary).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<Ensemble>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Number of ensemble draws in the family of `uniform-hw`.
    #[serde(default = "MatrixSource::default_family_size")]
    pub family_size: usize,
}

impl MatrixSource {
    fn default_family_size() -> usize {
        3
    }
}

impl Default for MatrixSource {
    fn default() -> Self {
        Self {
            ensemble: None,
            file: None,
            family_size: Self::default_family_size(),
        }
    }
}

/// Overrides for constants that are otherwise derived.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundOverrides {
    /// Ψ_α norm of one coordinate (after unit-variance rescaling).
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// The family's named constant (`C` or `c`); 1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(rename = "C_range", default, skip_serializing_if = "Option::is_none")]
    pub c_range: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    #[serde(default = "CalibrationConfig::default_enabled")]
    pub enabled: bool,
    /// Search interval for the named constant.
    #[serde(default = "CalibrationConfig::default_search")]
    pub search: [f64; 2],
}

impl CalibrationConfig {
    fn default_enabled() -> bool {
        true
    }
    fn default_search() -> [f64; 2] {
        [1e-3, 1e3]
    }
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            enabled: Self::default_enabled(),
            search: Self::default_search(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(rename = "N")]
    pub samples: u64,
    #[serde(default = "ExperimentConfig::default_conf_level")]
    pub conf_level: f64,
    #[serde(default = "ExperimentConfig::default_workers")]
    pub workers: usize,
    #[serde(with = "dist_text", default = "ExperimentConfig::default_distribution")]
    pub distribution: DistributionSpec,
    pub experiment: Experiment,
    #[serde(default)]
    pub t_grid: GridConfig,
    #[serde(default)]
    pub matrix: MatrixSource,
    #[serde(default)]
    pub bound: BoundOverrides,
    #[serde(default)]
    pub calibration: CalibrationConfig,
}

impl ExperimentConfig {
    fn default_conf_level() -> f64 {
        0.95
    }
    fn default_workers() -> usize {
        1
    }
    fn default_distribution() -> DistributionSpec {
        DistributionSpec::StandardGaussian
    }

    /// Parses a config document, applying `key=value` overrides (dotted keys,
    /// TOML literal values; bare words are taken as strings) first.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = text.parse().context("invalid config")?;
        for ov in overrides {
            apply_override(&mut doc, ov)?;
        }
        let config: Self = doc.try_into().context("invalid config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text, overrides).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.matrix.ensemble.is_some() && self.matrix.file.is_some() {
            bail!("matrix: give either `ensemble` or `file`, not both");
        }
        if self.samples == 0 {
            bail!("N: at least one draw is required");
        }
        let [lo, hi] = self.calibration.search;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            bail!("calibration.search: need 0 < min < max, got [{lo}, {hi}]");
        }
        Ok(())
    }

    /// Canonical serialization; the run directory is named by its hash.
    pub fn canonical(&self) -> Result<String> {
        toml::to_string(self).context("cannot serialize config")
    }

    /// `run-` followed by the first 16 hex digits of the SHA-256 of the
    /// canonical serialization.
    pub fn run_name(&self) -> Result<String> {
        let digest = Sha256::digest(self.canonical()?.as_bytes());
        let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        Ok(format!("run-{hex}"))
    }
}

fn apply_override(doc: &mut toml::Table, ov: &str) -> Result<()> {
    let (key, raw) = ov
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{ov}` is not of the form key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("just inserted"),
        Err(_) => toml::Value::String(raw.to_owned()),
    };
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| anyhow!("empty key in `{ov}`"))?;
    let mut table = doc;
    for p in parts {
        table = table
            .entry(p)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow!("`{p}` in `{key}` is not a table"))?;
    }
    table.insert(last.to_owned(), value);
    Ok(())
}

mod dist_text {
    use alphaconc_core::distributions::DistributionSpec;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(spec: &DistributionSpec, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(spec)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DistributionSpec, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "seed = 1\nalpha = 2.0\nn = 10\nN = 100\n[experiment]\nkind = \"hanson-wright\"\n";

    #[test]
    fn defaults_and_round_trip() {
        let c = ExperimentConfig::parse(MINIMAL, &[]).unwrap();
        assert_eq!(c.workers, 1);
        assert_eq!(c.t_grid, GridConfig::default());
        assert_eq!(c.distribution, DistributionSpec::StandardGaussian);
        let again = ExperimentConfig::parse(&c.canonical().unwrap(), &[]).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.run_name().unwrap(), again.run_name().unwrap());
    }

    #[test]
    fn overrides_and_errors() {
        let c = ExperimentConfig::parse(
            MINIMAL,
            &["experiment.kind=tensor".into(), "t_grid.points=5".into(), "distribution=weibull:1".into()],
        )
        .unwrap();
        assert_eq!(c.experiment.kind, ExperimentKind::Tensor);
        assert_eq!(c.t_grid.points, 5);
        assert_eq!(c.distribution, DistributionSpec::weibull(1.0));
        assert_ne!(c.run_name().unwrap(), ExperimentConfig::parse(MINIMAL, &[]).unwrap().run_name().unwrap());

        let typo = ExperimentConfig::parse(MINIMAL, &["t_grid.pionts=5".into()]).unwrap_err();
        assert!(format!("{typo:#}").contains("pionts"), "{typo:#}");
        let no_seed = ExperimentConfig::parse(&MINIMAL.replace("seed = 1\n", ""), &[]).unwrap_err();
        assert!(format!("{no_seed:#}").contains("seed"), "{no_seed:#}");
        assert!(ExperimentConfig::parse(MINIMAL, &["matrix.ensemble=goe".into(), "matrix.file=a.txt".into()]).is_err());
        assert!(ExperimentConfig::parse(MINIMAL, &["noequals".into()]).is_err());
    }
}
