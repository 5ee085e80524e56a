//! Seeded experiment orchestration: configuration, the four experiment
//! kinds (convergence study, distributional study, mollifier bound check,
//! identity fuzzing), and deterministic report rendering.
//!
//! Experiments fan out over seeds with rayon but reduce in seed order, so a
//! fixed config produces byte-identical output regardless of worker count.

mod convergence;
mod distribution;
mod identity;

pub use convergence::{run_convergence, ConvergenceReport, ConvergenceRow};
pub use distribution::{
    run_distribution, DistributionReport, EstimatorStats, CLASSICAL_MEAN, CLASSICAL_TOLERANCE,
};
pub use identity::{run_identity_fuzz, IdentityReport, IDENTITY_TOLERANCE};

use std::fmt;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::integration::{mollifier_expectation_bound, MollifierBoundTable};
use crate::io::format_sig17;
use crate::sampler::{Seed, GENERATOR_NAME};
use crate::{Error, Result, MAX_LEVEL};

/// Schema version stamped on every report.
pub const REPORT_VERSION: &str = "1";

/// Path grid level used by the mollifier bound experiment (the bound's
/// `levels` range selects the band exponents, not the path resolution).
pub const BOUND_PATH_LEVEL: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Converge,
    Dist,
    Bound,
    Identity,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converge" => Ok(Self::Converge),
            "dist" => Ok(Self::Dist),
            "bound" => Ok(Self::Bound),
            "identity" => Ok(Self::Identity),
            other => Err(Error::Config {
                field: "kind",
                message: format!("unknown experiment kind {other:?}"),
            }),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Converge => "converge",
            Self::Dist => "dist",
            Self::Bound => "bound",
            Self::Identity => "identity",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config {
                field: "format",
                message: format!("unknown format {other:?} (want csv|json)"),
            }),
        }
    }
}

/// Full experiment configuration. The output path is carried for the CLI but
/// excluded from report echoes: where a report lands does not change what it
/// contains.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seeds: u64,
    pub seed_base: Seed,
    pub level_lo: u32,
    pub level_hi: u32,
    pub t: f64,
    pub tol: f64,
    pub output_format: OutputFormat,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn levels(&self) -> RangeInclusive<u32> {
        self.level_lo..=self.level_hi
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds < 1 {
            return Err(Error::Config {
                field: "seeds",
                message: "need at least one seed".into(),
            });
        }
        if self.level_lo > self.level_hi {
            return Err(Error::Config {
                field: "levels",
                message: format!("empty range {}..{}", self.level_lo, self.level_hi),
            });
        }
        if self.level_hi > MAX_LEVEL {
            return Err(Error::Config {
                field: "levels",
                message: format!("level {} exceeds cap {MAX_LEVEL}", self.level_hi),
            });
        }
        if !(0.0..=1.0).contains(&self.t) {
            return Err(Error::Config {
                field: "t",
                message: format!("t = {} outside [0, 1]", self.t),
            });
        }
        if self.tol <= 0.0 || !self.tol.is_finite() {
            return Err(Error::Config {
                field: "tol",
                message: format!("tolerance {} must be positive", self.tol),
            });
        }
        Ok(())
    }
}

/// Config-file values before CLI overrides; flags win over file entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialConfig {
    pub kind: Option<ExperimentKind>,
    pub seeds: Option<u64>,
    pub seed_base: Option<Seed>,
    pub levels: Option<(u32, u32)>,
    pub t: Option<f64>,
    pub tol: Option<f64>,
    pub output_format: Option<OutputFormat>,
    pub output_path: Option<PathBuf>,
}

impl PartialConfig {
    /// Parses a flat `key=value` file ('#' starts a comment).
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                field: "config",
                message: format!("line {}: expected key=value, got {raw:?}", idx + 1),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "kind" => self.kind = Some(value.parse()?),
            "seeds" => {
                self.seeds = Some(value.parse().map_err(|_| Error::Config {
                    field: "seeds",
                    message: format!("bad count {value:?}"),
                })?)
            }
            "seed" => {
                self.seed_base = Some(Seed(value.parse().map_err(|_| Error::Config {
                    field: "seed",
                    message: format!("bad seed {value:?}"),
                })?))
            }
            "levels" => self.levels = Some(parse_levels(value)?),
            "t" => {
                self.t = Some(value.parse().map_err(|_| Error::Config {
                    field: "t",
                    message: format!("bad time {value:?}"),
                })?)
            }
            "tol" => {
                self.tol = Some(value.parse().map_err(|_| Error::Config {
                    field: "tol",
                    message: format!("bad tolerance {value:?}"),
                })?)
            }
            "format" => self.output_format = Some(value.parse()?),
            "output" => self.output_path = Some(PathBuf::from(value)),
            other => {
                return Err(Error::Config {
                    field: "config",
                    message: format!("unknown key {other:?}"),
                })
            }
        }
        Ok(())
    }

    /// Fills defaults and produces a validated config for `kind`.
    pub fn build(self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let (level_lo, level_hi) = self.levels.unwrap_or(match kind {
            ExperimentKind::Bound => (2, 8),
            ExperimentKind::Dist => (16, 16),
            _ => (10, 14),
        });
        let config = ExperimentConfig {
            kind,
            seeds: self.seeds.unwrap_or(1000),
            seed_base: self.seed_base.unwrap_or(Seed(0)),
            level_lo,
            level_hi,
            t: self.t.unwrap_or(1.0),
            tol: self.tol.unwrap_or(1e-9),
            output_format: self.output_format.unwrap_or(OutputFormat::Csv),
            output_path: self.output_path,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Parses "10..18" or a single "16".
pub fn parse_levels(value: &str) -> Result<(u32, u32)> {
    let parse_one = |s: &str| {
        s.trim().parse::<u32>().map_err(|_| Error::Config {
            field: "levels",
            message: format!("bad level {s:?}"),
        })
    };
    if let Some((lo, hi)) = value.split_once("..") {
        Ok((parse_one(lo)?, parse_one(hi)?))
    } else {
        let m = parse_one(value)?;
        Ok((m, m))
    }
}

/// Provenance block stamped on every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Metadata {
    pub seed_base: Seed,
    pub generator: String,
    pub level_cap: u32,
    pub package_version: String,
}

impl Metadata {
    pub fn new(seed_base: Seed) -> Self {
        Self {
            seed_base,
            generator: GENERATOR_NAME.to_string(),
            level_cap: MAX_LEVEL,
            package_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Mollifier bound check report (tabular payload plus envelope).
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub metadata: Metadata,
    pub path_level: u32,
    pub table: MollifierBoundTable,
}

impl BoundReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,epsilon,estimate,stdError,bound,satisfied\n");
        for row in &self.table.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.n,
                format_sig17(row.epsilon),
                format_sig17(row.estimate),
                format_sig17(row.std_error),
                format_sig17(row.bound),
                row.satisfied
            ));
        }
        out
    }

    pub fn all_satisfied(&self) -> bool {
        self.table.rows.iter().all(|r| r.satisfied)
    }
}

/// Bound check: `levels` selects the band exponents n (epsilon = 2^-n); the
/// underlying paths are drawn at the fixed reference level.
pub fn run_bound_check(config: &ExperimentConfig) -> Result<BoundReport> {
    config.validate()?;
    if config.kind != ExperimentKind::Bound {
        return Err(Error::Config {
            field: "kind",
            message: format!("expected bound, got {}", config.kind),
        });
    }
    let table = mollifier_expectation_bound(
        config.levels(),
        config.seeds,
        BOUND_PATH_LEVEL,
        config.seed_base,
    )?;
    Ok(BoundReport {
        version: REPORT_VERSION.to_string(),
        config: config.clone(),
        metadata: Metadata::new(config.seed_base),
        path_level: BOUND_PATH_LEVEL,
        table,
    })
}

/// A finished experiment, ready to render.
#[derive(Debug, Clone)]
pub enum ExperimentOutput {
    Convergence(ConvergenceReport),
    Distribution(DistributionReport),
    Bound(BoundReport),
    Identity(IdentityReport),
}

impl ExperimentOutput {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut text = match self {
                    Self::Convergence(r) => serde_json::to_string_pretty(r),
                    Self::Distribution(r) => serde_json::to_string_pretty(r),
                    Self::Bound(r) => serde_json::to_string_pretty(r),
                    Self::Identity(r) => serde_json::to_string_pretty(r),
                }
                .expect("report serialization cannot fail");
                text.push('\n');
                text
            }
            OutputFormat::Csv => match self {
                Self::Convergence(r) => r.to_csv(),
                Self::Distribution(r) => r.to_csv(),
                Self::Bound(r) => r.to_csv(),
                Self::Identity(r) => r.to_csv(),
            },
        }
    }

    /// One-line human summary for the CLI.
    pub fn summary(&self) -> String {
        match self {
            Self::Convergence(r) => {
                let slope = r
                    .fitted_rate_exponent
                    .map(|s| format!("{s:.4}"))
                    .unwrap_or_else(|| "na".into());
                format!(
                    "converge: {} levels, fitted log2 rate exponent {slope}",
                    r.rows.len()
                )
            }
            Self::Distribution(r) => format!(
                "dist: mean(signChange) = {:.6}, mean(occupation) = {:.6}, agree = {}",
                r.sign_change.mean, r.occupation.mean, r.means_agree
            ),
            Self::Bound(r) => format!(
                "bound: {}/{} rows satisfied",
                r.table.rows.iter().filter(|row| row.satisfied).count(),
                r.table.rows.len()
            ),
            Self::Identity(r) => format!(
                "identity: max |lhs - rhs| = {:.3e} over {} sequences, ok = {}",
                r.max_abs_deviation, r.sequences, r.ok
            ),
        }
    }

    /// False when the experiment's numeric contract failed (CLI exit 3).
    pub fn contract_ok(&self) -> bool {
        match self {
            Self::Convergence(_) => true,
            Self::Distribution(r) => r.means_agree && r.classical_check.unwrap_or(true),
            Self::Bound(r) => r.all_satisfied(),
            Self::Identity(r) => r.ok,
        }
    }
}

/// Runs the experiment selected by the config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    match config.kind {
        ExperimentKind::Converge => Ok(ExperimentOutput::Convergence(run_convergence(config)?)),
        ExperimentKind::Dist => Ok(ExperimentOutput::Distribution(run_distribution(config)?)),
        ExperimentKind::Bound => Ok(ExperimentOutput::Bound(run_bound_check(config)?)),
        ExperimentKind::Identity => Ok(ExperimentOutput::Identity(run_identity_fuzz(config)?)),
    }
}
