//! Convergence study: for each seeded path, truncate its tent expansion at
//! each level m, run all three local-time estimators at that stage, and fit
//! the decay rate of their pairwise deviations.

use rayon::prelude::*;
use serde::Serialize;

use crate::integration::{riemann_integral, IntegrandSpec};
use crate::io::format_sig17;
use crate::local_time::{local_time_occupation, local_time_sign_change};
use crate::sampler::{random_brownian, stream_seed};
use crate::{Error, Result};

use super::{ExperimentConfig, ExperimentKind, Metadata, REPORT_VERSION};

/// Per-level aggregates over seeds (means; the deviation column also carries
/// its median for threshold checks).
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergenceRow {
    pub m: u32,
    pub occupation: f64,
    pub tanaka: f64,
    pub sign_change: f64,
    pub max_pairwise_dev: f64,
    pub median_pairwise_dev: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergenceReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub metadata: Metadata,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of log2(mean max pairwise deviation) against m;
    /// absent for degenerate (single-level) ranges.
    pub fitted_rate_exponent: Option<f64>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("m,occupation,tanaka,signChange,maxPairwiseDev,medianPairwiseDev\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.m,
                format_sig17(row.occupation),
                format_sig17(row.tanaka),
                format_sig17(row.sign_change),
                format_sig17(row.max_pairwise_dev),
                format_sig17(row.median_pairwise_dev),
            ));
        }
        out
    }
}

/// Stage-m estimator triple at time t on the level-m truncation: occupation
/// with band 2^-m, the Tanaka form discretized at grid level m, and the
/// sign-change sum at level m. At dyadic horizons the last two coincide by
/// the discrete identity; the deviation columns are driven by the occupation
/// pair.
fn stage_estimates(
    coeffs: &crate::path_model::SchauderCoeffs,
    m: u32,
    t: f64,
) -> Result<(f64, f64, f64, f64)> {
    let path = coeffs.partial_sum(m)?;
    let occupation = local_time_occupation(&path, t, m, 0.0)?;
    let tanaka =
        path.eval(t)?.abs() - riemann_integral(IntegrandSpec::Sign, &path, t, m)?;
    let sign = local_time_sign_change(&path, t, m)?;
    let dev = (occupation - tanaka)
        .abs()
        .max((occupation - sign).abs())
        .max((tanaka - sign).abs());
    Ok((occupation, tanaka, sign, dev))
}

pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    if config.kind != ExperimentKind::Converge {
        return Err(Error::Config {
            field: "kind",
            message: format!("expected converge, got {}", config.kind),
        });
    }
    let levels: Vec<u32> = config.levels().collect();
    let per_seed: Vec<Vec<(f64, f64, f64, f64)>> = (0..config.seeds)
        .into_par_iter()
        .map(|i| {
            let coeffs = random_brownian(config.level_hi, stream_seed(config.seed_base, i))?;
            levels
                .iter()
                .map(|&m| stage_estimates(&coeffs, m, config.t))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let seeds = config.seeds as f64;
    let rows: Vec<ConvergenceRow> = levels
        .iter()
        .enumerate()
        .map(|(col, &m)| {
            let mut sums = [0.0f64; 4];
            let mut devs: Vec<f64> = Vec::with_capacity(per_seed.len());
            for row in &per_seed {
                let (o, t, s, d) = row[col];
                sums[0] += o;
                sums[1] += t;
                sums[2] += s;
                sums[3] += d;
                devs.push(d);
            }
            devs.sort_by(|a, b| a.partial_cmp(b).expect("deviations are finite"));
            let median = if devs.len() % 2 == 1 {
                devs[devs.len() / 2]
            } else {
                0.5 * (devs[devs.len() / 2 - 1] + devs[devs.len() / 2])
            };
            ConvergenceRow {
                m,
                occupation: sums[0] / seeds,
                tanaka: sums[1] / seeds,
                sign_change: sums[2] / seeds,
                max_pairwise_dev: sums[3] / seeds,
                median_pairwise_dev: median,
            }
        })
        .collect();

    let fitted_rate_exponent = fit_log2_slope(&rows);

    Ok(ConvergenceReport {
        version: REPORT_VERSION.to_string(),
        config: config.clone(),
        metadata: Metadata::new(config.seed_base),
        rows,
        fitted_rate_exponent,
    })
}

fn fit_log2_slope(rows: &[ConvergenceRow]) -> Option<f64> {
    if rows.len() < 2 || rows.iter().any(|r| r.max_pairwise_dev <= 0.0) {
        return None;
    }
    let n = rows.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for row in rows {
        let x = row.m as f64;
        let y = row.max_pairwise_dev.log2();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}
