//! Distributional study of the horizon-1 local time: summary statistics of
//! the sign-change and occupation estimators over many seeds, their
//! agreement, and a documented classical sanity value.

use rayon::prelude::*;
use serde::Serialize;

use crate::io::format_sig17;
use crate::local_time::{local_time_occupation, local_time_sign_change};
use crate::sampler::{random_brownian, stream_seed};
use crate::{Error, Result};

use super::{ExperimentConfig, ExperimentKind, Metadata, REPORT_VERSION};

/// sqrt(2/pi): the classical mean of Brownian local time at the origin over
/// the unit horizon (equivalently E|N(0,1)|). Documented sanity value, not
/// produced by this crate's own theory.
pub const CLASSICAL_MEAN: f64 = 0.7978845608028654;

/// Frozen acceptance band for the classical check at grid level 16 with
/// 20000 seeds. Calibrated against a finer-grid occupation oracle (level 20)
/// before being enabled: both estimators carry a finite-level bias near
/// +0.008 there, and three standard errors add ~0.013.
pub const CLASSICAL_TOLERANCE: f64 = 0.025;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimatorStats {
    pub estimator: String,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// Order statistics at 10%, 20%, ..., 90%.
    pub deciles: Vec<f64>,
}

impl EstimatorStats {
    fn from_samples(name: &str, mut samples: Vec<f64>) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let variance = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        let std_error = (variance / n).sqrt();
        samples.sort_by(|a, b| a.partial_cmp(b).expect("estimates are finite"));
        let deciles = (1..=9)
            .map(|k| samples[k * (samples.len() - 1) / 10])
            .collect();
        Self {
            estimator: name.to_string(),
            mean,
            variance,
            std_error,
            deciles,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DistributionReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub metadata: Metadata,
    /// Path and sign-change grid level (the top of the config range).
    pub grid_level: u32,
    /// Band exponent used by the occupation estimator.
    pub occupation_band_level: u32,
    pub sign_change: EstimatorStats,
    pub occupation: EstimatorStats,
    pub mean_difference: f64,
    pub combined_std_error: f64,
    /// |mean difference| within three combined standard errors.
    pub means_agree: bool,
    pub classical_mean: f64,
    pub classical_tolerance: f64,
    /// Sign-change mean within the frozen band of the classical value; only
    /// evaluated at the full horizon t = 1.
    pub classical_check: Option<bool>,
}

impl DistributionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "estimator,mean,variance,stdError,d10,d20,d30,d40,d50,d60,d70,d80,d90\n",
        );
        for stats in [&self.sign_change, &self.occupation] {
            out.push_str(&stats.estimator);
            for v in [stats.mean, stats.variance, stats.std_error]
                .iter()
                .chain(stats.deciles.iter())
            {
                out.push(',');
                out.push_str(&format_sig17(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Occupation band exponent paired with grid level m: epsilon = 2^-ceil(m/2)
/// balances band bias against band-sampling noise.
pub(crate) fn band_exponent(m: u32) -> u32 {
    m.div_ceil(2)
}

pub fn run_distribution(config: &ExperimentConfig) -> Result<DistributionReport> {
    config.validate()?;
    if config.kind != ExperimentKind::Dist {
        return Err(Error::Config {
            field: "kind",
            message: format!("expected dist, got {}", config.kind),
        });
    }
    if config.seeds < 5000 {
        return Err(Error::TooFewSamples {
            got: config.seeds,
            min: 5000,
        });
    }
    let m = config.level_hi;
    let n_occ = band_exponent(m);
    let t = config.t;
    let pairs: Vec<(f64, f64)> = (0..config.seeds)
        .into_par_iter()
        .map(|i| {
            let path = random_brownian(m, stream_seed(config.seed_base, i))?.partial_sum(m)?;
            Ok((
                local_time_sign_change(&path, t, m)?,
                local_time_occupation(&path, t, n_occ, 0.0)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let sign_change =
        EstimatorStats::from_samples("signChange", pairs.iter().map(|p| p.0).collect());
    let occupation =
        EstimatorStats::from_samples("occupation", pairs.iter().map(|p| p.1).collect());
    let mean_difference = sign_change.mean - occupation.mean;
    let combined_std_error =
        (sign_change.std_error.powi(2) + occupation.std_error.powi(2)).sqrt();
    let means_agree = mean_difference.abs() <= 3.0 * combined_std_error;
    let classical_check = (t == 1.0)
        .then(|| (sign_change.mean - CLASSICAL_MEAN).abs() <= CLASSICAL_TOLERANCE);

    Ok(DistributionReport {
        version: REPORT_VERSION.to_string(),
        config: config.clone(),
        metadata: Metadata::new(config.seed_base),
        grid_level: m,
        occupation_band_level: n_occ,
        sign_change,
        occupation,
        mean_difference,
        combined_std_error,
        means_agree,
        classical_mean: CLASSICAL_MEAN,
        classical_tolerance: CLASSICAL_TOLERANCE,
        classical_check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::PartialConfig;
    use crate::sampler::Seed;

    #[test]
    fn small_run_estimators_agree_and_deciles_are_sorted() {
        let cfg = PartialConfig {
            seeds: Some(5000),
            seed_base: Some(Seed(2)),
            levels: Some((10, 10)),
            ..Default::default()
        }
        .build(ExperimentKind::Dist)
        .unwrap();
        let report = run_distribution(&cfg).unwrap();
        assert_eq!(report.occupation_band_level, 5);
        assert!(report.means_agree, "means differ: {report:?}");
        for stats in [&report.sign_change, &report.occupation] {
            assert!(stats.deciles.windows(2).all(|w| w[1] >= w[0]));
        }
        // Determinism across repeated runs.
        let again = run_distribution(&cfg).unwrap();
        assert_eq!(report.to_csv(), again.to_csv());
    }

    #[test]
    fn too_few_seeds_is_rejected() {
        let cfg = PartialConfig {
            seeds: Some(100),
            ..Default::default()
        }
        .build(ExperimentKind::Dist)
        .unwrap();
        assert!(matches!(
            run_distribution(&cfg),
            Err(Error::TooFewSamples { .. })
        ));
    }
}
