//! Identity fuzzing: both sides of the discrete sign-change identity on
//! seeded random sequences, including exact zeros and negative starts.

use rand_chacha::rand_core::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::io::format_sig17;
use crate::local_time::discrete_tanaka_identity;
use crate::sampler::{rng_from, stream_seed, Seed};
use crate::{Error, Result};

use super::{ExperimentConfig, ExperimentKind, Metadata, REPORT_VERSION};

/// The identity is exact; this bound only absorbs floating-point rounding of
/// sums with at most 64 terms.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub metadata: Metadata,
    pub sequences: u64,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub ok: bool,
    /// The offending sequence when the tolerance is exceeded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_sequence: Option<Vec<f64>>,
}

impl IdentityReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sequences,maxAbsDeviation,tolerance,ok\n");
        out.push_str(&format!(
            "{},{},{},{}\n",
            self.sequences,
            format_sig17(self.max_abs_deviation),
            format_sig17(self.tolerance),
            self.ok
        ));
        out
    }
}

/// Seeded fuzz sequence: length 2..=64, entries uniform in [-1, 1) with a
/// 10% chance of an exact zero (so the sign convention at zero is exercised),
/// and unconstrained first entries.
fn fuzz_sequence(seed: Seed) -> Vec<f64> {
    let mut rng = rng_from(seed);
    let len = 2 + (rng.next_u64() % 63) as usize;
    (0..len)
        .map(|_| {
            if rng.next_u64().is_multiple_of(10) {
                0.0
            } else {
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
                2.0 * u - 1.0
            }
        })
        .collect()
}

pub fn run_identity_fuzz(config: &ExperimentConfig) -> Result<IdentityReport> {
    config.validate()?;
    if config.kind != ExperimentKind::Identity {
        return Err(Error::Config {
            field: "kind",
            message: format!("expected identity, got {}", config.kind),
        });
    }
    let deviations: Vec<f64> = (0..config.seeds)
        .into_par_iter()
        .map(|i| {
            let seq = fuzz_sequence(stream_seed(config.seed_base, i));
            let id = discrete_tanaka_identity(&seq)?;
            Ok((id.lhs - id.rhs).abs())
        })
        .collect::<Result<Vec<_>>>()?;

    let (mut max_abs_deviation, mut argmax) = (0.0f64, 0u64);
    for (i, dev) in deviations.iter().enumerate() {
        if *dev > max_abs_deviation {
            max_abs_deviation = *dev;
            argmax = i as u64;
        }
    }
    let ok = max_abs_deviation <= IDENTITY_TOLERANCE;
    let worst_sequence =
        (!ok).then(|| fuzz_sequence(stream_seed(config.seed_base, argmax)));

    Ok(IdentityReport {
        version: REPORT_VERSION.to_string(),
        config: config.clone(),
        metadata: Metadata::new(config.seed_base),
        sequences: config.seeds,
        max_abs_deviation,
        tolerance: IDENTITY_TOLERANCE,
        ok,
        worst_sequence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::PartialConfig;

    #[test]
    fn fuzz_run_is_exact_and_deterministic() {
        let cfg = PartialConfig {
            seeds: Some(5000),
            seed_base: Some(Seed(99)),
            ..Default::default()
        }
        .build(ExperimentKind::Identity)
        .unwrap();
        let report = run_identity_fuzz(&cfg).unwrap();
        assert!(report.ok, "max deviation {}", report.max_abs_deviation);
        assert!(report.worst_sequence.is_none());
        assert_eq!(report.to_csv(), run_identity_fuzz(&cfg).unwrap().to_csv());
    }

    #[test]
    fn sequences_include_zeros_and_negative_starts() {
        let mut zeros = 0usize;
        let mut negative_starts = 0usize;
        for i in 0..200 {
            let seq = fuzz_sequence(Seed(i));
            zeros += seq.iter().filter(|x| **x == 0.0).count();
            if seq[0] < 0.0 {
                negative_starts += 1;
            }
        }
        assert!(zeros > 100, "only {zeros} exact zeros in the fuzz corpus");
        assert!(negative_starts > 50);
    }

    #[test]
    fn zero_seeds_is_a_config_error() {
        let partial = PartialConfig {
            seeds: Some(0),
            ..Default::default()
        };
        assert!(matches!(
            partial.build(ExperimentKind::Identity),
            Err(Error::Config { field: "seeds", .. })
        ));
    }
}
