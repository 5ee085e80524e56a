//! Reference calibration run backing the frozen thresholds in the
//! acceptance suite. Re-run with `cargo run --release -p localtime-core
//! --example calibration`; all numbers are pure functions of the seeds
//! printed below.

use rayon::prelude::*;

use localtime_core::experiments::{ExperimentKind, PartialConfig};
use localtime_core::integration::{
    mollifier_expectation_bound, riemann_integral, IntegrandSpec,
};
use localtime_core::local_time::{local_time_occupation, local_time_sign_change};
use localtime_core::path_model::PiecewiseLinearPath;
use localtime_core::sampler::{random_brownian, stream_seed, Seed};

const SEED: Seed = Seed(20250810);

fn gaussian_path(level: u32, seed: Seed) -> PiecewiseLinearPath {
    random_brownian(level, seed)
        .unwrap()
        .partial_sum(level)
        .unwrap()
}

fn main() {
    let t0 = std::time::Instant::now();

    println!("== convergence study (levels 10..18, 50 seeds, seed {}) ==", SEED.0);
    let cfg = PartialConfig {
        seeds: Some(50),
        seed_base: Some(SEED),
        levels: Some((10, 18)),
        ..Default::default()
    }
    .build(ExperimentKind::Converge)
    .unwrap();
    let report = localtime_core::experiments::run_convergence(&cfg).unwrap();
    for row in &report.rows {
        println!(
            "  m={:2}  meanMaxDev={:.6}  medianMaxDev={:.6}",
            row.m, row.max_pairwise_dev, row.median_pairwise_dev
        );
    }
    println!(
        "  fitted log2 rate exponent: {:?}   [{:.1?}]",
        report.fitted_rate_exponent,
        t0.elapsed()
    );

    println!("== distribution at level 16, 20000 seeds ==");
    let t1 = std::time::Instant::now();
    let cfg = PartialConfig {
        seeds: Some(20000),
        seed_base: Some(SEED),
        levels: Some((16, 16)),
        ..Default::default()
    }
    .build(ExperimentKind::Dist)
    .unwrap();
    let report = localtime_core::experiments::run_distribution(&cfg).unwrap();
    println!(
        "  mean(sign)={:.6} se={:.6}  mean(occ)={:.6} se={:.6}",
        report.sign_change.mean,
        report.sign_change.std_error,
        report.occupation.mean,
        report.occupation.std_error
    );
    println!(
        "  diff={:+.6} combinedSE={:.6} agree={}  sign-classical={:+.6}  [{:.1?}]",
        report.mean_difference,
        report.combined_std_error,
        report.means_agree,
        report.sign_change.mean - localtime_core::experiments::CLASSICAL_MEAN,
        t1.elapsed()
    );

    println!("== fine-grid classical oracle (level 20, 2000 seeds) ==");
    let t2 = std::time::Instant::now();
    let vals: Vec<(f64, f64)> = (0..2000u64)
        .into_par_iter()
        .map(|i| {
            let path = gaussian_path(20, stream_seed(Seed(555), i));
            (
                local_time_sign_change(&path, 1.0, 20).unwrap(),
                local_time_occupation(&path, 1.0, 10, 0.0).unwrap(),
            )
        })
        .collect();
    let mean_s = vals.iter().map(|v| v.0).sum::<f64>() / vals.len() as f64;
    let mean_o = vals.iter().map(|v| v.1).sum::<f64>() / vals.len() as f64;
    let sd = (vals.iter().map(|v| (v.0 - mean_s) * (v.0 - mean_s)).sum::<f64>()
        / (vals.len() as f64 - 1.0))
        .sqrt();
    println!(
        "  mean(sign)={mean_s:.6}  mean(occ)={mean_o:.6}  se={:.6}  sign-classical={:+.6}  [{:.1?}]",
        sd / (vals.len() as f64).sqrt(),
        mean_s - localtime_core::experiments::CLASSICAL_MEAN,
        t2.elapsed()
    );

    println!("== mollifier bound margins (n=2..8, 20000 paths, level 12) ==");
    let t3 = std::time::Instant::now();
    let table = mollifier_expectation_bound(2..=8, 20000, 12, SEED).unwrap();
    for row in &table.rows {
        let margin = (row.bound + 3.0 * row.std_error - row.estimate) / row.std_error;
        println!(
            "  n={}  estimate={:.6e}  bound={:.6e}  se={:.2e}  margin={:+.2} se  satisfied={}",
            row.n, row.estimate, row.bound, row.std_error, margin, row.satisfied
        );
    }
    println!("  [{:.1?}]", t3.elapsed());

    println!("== wiener covariance margins (level 10, 20000 seeds, 5x5 grid) ==");
    let t4 = std::time::Instant::now();
    let grid: Vec<f64> = (1..=5).map(|k| k as f64 / 8.0).collect();
    let samples: Vec<Vec<f64>> = (0..20000u64)
        .into_par_iter()
        .map(|i| {
            let path = gaussian_path(10, stream_seed(SEED, i));
            grid.iter().map(|s| path.eval(*s).unwrap()).collect()
        })
        .collect();
    let mut worst = f64::INFINITY;
    for (a, &s) in grid.iter().enumerate() {
        for (b, &t) in grid.iter().enumerate() {
            let prods: Vec<f64> = samples.iter().map(|row| row[a] * row[b]).collect();
            let mean = prods.iter().sum::<f64>() / prods.len() as f64;
            let sd = (prods.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>()
                / (prods.len() as f64 - 1.0))
                .sqrt();
            let se = sd / (prods.len() as f64).sqrt();
            let z = (mean - s.min(t)).abs() / se;
            worst = worst.min(3.0 - z);
            if a <= b {
                println!("  s={s:.3} t={t:.3}  cov={mean:+.5}  min={:.3}  |z|={z:.2}", s.min(t));
            }
        }
    }
    println!("  worst 3-z margin: {worst:+.2}  [{:.1?}]", t4.elapsed());

    println!("== grid-identity max deviation (1000 paths, level 14) ==");
    let t5 = std::time::Instant::now();
    let devs: Vec<f64> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let path = gaussian_path(14, stream_seed(SEED, i));
            let mut worst: f64 = 0.0;
            for t in [0.25, 0.5, 0.75, 1.0] {
                let sign = local_time_sign_change(&path, t, 14).unwrap();
                let tan = path.eval(t).unwrap().abs()
                    - riemann_integral(IntegrandSpec::Sign, &path, t, 14).unwrap();
                worst = worst.max((sign - tan).abs());
            }
            worst
        })
        .collect();
    let max = devs.iter().cloned().fold(0.0f64, f64::max);
    println!("  max |signChange - gridTanaka| = {max:.3e}  [{:.1?}]", t5.elapsed());

    println!("total {:.1?}", t0.elapsed());
}
