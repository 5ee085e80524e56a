//! `localtime-lab`: generate seeded paths, query occupation measures, run
//! pathwise integrals and local-time estimators, and drive the seeded
//! experiment suites.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric-contract failure
//! (an experiment whose internal check did not hold), 1 anything else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use localtime_core::experiments::{
    run_experiment, ExperimentConfig, ExperimentKind, OutputFormat, PartialConfig,
};
use localtime_core::integration::{pathwise_integral, IntegrandSpec};
use localtime_core::io::{
    format_sig17, read_path_file, write_code_file, write_json, write_path_file, GeneratedMetadata,
};
use localtime_core::local_time::{cross_validate, local_time_curve, CurveMethod};
use localtime_core::occupation::{occupation_measure, occupation_time, OccupationQuery};
use localtime_core::path_model::{DyadicRational, PiecewiseLinearPath};
use localtime_core::sampler::{
    complexity_proxy, random_brownian, random_code, DeflateCodec, LosslessCodec, Seed,
    GENERATOR_NAME,
};

#[derive(Parser)]
#[command(name = "localtime-lab", version, about = "Local-time estimation lab")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalOpts {
    /// Flat key=value config file (CLI flags win over file entries).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Suppress the summary line on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    OutputFormat::from_str(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded code/path pair or a Gaussian path, with a JSON
    /// metadata sidecar.
    Generate {
        /// Code length; generates a uniform random code and its path.
        #[arg(long, conflicts_with = "max_level")]
        n: Option<u64>,
        /// Tent-coefficient level; generates a Gaussian path.
        #[arg(long)]
        max_level: Option<u32>,
        /// Also record the compression-ratio incompressibility proxy
        /// (codes only).
        #[arg(long)]
        complexity: bool,
    },
    /// Occupation time / measure / density of a stored path.
    Occupation {
        #[arg(long)]
        path: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Level for time/density queries.
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        /// Band half-width; selects an occupation-time query.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Band exponent (half-width 2^-n); selects a density query.
        #[arg(long)]
        n: Option<u32>,
        /// Explicit band `a,b`; selects an occupation-measure query.
        #[arg(long)]
        band: Option<String>,
    },
    /// Adaptive pathwise integral of an integrand along a stored path.
    Integrate {
        /// sign | indplus | indminus | mollified:EPS | const:C
        #[arg(long)]
        spec: String,
        #[arg(long)]
        path: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 16)]
        max_level: u32,
    },
    /// Local-time estimators (point values or full curves).
    Localtime {
        #[arg(long)]
        path: PathBuf,
        /// occ | tanaka | signs | all
        #[arg(long, default_value = "all")]
        method: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Sign-change / Tanaka grid level.
        #[arg(long, default_value_t = 12)]
        m: u32,
        /// Occupation band exponent.
        #[arg(long, default_value_t = 8)]
        n: u32,
        /// Level at which local time is estimated.
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Emit the full curve on the grid k/2^LEVEL instead of a point value.
        #[arg(long)]
        curve: Option<u32>,
    },
    /// Convergence-rate study over grid levels.
    Converge(ExperimentArgs),
    /// Distributional study of the horizon-1 local time.
    Dist(ExperimentArgs),
    /// Mollifier expectation-bound check.
    Bound(ExperimentArgs),
    /// Discrete identity fuzzing.
    Identity(ExperimentArgs),
}

#[derive(Args, Clone, Default)]
struct ExperimentArgs {
    /// Number of seeded samples.
    #[arg(long)]
    seeds: Option<u64>,
    /// Level range `lo..hi` or a single level.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            if let Some(core) = err.downcast_ref::<localtime_core::Error>() {
                if core.is_config() || matches!(core, localtime_core::Error::TooFewSamples { .. })
                {
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let global = cli.global.clone();
    match cli.command {
        Command::Generate {
            n,
            max_level,
            complexity,
        } => generate(&global, n, max_level, complexity),
        Command::Occupation {
            path,
            t,
            x,
            epsilon,
            n,
            band,
        } => occupation(&global, &path, t, x, epsilon, n, band.as_deref()),
        Command::Integrate {
            spec,
            path,
            t,
            tol,
            max_level,
        } => integrate(&global, &spec, &path, t, tol, max_level),
        Command::Localtime {
            path,
            method,
            t,
            m,
            n,
            x,
            tol,
            curve,
        } => localtime(&global, &path, &method, t, m, n, x, tol, curve),
        Command::Converge(args) => experiment(&global, ExperimentKind::Converge, args),
        Command::Dist(args) => experiment(&global, ExperimentKind::Dist, args),
        Command::Bound(args) => experiment(&global, ExperimentKind::Bound, args),
        Command::Identity(args) => experiment(&global, ExperimentKind::Identity, args),
    }
}

/// Writes to --output or stdout.
fn emit(global: &GlobalOpts, text: &str) -> anyhow::Result<()> {
    match &global.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn note(global: &GlobalOpts, line: &str) {
    if !global.quiet {
        eprintln!("{line}");
    }
}

fn format_of(global: &GlobalOpts) -> OutputFormat {
    global.format.unwrap_or(OutputFormat::Json)
}

fn generate(
    global: &GlobalOpts,
    n: Option<u64>,
    max_level: Option<u32>,
    complexity: bool,
) -> anyhow::Result<ExitCode> {
    let seed = Seed(global.seed.unwrap_or(0));
    let prefix = global
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("generated"));
    let prefix = prefix.to_string_lossy().into_owned();

    let mut metadata = GeneratedMetadata {
        seed,
        generator: GENERATOR_NAME.to_string(),
        max_level: None,
        n: None,
        codec_name: None,
        complexity_ratio: None,
    };

    let path = match (n, max_level) {
        (Some(n), None) => {
            let code = random_code(n, seed)?;
            write_code_file(&code, &PathBuf::from(format!("{prefix}.code.txt")))?;
            if complexity {
                let codec = DeflateCodec;
                metadata.codec_name = Some(codec.name().to_string());
                metadata.complexity_ratio = Some(complexity_proxy(&code, &codec)?);
            }
            metadata.n = Some(n);
            PiecewiseLinearPath::from_code(&code)?
        }
        (None, Some(level)) => {
            metadata.max_level = Some(level);
            random_brownian(level, seed)?.partial_sum(level)?
        }
        _ => anyhow::bail!("pass exactly one of --n or --max-level"),
    };

    write_path_file(&path, &PathBuf::from(format!("{prefix}.path.csv")))?;
    write_json(&metadata, &PathBuf::from(format!("{prefix}.meta.json")))?;
    note(
        global,
        &format!("wrote {prefix}.path.csv and {prefix}.meta.json (seed {})", seed.0),
    );
    Ok(ExitCode::SUCCESS)
}

fn occupation(
    global: &GlobalOpts,
    path_file: &Path,
    t: f64,
    x: f64,
    epsilon: Option<f64>,
    n: Option<u32>,
    band: Option<&str>,
) -> anyhow::Result<ExitCode> {
    let path = read_path_file(path_file)?;
    let (label, value) = match (epsilon, n, band) {
        (Some(eps), None, None) => {
            let query = OccupationQuery::new(t, x, eps)?;
            ("occupationTime", occupation_time(&path, &query))
        }
        (None, Some(n), None) => (
            "occupationDensity",
            localtime_core::occupation::occupation_density_estimate(&path, t, x, n)?,
        ),
        (None, None, Some(band)) => {
            let (a, b) = band
                .split_once(',')
                .ok_or_else(|| anyhow::anyhow!("--band wants `a,b`"))?;
            (
                "occupationMeasure",
                occupation_measure(&path, t, a.trim().parse()?, b.trim().parse()?)?,
            )
        }
        _ => anyhow::bail!("pass exactly one of --epsilon, --n, or --band"),
    };
    let text = match format_of(global) {
        OutputFormat::Json => format!("{}\n", serde_json::json!(value)),
        OutputFormat::Csv => format!("query,t,x,value\n{label},{t},{x},{}\n", format_sig17(value)),
    };
    emit(global, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn integrate(
    global: &GlobalOpts,
    spec: &str,
    path_file: &Path,
    t: f64,
    tol: f64,
    max_level: u32,
) -> anyhow::Result<ExitCode> {
    let spec = IntegrandSpec::from_str(spec)?;
    let path = read_path_file(path_file)?;
    let result = pathwise_integral(spec, &path, t, tol, max_level)?;
    let text = match format_of(global) {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(&result)?;
            text.push('\n');
            text
        }
        OutputFormat::Csv => format!(
            "spec,t,value,gridLevel,cauchyGap,converged\n{spec},{t},{},{},{},{}\n",
            format_sig17(result.value),
            result.grid_level,
            format_sig17(result.cauchy_gap),
            result.converged
        ),
    };
    emit(global, &text)?;
    note(
        global,
        &format!(
            "integral {} at level {} (gap {:.3e}, converged {})",
            result.value, result.grid_level, result.cauchy_gap, result.converged
        ),
    );
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn localtime(
    global: &GlobalOpts,
    path_file: &Path,
    method: &str,
    t: f64,
    m: u32,
    n: u32,
    x: f64,
    tol: f64,
    curve: Option<u32>,
) -> anyhow::Result<ExitCode> {
    let path = read_path_file(path_file)?;

    if let Some(level) = curve {
        let method = match method {
            "occ" => CurveMethod::Occupation { n },
            "tanaka" => CurveMethod::Tanaka { n: m },
            "signs" => CurveMethod::SignChange { m },
            other => anyhow::bail!("--curve wants --method occ|tanaka|signs, got {other:?}"),
        };
        let curve = local_time_curve(&path, method, level, x)?;
        let text = match format_of(global) {
            OutputFormat::Json => {
                let mut text = serde_json::to_string_pretty(&curve)?;
                text.push('\n');
                text
            }
            OutputFormat::Csv => {
                let mut out = String::from("k,t,L\n");
                for (k, value) in curve.values.iter().enumerate() {
                    let tk = DyadicRational::new(k as u64, level)?.value();
                    out.push_str(&format!("{k},{tk},{}\n", format_sig17(*value)));
                }
                out
            }
        };
        emit(global, &text)?;
        return Ok(ExitCode::SUCCESS);
    }

    match method {
        "occ" => {
            let value = localtime_core::local_time::local_time_occupation(&path, t, n, x)?;
            emit_point(global, "occupation", t, value)?;
        }
        "tanaka" => {
            let est = localtime_core::local_time::local_time_tanaka(&path, t, tol, m)?;
            emit_point(global, "tanaka", t, est.value)?;
        }
        "signs" => {
            let value = localtime_core::local_time::local_time_sign_change(&path, t, m)?;
            emit_point(global, "signChange", t, value)?;
        }
        "all" => {
            let report = cross_validate(&path, t, m, n, tol)?;
            let text = match format_of(global) {
                OutputFormat::Json => {
                    let mut text = serde_json::to_string_pretty(&report)?;
                    text.push('\n');
                    text
                }
                OutputFormat::Csv => format!(
                    "estimator,t,L\noccupation,{t},{}\ntanaka,{t},{}\nsignChange,{t},{}\n",
                    format_sig17(report.occupation),
                    format_sig17(report.tanaka),
                    format_sig17(report.sign_change)
                ),
            };
            emit(global, &text)?;
            note(
                global,
                &format!("max pairwise deviation {:.6}", report.max_pairwise_dev),
            );
        }
        other => anyhow::bail!("unknown method {other:?} (want occ|tanaka|signs|all)"),
    }
    Ok(ExitCode::SUCCESS)
}

fn emit_point(global: &GlobalOpts, label: &str, t: f64, value: f64) -> anyhow::Result<()> {
    let text = match format_of(global) {
        OutputFormat::Json => format!("{}\n", serde_json::json!(value)),
        OutputFormat::Csv => format!("estimator,t,L\n{label},{t},{}\n", format_sig17(value)),
    };
    emit(global, &text)
}

fn experiment(
    global: &GlobalOpts,
    kind: ExperimentKind,
    args: ExperimentArgs,
) -> anyhow::Result<ExitCode> {
    let mut partial = match &global.config {
        Some(file) => PartialConfig::from_file(file)?,
        None => PartialConfig::default(),
    };
    // Flags override config-file entries.
    if let Some(seeds) = args.seeds {
        partial.seeds = Some(seeds);
    }
    if let Some(levels) = &args.levels {
        partial.levels = Some(localtime_core::experiments::parse_levels(levels)?);
    }
    if let Some(t) = args.t {
        partial.t = Some(t);
    }
    if let Some(tol) = args.tol {
        partial.tol = Some(tol);
    }
    if let Some(seed) = global.seed {
        partial.seed_base = Some(Seed(seed));
    }
    if let Some(format) = global.format {
        partial.output_format = Some(format);
    }
    if let Some(output) = &global.output {
        partial.output_path = Some(output.clone());
    }
    let config: ExperimentConfig = partial.build(kind)?;

    let output = run_experiment(&config)?;
    let rendered = output.render(config.output_format);
    match &config.output_path {
        Some(path) => std::fs::write(path, &rendered)?,
        None => print!("{rendered}"),
    }
    note(global, &output.summary());
    if output.contract_ok() {
        Ok(ExitCode::SUCCESS)
    } else {
        note(global, "numeric contract failed");
        Ok(ExitCode::from(3))
    }
}
