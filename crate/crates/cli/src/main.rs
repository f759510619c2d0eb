use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wavesearch_cli::{
    compare_runs, run_experiment, ConfigError, ExperimentConfig, ExperimentKind, HarnessError,
    OutputFormat,
};

#[derive(Parser)]
#[command(
    name = "wavesearch",
    version,
    about = "Run and compare wavesearch experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Abstract amplitude amplification.
    Grover(RunArgs),
    /// Coupled oscillators with the tapping oracle.
    Classical(RunArgs),
    /// Coherent states, optionally tapped.
    Quantum(RunArgs),
    /// Target-mass detuning sweep.
    Sweep(RunArgs),
    /// Rate enhancement, single-tap curve and soft-mode check.
    Catalysis(RunArgs),
    /// Compare the metrics of two summary.json files.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config; every section is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "WAVESEARCH_OUT")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel sweep points; defaults to the number of cores.
    #[arg(long, env = "WAVESEARCH_JOBS")]
    jobs: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Args)]
struct CompareArgs {
    baseline: PathBuf,
    candidate: PathBuf,
    /// Default tolerance, absolute or relative.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Per-metric tolerance, `name=value`; repeatable.
    #[arg(long = "metric-tol", value_parser = parse_metric_tol)]
    metric_tol: Vec<(String, f64)>,
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn parse_metric_tol(text: &str) -> Result<(String, f64), String> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{text}`"))?;
    let value: f64 = value
        .parse()
        .map_err(|_| format!("tolerance for `{name}` is not a number"))?;
    if !(value >= 0.0) {
        return Err(format!("tolerance for `{name}` must be >= 0"));
    }
    Ok((name.to_string(), value))
}

fn load_config(kind: ExperimentKind, args: RunArgs) -> Result<ExperimentConfig, ConfigError> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(found) = config.kind {
        if found != kind {
            return Err(ConfigError::Invalid {
                field: "kind".into(),
                reason: format!("config is for `{found}`, subcommand is `{kind}`"),
            });
        }
    }
    config.kind = Some(kind);
    if args.out.is_some() {
        config.output.dir = args.out;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.jobs.is_some() {
        config.jobs = args.jobs;
    }
    if args.format.is_some() {
        config.output.format = args.format;
    }
    Ok(config)
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<(), HarnessError> {
    let config = load_config(kind, args)?;
    let summary = run_experiment(&config)?;
    for (name, value) in &summary.metrics {
        println!("{name} = {value:?}");
    }
    for note in &summary.notes {
        println!("note: {note}");
    }
    eprintln!(
        "wrote {} file(s) to {} in {:.3} s",
        summary.artifacts.len(),
        wavesearch_cli::output_dir(&config).display(),
        summary.duration.as_secs_f64()
    );
    Ok(())
}

fn compare(args: CompareArgs) -> Result<bool, HarnessError> {
    let tolerances: BTreeMap<String, f64> = args.metric_tol.into_iter().collect();
    let report = compare_runs(&args.baseline, &args.candidate, &tolerances, args.tol)?;
    for diff in &report.failures {
        println!(
            "FAIL {}: baseline {:?}, candidate {:?}, abs {:e}, rel {:e}, tol {:e}",
            diff.name, diff.baseline, diff.candidate, diff.abs_diff, diff.rel_diff, diff.tolerance
        );
    }
    println!(
        "{} of {} metrics within tolerance",
        report.compared - report.failures.len(),
        report.compared
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Grover(a) => run(ExperimentKind::Grover, a).map(|_| true),
        Command::Classical(a) => run(ExperimentKind::Classical, a).map(|_| true),
        Command::Quantum(a) => run(ExperimentKind::Quantum, a).map(|_| true),
        Command::Sweep(a) => run(ExperimentKind::Sweep, a).map(|_| true),
        Command::Catalysis(a) => run(ExperimentKind::Catalysis, a).map(|_| true),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
