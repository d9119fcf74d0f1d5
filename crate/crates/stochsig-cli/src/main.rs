//! `stochsig <experiment>`: runs one experiment suite and writes its report.
//!
//! Exit status is 0 when every row passes, 1 when some row fails and 2 on
//! errors (bad config, I/O, solver blow-up beyond the tolerated rate).

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use stochsig::experiments::{format_float, run, ExperimentConfig, Row, Suite, CSV_HEADER};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Lib(#[from] stochsig::Error),
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("writing report: {0}")]
    Io(#[from] io::Error),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Marginals of (W, H, K), signature identities, midpoint splitting
    Moments,
    /// Bridge-area law and weak Levy area moment matching
    LevyArea,
    /// Space-space-time area estimators against the fine-path oracle
    Sst,
    /// Exact word-algebra identities and numeric shuffle checks
    ShuffleCheck,
    /// Strong and weak convergence studies
    Convergence,
    /// Strong error ratios on the sin oscillator
    Ratio,
    /// Multilevel Monte Carlo on Heston
    Mlmc,
}

impl Command {
    fn suite(self) -> Suite {
        match self {
            Command::Moments => Suite::Moments,
            Command::LevyArea => Suite::LevyArea,
            Command::Sst => Suite::Sst,
            Command::ShuffleCheck => Suite::ShuffleCheck,
            Command::Convergence => Suite::Convergence,
            Command::Ratio => Suite::Ratio,
            Command::Mlmc => Suite::Mlmc,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "stochsig", version, about = "Brownian signature sampling and SDE solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// key = value file; unknown keys are rejected
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed, overrides the config [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Main Monte Carlo sample count (at least 100)
    #[arg(long, global = true)]
    paths: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    out: Format,
    /// Worker threads; results do not depend on it. 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(p) = cli.paths {
        cfg.paths = Some(p);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_csv(rows: &[Row], w: impl Write) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        out.write_record(r.fields())?;
    }
    out.flush()?;
    Ok(())
}

fn json_float(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map(serde_json::Value::Number).unwrap_or(serde_json::Value::Null)
}

fn write_json(rows: &[Row], mut w: impl Write) -> Result<(), CliError> {
    let items: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "experiment": r.experiment,
                "solver": r.solver,
                "N": r.n,
                "paths": r.paths,
                "estimate": json_float(r.estimate),
                "stderr": json_float(r.stderr),
                "target": json_float(r.target),
                "tolerance": json_float(r.tolerance),
                "runtime_s": json_float(r.runtime_s),
                "pass": r.pass(),
            })
        })
        .collect();
    serde_json::to_writer_pretty(&mut w, &items)?;
    writeln!(w)?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let cfg = load_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build()?;
    let suite = cli.command.suite();
    let rows = pool.install(|| run(suite, &cfg))?;

    let mut buf = Vec::new();
    match cli.out {
        Format::Csv => write_csv(&rows, &mut buf)?,
        Format::Json => write_json(&rows, &mut buf)?,
    }
    match &cfg.output {
        Some(path) => fs::write(path, &buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }

    let failed: Vec<&Row> = rows.iter().filter(|r| !r.pass()).collect();
    for r in &failed {
        eprintln!(
            "FAIL {} [{}] estimate {} target {} tolerance {}",
            r.experiment,
            r.solver,
            format_float(r.estimate),
            format_float(r.target),
            format_float(r.tolerance)
        );
    }
    eprintln!("{suite}: {} rows, {} failed", rows.len(), failed.len());
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
