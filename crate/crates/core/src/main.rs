use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stablelab::expcli::{emit_csv, parse_entries, run_study, write_csv, CliError, ConfigBuilder, Study, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "stablelab", version, about = "Run stable-law convergence and spectral studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the study named in the config file.
    Run(RunArgs),
    RatesCanonicalStable(RunArgs),
    RatesParetoSym(RunArgs),
    RatesLayeredStable(RunArgs),
    RatesLayeredCauchy(RunArgs),
    SpectralSuite(RunArgs),
    SteinSuite(RunArgs),
    SpecfunSuite(RunArgs),
    PoincareSuite(RunArgs),
    /// List the available studies.
    Studies,
}

#[derive(Args)]
struct RunArgs {
    /// Config file of `key = value` lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    d: Option<String>,
    /// Comma list or `lo..hi` doubling sequence.
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    #[arg(long)]
    ladder: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<String>,
}

fn builder(study: Option<Study>, args: &RunArgs) -> Result<ConfigBuilder, CliError> {
    let mut b = match &args.config {
        Some(path) => parse_entries(&std::fs::read_to_string(path)?)?,
        None => ConfigBuilder::default(),
    };
    let flags = [
        ("study", study.map(|s| s.name().to_string())),
        ("alpha", args.alpha.clone()),
        ("beta", args.beta.clone()),
        ("d", args.d.clone()),
        ("n_grid", args.n_grid.clone()),
        ("samples", args.samples.clone()),
        ("replicates", args.replicates.clone()),
        ("ladder", args.ladder.clone()),
        ("seed", args.seed.clone()),
        ("out", args.out.as_ref().map(|p| p.display().to_string())),
        ("workers", args.workers.clone()),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            b.set(k, &v)?;
        }
    }
    Ok(b)
}

fn run(study: Option<Study>, args: &RunArgs) -> Result<bool, CliError> {
    let cfg = builder(study, args)?.build()?;
    let out = run_study(&cfg)?;
    match &cfg.out {
        Some(path) => emit_csv(&out.rows, path)?,
        None => write_csv(&out.rows, std::io::stdout().lock())?,
    }
    for e in &out.errors {
        eprintln!("row {} failed: {}", e.label, e.message);
    }
    Ok(out.errors.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (study, args) = match cli.command {
        Command::Studies => {
            for s in Study::ALL {
                println!("{s}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Run(a) => (None, a),
        Command::RatesCanonicalStable(a) => (Some(Study::RatesCanonicalStable), a),
        Command::RatesParetoSym(a) => (Some(Study::RatesParetoSym), a),
        Command::RatesLayeredStable(a) => (Some(Study::RatesLayeredStable), a),
        Command::RatesLayeredCauchy(a) => (Some(Study::RatesLayeredCauchy), a),
        Command::SpectralSuite(a) => (Some(Study::SpectralSuite), a),
        Command::SteinSuite(a) => (Some(Study::SteinSuite), a),
        Command::SpecfunSuite(a) => (Some(Study::SpecfunSuite), a),
        Command::PoincareSuite(a) => (Some(Study::PoincareSuite), a),
    };
    match run(study, &args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
