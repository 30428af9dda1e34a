use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lorentz_core::harness::{self, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(
    name = "lorentz",
    version,
    about = "Lorentzian filter sweeps for the tilted-field Ising chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write its CSV.
    Run(RunArgs),
    /// Print a named preset as a config file.
    Preset { name: String },
    /// Parse and check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Output CSV, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Keep complete rows of an existing output and evaluate the rest.
    #[arg(long)]
    resume: bool,
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => harness::load_config(path)?,
        (None, Some(name)) => {
            harness::preset(name).ok_or_else(|| HarnessError::UnknownPreset(name.clone()))?
        }
        (None, None) => unreachable!("clap requires one of them"),
    };
    if let Some(out) = &args.out {
        cfg.output = out.clone();
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fail(e: HarnessError) -> ExitCode {
    eprintln!("lorentz: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(args) => {
            let cfg = match load(&args) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match harness::run(&cfg, args.resume) {
                Ok(s) => {
                    println!(
                        "{} rows ({} resumed, {} flagged) -> {}",
                        s.rows,
                        s.resumed,
                        s.flagged,
                        s.output.display()
                    );
                    ExitCode::from(s.exit_code() as u8)
                }
                Err(e) => fail(e),
            }
        }
        Command::Preset { name } => match harness::preset(&name) {
            Some(cfg) => {
                print!("{cfg}");
                ExitCode::SUCCESS
            }
            None => fail(HarnessError::UnknownPreset(name)),
        },
        Command::Validate { config } => match harness::load_config(&config) {
            Ok(cfg) => {
                println!(
                    "ok: {} over {} points",
                    cfg.kind.name(),
                    harness::expand(&cfg).len()
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
