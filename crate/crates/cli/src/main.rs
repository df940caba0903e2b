use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ssml_cli::commands::{self, GridSpec, Spacing};
use ssml_cli::config::{self, Overrides, SEED_ENV};
use ssml_cli::manifest::ExperimentConfig;
use ssml_cli::output;
use ssml_core::experiments::{GlobalConfig, LocalConfig, MultiscaleConfig};

#[derive(Parser)]
#[command(
    name = "ssml",
    version,
    about = "Single-shot measurement learning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (decimal or 0x-prefixed hex).
    #[arg(long, value_parser = config::parse_seed)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetArg {
    Local,
    Global,
    Multiscale,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    Log,
    Linear,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed-depth local sweep over depths and halting thresholds.
    RunLocal(RunArgs),
    /// Single-depth sweep from a uniform prior over the full circle.
    RunGlobal(RunArgs),
    /// Coarse-to-fine depth doubling.
    RunMultiscale(RunArgs),
    /// Print run-length certificates.
    Certify {
        #[arg(long = "m-halt", value_delimiter = ',', required = true)]
        m_halt: Vec<u32>,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        /// Quantum Fisher information for the parameter-space bound.
        #[arg(long)]
        qfi: Option<f64>,
        /// Emit CSV instead of a table.
        #[arg(long)]
        csv: bool,
    },
    /// Classical Fisher information of the one-bit record for a NOON probe.
    Fisher {
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 1e-4)]
        delta_min: f64,
        #[arg(long, default_value_t = 1.0)]
        delta_max: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long, value_enum, default_value_t = SpacingArg::Log)]
        spacing: SpacingArg,
        /// Prepend the dark-fringe point delta = 0.
        #[arg(long)]
        include_zero: bool,
    },
    /// Log-log least-squares fit of two columns of an emitted CSV.
    Fit {
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Keep only rows where COLUMN=VALUE; repeatable.
        #[arg(long = "filter", value_parser = parse_filter)]
        filters: Vec<(String, String)>,
    },
    /// Rerun a manifest and check every output digest.
    Replay {
        manifest: PathBuf,
        /// Where to write the rerun; defaults to `replay/` next to the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Print a resolved config as TOML.
    Config {
        #[arg(value_enum)]
        dataset: DatasetArg,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = config::parse_seed)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
    },
}

fn parse_filter(raw: &str) -> Result<(String, String), String> {
    match raw.split_once('=') {
        Some((c, v)) if !c.is_empty() => Ok((c.to_string(), v.to_string())),
        _ => Err(format!("expected COLUMN=VALUE, got `{raw}`")),
    }
}

fn resolve(
    dataset: DatasetArg,
    path: Option<&Path>,
    seed: Option<u64>,
    trials: Option<u64>,
) -> Result<ExperimentConfig> {
    let overrides = Overrides {
        master_seed: seed,
        trials,
    };
    let env = std::env::var(SEED_ENV).ok();
    let env = env.as_deref();
    Ok(match dataset {
        DatasetArg::Local => {
            ExperimentConfig::Local(config::resolve::<LocalConfig>(path, &overrides, env)?)
        }
        DatasetArg::Global => {
            ExperimentConfig::Global(config::resolve::<GlobalConfig>(path, &overrides, env)?)
        }
        DatasetArg::Multiscale => ExperimentConfig::Multiscale(
            config::resolve::<MultiscaleConfig>(path, &overrides, env)?,
        ),
    })
}

fn run(dataset: DatasetArg, args: &RunArgs) -> Result<()> {
    let config = resolve(dataset, args.config.as_deref(), args.seed, args.trials)?;
    let manifest = commands::run_experiment(&config, &args.out, args.threads)?;
    for o in &manifest.outputs {
        println!("{}  {}", o.sha256, args.out.join(&o.file).display());
    }
    Ok(())
}

fn main_inner() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::RunLocal(a) => run(DatasetArg::Local, &a)?,
        Command::RunGlobal(a) => run(DatasetArg::Global, &a)?,
        Command::RunMultiscale(a) => run(DatasetArg::Multiscale, &a)?,
        Command::Certify {
            m_halt,
            eta,
            qfi,
            csv,
        } => {
            let certs = commands::certify(&m_halt, eta, qfi)?;
            if csv {
                print!("{}", output::certify_csv(&certs));
            } else {
                print!("{}", output::certify_table(&certs));
            }
        }
        Command::Fisher {
            m,
            delta_min,
            delta_max,
            points,
            spacing,
            include_zero,
        } => {
            let grid = GridSpec {
                min: delta_min,
                max: delta_max,
                points,
                spacing: match spacing {
                    SpacingArg::Log => Spacing::Log,
                    SpacingArg::Linear => Spacing::Linear,
                },
                include_zero,
            };
            print!("{}", output::fisher_csv(&commands::fisher(m, &grid)?));
        }
        Command::Fit { csv, x, y, filters } => {
            let fit = commands::fit_csv(&csv, &x, &y, &filters)?;
            print!("{}", output::to_json(&fit)?);
        }
        Command::Replay {
            manifest,
            out,
            threads,
        } => {
            let out = out.unwrap_or_else(|| commands::default_replay_dir(&manifest));
            if out.join(ssml_cli::manifest::MANIFEST_FILE) == manifest {
                bail!("replay output directory must differ from the original run");
            }
            let (_, bad) = commands::replay(&manifest, &out, threads)
                .with_context(|| format!("replaying {}", manifest.display()))?;
            if !bad.is_empty() {
                eprintln!("digest mismatch: {}", bad.join(", "));
                return Ok(ExitCode::from(1));
            }
            println!("all outputs match");
        }
        Command::Config {
            dataset,
            config: path,
            seed,
            trials,
        } => {
            let text = match resolve(dataset, path.as_deref(), seed, trials)? {
                ExperimentConfig::Local(c) => config::to_toml(&c)?,
                ExperimentConfig::Global(c) => config::to_toml(&c)?,
                ExperimentConfig::Multiscale(c) => config::to_toml(&c)?,
            };
            print!("{text}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
