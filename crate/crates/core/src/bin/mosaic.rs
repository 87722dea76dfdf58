use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mosaic::cli::{cmd_estimate, cmd_map, cmd_report, cmd_sweep, cmd_train, parse_seeds, ExperimentConfig};
use mosaic::rewire::RewireMode;

#[derive(Parser)]
#[command(name = "mosaic", version, about = "Map, estimate and train sparse recurrent SNNs on a tiled routing fabric")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether a triplet mask fits the configured grid.
    Map {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate NT and RT memory needed by the target profile.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one network per seed.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// profile, global or l1-baseline; defaults to the configuration.
        #[arg(long)]
        mode: Option<RewireMode>,
        /// N, N..M or N..=M; defaults to the configuration.
        #[arg(long, alias = "seed")]
        seeds: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train every cell of the [sweep] grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mode: Option<RewireMode>,
        /// Seeds per cell, as N, N..M or N..=M; defaults to
        /// `seeds_per_cell` seeds from the first configured seed.
        #[arg(long, alias = "seed")]
        seeds: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate finished runs into accuracy/memory tables.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path, workers: Option<usize>) -> mosaic::Result<ExperimentConfig> {
    let mut config = ExperimentConfig::read(path)?;
    if let Some(w) = workers {
        config.experiment.workers = w;
    }
    Ok(config)
}

fn run(cli: Cli) -> mosaic::Result<bool> {
    match cli.command {
        Command::Map { config, mask, out } => {
            let report = cmd_map(&load(&config, None)?, &mask, out.as_deref())?;
            println!("{report}");
            Ok(report.mappable)
        }
        Command::Estimate { config, seed, out } => {
            let est = cmd_estimate(&load(&config, None)?, seed, out.as_deref())?;
            println!(
                "NT fan-in: mean {:.1} std {:.2} max {}  RT load: mean {:.1} std {:.2} max {}",
                est.nt.mean, est.nt.std, est.nt.max, est.rt.mean, est.rt.std, est.rt.max
            );
            Ok(true)
        }
        Command::Train { config, mode, seeds, workers, out } => {
            let mut config = load(&config, workers)?;
            if let Some(s) = seeds {
                config.experiment.seeds = parse_seeds(&s)?;
            }
            let mode = mode.unwrap_or(config.rewire.mode);
            let out = out.unwrap_or_else(|| config.experiment.out.clone());
            let runs = cmd_train(&config, mode, &out)?;
            for r in &runs {
                println!(
                    "seed {}: test accuracy {:.3}, memory {}, mappable {}{}",
                    r.seed,
                    r.test_accuracy,
                    r.memory_count,
                    r.mappable,
                    r.message.as_deref().map(|m| format!(" ({m})")).unwrap_or_default()
                );
            }
            Ok(runs.iter().all(|r| r.completed && r.mappable))
        }
        Command::Sweep { config, mode, seeds, workers, out } => {
            let mut config = load(&config, workers)?;
            if let Some(s) = seeds {
                let seeds = parse_seeds(&s)?;
                if let Some(sweep) = config.sweep.as_mut() {
                    sweep.seeds_per_cell = seeds.len();
                }
                config.experiment.seeds = seeds;
            }
            let mode = mode.unwrap_or(config.rewire.mode);
            let out = out.unwrap_or_else(|| config.experiment.out.clone());
            for c in cmd_sweep(&config, mode, &out)? {
                println!(
                    "{}: accuracy {:.3} ± {:.3}, memory {:.0}, all mappable {}",
                    c.cell, c.accuracy_mean, c.accuracy_std, c.memory_mean, c.all_mappable
                );
            }
            Ok(true)
        }
        Command::Report { runs, out } => {
            let report = cmd_report(&runs, out.as_deref())?;
            for r in &report.rows {
                println!(
                    "{:<12} {:<24} n={} memory {:.0} accuracy {:.3} ± {:.3}",
                    r.mode.as_str(),
                    r.cell,
                    r.n_runs,
                    r.memory_mean,
                    r.accuracy_mean,
                    r.accuracy_std
                );
            }
            if let Some(iso) = &report.iso_accuracy {
                println!("memory ratio at accuracy {:.3}: {:.2}", iso.accuracy, iso.ratio);
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
