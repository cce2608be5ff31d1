use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use g2beam::correlator::HistogramSpec;
use g2beam_cli::commands;
use g2beam_cli::config::RunConfig;
use g2beam_cli::{CliError, Result};

/// Atomic-beam photon correlation simulator and analysis tools.
#[derive(Parser)]
#[command(name = "g2beam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (`key = value` lines).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides `sim.seed`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic atom, overlap and beam correlation curves.
    Analytic {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, value_name = "SECONDS")]
        bin: Option<f64>,
        #[arg(long, value_name = "SECONDS")]
        maxlag: Option<f64>,
    },
    /// Reference curves with and without background.
    Figure1 {
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Simulate a photon timestamp file.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Cross-correlate the two detectors of a timestamp file.
    Correlate {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, value_name = "SECONDS")]
        bin: Option<f64>,
        #[arg(long, value_name = "SECONDS")]
        maxlag: Option<f64>,
    },
    /// Photon counting statistics of a timestamp file.
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "SECONDS")]
        window: Option<f64>,
    },
    /// Sample standing-wave phase excursions.
    Phase {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, value_name = "SECONDS")]
        window: Option<f64>,
    },
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = commands::load_config(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn positive(flag: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "invalid value for `--{flag}`: must be positive, got {v}"
        )))
    }
}

fn histogram(cfg: &mut RunConfig, bin: Option<f64>, maxlag: Option<f64>) -> Result<()> {
    let bin = bin.map_or(Ok(cfg.histogram.bin_width), |b| positive("bin", b))?;
    let maxlag = maxlag.map_or(Ok(cfg.histogram.max_lag), |m| positive("maxlag", m))?;
    cfg.histogram = HistogramSpec::new(bin, maxlag)
        .map_err(|e| CliError::Config(format!("--bin/--maxlag: {e}")))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analytic {
            common,
            out,
            bin,
            maxlag,
        } => {
            let mut cfg = load(&common)?;
            histogram(&mut cfg, bin, maxlag)?;
            commands::write_file(&out, &commands::analytic(&cfg)?.to_csv())
        }
        Command::Figure1 { out } => commands::write_file(&out, &commands::figure1()?.to_csv()),
        Command::Simulate { common, out } => {
            let cfg = load(&common)?;
            print!("{}", commands::simulate(&cfg, &out)?);
            Ok(())
        }
        Command::Correlate {
            common,
            input,
            out,
            bin,
            maxlag,
        } => {
            let mut cfg = load(&common)?;
            histogram(&mut cfg, bin, maxlag)?;
            let events = commands::load_events(&input)?;
            commands::write_file(&out, &commands::correlate(&cfg, &events)?.to_csv())
        }
        Command::Stats {
            common,
            input,
            window,
        } => {
            let mut cfg = load(&common)?;
            if let Some(w) = window {
                cfg.stats_window = positive("window", w)?;
            }
            let events = commands::load_events(&input)?;
            print!("{}", commands::stats(&cfg, &events)?);
            Ok(())
        }
        Command::Phase {
            common,
            out,
            window,
        } => {
            let mut cfg = load(&common)?;
            if let Some(w) = window {
                cfg.phase_window = positive("window", w)?;
            }
            let (csv, summary) = commands::phase(&cfg)?;
            commands::write_file(&out, &csv)?;
            print!("{summary}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
