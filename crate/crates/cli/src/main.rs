//! `maser`: simulate, fit and de-embed spin-ensemble maser and cooler data.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use maser_core::chain::ChainMode;
use maser_core::fitting::LineModel;
use maser_core::Branch;
use serde_json::Value;

use commands::extract::Device;
use commands::fit::FitKind;
use config::RunConfig;
use error::CliResult;

#[derive(Parser, Debug)]
#[command(name = "maser", version, about = "Spin-ensemble maser amplifier and cooler toolkit")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Seed for random sampling.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    seed: u64,
    /// Receiver-chain inversion with G_A - 1 replaced by G_A and linear temperatures.
    #[arg(long, global = true)]
    compat_paper_approx: bool,
    /// Overrides `mode.branch` from the config.
    #[arg(long, global = true, value_enum)]
    branch: Option<BranchArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BranchArg {
    Amplify,
    Cool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reflection, gain and noise spectra over the configured sweep.
    Simulate,
    /// Fit a measured trace.
    Fit {
        #[command(subcommand)]
        kind: FitCommand,
    },
    /// Device noise from an on/off noise-ratio measurement.
    Extract {
        #[arg(value_enum)]
        device: DeviceArg,
        /// JSON with `ratio` (or `ratio_db`) and, for a maser, `g_m` (or `g_m_db`);
        /// or a CSV `frequency_hz,psd_on_dbm_per_hz,psd_off_dbm_per_hz`.
        measurement: PathBuf,
        /// Maser peak gain for a PSD table, dB.
        #[arg(long = "g-m-db", allow_hyphen_values = true)]
        g_m_db: Option<f64>,
    },
    /// Spin polarization and temperature from an echo enhancement.
    SpinTemp {
        /// Echo enhancement relative to thermal equilibrium (negative when inverted).
        #[arg(long, allow_hyphen_values = true)]
        chi: f64,
        /// Reference (thermal equilibrium) temperature, K.
        #[arg(long = "t0-k")]
        t0_k: f64,
        /// Spin transition frequency, Hz.
        #[arg(long = "omega-s-hz")]
        omega_s_hz: f64,
    },
    /// Single-spin coupling, filling factor and mode volume from a field map.
    Coupling {
        /// CSV `x_m,y_m,z_m,volume_m3,b1x_t,b1y_t,b1z_t,in_sample`.
        fieldmap: PathBuf,
    },
    /// Draw discrete spins from the configured ensemble.
    SampleEnsemble {
        #[arg(long, default_value_t = 1000)]
        spins: usize,
    },
}

#[derive(Subcommand, Debug)]
enum FitCommand {
    /// Complex reflection trace, CSV `freq_hz,re,im`.
    Reflection { input: PathBuf },
    /// Gain curve, CSV `freq_hz,gain_db`; resonator and ensemble shape from the config.
    Gain { input: PathBuf },
    /// Field-swept line, CSV `b0_t,signal`.
    Line {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "gaussian")]
        model: ModelArg,
    },
    /// Exponential decay, CSV `time_s,signal`.
    Decay { input: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Gaussian,
    TripleLorentzian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DeviceArg {
    Maser,
    Cooler,
}

fn run(cli: Cli) -> CliResult<Value> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let branch = match cli.branch {
        Some(BranchArg::Amplify) => Branch::Amplify,
        Some(BranchArg::Cool) => Branch::Cool,
        None => cfg.mode.branch.unwrap_or(Branch::Amplify),
    };
    let chain_mode = if cli.compat_paper_approx { ChainMode::PaperApprox } else { cfg.mode.chain.unwrap_or_default() };
    let out = cli.out.as_path();
    let doc = match cli.command {
        Command::Simulate => commands::simulate::run(&cfg, branch, out)?,
        Command::Fit { kind } => {
            let (kind, input) = match kind {
                FitCommand::Reflection { input } => (FitKind::Reflection, input),
                FitCommand::Gain { input } => (FitKind::Gain, input),
                FitCommand::Line { input, model } => (
                    FitKind::Line(match model {
                        ModelArg::Gaussian => LineModel::Gaussian,
                        ModelArg::TripleLorentzian => LineModel::TripleLorentzian,
                    }),
                    input,
                ),
                FitCommand::Decay { input } => (FitKind::Decay, input),
            };
            commands::fit::run(kind, &input, &cfg, out)?
        }
        Command::Extract { device, measurement, g_m_db } => {
            let device = match device {
                DeviceArg::Maser => Device::Maser,
                DeviceArg::Cooler => Device::Cooler,
            };
            commands::extract::run(device, &measurement, g_m_db, &cfg, chain_mode, out)?
        }
        Command::SpinTemp { chi, t0_k, omega_s_hz } => commands::misc::spin_temp(chi, t0_k, omega_s_hz, out)?,
        Command::Coupling { fieldmap } => commands::misc::coupling(&fieldmap, &cfg, out)?,
        Command::SampleEnsemble { spins } => commands::misc::sample_ensemble(&cfg, spins, cli.seed, out)?,
    };
    Ok(doc)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(doc) => {
            print!("{}", io::json_text(&doc));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("maser: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
