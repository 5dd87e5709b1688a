mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Robust second-order Volterra system identification experiments.
#[derive(Debug, Parser)]
#[command(name = "robust-volterra", version, about)]
struct Cli {
    /// Worker threads for Monte-Carlo trials (default: all cores).
    #[arg(long, global = true, env = "ROBUST_VOLTERRA_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Identify(ExperimentArgs),
    /// Evaluate the steady-state EMSE prediction.
    Theory(TheoryArgs),
    /// Re-run an experiment for each value of one parameter.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Parameter to vary: sigma, snr-db, lambda, alpha, gamma, trials or horizon.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
    },
    /// Run the config's scenario with a different algorithm list.
    Compare {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Comma-separated algorithms, e.g. `gm:0.3,rls,rlm,lpn:1.2`.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        algorithms: Vec<String>,
    },
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV and plot data.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Gaussian noise at this SNR (dB) instead of the config's noise.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Sigma applied to every Geman-McClure entry.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Expanded filter length; sets the synthetic plant's memory.
    #[arg(long = "L")]
    len: Option<usize>,
    /// Alpha-stable noise characteristic exponent.
    #[arg(long)]
    alpha: Option<f64>,
    /// Alpha-stable noise dispersion.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Debug, Args)]
struct TheoryArgs {
    /// SNR against unit clean-signal power.
    #[arg(
        long = "snr-db",
        allow_hyphen_values = true,
        conflicts_with = "noise_variance",
        required_unless_present = "noise_variance"
    )]
    snr_db: Option<f64>,
    #[arg(long = "noise-variance")]
    noise_variance: Option<f64>,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 0.99)]
    lambda: f64,
    #[arg(long = "L")]
    len: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
