use std::fmt;
use std::io::Write;
use std::path::Path;

use robust_volterra::harness::output::{emit_plot_data, fmt_sig9, write_experiment, write_sweep};
use robust_volterra::{
    predict_emse, run_experiment, AlgorithmSpec, Error, Estimator, Experiment, ExperimentConfig,
    ExperimentResult, NoiseSpec, TheoryInputs,
};

use crate::{Cli, Command, ExperimentArgs, TheoryArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(Error::DivergenceDominated { .. }) => 3,
            CliError::Lib(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

pub fn dispatch(cli: Cli) -> Result<()> {
    let threads = cli.threads;
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    match cli.command {
        Command::Theory(args) => theory(&args),
        Command::Identify(args) => {
            let cfg = load(&args)?;
            let (exp, result) = execute(&cfg, &args, threads)?;
            finish(&exp, &result, &args.out)
        }
        Command::Compare { exp, algorithms } => {
            let mut cfg = load(&exp)?;
            cfg.algorithms = algorithms
                .iter()
                .map(|s| {
                    s.parse::<AlgorithmSpec>()
                        .map_err(|e| CliError::Usage(e.to_string()))
                })
                .collect::<Result<_>>()?;
            if let Some(sigma) = exp.sigma {
                set_sigma(&mut cfg, sigma)?;
            }
            let (resolved, result) = execute(&cfg, &exp, threads)?;
            finish(&resolved, &result, &exp.out)
        }
        Command::Sweep { exp, param, values } => sweep(&exp, &param, &values, threads),
    }
}

fn theory(args: &TheoryArgs) -> Result<()> {
    let variance = match (args.snr_db, args.noise_variance) {
        (Some(snr), None) => 10f64.powf(-snr / 10.0),
        (None, Some(v)) => v,
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --snr-db and --noise-variance".into(),
            ))
        }
    };
    let inputs = TheoryInputs::new(variance, args.lambda, args.len, args.sigma)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let p = predict_emse(&inputs)?;
    out!("EMSE: {:.2} dB", p.emse_db);
    out!("emse: {}", fmt_sig9(p.emse));
    out!("varphi: {}", fmt_sig9(p.varphi));
    out!("noise variance: {}", fmt_sig9(variance));
    Ok(())
}

fn load(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    apply_overrides(&mut cfg, args)?;
    Ok(cfg)
}

fn memory_for_len(len: usize) -> Result<usize> {
    (1..=len).find(|m| m * (m + 3) / 2 == len).ok_or_else(|| {
        CliError::Usage(format!(
            "--L {len} is not a second-order Volterra length M(M+3)/2"
        ))
    })
}

fn set_sigma(cfg: &mut ExperimentConfig, value: f64) -> Result<()> {
    let mut found = false;
    for alg in &mut cfg.algorithms {
        if let AlgorithmSpec::Gm { sigma } = alg {
            *sigma = value;
            found = true;
        }
    }
    if found {
        Ok(())
    } else {
        Err(CliError::Usage(
            "sigma given but the config has no `gm` algorithm".into(),
        ))
    }
}

fn set_alpha_stable(
    cfg: &mut ExperimentConfig,
    alpha: Option<f64>,
    gamma: Option<f64>,
) -> Result<()> {
    let (a0, g0) = match cfg.noise {
        NoiseSpec::AlphaStable { alpha, gamma } => (Some(alpha), Some(gamma)),
        _ => (None, None),
    };
    match (alpha.or(a0), gamma.or(g0)) {
        (Some(alpha), Some(gamma)) => {
            cfg.noise = NoiseSpec::AlphaStable { alpha, gamma };
            Ok(())
        }
        _ => Err(CliError::Usage(
            "alpha-stable noise needs both --alpha and --gamma unless the config already uses it"
                .into(),
        )),
    }
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &ExperimentArgs) -> Result<()> {
    if args.snr_db.is_some() && (args.alpha.is_some() || args.gamma.is_some()) {
        return Err(CliError::Usage(
            "--snr-db cannot be combined with --alpha/--gamma".into(),
        ));
    }
    if let Some(snr_db) = args.snr_db {
        cfg.noise = NoiseSpec::GaussianSnr { snr_db };
    }
    if args.alpha.is_some() || args.gamma.is_some() {
        set_alpha_stable(cfg, args.alpha, args.gamma)?;
    }
    if let Some(sigma) = args.sigma {
        set_sigma(cfg, sigma)?;
    }
    if let Some(lambda) = args.lambda {
        cfg.lambda = lambda;
    }
    if let Some(len) = args.len {
        cfg.memory = Some(memory_for_len(len)?);
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(horizon) = args.horizon {
        cfg.horizon = horizon;
    }
    Ok(())
}

fn set_param(cfg: &mut ExperimentConfig, param: &str, value: f64) -> Result<()> {
    let count = |v: f64| -> Result<usize> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(CliError::Usage(format!(
                "{param} must be a positive integer, got {v}"
            )))
        }
    };
    match param {
        "sigma" => set_sigma(cfg, value)?,
        "snr-db" | "snr_db" => cfg.noise = NoiseSpec::GaussianSnr { snr_db: value },
        "lambda" => cfg.lambda = value,
        "alpha" => set_alpha_stable(cfg, Some(value), None)?,
        "gamma" => set_alpha_stable(cfg, None, Some(value))?,
        "trials" => cfg.trials = count(value)?,
        "horizon" => cfg.horizon = count(value)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown sweep parameter `{other}` (sigma, snr-db, lambda, alpha, gamma, trials, horizon)"
            )))
        }
    }
    Ok(())
}

fn execute(
    cfg: &ExperimentConfig,
    args: &ExperimentArgs,
    threads: Option<usize>,
) -> Result<(Experiment, ExperimentResult)> {
    let exp = cfg.resolve(args.seed)?;
    let result = run_experiment(&exp, threads)?;
    Ok((exp, result))
}

fn divergence_check(result: &ExperimentResult) -> Result<()> {
    match result.algorithms.iter().find(|a| a.all_diverged()) {
        Some(a) => Err(Error::DivergenceDominated {
            algorithm: a.label.clone(),
            trials: a.trials,
        }
        .into()),
        None => Ok(()),
    }
}

fn finish(exp: &Experiment, result: &ExperimentResult, out: &Path) -> Result<()> {
    print_summary(exp, result)?;
    let mut files = write_experiment(result, out)?;
    files.extend(emit_plot_data(result, out)?);
    for f in &files {
        out!("wrote {}", f.display());
    }
    divergence_check(result)
}

fn print_summary(exp: &Experiment, result: &ExperimentResult) -> Result<()> {
    let width = result
        .algorithms
        .iter()
        .map(|a| a.label.len())
        .max()
        .unwrap_or(0)
        .max(9);
    out!(
        "{:<width$}  {:>12}  {:>12}  {:>10}",
        "algorithm",
        "NMSD (dB)",
        "EMSE (dB)",
        "diverged"
    );
    for a in &result.algorithms {
        out!(
            "{:<width$}  {:>12.2}  {:>12.2}  {:>10}",
            a.label,
            a.steady_nmsd_db,
            a.steady_emse_db,
            format!("{}/{}", a.diverged_trials, a.trials)
        );
    }
    if let Some(v) = result.mean_noise_variance {
        for (label, est) in &exp.algorithms {
            if let Estimator::GemanMcClure { sigma } = est {
                let inputs = TheoryInputs::new(v, exp.lambda, exp.plant.len(), sigma.sigma())?;
                out!(
                    "predicted steady-state EMSE for {label}: {:.2} dB",
                    predict_emse(&inputs)?.emse_db
                );
            }
        }
    }
    Ok(())
}

fn sweep(args: &ExperimentArgs, param: &str, values: &[f64], threads: Option<usize>) -> Result<()> {
    let base = load(args)?;
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut cfg = base.clone();
        set_param(&mut cfg, param, v)?;
        let (_, result) = execute(&cfg, args, threads)?;
        rows.push((v, result));
    }
    out!(
        "{:>10}  {:<16}  {:>12}  {:>12}  {:>12}  {:>10}",
        param,
        "algorithm",
        "NMSD (dB)",
        "median (dB)",
        "EMSE (dB)",
        "diverged"
    );
    for (v, r) in &rows {
        for a in &r.algorithms {
            out!(
                "{:>10}  {:<16}  {:>12.2}  {:>12.2}  {:>12.2}  {:>10}",
                fmt_sig9(*v),
                a.label,
                a.steady_nmsd_db,
                a.steady_nmsd_median_db,
                a.steady_emse_db,
                format!("{}/{}", a.diverged_trials, a.trials)
            );
        }
    }
    let name = param.replace('-', "_");
    for f in write_sweep(&name, &rows, &args.out)? {
        out!("wrote {}", f.display());
    }
    rows.iter().try_for_each(|(_, r)| divergence_check(r))
}
