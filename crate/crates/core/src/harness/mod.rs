//! Monte-Carlo system-identification experiments.
//!
//! Every trial draws one white Gaussian input sequence and one noise
//! sequence from seeded substreams, and every algorithm in the experiment is
//! run on exactly those two sequences. Trials run in parallel; results are
//! folded in trial order so the output does not depend on scheduling.

pub mod config;
pub mod diagnostics;
pub mod output;
pub mod plant;

use std::time::{Duration, Instant};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filter::{identify_with, Estimator, FilterState};
use crate::harness::config::NoiseSpec;
use crate::noise::{calibrate_snr, trial_rng, AlphaStableParams, NoiseModel, Stream};
use crate::volterra::{dot, DelayLine, KernelVector, VolterraConfig};

/// Trials evaluated in parallel before being folded into the accumulators.
const BATCH: usize = 64;

/// A fully resolved experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub plant: KernelVector,
    /// `(label, estimator)` pairs, run on identical streams.
    pub algorithms: Vec<(String, Estimator)>,
    pub lambda: f64,
    pub zeta: f64,
    pub noise: NoiseSpec,
    pub horizon: usize,
    pub trials: usize,
    pub steady_window: usize,
    pub seed: u64,
}

/// Input and noise of one trial.
#[derive(Debug, Clone)]
pub struct TrialSignals {
    pub inputs: Vec<f64>,
    pub noise: Vec<f64>,
    /// Noise variance actually used (Gaussian noise only).
    pub noise_variance: Option<f64>,
    /// Measured power of the noiseless plant output.
    pub clean_power: f64,
}

impl Experiment {
    pub fn memory(&self) -> usize {
        self.plant
            .memory()
            .expect("resolved plant has a valid length")
    }

    /// Generates the paired signals of trial `trial`.
    pub fn trial_signals(&self, trial: usize) -> Result<TrialSignals> {
        let mut input_rng = trial_rng(self.seed, trial as u64, Stream::Input);
        let inputs: Vec<f64> = (0..self.horizon)
            .map(|_| StandardNormal.sample(&mut input_rng))
            .collect();

        let mut delay = DelayLine::new(VolterraConfig::new(self.memory())?);
        let mut x = vec![0.0; self.plant.len()];
        let mut acc = 0.0;
        for &s in &inputs {
            delay.push(s)?;
            delay.expand_into(&mut x);
            let y = dot(self.plant.as_slice(), &x);
            acc += y * y;
        }
        let clean_power = acc / self.horizon as f64;

        let model = match self.noise {
            NoiseSpec::GaussianSnr { snr_db } => {
                NoiseModel::gaussian(calibrate_snr(clean_power, snr_db)?)?
            }
            NoiseSpec::Gaussian { variance } => NoiseModel::gaussian(variance)?,
            NoiseSpec::AlphaStable { alpha, gamma } => {
                NoiseModel::SymmetricAlphaStable(AlphaStableParams::new(alpha, gamma)?)
            }
        };
        let mut noise = vec![0.0; self.horizon];
        model.fill(
            &mut trial_rng(self.seed, trial as u64, Stream::Noise),
            &mut noise,
        );
        let noise_variance = match model {
            NoiseModel::Gaussian { variance } => Some(variance),
            NoiseModel::SymmetricAlphaStable(_) => None,
        };
        Ok(TrialSignals {
            inputs,
            noise,
            noise_variance,
            clean_power,
        })
    }

    /// Runs every algorithm on trial `trial`'s signals.
    pub fn run_trial(&self, trial: usize) -> Result<(TrialSignals, Vec<(TrialResult, Duration)>)> {
        let signals = self.trial_signals(trial)?;
        let mut out = Vec::with_capacity(self.algorithms.len());
        for (_, est) in &self.algorithms {
            let start = Instant::now();
            let result = self.run_algorithm(*est, &signals)?;
            out.push((result, start.elapsed()));
        }
        Ok((signals, out))
    }

    fn run_algorithm(&self, est: Estimator, signals: &TrialSignals) -> Result<TrialResult> {
        let mut state = FilterState::init(self.plant.len(), self.lambda, self.zeta, est)?;
        let mut result = TrialResult {
            a_priori_sq: Vec::with_capacity(self.horizon),
            deviations: Vec::with_capacity(self.horizon),
            diverged_at: None,
        };
        let run = identify_with(
            &mut state,
            &self.plant,
            &signals.inputs,
            &signals.noise,
            |_, dev, ea| {
                result.a_priori_sq.push(ea * ea);
                result.deviations.push(dev);
            },
        );
        match run {
            Ok(()) => Ok(result),
            Err(Error::Divergence { iteration }) => {
                result.diverged_at = Some(iteration);
                Ok(result)
            }
            Err(e) => Err(e),
        }
    }
}

/// Per-iteration metrics of one algorithm in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// Squared a-priori error `(x(n)^T (h_o - h(n-1)))^2`.
    pub a_priori_sq: Vec<f64>,
    /// `||h(n) - h_o||_2`.
    pub deviations: Vec<f64>,
    /// Iteration at which the filter state became non-finite.
    pub diverged_at: Option<usize>,
}

impl TrialResult {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

/// `20 log10(mean(deviations) / ||h_o||)`. The mean is taken before the log;
/// a zero mean yields `-inf`.
pub fn nmsd_db(deviations: &[f64], h_o_norm: f64) -> Result<f64> {
    if h_o_norm.is_nan() || h_o_norm <= 0.0 {
        return Err(Error::InvalidArgument(
            "NMSD needs a non-zero reference kernel".into(),
        ));
    }
    if deviations.is_empty() {
        return Err(Error::InvalidArgument("no deviations to average".into()));
    }
    let mean = deviations.iter().sum::<f64>() / deviations.len() as f64;
    Ok(if mean == 0.0 {
        f64::NEG_INFINITY
    } else {
        20.0 * (mean / h_o_norm).log10()
    })
}

/// Steady-state EMSE in dB: mean squared a-priori error over the last
/// `steady_window` samples of every non-diverged trial.
pub fn emse_db(trials: &[TrialResult], steady_window: usize) -> Result<f64> {
    if steady_window == 0 {
        return Err(Error::InvalidArgument(
            "steady window must be positive".into(),
        ));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for t in trials.iter().filter(|t| !t.diverged()) {
        let n = t.a_priori_sq.len();
        if n < steady_window {
            return Err(Error::InvalidArgument(format!(
                "trial has {n} samples, fewer than the steady window {steady_window}"
            )));
        }
        sum += t.a_priori_sq[n - steady_window..].iter().sum::<f64>() / steady_window as f64;
        count += 1;
    }
    if count == 0 {
        return Err(Error::DivergenceDominated {
            algorithm: String::new(),
            trials: trials.len(),
        });
    }
    Ok(10.0 * (sum / count as f64).log10())
}

/// Aggregated metrics of one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub label: String,
    pub estimator: Estimator,
    /// Mean NMSD per iteration, dB. NaN when every trial diverged.
    pub nmsd_trace_db: Vec<f64>,
    /// Mean squared a-priori error per iteration, dB.
    pub emse_trace_db: Vec<f64>,
    /// NMSD of the mean deviation over the steady window and all trials.
    pub steady_nmsd_db: f64,
    /// Median over trials of each trial's steady-window NMSD.
    pub steady_nmsd_median_db: f64,
    pub steady_emse_db: f64,
    pub diverged_trials: usize,
    pub trials: usize,
    /// Summed per-trial compute time, seconds.
    pub runtime_s: f64,
}

impl AggregateResult {
    pub fn all_diverged(&self) -> bool {
        self.diverged_trials == self.trials
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub algorithms: Vec<AggregateResult>,
    /// Mean Gaussian noise variance over trials.
    pub mean_noise_variance: Option<f64>,
    pub mean_clean_power: f64,
    pub plant_norm: f64,
    pub steady_window: usize,
    pub horizon: usize,
}

impl ExperimentResult {
    pub fn get(&self, label: &str) -> Option<&AggregateResult> {
        self.algorithms.iter().find(|a| a.label == label)
    }
}

struct Accumulator {
    dev_sum: Vec<f64>,
    ea_sum: Vec<f64>,
    steady_dev: Vec<f64>,
    steady_ea: f64,
    ok: usize,
    diverged: usize,
    elapsed: Duration,
}

impl Accumulator {
    fn new(horizon: usize) -> Self {
        Self {
            dev_sum: vec![0.0; horizon],
            ea_sum: vec![0.0; horizon],
            steady_dev: Vec::new(),
            steady_ea: 0.0,
            ok: 0,
            diverged: 0,
            elapsed: Duration::ZERO,
        }
    }

    fn add(&mut self, r: &TrialResult, window: usize, elapsed: Duration) {
        self.elapsed += elapsed;
        if r.diverged() {
            self.diverged += 1;
            return;
        }
        for (acc, v) in self.dev_sum.iter_mut().zip(&r.deviations) {
            *acc += v;
        }
        for (acc, v) in self.ea_sum.iter_mut().zip(&r.a_priori_sq) {
            *acc += v;
        }
        let n = r.deviations.len();
        self.steady_dev
            .push(r.deviations[n - window..].iter().sum::<f64>() / window as f64);
        self.steady_ea += r.a_priori_sq[n - window..].iter().sum::<f64>() / window as f64;
        self.ok += 1;
    }

    fn finish(
        self,
        label: String,
        estimator: Estimator,
        norm: f64,
        trials: usize,
    ) -> AggregateResult {
        let ok = self.ok as f64;
        let db20 = |v: f64| {
            if v == 0.0 {
                f64::NEG_INFINITY
            } else {
                20.0 * (v / norm).log10()
            }
        };
        let db10 = |v: f64| {
            if v == 0.0 {
                f64::NEG_INFINITY
            } else {
                10.0 * v.log10()
            }
        };
        let (nmsd_trace_db, emse_trace_db, steady_nmsd_db, steady_nmsd_median_db, steady_emse_db) =
            if self.ok == 0 {
                let nan = vec![f64::NAN; self.dev_sum.len()];
                (nan.clone(), nan, f64::NAN, f64::NAN, f64::NAN)
            } else {
                let mut per_trial = self.steady_dev.clone();
                per_trial.sort_by(f64::total_cmp);
                let k = per_trial.len();
                let median = if k % 2 == 1 {
                    per_trial[k / 2]
                } else {
                    0.5 * (per_trial[k / 2 - 1] + per_trial[k / 2])
                };
                (
                    self.dev_sum.iter().map(|s| db20(s / ok)).collect(),
                    self.ea_sum.iter().map(|s| db10(s / ok)).collect(),
                    db20(self.steady_dev.iter().sum::<f64>() / ok),
                    db20(median),
                    db10(self.steady_ea / ok),
                )
            };
        AggregateResult {
            label,
            estimator,
            nmsd_trace_db,
            emse_trace_db,
            steady_nmsd_db,
            steady_nmsd_median_db,
            steady_emse_db,
            diverged_trials: self.diverged,
            trials,
            runtime_s: self.elapsed.as_secs_f64(),
        }
    }
}

/// Runs all trials of `exp`, using at most `threads` worker threads
/// (`None` = rayon default).
pub fn run_experiment(exp: &Experiment, threads: Option<usize>) -> Result<ExperimentResult> {
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            b = b.num_threads(t.max(1));
        }
        b.build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
    };
    let window = exp.steady_window;
    let mut accs: Vec<Accumulator> = exp
        .algorithms
        .iter()
        .map(|_| Accumulator::new(exp.horizon))
        .collect();
    let mut noise_var_sum = 0.0;
    let mut gaussian_trials = 0usize;
    let mut power_sum = 0.0;

    for start in (0..exp.trials).step_by(BATCH) {
        let end = (start + BATCH).min(exp.trials);
        let batch: Vec<_> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|t| exp.run_trial(t))
                .collect::<Result<Vec<_>>>()
        })?;
        for (signals, results) in batch {
            if let Some(v) = signals.noise_variance {
                noise_var_sum += v;
                gaussian_trials += 1;
            }
            power_sum += signals.clean_power;
            for (acc, (r, dt)) in accs.iter_mut().zip(&results) {
                acc.add(r, window, *dt);
            }
        }
    }

    let norm = exp.plant.norm();
    let algorithms = accs
        .into_iter()
        .zip(&exp.algorithms)
        .map(|(acc, (label, est))| acc.finish(label.clone(), *est, norm, exp.trials))
        .collect();
    Ok(ExperimentResult {
        algorithms,
        mean_noise_variance: (gaussian_trials > 0).then(|| noise_var_sum / gaussian_trials as f64),
        mean_clean_power: power_sum / exp.trials as f64,
        plant_norm: norm,
        steady_window: window,
        horizon: exp.horizon,
    })
}
