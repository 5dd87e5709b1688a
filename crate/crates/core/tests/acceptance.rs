//! Acceptance suite.
//!
//! Every criterion runs, prints one `PASS`/`FAIL` line with the measured
//! quantities, and the binary exits non-zero if any criterion failed.
//! Tolerances are fixed below and are not tuned to the results.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{gaussian_run, max_abs_diff, OracleRls};
use robust_volterra::harness::diagnostics::energy_conservation_check;
use robust_volterra::harness::plant::synthetic_plant;
use robust_volterra::noise::{sample_gaussian, sample_sas, trial_rng, Stream};
use robust_volterra::robust::{gm_loss, gm_score};
use robust_volterra::{
    mean_stability_margin, predict_emse, run_experiment, AlphaStableParams, Estimator,
    ExperimentConfig, ExperimentResult, FilterState, GemanMcClureParams, TheoryInputs,
};

const TABLE_TOL_DB: f64 = 0.10;
const THEORY_SIM_TOL_DB: f64 = 1.5;
const GAUSSIAN_GAP_DB: f64 = 3.0;
const RLS_ORACLE_TOL: f64 = 1e-10;
const GRADIENT_TOL: f64 = 1e-6;
const ENERGY_TOL: f64 = 1e-8;
const ECF_TOL: f64 = 0.01;
const ALPHA2_VARIANCE_TOL: f64 = 0.02;

const SEED: u64 = 20_170_601;
const HORIZON: usize = 5000;
const ALPHA: f64 = 1.25;
const GAMMA: f64 = 1.0 / 15.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn config(trials: usize, noise: &str, algorithms: &[&str]) -> ExperimentConfig {
    let mut text = format!(
        "memory = 4\nlambda = 0.99\nhorizon = {HORIZON}\ntrials = {trials}\nseed = {SEED}\n\n[noise]\n{noise}\n"
    );
    for alg in algorithms {
        text.push_str(&format!("\n[[algorithms]]\n{alg}\n"));
    }
    ExperimentConfig::from_toml_str(&text).expect("acceptance config parses")
}

fn run(cfg: ExperimentConfig) -> ExperimentResult {
    let exp = cfg.resolve(None).expect("acceptance config resolves");
    run_experiment(&exp, None).expect("experiment runs")
}

fn alpha_stable() -> String {
    format!("kind = \"alpha-stable\"\nalpha = {ALPHA}\ngamma = {GAMMA}")
}

fn table_theory() -> Outcome {
    let rows = [
        (25.0, 0.5, 14, -36.66),
        (40.0, 1.8, 14, -51.64),
        (20.0, 0.2, 14, -32.27),
        (30.0, 0.45, 14, -41.70),
        (10.0, 0.9, 20, -20.65),
        (30.0, 0.6, 20, -39.83),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (snr, sigma, len, expected) in rows {
        let v = 10f64.powf(-snr / 10.0);
        let got = predict_emse(&TheoryInputs::new(v, 0.99, len, sigma).unwrap())
            .unwrap()
            .emse_db;
        let ok = (got - expected).abs() <= TABLE_TOL_DB;
        pass &= ok;
        parts.push(format!(
            "{snr}dB/{sigma}/L{len}: {got:.2} vs {expected:.2}{}",
            if ok { "" } else { " x" }
        ));
    }
    outcome(pass, format!("tol {TABLE_TOL_DB} dB; {}", parts.join(", ")))
}

fn theory_vs_simulation() -> Outcome {
    let r = run(config(
        150,
        "kind = \"gaussian-snr\"\nsnr_db = 25",
        &["kind = \"gm\"\nsigma = 0.5"],
    ));
    let noise_variance = r.mean_noise_variance.unwrap();
    let theory = predict_emse(&TheoryInputs::new(noise_variance, 0.99, 14, 0.5).unwrap())
        .unwrap()
        .emse_db;
    let sim = r.algorithms[0].steady_emse_db;
    outcome(
        (sim - theory).abs() <= THEORY_SIM_TOL_DB,
        format!("simulated {sim:.2} dB, predicted {theory:.2} dB, gap {:.2} dB (tol {THEORY_SIM_TOL_DB})", sim - theory),
    )
}

fn gaussian_advantage() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for snr in [15.0, 25.0] {
        let r = run(config(
            300,
            &format!("kind = \"gaussian-snr\"\nsnr_db = {snr}"),
            &["kind = \"gm\"\nsigma = 0.5", "kind = \"rls\""],
        ));
        let gm = r.algorithms[0].steady_nmsd_db;
        let rls = r.algorithms[1].steady_nmsd_db;
        let gap = rls - gm;
        pass &= gap >= GAUSSIAN_GAP_DB;
        parts.push(format!(
            "SNR {snr}: GM {gm:.2} dB, RLS {rls:.2} dB, gap {gap:.2} dB"
        ));
    }
    outcome(
        pass,
        format!("required gap {GAUSSIAN_GAP_DB} dB; {}", parts.join("; ")),
    )
}

fn impulsive_robustness() -> Outcome {
    let r = run(config(
        300,
        &alpha_stable(),
        &[
            "kind = \"gm\"\nsigma = 0.3",
            "kind = \"rls\"",
            "kind = \"rlm\"",
            "kind = \"lpn\"",
        ],
    ));
    let gm = &r.algorithms[0];
    let mut pass = gm.diverged_trials == 0;
    let mut parts = vec![format!(
        "{} {:.2} dB (median {:.2}, diverged {})",
        gm.label, gm.steady_nmsd_db, gm.steady_nmsd_median_db, gm.diverged_trials
    )];
    for other in &r.algorithms[1..] {
        pass &= gm.steady_nmsd_db < other.steady_nmsd_db;
        parts.push(format!(
            "{} {:.2} dB (median {:.2}, diverged {})",
            other.label, other.steady_nmsd_db, other.steady_nmsd_median_db, other.diverged_trials
        ));
    }
    outcome(pass, parts.join(", "))
}

fn sigma_ordering() -> Outcome {
    let mut values = Vec::new();
    for sigma in [0.4, 1.0, 1.5] {
        let r = run(config(
            300,
            &alpha_stable(),
            &[&format!("kind = \"gm\"\nsigma = {sigma}")],
        ));
        values.push((
            sigma,
            r.algorithms[0].steady_nmsd_db,
            r.algorithms[0].steady_nmsd_median_db,
        ));
    }
    let pass = values.windows(2).all(|w| w[0].1 < w[1].1);
    let parts: Vec<String> = values
        .iter()
        .map(|(s, m, med)| format!("sigma {s}: {m:.2} dB (median {med:.2})"))
        .collect();
    outcome(pass, parts.join(", "))
}

fn rls_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for memory in [1, 2, 3] {
        let plant = synthetic_plant(memory);
        let (xs, ds) = gaussian_run(&plant, 100 + memory as u64, 1000, 1e-2);
        let mut filt = FilterState::init(plant.len(), 0.99, 0.01, Estimator::PlainRls).unwrap();
        let mut oracle = OracleRls::new(plant.len(), 0.99, 0.01);
        for (x, &d) in xs.iter().zip(&ds) {
            filt.step(x, d).unwrap();
            oracle.step(x.as_slice(), d);
            worst = worst.max(max_abs_diff(filt.weights().as_slice(), oracle.w.as_slice()));
        }
    }
    outcome(
        worst < RLS_ORACLE_TOL,
        format!(
            "max weight gap {worst:.3e} over 1000 steps, L in {{2, 5, 9}} (tol {RLS_ORACLE_TOL:e})"
        ),
    )
}

fn gradient_check() -> Outcome {
    let mut worst = 0.0f64;
    for sigma in [0.1, 0.3, 1.0, 1.8] {
        let p = GemanMcClureParams::new(sigma).unwrap();
        for i in -2000..=2000 {
            let e = i as f64 * 0.005;
            let analytic = gm_score(e, p);
            if analytic == 0.0 {
                continue;
            }
            let h = 1e-5 * e.abs().max(sigma);
            let fd = (gm_loss(e + h, p) - gm_loss(e - h, p)) / (2.0 * h);
            worst = worst.max((fd - analytic).abs() / analytic.abs());
        }
    }
    outcome(
        worst < GRADIENT_TOL,
        format!("max relative error {worst:.3e} over e in [-10, 10], sigma in {{0.1, 0.3, 1, 1.8}} (tol {GRADIENT_TOL:e})"),
    )
}

fn energy_identity() -> Outcome {
    let plant = synthetic_plant(2);
    let inputs = sample_gaussian(1.0, &mut trial_rng(SEED, 0, Stream::Input), 500).unwrap();
    let noise = sample_gaussian(1e-2, &mut trial_rng(SEED, 0, Stream::Noise), 500).unwrap();
    let c = energy_conservation_check(
        &plant,
        Estimator::geman_mcclure(0.5).unwrap(),
        0.99,
        0.01,
        &inputs,
        &noise,
    )
    .unwrap();
    outcome(
        c.steps == 500 && c.max_energy_residual < ENERGY_TOL,
        format!(
            "L=5, {} steps, max relative residual {:.3e} (tol {ENERGY_TOL:e})",
            c.steps, c.max_energy_residual
        ),
    )
}

fn alpha_stable_generator() -> Outcome {
    const N: usize = 1_000_000;
    let mut worst = 0.0f64;
    let mut cell = 0u64;
    for alpha in [0.8, 1.25, 1.5, 2.0] {
        for gamma in [1.0 / 15.0, 0.5, 1.0] {
            let params = AlphaStableParams::new(alpha, gamma).unwrap();
            let xs = sample_sas(params, &mut trial_rng(SEED, cell, Stream::Noise), N);
            cell += 1;
            for omega in [0.25, 0.5, 1.0, 2.0] {
                let ecf = xs.iter().map(|x| (omega * x).cos()).sum::<f64>() / N as f64;
                worst = worst.max((ecf - params.characteristic_function(omega)).abs());
            }
        }
    }
    let mut var_err = 0.0f64;
    for gamma in [0.5, 1.0] {
        let xs = sample_sas(
            AlphaStableParams::new(2.0, gamma).unwrap(),
            &mut trial_rng(SEED, 100 + cell, Stream::Noise),
            N,
        );
        cell += 1;
        let var = xs.iter().map(|x| x * x).sum::<f64>() / N as f64;
        var_err = var_err.max((var / (2.0 * gamma) - 1.0).abs());
    }
    outcome(
        worst < ECF_TOL && var_err < ALPHA2_VARIANCE_TOL,
        format!(
            "max ECF gap {worst:.4} (tol {ECF_TOL}), alpha=2 variance relative error {var_err:.4} (tol {ALPHA2_VARIANCE_TOL})"
        ),
    )
}

fn stability_margin() -> Outcome {
    let plant = synthetic_plant(4);
    let mut values = Vec::new();
    for trial in 0..5u64 {
        let v = 1.0 / 10f64.powf(2.5);
        let (xs, ds) = gaussian_run(&plant, SEED + trial, HORIZON, v);
        let mut f = FilterState::init(
            plant.len(),
            0.99,
            0.01,
            Estimator::geman_mcclure(0.5).unwrap(),
        )
        .unwrap();
        let tail = 500;
        let mut rhos = Vec::with_capacity(tail);
        for (n, (x, &d)) in xs.iter().zip(&ds).enumerate() {
            let rec = f.step(x, d).unwrap();
            if n >= xs.len() - tail {
                rhos.push(rec.rho);
            }
        }
        let m = mean_stability_margin(f.inverse_correlation(), &xs[xs.len() - tail..], &rhos, 0.99)
            .unwrap();
        values.push(m);
    }
    let pass = values.iter().all(|&m| m > 0.0 && m < 1.0);
    let shown: Vec<String> = values.iter().map(|m| format!("{m:.4}")).collect();
    outcome(
        pass,
        format!("margins on 5 converged runs: {}", shown.join(", ")),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "steady-state EMSE table reproduction", table_theory),
        (2, "theory vs simulation EMSE", theory_vs_simulation),
        (
            3,
            "Gaussian-noise NMSD advantage over RLS",
            gaussian_advantage,
        ),
        (4, "impulsive-noise robustness", impulsive_robustness),
        (5, "sigma sweep ordering", sigma_ordering),
        (6, "RLS reduction", rls_oracle),
        (7, "score gradient check", gradient_check),
        (8, "energy conservation identity", energy_identity),
        (9, "alpha-stable generator", alpha_stable_generator),
        (10, "mean-stability margin", stability_margin),
    ];
    let mut failed = Vec::new();
    for (id, name, check) in criteria {
        let start = Instant::now();
        let o = check();
        println!(
            "{} criterion {id:>2} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!(
            "acceptance: {} of 10 criteria failed: {failed:?}",
            failed.len()
        );
        ExitCode::FAILURE
    }
}
