//! Per-step identities checked along recorded trajectories.
//!
//! With `mu = 1 / (lambda/rho + x^T P x)`, `e_a = x^T h~(n-1)` and
//! `e_p = x^T h~(n)`, every step satisfies
//!
//! ```text
//! e_p = e_a - mu (x^T P(n-1) x) e
//! ||h~(n)||^2_W + e_a^2 / (mu x^T P x) = ||h~(n-1)||^2_W + e_p^2 / (mu x^T P x),
//!     W = P(n-1)^{-1} / mu
//! ```
//!
//! `P(n-1)^{-1}` is accumulated directly as `Phi(n) = lambda Phi(n-1) + rho x x^T`,
//! `Phi(0) = zeta I`, independently of the inversion-lemma recursion.

use crate::error::{Error, Result};
use crate::filter::{Estimator, FilterState};
use crate::matrix::SquareMatrix;
use crate::volterra::{dot, DelayLine, KernelVector, VolterraConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyCheck {
    /// Largest relative residual of the energy relation.
    pub max_energy_residual: f64,
    /// Largest relative residual of the a-posteriori error relation.
    pub max_posterior_residual: f64,
    /// Largest `||Phi(n) P(n) - I||_F` seen.
    pub max_inverse_residual: f64,
    pub steps: usize,
    /// Set when the trajectory diverged; the check stops there.
    pub skipped_at: Option<usize>,
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn inverse_residual(phi: &SquareMatrix, p: &SquareMatrix) -> f64 {
    let n = phi.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v: f64 = (0..n).map(|k| phi.get(i, k) * p.get(k, j)).sum();
            let d = v - if i == j { 1.0 } else { 0.0 };
            acc += d * d;
        }
    }
    acc.sqrt()
}

/// Runs an identification and evaluates the energy relation at every step.
pub fn energy_conservation_check(
    plant: &KernelVector,
    estimator: Estimator,
    lambda: f64,
    zeta: f64,
    inputs: &[f64],
    noise: &[f64],
) -> Result<EnergyCheck> {
    if inputs.len() != noise.len() {
        return Err(Error::InvalidArgument(
            "input and noise lengths differ".into(),
        ));
    }
    let len = plant.len();
    let memory = plant
        .memory()
        .ok_or_else(|| Error::InvalidArgument("plant length is not a Volterra length".into()))?;
    let mut state = FilterState::init(len, lambda, zeta, estimator)?;
    let mut delay = DelayLine::new(VolterraConfig::new(memory)?);
    let mut phi = SquareMatrix::scaled_identity(len, zeta);
    let mut x = vec![0.0; len];
    let mut check = EnergyCheck {
        max_energy_residual: 0.0,
        max_posterior_residual: 0.0,
        max_inverse_residual: 0.0,
        steps: 0,
        skipped_at: None,
    };

    let deviation = |s: &FilterState| -> Vec<f64> {
        plant
            .as_slice()
            .iter()
            .zip(s.weights().as_slice())
            .map(|(o, h)| o - h)
            .collect()
    };

    for (&sample, &xi) in inputs.iter().zip(noise) {
        delay.push(sample)?;
        delay.expand_into(&mut x);
        let d = dot(plant.as_slice(), &x) + xi;
        let dev_prev = deviation(&state);
        let rec = match state.step_slice(&x, d) {
            Ok(r) => r,
            Err(Error::Divergence { iteration }) => {
                check.skipped_at = Some(iteration);
                return Ok(check);
            }
            Err(e) => return Err(e),
        };
        let dev = deviation(&state);
        check.steps += 1;

        if rec.rho > 0.0 && rec.quad_form > 0.0 {
            let mu = 1.0 / (lambda / rec.rho + rec.quad_form);
            let mq = mu * rec.quad_form;
            let ea = dot(&x, &dev_prev);
            let ep = dot(&x, &dev);
            let predicted_ep = ea - mq * rec.e;
            let scale = ea.abs().max(ep.abs()).max((mq * rec.e).abs());
            if scale > 0.0 {
                check.max_posterior_residual = check
                    .max_posterior_residual
                    .max((ep - predicted_ep).abs() / scale);
            }
            let lhs = phi.quadratic_form(&dev) / mu + ea * ea / mq;
            let rhs = phi.quadratic_form(&dev_prev) / mu + ep * ep / mq;
            check.max_energy_residual = check.max_energy_residual.max(rel(lhs, rhs));
        }

        // Phi(n) = lambda Phi(n-1) + rho x x^T
        let data = phi.as_mut_slice();
        for i in 0..len {
            for j in 0..len {
                data[i * len + j] = lambda * data[i * len + j] + rec.rho * x[i] * x[j];
            }
        }
        check.max_inverse_residual = check
            .max_inverse_residual
            .max(inverse_residual(&phi, state.inverse_correlation()));
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::plant::synthetic_plant;
    use crate::noise::{sample_gaussian, trial_rng, Stream};

    #[test]
    fn identities_hold_along_gaussian_run() {
        let plant = synthetic_plant(2);
        let inputs = sample_gaussian(1.0, &mut trial_rng(1, 0, Stream::Input), 500).unwrap();
        let noise = sample_gaussian(1e-2, &mut trial_rng(1, 0, Stream::Noise), 500).unwrap();
        for est in [Estimator::geman_mcclure(0.5).unwrap(), Estimator::PlainRls] {
            let c = energy_conservation_check(&plant, est, 0.99, 0.01, &inputs, &noise).unwrap();
            assert_eq!(c.steps, 500);
            assert!(c.max_energy_residual < 1e-8, "{c:?}");
            assert!(c.max_posterior_residual < 1e-8, "{c:?}");
            assert!(c.max_inverse_residual < 1e-6, "{c:?}");
        }
    }

    #[test]
    fn diverged_run_is_reported() {
        let plant = synthetic_plant(1);
        let zeros = vec![0.0; 3000];
        let c = energy_conservation_check(&plant, Estimator::PlainRls, 0.5, 1e-300, &zeros, &zeros)
            .unwrap();
        assert!(c.skipped_at.is_some());
        assert_eq!(c.steps + 1, c.skipped_at.unwrap());
    }
}
