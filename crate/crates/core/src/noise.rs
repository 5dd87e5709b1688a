//! Gaussian and symmetric alpha-stable noise.
//!
//! Alpha-stable samples use the Chambers-Mallows-Stuck transform of a
//! uniform angle and a unit exponential, giving characteristic function
//! `exp(-|w|^alpha)`, and are then scaled by `gamma^(1/alpha)` so that the
//! characteristic function becomes `exp(-gamma |w|^alpha)`.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaStableParams {
    alpha: f64,
    gamma: f64,
}

impl AlphaStableParams {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 2], got {alpha}"
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dispersion gamma must be positive, got {gamma}"
            )));
        }
        Ok(Self { alpha, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `exp(-gamma |w|^alpha)`.
    pub fn characteristic_function(&self, omega: f64) -> f64 {
        (-self.gamma * omega.abs().powf(self.alpha)).exp()
    }
}

/// Additive noise law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    Gaussian { variance: f64 },
    SymmetricAlphaStable(AlphaStableParams),
}

impl NoiseModel {
    pub fn gaussian(variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be positive, got {variance}"
            )));
        }
        Ok(NoiseModel::Gaussian { variance })
    }

    /// Fills `out` with i.i.d. samples.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match *self {
            NoiseModel::Gaussian { variance } => {
                let sd = variance.sqrt();
                for v in out {
                    *v = sd * rng.sample::<f64, _>(StandardNormal);
                }
            }
            NoiseModel::SymmetricAlphaStable(p) => {
                for v in out {
                    *v = sas_sample(p, rng);
                }
            }
        }
    }
}

pub fn sample_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R, n: usize) -> Result<Vec<f64>> {
    let model = NoiseModel::gaussian(variance)?;
    let mut out = vec![0.0; n];
    model.fill(rng, &mut out);
    Ok(out)
}

/// One standard (gamma = 1) symmetric alpha-stable variate.
fn standard_sas<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    // V uniform on (-pi/2, pi/2); reject the closed endpoint
    let v = loop {
        let u: f64 = rng.random();
        let v = (u - 0.5) * std::f64::consts::PI;
        if v.abs() < FRAC_PI_2 {
            break v;
        }
    };
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = loop {
        let w: f64 = Exp1.sample(rng);
        if w > 0.0 {
            break w;
        }
    };
    let first = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let second = ((1.0 - alpha) * v).cos() / w;
    first * second.powf((1.0 - alpha) / alpha)
}

fn sas_sample<R: Rng + ?Sized>(p: AlphaStableParams, rng: &mut R) -> f64 {
    p.gamma.powf(1.0 / p.alpha) * standard_sas(p.alpha, rng)
}

pub fn sample_sas<R: Rng + ?Sized>(params: AlphaStableParams, rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| sas_sample(params, rng)).collect()
}

/// Noise variance giving `snr_db` against a clean signal of the given power.
pub fn calibrate_snr(clean_signal_power: f64, snr_db: f64) -> Result<f64> {
    if !(clean_signal_power > 0.0 && clean_signal_power.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "clean signal power must be positive, got {clean_signal_power}"
        )));
    }
    Ok(clean_signal_power / 10f64.powf(snr_db / 10.0))
}

/// Which per-trial substream to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Input,
    Noise,
}

/// Deterministic generator for one trial's substream.
///
/// The ChaCha8 key comes from `seed`; the 64-bit stream id is
/// `2 * trial` for the input and `2 * trial + 1` for the noise, so every
/// (trial, stream) pair is independent of execution order.
pub fn trial_rng(seed: u64, trial: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = match stream {
        Stream::Input => 2 * trial,
        Stream::Noise => 2 * trial + 1,
    };
    rng.set_stream(id);
    rng
}
