//! Steady-state excess mean-square error of the recursive Geman-McClure
//! filter under Gaussian noise, and the mean-stability diagnostic.
//!
//! The prediction is
//!
//! ```text
//! eps = s2 (1-lambda) L phi / (2 - (1-lambda) L phi)
//! phi = E[ K / (lambda (sigma^2 + xi^2)^2 + K (1-lambda) L) ],
//! K   = E[(sigma^2 + xi^2)^2] = sigma^4 + 2 sigma^2 s2 + 3 s2^2
//! ```
//!
//! with `xi ~ N(0, s2)`. `K` is an unconditional moment; the outer
//! expectation runs over the law of `xi` and is evaluated by Gauss-Hermite
//! quadrature.

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::noise::NoiseModel;
use crate::quadrature::normal_expectation_checked;
use crate::volterra::ExpandedInput;

pub const DEFAULT_QUADRATURE_NODES: usize = 64;
/// Agreement required between a rule and its doubled-node refinement.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryInputs {
    pub noise_variance: f64,
    pub lambda: f64,
    pub len: usize,
    pub sigma: f64,
}

impl TheoryInputs {
    pub fn new(noise_variance: f64, lambda: f64, len: usize, sigma: f64) -> Result<Self> {
        let inputs = Self {
            noise_variance,
            lambda,
            len,
            sigma,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    /// The closed form needs a finite noise variance, so only Gaussian noise is accepted.
    pub fn from_noise(noise: NoiseModel, lambda: f64, len: usize, sigma: f64) -> Result<Self> {
        match noise {
            NoiseModel::Gaussian { variance } => Self::new(variance, lambda, len, sigma),
            NoiseModel::SymmetricAlphaStable(_) => Err(Error::InvalidArgument(
                "steady-state EMSE theory requires Gaussian noise".into(),
            )),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be positive, got {}",
                self.noise_variance
            )));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "forgetting factor must lie in (0, 1), got {}",
                self.lambda
            )));
        }
        if self.len == 0 {
            return Err(Error::InvalidArgument(
                "filter length must be positive".into(),
            ));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// `E[(sigma^2 + xi^2)^2]` for Gaussian `xi`.
    pub fn inner_moment(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        let v = self.noise_variance;
        s2 * s2 + 2.0 * s2 * v + 3.0 * v * v
    }

    /// Integrand of the outer expectation, as a function of the noise sample.
    pub fn varphi_integrand(&self) -> impl Fn(f64) -> f64 {
        let k = self.inner_moment();
        let s2 = self.sigma * self.sigma;
        let lambda = self.lambda;
        let c = k * (1.0 - lambda) * self.len as f64;
        move |xi: f64| {
            let a = s2 + xi * xi;
            k / (lambda * a * a + c)
        }
    }
}

/// The scalar `phi` of the steady-state formula.
pub fn varphi(inputs: &TheoryInputs) -> Result<f64> {
    varphi_with_nodes(inputs, DEFAULT_QUADRATURE_NODES)
}

pub fn varphi_with_nodes(inputs: &TheoryInputs, nodes: usize) -> Result<f64> {
    inputs.validate()?;
    normal_expectation_checked(
        inputs.noise_variance,
        nodes,
        QUADRATURE_TOLERANCE,
        inputs.varphi_integrand(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmsePrediction {
    pub emse: f64,
    pub emse_db: f64,
    pub varphi: f64,
}

pub fn predict_emse(inputs: &TheoryInputs) -> Result<EmsePrediction> {
    let phi = varphi(inputs)?;
    let product = (1.0 - inputs.lambda) * inputs.len as f64 * phi;
    let denom = 2.0 - product;
    if denom <= 0.0 {
        return Err(Error::InstabilityPredicted { product });
    }
    let emse = inputs.noise_variance * product / denom;
    Ok(EmsePrediction {
        emse,
        emse_db: 10.0 * emse.log10(),
        varphi: phi,
    })
}

/// Sample mean of `q / (lambda/rho + q)` with `q = x^T P x`.
///
/// Mean convergence of the weight error requires this to stay below 1.
/// Samples with `rho = 0` contribute 0.
pub fn mean_stability_margin(
    p: &SquareMatrix,
    x_samples: &[ExpandedInput],
    rho_samples: &[f64],
    lambda: f64,
) -> Result<f64> {
    if x_samples.len() != rho_samples.len() {
        return Err(Error::InvalidArgument(format!(
            "{} regressors but {} weights",
            x_samples.len(),
            rho_samples.len()
        )));
    }
    if x_samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let mut acc = 0.0;
    for (x, &rho) in x_samples.iter().zip(rho_samples) {
        if x.len() != p.dim() {
            return Err(Error::InvalidArgument(format!(
                "regressor length {} does not match matrix dimension {}",
                x.len(),
                p.dim()
            )));
        }
        if rho <= 0.0 {
            continue;
        }
        let q = p.quadratic_form(x.as_slice());
        let d = lambda / rho + q;
        if d != 0.0 {
            acc += q / d;
        }
    }
    Ok(acc / x_samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn table_inputs(snr_db: f64, sigma: f64, len: usize) -> TheoryInputs {
        TheoryInputs::new(10f64.powf(-snr_db / 10.0), 0.99, len, sigma).unwrap()
    }

    #[test]
    fn small_noise_limit() {
        let inputs = TheoryInputs::new(1e-14, 0.99, 14, 0.5).unwrap();
        let phi = varphi(&inputs).unwrap();
        assert_relative_eq!(phi, 1.0 / (0.99 + 0.01 * 14.0), max_relative = 1e-9);
    }

    #[test]
    fn node_doubling_agrees() {
        let inputs = table_inputs(25.0, 0.5, 14);
        let a = varphi_with_nodes(&inputs, 64).unwrap();
        let gh64 = crate::quadrature::GaussHermite::new(64)
            .unwrap()
            .normal_expectation(inputs.noise_variance, inputs.varphi_integrand());
        let gh128 = crate::quadrature::GaussHermite::new(128)
            .unwrap()
            .normal_expectation(inputs.noise_variance, inputs.varphi_integrand());
        assert!((gh64 - gh128).abs() < 1e-10);
        assert_relative_eq!(a, gh128, max_relative = 1e-12);
    }

    #[test]
    fn varphi_matches_monte_carlo() {
        // Frozen from a 1e7-sample Monte-Carlo run of the same integrand
        // (independent numpy script): 0.8857840908859436.
        let inputs = table_inputs(25.0, 0.5, 14);
        let phi = varphi(&inputs).unwrap();
        assert!((phi - 0.885_78).abs() < 5e-5, "{phi}");

        let f = inputs.varphi_integrand();
        let sd = inputs.noise_variance.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 2_000_000;
        let mc = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                f(sd * z)
            })
            .sum::<f64>()
            / n as f64;
        assert!((mc - phi).abs() / phi < 5e-4, "mc={mc} quad={phi}");
    }

    #[test]
    fn emse_monotone_in_noise_variance() {
        let mut prev = 0.0;
        for k in 0..30 {
            let v = 10f64.powf(-5.0 + 0.15 * k as f64);
            let e = predict_emse(&TheoryInputs::new(v, 0.99, 14, 0.5).unwrap())
                .unwrap()
                .emse;
            assert!(e > prev, "v={v}");
            prev = e;
        }
    }

    #[test]
    fn emse_vanishes_as_lambda_approaches_one() {
        let e: Vec<f64> = [0.9, 0.99, 0.999, 0.99999]
            .iter()
            .map(|&l| {
                predict_emse(&TheoryInputs::new(1e-2, l, 14, 0.5).unwrap())
                    .unwrap()
                    .emse
            })
            .collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]));
        assert!(e[3] < 1e-6);
    }

    #[test]
    fn step_product_stays_below_one() {
        for &(v, lambda, len, sigma) in &[
            (1e-2, 0.5, 20, 0.5),
            (10.0, 0.1, 200, 0.01),
            (1e-6, 0.999, 5, 3.0),
        ] {
            let inputs = TheoryInputs::new(v, lambda, len, sigma).unwrap();
            let phi = varphi(&inputs).unwrap();
            let product = (1.0 - lambda) * len as f64 * phi;
            assert!(product > 0.0 && product < 1.0, "{product}");
            assert!(predict_emse(&inputs).unwrap().emse < v);
        }
    }

    #[test]
    fn alpha_stable_rejected() {
        let p = crate::noise::AlphaStableParams::new(1.25, 1.0 / 15.0).unwrap();
        assert!(
            TheoryInputs::from_noise(NoiseModel::SymmetricAlphaStable(p), 0.99, 14, 0.3).is_err()
        );
        assert!(
            TheoryInputs::from_noise(NoiseModel::gaussian(0.1).unwrap(), 0.99, 14, 0.3).is_ok()
        );
        assert!(TheoryInputs::new(0.1, 1.0, 14, 0.3).is_err());
        assert!(TheoryInputs::new(0.1, 0.9, 0, 0.3).is_err());
    }

    #[test]
    fn stability_margin_examples() {
        let x = vec![ExpandedInput::from_vec(vec![1.0, 2.0])];
        assert_eq!(
            mean_stability_margin(&SquareMatrix::zeros(2), &x, &[1.0], 0.99).unwrap(),
            0.0
        );
        // x^T P x = 5 with P = I; choose rho so that lambda/rho = 5
        let p = SquareMatrix::scaled_identity(2, 1.0);
        let m = mean_stability_margin(&p, &x, &[0.99 / 5.0], 0.99).unwrap();
        assert_relative_eq!(m, 0.5, max_relative = 1e-14);
        assert!(mean_stability_margin(&p, &x, &[], 0.99).is_err());
        assert_eq!(mean_stability_margin(&p, &x, &[0.0], 0.99).unwrap(), 0.0);
    }
}
