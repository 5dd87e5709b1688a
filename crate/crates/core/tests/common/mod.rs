#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use robust_volterra::noise::{sample_gaussian, trial_rng, Stream};
use robust_volterra::{DelayLine, ExpandedInput, KernelVector, VolterraConfig};

/// Textbook exponentially weighted RLS, written against nalgebra, with the
/// `P` update in its symmetric outer-product form.
pub struct OracleRls {
    pub w: DVector<f64>,
    pub p: DMatrix<f64>,
    lambda: f64,
}

impl OracleRls {
    pub fn new(len: usize, lambda: f64, zeta: f64) -> Self {
        Self {
            w: DVector::zeros(len),
            p: DMatrix::identity(len, len) / zeta,
            lambda,
        }
    }

    pub fn step(&mut self, x: &[f64], d: f64) -> f64 {
        let x = DVector::from_column_slice(x);
        let e = d - self.w.dot(&x);
        let px = &self.p * &x;
        let den = self.lambda + x.dot(&px);
        self.w += &px * (e / den);
        self.p = (&self.p - (&px * px.transpose()) / den) / self.lambda;
        e
    }
}

/// Regressors and desired samples for a plant driven by white Gaussian input.
pub fn gaussian_run(
    plant: &KernelVector,
    seed: u64,
    steps: usize,
    noise_variance: f64,
) -> (Vec<ExpandedInput>, Vec<f64>) {
    let memory = plant.memory().unwrap();
    let inputs = sample_gaussian(1.0, &mut trial_rng(seed, 0, Stream::Input), steps).unwrap();
    let noise = if noise_variance > 0.0 {
        sample_gaussian(
            noise_variance,
            &mut trial_rng(seed, 0, Stream::Noise),
            steps,
        )
        .unwrap()
    } else {
        vec![0.0; steps]
    };
    let mut line = DelayLine::new(VolterraConfig::new(memory).unwrap());
    let mut xs = Vec::with_capacity(steps);
    let mut ds = Vec::with_capacity(steps);
    for (s, v) in inputs.into_iter().zip(noise) {
        let x = line.push_and_expand(s).unwrap();
        let y: f64 = plant
            .as_slice()
            .iter()
            .zip(x.as_slice())
            .map(|(a, b)| a * b)
            .sum();
        ds.push(y + v);
        xs.push(x);
    }
    (xs, ds)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
