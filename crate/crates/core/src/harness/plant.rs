//! Built-in synthetic plant.

use crate::volterra::KernelVector;

/// Relative magnitude of the quadratic kernel against the linear one.
pub const QUADRATIC_RATIO: f64 = 0.1;
/// Decay rate of the linear profile `exp(-DECAY * m)`.
pub const DECAY: f64 = 0.5;

/// Synthetic plant, version 1.
///
/// Linear taps `h1(m) = exp(-0.5 m)`, quadratic taps
/// `h2(m1, m2) = 0.1 h1(m1) h1(m2)`, then the whole kernel is scaled so that
/// its output has unit power under unit-variance white Gaussian input.
pub fn synthetic_plant(memory: usize) -> KernelVector {
    let h1: Vec<f64> = (0..memory).map(|m| (-DECAY * m as f64).exp()).collect();
    let raw = KernelVector::from_kernels(&h1, |a, b| QUADRATIC_RATIO * h1[a] * h1[b]);
    let scale = 1.0 / gaussian_output_power(&raw).sqrt();
    KernelVector::from_vec(raw.as_slice().iter().map(|v| v * scale).collect())
}

/// Exact `E[y^2]` of a second-order Volterra kernel driven by white
/// unit-variance Gaussian input.
///
/// Odd moments vanish, so the linear and quadratic blocks are uncorrelated;
/// the quadratic block contributes `sum b(m1,m2)^2` over off-diagonal pairs,
/// `3 b(m,m)^2` per diagonal term and `b(m,m) b(m',m')` across distinct
/// diagonal terms (their non-zero means).
pub fn gaussian_output_power(kernel: &KernelVector) -> f64 {
    let m = kernel
        .memory()
        .expect("kernel length must be a valid Volterra length");
    let (linear, quad) = kernel.as_slice().split_at(m);
    let mut power: f64 = linear.iter().map(|v| v * v).sum();
    let mut diag = Vec::with_capacity(m);
    let mut k = 0;
    for a in 0..m {
        for b in a..m {
            let c = quad[k];
            if a == b {
                diag.push(c);
                power += 3.0 * c * c;
            } else {
                power += c * c;
            }
            k += 1;
        }
    }
    let diag_sum: f64 = diag.iter().sum();
    let diag_sq: f64 = diag.iter().map(|c| c * c).sum();
    power + diag_sum * diag_sum - diag_sq
}
