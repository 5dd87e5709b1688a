//! Gauss-Hermite quadrature for expectations over a normal variable.

use crate::error::{Error, Result};

/// Largest rule accepted by [`GaussHermite::new`].
pub const MAX_NODES: usize = 2048;

/// Nodes and weights for `int f(x) exp(-x^2) dx`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Eigenvalues of the symmetric tridiagonal matrix with zero diagonal and
/// off-diagonal `off`, by implicit QL. Also returns the first component of
/// each normalised eigenvector.
fn tridiagonal_eigen(off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = off.len() + 1;
    let mut d = vec![0.0f64; n];
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numerical(
                    "tridiagonal eigen-solve did not converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

impl GaussHermite {
    /// Golub-Welsch starting values, each node then polished by Newton
    /// iteration on the orthonormal Hermite recurrence.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_NODES {
            return Err(Error::InvalidArgument(format!(
                "Gauss-Hermite node count must lie in 1..={MAX_NODES}, got {n}"
            )));
        }
        const PI_M4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
        let nf = n as f64;
        let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
        let (eig, first) = tridiagonal_eigen(&off)?;
        let mut pairs: Vec<(f64, f64)> = eig
            .into_iter()
            .zip(first)
            .map(|(x, v)| (x, v * v * std::f64::consts::PI.sqrt()))
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = if 2 * i + 1 == n { 0.0 } else { pairs[i].0 };
            let mut w = pairs[i].1;
            for _ in 0..3 {
                let mut p1 = PI_M4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                let deriv = (2.0 * nf).sqrt() * p2;
                if !(deriv.is_finite() && deriv != 0.0) {
                    break;
                }
                let step = p1 / deriv;
                z -= step;
                w = 2.0 / (deriv * deriv);
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            if !(z.is_finite() && w.is_finite()) {
                return Err(Error::Numerical(format!(
                    "Gauss-Hermite node {i} of {n} is not finite"
                )));
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[f(X)]` for `X ~ N(0, variance)`.
    pub fn normal_expectation(&self, variance: f64, f: impl Fn(f64) -> f64) -> f64 {
        let scale = (2.0 * variance).sqrt();
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(scale * x))
            .sum();
        sum / std::f64::consts::PI.sqrt()
    }
}

/// Evaluates `E[f(X)]`, `X ~ N(0, variance)`, starting from `nodes` and
/// doubling until two successive rules agree within `tol * max(1, |value|)`.
/// Returns the finer of the two agreeing values.
pub fn normal_expectation_checked(
    variance: f64,
    nodes: usize,
    tol: f64,
    f: impl Fn(f64) -> f64,
) -> Result<f64> {
    let mut n = nodes;
    let mut coarse = GaussHermite::new(n)?.normal_expectation(variance, &f);
    while 2 * n <= MAX_NODES {
        n *= 2;
        let fine = GaussHermite::new(n)?.normal_expectation(variance, &f);
        if (fine - coarse).abs() <= tol * fine.abs().max(1.0) {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Numerical(format!(
        "Gauss-Hermite expectation not converged at {n} nodes"
    )))
}
