//! Loss, score and weighting functions for the Geman-McClure estimator and
//! the M-estimator / p-norm baselines.
//!
//! A weight `w(e)` turns a robust cost into a weighted least-squares problem:
//! the recursion scales each sample's contribution to the correlation matrix
//! by `w(e)`.

use crate::error::{Error, Result};

/// Geman-McClure shape constant `sigma > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GemanMcClureParams {
    sigma: f64,
}

impl GemanMcClureParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Geman-McClure sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Loss `e^2 / (sigma^2 + e^2)`, in `[0, 1)`.
pub fn gm_loss(e: f64, params: GemanMcClureParams) -> f64 {
    if e.abs() > params.sigma {
        let r = params.sigma / e;
        return 1.0 / (1.0 + r * r);
    }
    let e2 = e * e;
    e2 / (params.sigma * params.sigma + e2)
}

/// Score (derivative of the loss) `2 sigma^2 e / (sigma^2 + e^2)^2`.
pub fn gm_score(e: f64, params: GemanMcClureParams) -> f64 {
    let s2 = params.sigma * params.sigma;
    let d = s2 + e * e;
    2.0 * s2 * e / (d * d)
}

/// Weighting factor `sigma^2 / (sigma^2 + e^2)^2`.
///
/// Equals `gm_score(e) / (2e)` for `e != 0` and tends to `1/sigma^2` at zero.
pub fn gm_weight(e: f64, params: GemanMcClureParams) -> f64 {
    let s2 = params.sigma * params.sigma;
    let d = s2 + e * e;
    s2 / (d * d)
}

/// Three-part redescending thresholds, in units of the error scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HampelParams {
    t1: f64,
    t2: f64,
    t3: f64,
}

impl HampelParams {
    pub fn new(t1: f64, t2: f64, t3: f64) -> Result<Self> {
        if !(t1 > 0.0 && t1 < t2 && t2 < t3 && t3.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Hampel thresholds must satisfy 0 < t1 < t2 < t3, got ({t1}, {t2}, {t3})"
            )));
        }
        Ok(Self { t1, t2, t3 })
    }

    pub fn thresholds(&self) -> (f64, f64, f64) {
        (self.t1, self.t2, self.t3)
    }
}

impl Default for HampelParams {
    fn default() -> Self {
        Self {
            t1: 0.6,
            t2: 1.3,
            t3: 1.8,
        }
    }
}

/// Hampel weight `psi(e)/e`: 1 inside `t1*scale`, clipped to `t1*scale/|e|` up
/// to `t2*scale`, linearly redescending to zero at `t3*scale`, zero beyond.
pub fn hampel_weight(e: f64, scale: f64, params: HampelParams) -> f64 {
    let a = e.abs();
    let (t1, t2, t3) = (params.t1 * scale, params.t2 * scale, params.t3 * scale);
    if a <= t1 {
        1.0
    } else if a <= t2 {
        t1 / a
    } else if a < t3 {
        t1 * (t3 - a) / ((t3 - t2) * a)
    } else {
        0.0
    }
}

/// Order `p` of the least p-norm baseline, `1 < p <= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpParams {
    p: f64,
}

impl LpParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0 && p <= 2.0) {
            return Err(Error::InvalidArgument(format!(
                "p-norm order must lie in (1, 2], got {p}"
            )));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// p-norm weight `max(|e|, floor)^(p-2)`.
pub fn lp_weight(e: f64, params: LpParams, floor: f64) -> f64 {
    e.abs().max(floor).powf(params.p - 2.0)
}

/// Robust scale `1.483 * median` of absolute errors. Returns 0 for an empty slice.
pub fn mad_scale(abs_errors: &[f64]) -> f64 {
    if abs_errors.is_empty() {
        return 0.0;
    }
    let mut buf = abs_errors.to_vec();
    buf.sort_by(f64::total_cmp);
    let n = buf.len();
    let median = if n % 2 == 1 {
        buf[n / 2]
    } else {
        0.5 * (buf[n / 2 - 1] + buf[n / 2])
    };
    1.483 * median
}
