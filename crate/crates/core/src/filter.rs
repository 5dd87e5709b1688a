//! Weighted recursive least-squares engine for second-order Volterra filters.
//!
//! Every algorithm here shares the recursion
//!
//! ```text
//! e(n)   = d(n) - h(n-1)^T x(n)
//! rho    = w(e(n))
//! Psi(n) = rho P(n-1) x(n) / (lambda + rho x(n)^T P(n-1) x(n))
//! h(n)   = h(n-1) + Psi(n) e(n)
//! P(n)   = (P(n-1) - Psi(n) x(n)^T P(n-1)) / lambda
//! ```
//!
//! and differs only in the weight `w`: the Geman-McClure weight gives the
//! recursive Geman-McClure filter, `w = 1` is plain RLS, and the Hampel and
//! p-norm weights give the RLM and RLpN baselines. The weight is evaluated
//! on the a-priori error, i.e. with the previous coefficients.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::robust::{
    gm_weight, hampel_weight, lp_weight, mad_scale, GemanMcClureParams, HampelParams, LpParams,
};
use crate::volterra::{dot, DelayLine, ExpandedInput, KernelVector, VolterraConfig};

pub const DEFAULT_ZETA: f64 = 0.01;
pub const DEFAULT_RLM_WINDOW: usize = 14;
pub const DEFAULT_LP_FLOOR: f64 = 1e-3;

/// Per-sample weighting rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    /// Recursive Geman-McClure.
    GemanMcClure { sigma: GemanMcClureParams },
    /// Conventional RLS, weight 1.
    PlainRls,
    /// Hampel three-part M-estimate with a sliding-window median scale.
    Hampel {
        thresholds: HampelParams,
        window: usize,
    },
    /// Recursive least p-norm.
    Lp { p: LpParams, floor: f64 },
    /// Fixed weight `c > 0`; `c = 1` coincides with plain RLS.
    Constant { weight: f64 },
}

impl Estimator {
    pub fn geman_mcclure(sigma: f64) -> Result<Self> {
        Ok(Estimator::GemanMcClure {
            sigma: GemanMcClureParams::new(sigma)?,
        })
    }

    pub fn hampel(thresholds: HampelParams, window: usize) -> Self {
        Estimator::Hampel { thresholds, window }
    }

    pub fn lp(p: f64, floor: f64) -> Result<Self> {
        Ok(Estimator::Lp {
            p: LpParams::new(p)?,
            floor,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Estimator::Hampel { window: 0, .. } => Err(Error::InvalidArgument(
                "RLM scale window must hold at least one error".into(),
            )),
            Estimator::Lp { floor, .. } if !(floor > 0.0 && floor.is_finite()) => Err(
                Error::InvalidArgument(format!("p-norm floor must be positive, got {floor}")),
            ),
            Estimator::Constant { weight } if !(weight > 0.0 && weight.is_finite()) => Err(
                Error::InvalidArgument(format!("constant weight must be positive, got {weight}")),
            ),
            _ => Ok(()),
        }
    }

    /// Short label used in reports and CSV files.
    pub fn label(&self) -> String {
        match self {
            Estimator::GemanMcClure { sigma } => format!("GM(sigma={})", sigma.sigma()),
            Estimator::PlainRls => "RLS".into(),
            Estimator::Hampel { .. } => "RLM".into(),
            Estimator::Lp { p, .. } => format!("RLpN(p={})", p.p()),
            Estimator::Constant { weight } => format!("CONST({weight})"),
        }
    }
}

/// Output of one adaptation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Filter output with the previous coefficients.
    pub y: f64,
    /// A-priori error `d - y`.
    pub e: f64,
    pub rho: f64,
    /// Euclidean norm of the gain vector.
    pub gain_norm: f64,
    /// `x^T P(n-1) x`.
    pub quad_form: f64,
}

#[derive(Debug, Clone)]
pub struct FilterState {
    weights: KernelVector,
    p: SquareMatrix,
    lambda: f64,
    zeta: f64,
    estimator: Estimator,
    recent_abs_errors: VecDeque<f64>,
    iteration: usize,
    px: Vec<f64>,
}

impl FilterState {
    /// `h = 0`, `P = I / zeta`.
    pub fn init(len: usize, lambda: f64, zeta: f64, estimator: Estimator) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidArgument(
                "filter length must be positive".into(),
            ));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "forgetting factor must lie in (0, 1), got {lambda}"
            )));
        }
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "zeta must be positive, got {zeta}"
            )));
        }
        estimator.validate()?;
        let window = match estimator {
            Estimator::Hampel { window, .. } => window,
            _ => 0,
        };
        Ok(Self {
            weights: KernelVector::zeros(len),
            p: SquareMatrix::scaled_identity(len, 1.0 / zeta),
            lambda,
            zeta,
            estimator,
            recent_abs_errors: VecDeque::with_capacity(window),
            iteration: 0,
            px: vec![0.0; len],
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &KernelVector {
        &self.weights
    }

    pub fn inverse_correlation(&self) -> &SquareMatrix {
        &self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn estimator(&self) -> &Estimator {
        &self.estimator
    }

    /// Number of completed steps.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    fn weight(&mut self, e: f64) -> f64 {
        match self.estimator {
            Estimator::GemanMcClure { sigma } => gm_weight(e, sigma),
            Estimator::PlainRls => 1.0,
            Estimator::Hampel { thresholds, window } => {
                if self.recent_abs_errors.len() == window {
                    self.recent_abs_errors.pop_front();
                }
                self.recent_abs_errors.push_back(e.abs());
                let scale = mad_scale(self.recent_abs_errors.make_contiguous());
                if scale > 0.0 {
                    hampel_weight(e, scale, thresholds)
                } else {
                    1.0
                }
            }
            Estimator::Lp { p, floor } => lp_weight(e, p, floor),
            Estimator::Constant { weight } => weight,
        }
    }

    /// One adaptation step on regressor `x` and desired sample `d`.
    pub fn step(&mut self, x: &ExpandedInput, d: f64) -> Result<StepRecord> {
        self.step_slice(x.as_slice(), d)
    }

    pub fn step_slice(&mut self, x: &[f64], d: f64) -> Result<StepRecord> {
        let n = self.len();
        if x.len() != n {
            return Err(Error::InvalidArgument(format!(
                "regressor length {} does not match filter length {n}",
                x.len()
            )));
        }
        if !d.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite regressor or desired sample at iteration {}",
                self.iteration + 1
            )));
        }
        let iteration = self.iteration + 1;

        let y = dot(self.weights.as_slice(), x);
        let e = d - y;
        let rho = self.weight(e);

        self.p.mul_vec_into(x, &mut self.px);
        let quad_form = dot(x, &self.px);
        let denom = self.lambda + rho * quad_form;
        let k = rho / denom;

        let mut gain_sq = 0.0;
        for (w, &pxi) in self.weights.as_mut_slice().iter_mut().zip(&self.px) {
            let g = k * pxi;
            gain_sq += g * g;
            *w += g * e;
        }

        // P x x^T P is symmetric, so Psi x^T P = k (Px)(Px)^T.
        let inv_lambda = 1.0 / self.lambda;
        let px = &self.px;
        for (i, row) in self.p.as_mut_slice().chunks_exact_mut(n).enumerate() {
            let kpi = k * px[i];
            for (pij, &pxj) in row.iter_mut().zip(px) {
                *pij = (*pij - kpi * pxj) * inv_lambda;
            }
        }
        self.p.symmetrize();

        self.iteration = iteration;
        if !(self.weights.as_slice().iter().all(|v| v.is_finite()) && self.p.is_finite()) {
            return Err(Error::Divergence { iteration });
        }
        Ok(StepRecord {
            y,
            e,
            rho,
            gain_norm: gain_sq.sqrt(),
            quad_form,
        })
    }
}

/// Per-step traces of an identification run.
#[derive(Debug, Clone, Default)]
pub struct IdentificationTrace {
    pub records: Vec<StepRecord>,
    /// `||h(n) - h_o||_2` after each step.
    pub deviations: Vec<f64>,
    /// A-priori error `x(n)^T (h_o - h(n-1))`.
    pub a_priori_errors: Vec<f64>,
}

/// Identifies `plant` from input samples and additive noise:
/// `d(n) = h_o^T x(n) + noise(n)`.
///
/// On divergence, the error carries the failing iteration and the trace
/// collected so far is dropped.
pub fn run_identification(
    state: &mut FilterState,
    plant: &KernelVector,
    inputs: &[f64],
    noise: &[f64],
) -> Result<IdentificationTrace> {
    let mut trace = IdentificationTrace::default();
    identify_with(state, plant, inputs, noise, |rec, dev, ea| {
        trace.records.push(*rec);
        trace.deviations.push(dev);
        trace.a_priori_errors.push(ea);
    })?;
    Ok(trace)
}

/// Same as [`run_identification`] but streams `(record, deviation, a-priori error)`
/// to `sink` instead of collecting.
pub fn identify_with(
    state: &mut FilterState,
    plant: &KernelVector,
    inputs: &[f64],
    noise: &[f64],
    mut sink: impl FnMut(&StepRecord, f64, f64),
) -> Result<()> {
    if plant.len() != state.len() {
        return Err(Error::InvalidArgument(format!(
            "plant length {} does not match filter length {}",
            plant.len(),
            state.len()
        )));
    }
    if inputs.len() != noise.len() {
        return Err(Error::InvalidArgument(format!(
            "input length {} does not match noise length {}",
            inputs.len(),
            noise.len()
        )));
    }
    let memory = plant.memory().ok_or_else(|| {
        Error::InvalidArgument(format!("{} is not a valid Volterra length", plant.len()))
    })?;
    let mut delay = DelayLine::new(VolterraConfig::new(memory)?);
    let mut x = vec![0.0; plant.len()];
    for (&sample, &xi) in inputs.iter().zip(noise) {
        delay.push(sample)?;
        delay.expand_into(&mut x);
        let clean = dot(plant.as_slice(), &x);
        let rec = state.step_slice(&x, clean + xi)?;
        let a_priori = clean - rec.y;
        let dev = state
            .weights()
            .as_slice()
            .iter()
            .zip(plant.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        sink(&rec, dev, a_priori);
    }
    Ok(())
}
