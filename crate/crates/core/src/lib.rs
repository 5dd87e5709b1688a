//! Robust nonlinear system identification with second-order Volterra filters.
//!
//! The crate provides the recursive Geman-McClure adaptive filter together
//! with RLS, RLM (Hampel M-estimate) and RLpN baselines sharing one weighted
//! RLS engine, Gaussian and symmetric alpha-stable noise generators, a
//! closed-form steady-state EMSE predictor, and a Monte-Carlo harness that
//! runs paired system-identification experiments and writes CSV traces.
//!
//! ```
//! use robust_volterra::{DelayLine, Estimator, FilterState, VolterraConfig};
//!
//! let cfg = VolterraConfig::new(3).unwrap();
//! let mut line = DelayLine::new(cfg);
//! let mut filter =
//!     FilterState::init(cfg.expanded_len(), 0.99, 0.01, Estimator::geman_mcclure(0.5).unwrap())
//!         .unwrap();
//! for n in 0..50 {
//!     let x = line.push_and_expand((n as f64 * 0.7).sin()).unwrap();
//!     filter.step(&x, 0.3 * x.as_slice()[0]).unwrap();
//! }
//! ```

pub mod error;
pub mod filter;
pub mod harness;
pub mod matrix;
pub mod noise;
pub mod quadrature;
pub mod robust;
pub mod theory;
pub mod volterra;

pub use error::{Error, Result};
pub use filter::{run_identification, Estimator, FilterState, IdentificationTrace, StepRecord};
pub use harness::{
    config::{AlgorithmSpec, ExperimentConfig, NoiseSpec, PlantSource},
    emse_db, nmsd_db, run_experiment, AggregateResult, Experiment, ExperimentResult, TrialResult,
};
pub use matrix::SquareMatrix;
pub use noise::{calibrate_snr, AlphaStableParams, NoiseModel};
pub use robust::{GemanMcClureParams, HampelParams, LpParams};
pub use theory::{mean_stability_margin, predict_emse, varphi, EmsePrediction, TheoryInputs};
pub use volterra::{
    expanded_length, filter_output, DelayLine, ExpandedInput, KernelVector, VolterraConfig,
};
