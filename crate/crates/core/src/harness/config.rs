//! Declarative experiment description, read from TOML.
//!
//! ```toml
//! memory = 4
//! plant = "synthetic"            # or: plant = { file = "plant.txt" }
//! lambda = 0.99
//! horizon = 5000
//! trials = 300
//! seed = 42
//!
//! [noise]
//! kind = "gaussian-snr"          # or "gaussian" (variance) / "alpha-stable" (alpha, gamma)
//! snr_db = 25.0
//!
//! [[algorithms]]
//! kind = "gm"
//! sigma = 0.5
//!
//! [[algorithms]]
//! kind = "rls"
//! ```
//!
//! Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::filter::{Estimator, DEFAULT_LP_FLOOR, DEFAULT_RLM_WINDOW, DEFAULT_ZETA};
use crate::harness::plant::synthetic_plant;
use crate::harness::Experiment;
use crate::noise::AlphaStableParams;
use crate::robust::HampelParams;
use crate::volterra::{expanded_length, KernelVector};

pub const DEFAULT_LAMBDA: f64 = 0.99;
pub const DEFAULT_TRIALS: usize = 300;
pub const DEFAULT_LP_ORDER: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlantSource {
    /// Built-in plant, see [`synthetic_plant`].
    #[default]
    Synthetic,
    /// Plant file; relative paths resolve against the config file's directory.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseSpec {
    /// Gaussian noise whose variance is set per trial from the measured
    /// clean-output power.
    GaussianSnr {
        snr_db: f64,
    },
    Gaussian {
        variance: f64,
    },
    AlphaStable {
        alpha: f64,
        gamma: f64,
    },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::GaussianSnr { snr_db } if !snr_db.is_finite() => Err(Error::Config(
                format!("snr_db must be finite, got {snr_db}"),
            )),
            NoiseSpec::Gaussian { variance } if !(variance > 0.0 && variance.is_finite()) => Err(
                Error::Config(format!("noise variance must be positive, got {variance}")),
            ),
            NoiseSpec::AlphaStable { alpha, gamma } => AlphaStableParams::new(alpha, gamma)
                .map(|_| ())
                .map_err(|e| Error::Config(e.to_string())),
            _ => Ok(()),
        }
    }
}

fn default_t1() -> f64 {
    0.6
}
fn default_t2() -> f64 {
    1.3
}
fn default_t3() -> f64 {
    1.8
}
fn default_window() -> usize {
    DEFAULT_RLM_WINDOW
}
fn default_p() -> f64 {
    DEFAULT_LP_ORDER
}
fn default_floor() -> f64 {
    DEFAULT_LP_FLOOR
}

/// One algorithm entry of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    Gm {
        sigma: f64,
    },
    Rls {},
    Rlm {
        #[serde(default = "default_t1")]
        t1: f64,
        #[serde(default = "default_t2")]
        t2: f64,
        #[serde(default = "default_t3")]
        t3: f64,
        #[serde(default = "default_window")]
        window: usize,
    },
    Lpn {
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default = "default_floor")]
        floor: f64,
    },
}

impl AlgorithmSpec {
    pub fn estimator(&self) -> Result<Estimator> {
        let est = match *self {
            AlgorithmSpec::Gm { sigma } => Estimator::geman_mcclure(sigma)?,
            AlgorithmSpec::Rls {} => Estimator::PlainRls,
            AlgorithmSpec::Rlm { t1, t2, t3, window } => {
                Estimator::hampel(HampelParams::new(t1, t2, t3)?, window)
            }
            AlgorithmSpec::Lpn { p, floor } => Estimator::lp(p, floor)?,
        };
        est.validate()?;
        Ok(est)
    }
}

impl FromStr for AlgorithmSpec {
    type Err = Error;

    /// `gm:<sigma>`, `rls`, `rlm[:<window>]`, `lpn[:<p>]`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let num = |a: &str| -> Result<f64> {
            a.parse()
                .map_err(|_| Error::Config(format!("bad numeric argument in algorithm `{s}`")))
        };
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("gm", Some(a)) => Ok(AlgorithmSpec::Gm { sigma: num(a)? }),
            ("gm", None) => Err(Error::Config("`gm` needs a sigma, e.g. `gm:0.3`".into())),
            ("rls", None) => Ok(AlgorithmSpec::Rls {}),
            ("rlm", a) => Ok(AlgorithmSpec::Rlm {
                t1: default_t1(),
                t2: default_t2(),
                t3: default_t3(),
                window: match a {
                    Some(a) => a
                        .parse()
                        .map_err(|_| Error::Config(format!("bad window in algorithm `{s}`")))?,
                    None => DEFAULT_RLM_WINDOW,
                },
            }),
            ("lpn", a) => Ok(AlgorithmSpec::Lpn {
                p: match a {
                    Some(a) => num(a)?,
                    None => DEFAULT_LP_ORDER,
                },
                floor: DEFAULT_LP_FLOOR,
            }),
            _ => Err(Error::Config(format!("unknown algorithm `{s}`"))),
        }
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmSpec::Gm { sigma } => write!(f, "gm:{sigma}"),
            AlgorithmSpec::Rls {} => write!(f, "rls"),
            AlgorithmSpec::Rlm { window, .. } => write!(f, "rlm:{window}"),
            AlgorithmSpec::Lpn { p, .. } => write!(f, "lpn:{p}"),
        }
    }
}

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}
fn default_zeta() -> f64 {
    DEFAULT_ZETA
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub plant: PlantSource,
    /// Linear memory `M`. Required for the synthetic plant; checked against
    /// the file header otherwise.
    #[serde(default)]
    pub memory: Option<usize>,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    pub noise: NoiseSpec,
    pub horizon: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Trailing samples used for steady-state averages; defaults to the last 10%.
    #[serde(default)]
    pub steady_window: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(skip)]
    base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Directory against which a relative plant path is resolved.
    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = Some(dir.into());
        self
    }

    pub fn effective_steady_window(&self) -> usize {
        self.steady_window.unwrap_or((self.horizon / 10).max(1))
    }

    /// Validates and loads everything needed to run. `seed_override` wins
    /// over the config's seed; having neither is an error.
    pub fn resolve(&self, seed_override: Option<u64>) -> Result<Experiment> {
        let seed = seed_override.or(self.seed).ok_or_else(|| {
            Error::Config("no seed given: set `seed` in the config or pass --seed".into())
        })?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let steady_window = self.effective_steady_window();
        if steady_window == 0 || self.horizon <= steady_window {
            return Err(Error::Config(format!(
                "horizon ({}) must exceed steady_window ({steady_window})",
                self.horizon
            )));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one algorithm is required".into()));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::Config(format!(
                "lambda must lie in (0, 1), got {}",
                self.lambda
            )));
        }
        if !(self.zeta > 0.0 && self.zeta.is_finite()) {
            return Err(Error::Config(format!(
                "zeta must be positive, got {}",
                self.zeta
            )));
        }
        self.noise.validate()?;

        let plant = match &self.plant {
            PlantSource::Synthetic => {
                let m = self.memory.ok_or_else(|| {
                    Error::Config("`memory` is required for the synthetic plant".into())
                })?;
                expanded_length(m).map_err(|e| Error::Config(e.to_string()))?;
                synthetic_plant(m)
            }
            PlantSource::File(p) => {
                let path = match (&self.base_dir, p.is_relative()) {
                    (Some(dir), true) => dir.join(p),
                    _ => p.clone(),
                };
                let plant = KernelVector::read_plant_file(&path)?;
                if let Some(m) = self.memory {
                    if plant.memory() != Some(m) {
                        return Err(Error::Config(format!(
                            "memory = {m} but plant file {} has M={}",
                            path.display(),
                            plant.memory().unwrap_or(0)
                        )));
                    }
                }
                plant
            }
        };
        if plant.norm() == 0.0 {
            return Err(Error::Config("plant must not be identically zero".into()));
        }

        let mut algorithms = Vec::with_capacity(self.algorithms.len());
        for spec in &self.algorithms {
            let est = spec.estimator().map_err(|e| Error::Config(e.to_string()))?;
            let label = est.label();
            if algorithms
                .iter()
                .any(|(l, _): &(String, Estimator)| *l == label)
            {
                return Err(Error::Config(format!("duplicate algorithm `{label}`")));
            }
            algorithms.push((label, est));
        }

        Ok(Experiment {
            plant,
            algorithms,
            lambda: self.lambda,
            zeta: self.zeta,
            noise: self.noise,
            horizon: self.horizon,
            trials: self.trials,
            steady_window,
            seed,
        })
    }
}
