use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{self, Dataset, SpectrumSpec};
use crate::error::{Error, Result};
use crate::metrics::default_thresholds;
use crate::priming::{Algorithm, PrimingConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Synthetic(SpectrumSpec),
    Csv(PathBuf),
    Counterexample,
}

impl DatasetSource {
    /// Loads and centers the dataset.
    pub fn load(&self) -> Result<Dataset> {
        let ds = match self {
            DatasetSource::Synthetic(spec) => data::generate_synthetic(spec)?,
            DatasetSource::Csv(path) => data::load_csv(path)?,
            DatasetSource::Counterexample => data::counterexample_dataset(),
        };
        Ok(data::center(&ds))
    }
}

/// Priming hyperparameters as they appear in config files. The component
/// count and init seed are derived per repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimingHyper {
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_power_epsilon")]
    pub power_epsilon: f64,
    pub max_steps: usize,
}

fn default_learning_rate() -> f64 {
    1e-3
}
fn default_momentum() -> f64 {
    0.9
}
fn default_batch_size() -> usize {
    1000
}
fn default_power_epsilon() -> f64 {
    1e-6
}
fn default_eval_every() -> usize {
    1
}
fn default_repetitions() -> usize {
    1
}
fn default_sample_fraction() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    pub algorithm: Algorithm,
    pub priming: PrimingHyper,
    pub k: usize,
    #[serde(default)]
    pub extra_l: usize,
    #[serde(default = "default_eval_every")]
    pub eval_every: usize,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Fraction of rows used by the projection step.
    #[serde(default = "default_sample_fraction")]
    pub sample_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_cache: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.k == 0 {
            return fail("k must be >= 1".into());
        }
        if self.eval_every == 0 {
            return fail("eval_every must be >= 1".into());
        }
        if self.repetitions == 0 {
            return fail("repetitions must be >= 1".into());
        }
        if self.priming.max_steps == 0 {
            return fail("priming.max_steps must be >= 1".into());
        }
        if self.thresholds.is_empty()
            || self
                .thresholds
                .iter()
                .any(|v| !(*v > 0.0 && *v < std::f64::consts::FRAC_PI_2))
        {
            return fail("thresholds must be a nonempty list inside (0, pi/2)".into());
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return fail(format!(
                "sample_fraction must lie in (0, 1], got {}",
                self.sample_fraction
            ));
        }
        self.priming_config(0)
            .validate(self.algorithm)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn num_components(&self) -> usize {
        self.k + self.extra_l
    }

    pub fn seed(&self, repetition: usize) -> u64 {
        self.base_seed.wrapping_add(repetition as u64)
    }

    pub fn priming_config(&self, repetition: usize) -> PrimingConfig {
        PrimingConfig {
            num_components: self.num_components(),
            learning_rate: self.priming.learning_rate,
            momentum: self.priming.momentum,
            batch_size: self.priming.batch_size,
            power_epsilon: self.priming.power_epsilon,
            max_steps: self.priming.max_steps,
            init_seed: self.seed(repetition),
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative CSV dataset path is resolved against
    /// the config file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.resolve_relative(path.parent());
        Ok(cfg)
    }

    fn resolve_relative(&mut self, base: Option<&Path>) {
        if let (DatasetSource::Csv(p), Some(base)) = (&mut self.dataset, base) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub template: RunConfig,
    /// Learning rates, or termination thresholds for the power method.
    pub candidates: Vec<f64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.candidates.is_empty()
            || self.candidates.iter().any(|c| !(*c > 0.0 && c.is_finite()))
        {
            return Err(Error::Config(
                "candidates must be a nonempty list of positive reals".into(),
            ));
        }
        self.template.validate()
    }

    /// The template with `candidate` substituted.
    pub fn candidate_config(&self, candidate: f64) -> RunConfig {
        let mut cfg = self.template.clone();
        match cfg.algorithm {
            Algorithm::Power => cfg.priming.power_epsilon = candidate,
            _ => cfg.priming.learning_rate = candidate,
        }
        cfg
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.template.resolve_relative(path.parent());
        Ok(cfg)
    }
}
