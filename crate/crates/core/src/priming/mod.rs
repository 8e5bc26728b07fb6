//! Approximate-PCA algorithms used to prime the exact step.
//!
//! All three share one state type that is advanced one step at a time: a
//! mini-batch for Oja/Sanger and EigenGame, a full simultaneous-iteration
//! pass over the covariance for the power method.

mod eigengame;
mod oja;
mod power;

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{seeded_rng, RngStream};
use crate::error::{Error, Result};
use crate::ppca::ComponentSet;

pub use eigengame::{eigengame_ascent, eigengame_utilities};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Power,
    Oja,
    #[serde(alias = "eigen_game")]
    EigenGame,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Power => "power",
            Algorithm::Oja => "oja",
            Algorithm::EigenGame => "eigengame",
        }
    }

    pub fn is_gradient(self) -> bool {
        !matches!(self, Algorithm::Power)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(Algorithm::Power),
            "oja" => Ok(Algorithm::Oja),
            "eigengame" | "eigen_game" => Ok(Algorithm::EigenGame),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimingConfig {
    /// Number of tracked directions, `k + l`.
    pub num_components: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    /// Per-component termination threshold of the power method.
    pub power_epsilon: f64,
    pub max_steps: usize,
    pub init_seed: u64,
}

impl Default for PrimingConfig {
    fn default() -> Self {
        Self {
            num_components: 1,
            learning_rate: 1e-3,
            momentum: 0.9,
            batch_size: 1000,
            power_epsilon: 1e-6,
            max_steps: 1000,
            init_seed: 0,
        }
    }
}

impl PrimingConfig {
    pub fn validate(&self, algorithm: Algorithm) -> Result<()> {
        if self.num_components == 0 {
            return Err(Error::InvalidConfig("num_components must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if algorithm.is_gradient() {
            if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "learning_rate must be positive, got {}",
                    self.learning_rate
                )));
            }
            if self.batch_size == 0 {
                return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
            }
        } else if !(self.power_epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "power_epsilon must be positive, got {}",
                self.power_epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimingState {
    pub algorithm: Algorithm,
    pub vectors: Vec<Vec<f64>>,
    /// Nesterov buffers; untouched by the power method.
    pub velocities: Vec<Vec<f64>>,
    pub step: usize,
    pub config: PrimingConfig,
}

impl PrimingState {
    /// Draws every vector i.i.d. standard normal and normalizes it. Vectors
    /// are drawn in order from one seeded stream, so the first `k` vectors do
    /// not depend on how many extra directions are requested.
    pub fn init(algorithm: Algorithm, config: PrimingConfig, dim: usize) -> Result<Self> {
        config.validate(algorithm)?;
        let m = config.num_components;
        if m > dim {
            return Err(Error::TooManyComponents { requested: m, dim });
        }
        let mut rng = seeded_rng(config.init_seed, RngStream::Init);
        let mut vectors = Vec::with_capacity(m);
        while vectors.len() < m {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            if let Some(u) = crate::linalg::normalized(&v) {
                vectors.push(u);
            }
        }
        Ok(Self {
            algorithm,
            vectors,
            velocities: vec![vec![0.0; dim]; m],
            step: 0,
            config,
        })
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    fn require(&self, expected: Algorithm) -> Result<()> {
        if self.algorithm == expected {
            Ok(())
        } else {
            Err(Error::WrongAlgorithm {
                expected: expected.as_str(),
            })
        }
    }

    fn check_finite(&self) -> Result<()> {
        let finite = self
            .vectors
            .iter()
            .chain(&self.velocities)
            .all(|v| v.iter().all(|x| x.is_finite()));
        if finite {
            Ok(())
        } else {
            Err(Error::NonFiniteUpdate { step: self.step })
        }
    }

    /// Current estimates, each scaled to unit norm.
    pub fn current_components(&self) -> Result<ComponentSet> {
        ComponentSet::from_unnormalized(self.dim(), &self.vectors)
    }
}

/// One Nesterov step in ascent form:
/// `velocity <- mu velocity + direction`,
/// `param <- param + alpha (direction + mu velocity)`.
pub fn nesterov_update(
    param: &mut [f64],
    velocity: &mut [f64],
    direction: &[f64],
    learning_rate: f64,
    momentum: f64,
) {
    debug_assert_eq!(param.len(), velocity.len());
    debug_assert_eq!(param.len(), direction.len());
    for ((p, v), g) in param.iter_mut().zip(velocity.iter_mut()).zip(direction) {
        *v = momentum * *v + g;
        *p += learning_rate * (g + momentum * *v);
    }
}
