//! Experiment configuration, loadable from TOML and overridable by flags.

use std::fmt;
use std::path::Path;

use compound_returns::pairing::effective_lambda;
use compound_returns::pilar::pilar_search;
use compound_returns::WeightVector;
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Result};

/// Which compound return a learner uses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EstimatorSpec {
    Nstep {
        n: usize,
    },
    Lambda {
        lambda: f64,
    },
    /// Two-bootstrap return found by the Pilar search for effective length `n`.
    Pilar {
        n: f64,
    },
    /// Explicit `(length, weight)` pairs.
    Custom {
        weights: Vec<(usize, f64)>,
    },
}

impl EstimatorSpec {
    /// Weight vector at discount `gamma`; λ-returns are truncated at
    /// `lambda_horizon`.
    pub fn weights(&self, gamma: f64, lambda_horizon: usize) -> Result<WeightVector> {
        let w = match self {
            EstimatorSpec::Nstep { n } => WeightVector::nstep(*n)?,
            EstimatorSpec::Lambda { lambda } => WeightVector::lambda(*lambda, lambda_horizon)?,
            EstimatorSpec::Pilar { n } => pilar_search(*n, gamma)?.weights()?,
            EstimatorSpec::Custom { weights } => WeightVector::from_pairs(weights.iter().copied())?,
        };
        Ok(w)
    }

    /// The n-step return paired with the λ-return of equal center of mass.
    pub fn com_pair(n: usize) -> Result<[EstimatorSpec; 2]> {
        let lambda = effective_lambda(n as f64, 1.0)?;
        Ok([EstimatorSpec::Nstep { n }, EstimatorSpec::Lambda { lambda }])
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorSpec::Nstep { n } => write!(f, "nstep(n={n})"),
            EstimatorSpec::Lambda { lambda } => write!(f, "lambda(lambda={lambda:.4})"),
            EstimatorSpec::Pilar { n } => write!(f, "pilar(n={n})"),
            EstimatorSpec::Custom { weights } => {
                let parts: Vec<String> = weights.iter().map(|(n, c)| format!("{n}:{c}")).collect();
                write!(f, "custom({})", parts.join(" "))
            }
        }
    }
}

/// `points` evenly spaced step sizes on `[0, 1]`.
pub fn uniform_alphas(points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![1.0],
        _ => (0..points).map(|i| i as f64 / (points - 1) as f64).collect(),
    }
}

/// Parses `--alphas`: an integer `k ≥ 2` means `k` uniform points on
/// `[0, 1]`; anything else is a comma-separated list of step sizes.
pub fn parse_alphas(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if let Ok(points) = text.parse::<usize>() {
        if points >= 2 {
            return Ok(uniform_alphas(points));
        }
    }
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| ExperimentError::config(format!("bad step size `{tok}`: {e}")))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub estimators: Vec<EstimatorSpec>,
    pub alphas: Vec<f64>,
    pub episodes: usize,
    pub trials: usize,
    pub seed: u64,
    pub gamma: f64,
    pub lambda_horizon: usize,
}

impl Default for SweepConfig {
    /// The four center-of-mass pairs `n ∈ {2, 3, 5, 10}` on a 25-point grid,
    /// 10 episodes per trial, 100 trials.
    fn default() -> Self {
        let estimators = [2, 3, 5, 10]
            .into_iter()
            .flat_map(|n| EstimatorSpec::com_pair(n).expect("n >= 1"))
            .collect();
        SweepConfig {
            estimators,
            alphas: uniform_alphas(25),
            episodes: 10,
            trials: 100,
            seed: 0,
            gamma: 1.0,
            lambda_horizon: 1000,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(ExperimentError::config("at least one estimator is required"));
        }
        if self.alphas.is_empty() {
            return Err(ExperimentError::config("the step-size grid is empty"));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(ExperimentError::config(format!("step size {a} is not in [0, 1]")));
        }
        if self.episodes == 0 {
            return Err(ExperimentError::config("episodes must be at least 1"));
        }
        if self.trials == 0 {
            return Err(ExperimentError::config("trials must be at least 1"));
        }
        if self.lambda_horizon == 0 {
            return Err(ExperimentError::config("lambda_horizon must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(ExperimentError::config(format!(
                "gamma {} is not in (0, 1]",
                self.gamma
            )));
        }
        for e in &self.estimators {
            e.weights(self.gamma, self.lambda_horizon)
                .map_err(|err| ExperimentError::config(format!("estimator {e}: {err}")))?;
        }
        Ok(())
    }
}

/// Benchmark environments known to the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvName {
    #[serde(rename = "rw19")]
    RandomWalk19,
    #[serde(rename = "grid4x3")]
    Grid4x3,
    #[serde(rename = "grid10x8")]
    Grid10x8,
}

impl EnvName {
    pub const ALL: [EnvName; 3] = [EnvName::RandomWalk19, EnvName::Grid4x3, EnvName::Grid10x8];

    pub fn mrp(self) -> compound_returns::env::TabularMRP {
        use compound_returns::env::{gridworld_10x8, gridworld_4x3, random_walk_19};
        match self {
            EnvName::RandomWalk19 => random_walk_19(),
            EnvName::Grid4x3 => gridworld_4x3(),
            EnvName::Grid10x8 => gridworld_10x8(),
        }
    }

    /// Discount used when measuring return variance: the large grid is
    /// discounted, the others are not.
    pub fn study_gamma(self) -> f64 {
        match self {
            EnvName::Grid10x8 => 0.99,
            _ => 1.0,
        }
    }
}

impl fmt::Display for EnvName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvName::RandomWalk19 => "rw19",
            EnvName::Grid4x3 => "grid4x3",
            EnvName::Grid10x8 => "grid10x8",
        })
    }
}

impl std::str::FromStr for EnvName {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rw19" => Ok(EnvName::RandomWalk19),
            "grid4x3" => Ok(EnvName::Grid4x3),
            "grid10x8" => Ok(EnvName::Grid10x8),
            other => Err(ExperimentError::config(format!(
                "unknown environment `{other}` (expected rw19, grid4x3 or grid10x8)"
            ))),
        }
    }
}

/// Minimum episode count for a variance study.
pub const MIN_STUDY_EPISODES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VarianceConfig {
    pub env: EnvName,
    pub n_max: usize,
    pub episodes: usize,
    pub seed: u64,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        VarianceConfig {
            env: EnvName::RandomWalk19,
            n_max: 21,
            episodes: 10_000,
            seed: 0,
        }
    }
}

impl VarianceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(ExperimentError::config("n_max must be at least 1"));
        }
        if self.episodes < MIN_STUDY_EPISODES {
            return Err(ExperimentError::config(format!(
                "episodes must be at least {MIN_STUDY_EPISODES}, got {}",
                self.episodes
            )));
        }
        Ok(())
    }
}

pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| ExperimentError::ConfigSyntax(e.to_string()))
}

pub fn from_toml<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let msg = e.message().trim().replace('\n', " ");
        ExperimentError::ConfigSyntax(match e.span() {
            Some(span) => format!("line {}: {msg}", text[..span.start].matches('\n').count() + 1),
            None => msg,
        })
    })
}

pub fn load_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    from_toml(&text)
}
