//! JSON experiment configuration.
//!
//! Unknown keys are rejected so a typo in a sweep cannot silently fall back
//! to a default.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use rntd_core::graph::TauPolicy;
use rntd_core::loss::{RobustLoss, ScalePolicy};
use rntd_core::noise::NoiseKind;
use rntd_core::solver::SolverConfig;
use rntd_core::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub labels: Option<PathBuf>,
    pub noise: Option<NoiseSection>,
    pub solver: SolverSection,
    /// Loss variants evaluated by `benchmark`.
    pub variants: Option<Vec<String>>,
    pub eval: Option<EvalSection>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub kind: String,
    /// Single corruption level for `fit`.
    pub level: Option<f64>,
    /// Level sweep for `benchmark`.
    pub levels: Option<Vec<f64>>,
    pub value_max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub ranks: Vec<usize>,
    #[serde(default = "default_loss")]
    pub loss: String,
    #[serde(default)]
    pub scale: Option<ScaleField>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default)]
    pub tau: Option<TauField>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_eps")]
    pub eps_denominator: f64,
    #[serde(default)]
    pub freeze_scale_after: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub k: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_runs")]
    pub monte_carlo_runs: usize,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ScaleField {
    Word(String),
    Value(f64),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum TauField {
    Word(String),
    Value(f64),
}

fn default_loss() -> String {
    "quadratic".into()
}
fn default_lambda() -> f64 {
    1e5
}
fn default_p() -> usize {
    3
}
fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    500
}
fn default_eps() -> f64 {
    1e-10
}
fn default_restarts() -> usize {
    10
}
fn default_runs() -> usize {
    10
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(&path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config: {e}")))
    }
}

pub fn parse_scale(field: &Option<ScaleField>) -> Result<ScalePolicy> {
    match field {
        None => Ok(ScalePolicy::Adaptive),
        Some(ScaleField::Word(w)) => match w.as_str() {
            "adaptive" | "median" => Ok(ScalePolicy::Adaptive),
            other => Err(Error::InvalidArgument(format!(
                "scale must be \"adaptive\", \"median\" or a positive number, got \"{other}\""
            ))),
        },
        Some(ScaleField::Value(v)) => {
            if *v > 0.0 {
                Ok(ScalePolicy::Fixed(*v))
            } else {
                Err(Error::InvalidArgument("scale must be positive".into()))
            }
        }
    }
}

pub fn parse_loss(name: &str, scale: ScalePolicy) -> Result<RobustLoss> {
    match name {
        "quadratic" => Ok(RobustLoss::Quadratic),
        "cim" => Ok(RobustLoss::Cim { sigma: scale }),
        "huber" => Ok(RobustLoss::Huber { c: scale }),
        "cauchy" => Ok(RobustLoss::Cauchy { gamma: scale }),
        other => Err(Error::InvalidArgument(format!(
            "loss must be one of cim|huber|cauchy|quadratic, got \"{other}\""
        ))),
    }
}

pub fn parse_tau(field: &Option<TauField>) -> Result<TauPolicy> {
    match field {
        None => Ok(TauPolicy::Mean),
        Some(TauField::Word(w)) if w == "mean" => Ok(TauPolicy::Mean),
        Some(TauField::Word(w)) => Err(Error::InvalidArgument(format!(
            "tau must be \"mean\" or a positive number, got \"{w}\""
        ))),
        Some(TauField::Value(v)) => {
            if *v > 0.0 {
                Ok(TauPolicy::Fixed(*v))
            } else {
                Err(Error::InvalidArgument("tau must be positive".into()))
            }
        }
    }
}

pub fn parse_noise_kind(name: &str) -> Result<NoiseKind> {
    match name {
        "laplace" => Ok(NoiseKind::Laplace),
        "salt_pepper" | "salt-pepper" => Ok(NoiseKind::SaltPepper),
        other => Err(Error::InvalidArgument(format!(
            "noise kind must be laplace or salt_pepper, got \"{other}\""
        ))),
    }
}

/// Solver configuration for the given loss; the per-purpose seed is filled
/// in by the caller.
pub fn solver_config(section: &SolverSection, loss: RobustLoss) -> Result<SolverConfig> {
    let mut c = SolverConfig::new(section.ranks.clone(), loss);
    c.lambda = section.lambda;
    c.p = section.p;
    c.tau = parse_tau(&section.tau)?;
    c.tol = section.tol;
    c.max_iter = section.max_iter;
    c.eps_denominator = section.eps_denominator;
    c.freeze_scale_after = section.freeze_scale_after;
    Ok(c)
}
