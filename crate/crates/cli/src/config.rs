use monoblock::init_solutions::ConstructionRule;
use monoblock::models::Model;
use monoblock::monotone::{SweepVariant, TauCheck, TimeStepPolicy};
use monoblock::oracle::{ManufacturedCase, Refinement};
use monoblock::MeshSpec;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Jacobi,
    #[default]
    GaussSeidel,
    Both,
}

impl Method {
    pub fn variants(self) -> Vec<SweepVariant> {
        match self {
            Method::Jacobi => vec![SweepVariant::Jacobi],
            Method::GaussSeidel => vec![SweepVariant::GaussSeidel],
            Method::Both => vec![SweepVariant::Jacobi, SweepVariant::GaussSeidel],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: Option<Model<f64>>,
    #[serde(default)]
    pub mesh: Option<MeshSpec>,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub tau_check: TauCheck,
    #[serde(default)]
    pub warm_start: bool,
    /// Replaces the model's default bracket.
    #[serde(default)]
    pub construction: Option<ConstructionRule<f64>>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub convergence: Option<ConvergenceConfig>,
    #[serde(default)]
    pub debug: DebugConfig,
}

fn default_delta() -> f64 {
    1e-8
}
fn default_max_iters() -> usize {
    10_000
}
fn default_seed() -> u64 {
    7
}
fn default_samples() -> usize {
    200
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Time levels to write; the final level when empty.
    #[serde(default)]
    pub levels: Vec<usize>,
    /// Used when `--out` is not given.
    #[serde(default)]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DebugConfig {
    /// Flip the upwind choice so the assembled lines lose the M-matrix property.
    #[serde(default)]
    pub corrupt_upwind: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CaseChoice {
    Preset(Preset),
    Custom(ManufacturedCase<f64>),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Upwind,
    Central,
    Constant,
}

impl CaseChoice {
    pub fn case(&self) -> ManufacturedCase<f64> {
        match self {
            CaseChoice::Preset(Preset::Upwind) => ManufacturedCase::upwind(),
            CaseChoice::Preset(Preset::Central) => ManufacturedCase::central(),
            CaseChoice::Preset(Preset::Constant) => ManufacturedCase::constant(),
            CaseChoice::Custom(c) => *c,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub case: CaseChoice,
    pub cells: Vec<usize>,
    pub t_final: f64,
    #[serde(default = "one")]
    pub tau_factor: f64,
    pub refinement: Refinement,
    /// Fail with exit code 3 when the fitted slope falls outside this range.
    #[serde(default)]
    pub expect_slope: Option<[f64; 2]>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("{0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.display().to_string(), source })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(ConfigError::Invalid(format!("delta must be positive, got {}", self.delta)));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<&Model<f64>, ConfigError> {
        self.model.as_ref().ok_or_else(|| ConfigError::Invalid("config has no model".into()))
    }

    pub fn mesh_spec(&self) -> Result<MeshSpec, ConfigError> {
        self.mesh.ok_or_else(|| ConfigError::Invalid("config has no mesh".into()))
    }

    pub fn policy(&self, timing: bool) -> TimeStepPolicy<f64> {
        TimeStepPolicy {
            max_iters: self.max_iters,
            tau_check: self.tau_check,
            warm_start: self.warm_start,
            timing,
            ..TimeStepPolicy::default()
        }
        .with_delta(self.delta)
    }
}
