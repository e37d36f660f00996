//! The JSON config: a model block plus one optional block per subcommand.
//!
//! Unknown keys are rejected everywhere. Relative paths are resolved against
//! the directory of the config file.

use std::path::{Path, PathBuf};

use colored_ldp::measures::{ColorMeasure, Kernel};
use colored_ldp::validation::{Budget, Tolerances};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<GenerateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_rate: Option<DegreeRateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_rate: Option<EdgeRateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ising: Option<IsingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_conditional: Option<ConditionalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approximate: Option<ApproximateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateConfig>,
}

/// `{m, mu, C}`; `C` must be symmetric, nonnegative and not identically zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub m: usize,
    pub mu: Vec<f64>,
    #[serde(rename = "C")]
    pub kernel: Vec<Vec<f64>>,
}

/// A validated model.
#[derive(Clone, Debug)]
pub struct Model {
    pub mu: ColorMeasure,
    pub kernel: Kernel,
}

impl ModelConfig {
    pub fn build(&self) -> Result<Model, CliError> {
        let cfg = |msg: String| CliError::Config(format!("model: {msg}"));
        if self.mu.len() != self.m {
            return Err(cfg(format!("mu has {} entries but m = {}", self.mu.len(), self.m)));
        }
        if self.kernel.len() != self.m || self.kernel.iter().any(|r| r.len() != self.m) {
            return Err(cfg(format!("C must be a {0}x{0} matrix", self.m)));
        }
        let mu = ColorMeasure::probability(self.mu.clone()).map_err(|e| cfg(e.to_string()))?;
        let kernel = Kernel::from_rows(&self.kernel).map_err(|e| cfg(e.to_string()))?;
        Ok(Model { mu, kernel })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub n: usize,
}

/// A graph file: the edge-list text form, or JSON when the name ends in `.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub graph: PathBuf,
}

/// A measure given inline or as a path to a JSON file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source {
    Path(PathBuf),
    Inline(serde_json::Value),
}

impl Source {
    pub fn load<T: DeserializeOwned>(&self, base: &Path, what: &str) -> Result<T, CliError> {
        match self {
            Source::Path(p) => {
                let path = base.join(p);
                let text = read(&path)?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {what}: {e}", path.display())))
            }
            Source::Inline(v) => T::deserialize(v).map_err(|e| CliError::Config(format!("inline {what}: {e}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateFunction {
    J,
    I,
    #[serde(rename = "I_omega")]
    IOmega,
    #[serde(rename = "J_tilde")]
    JTilde,
    #[serde(rename = "zeta")]
    Zeta,
}

/// Inputs for one rate. `J` reads `pairs` and `neighborhoods`; `I` and
/// `I_omega` read `colors` and `pairs`; `J_tilde` reads all three; `zeta`
/// reads `x`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    pub function: RateFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<Source>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Source>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighborhoods: Option<Source>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedDegreeLaw {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poisson: Option<f64>,
    /// Degree law of the graph in this file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
}

/// `c` defaults to the constant of an Erdős–Rényi model kernel.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeRateConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub laws: Vec<NamedDegreeLaw>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingChoice {
    #[default]
    Plain,
    /// Kernel tilt that centers the edge count at `x n`.
    Tilt,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub sizes: Vec<usize>,
    pub replicas: Vec<u64>,
    #[serde(default)]
    pub sampling: SamplingChoice,
}

/// The event `|E| >= x n`. The exact column needs an Erdős–Rényi model.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRateConfig {
    pub x: f64,
    #[serde(default)]
    pub sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingConfig {
    pub betas: Vec<f64>,
    pub cs: Vec<f64>,
}

/// Target counts: from a graph file, or color counts (summing to `n`) and
/// per-pair edge numbers (`m × m`, upper triangle read).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountTarget {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<Vec<u64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalConfig {
    pub target: CountTarget,
    #[serde(default = "one")]
    pub retries: u32,
}

fn one() -> u32 {
    1
}

/// Consistify `(pairs, neighborhoods)` at `eps`; then, when `quantize` is
/// given, quantize at its counts and cap degrees.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproximateConfig {
    pub pairs: Source,
    pub neighborhoods: Source,
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantize: Option<CountTarget>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub tolerances: Tolerances,
    pub budget: Budget,
    /// Suites to run when no `--suite` flag is given; empty means all.
    pub suites: Vec<String>,
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Loads and parses a config file; `None` gives the empty config.
pub fn load(path: Option<&Path>) -> Result<(Config, PathBuf), CliError> {
    let Some(path) = path else {
        return Ok((Config::default(), PathBuf::from(".")));
    };
    let text = read(path)?;
    let cfg: Config = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(m) = &cfg.model {
        m.build()?;
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
    Ok((cfg, base))
}
