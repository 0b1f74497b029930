//! Experiment configuration, loaded from TOML or built from CLI flags.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use trace_core::acquisition::AcquisitionConfig;
use trace_core::bench;
use trace_core::engine::{Algorithm, EngineConfig};
use trace_core::gp::FitConfig;
use trace_core::inner_opt::InnerOptConfig;
use trace_core::problem::{Evaluator, ProblemSpec, SearchSpace, Sense};

use crate::external::ExternalEvaluator;
use crate::HarnessError;

pub const DEFAULT_TIMEOUT_SECS: f64 = 300.0;

/// Where objective and constraint values come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum EvaluatorDescriptor {
    Builtin { name: String },
    External(ExternalDescriptor),
}

/// A child process speaking the line protocol of [`crate::external`].
/// Dimension, bounds and constraint count cannot be discovered from the
/// process, so all of them are required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalDescriptor {
    /// Executable followed by its arguments.
    pub command: Vec<String>,
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constraints: usize,
    pub sense: Sense,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_name")]
    pub name: String,
}

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT_SECS
}

fn default_name() -> String {
    "external".into()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProblemField {
    Name(String),
    Descriptor(EvaluatorDescriptor),
}

impl From<ProblemField> for EvaluatorDescriptor {
    fn from(p: ProblemField) -> Self {
        match p {
            ProblemField::Name(name) => EvaluatorDescriptor::Builtin { name },
            ProblemField::Descriptor(d) => d,
        }
    }
}

fn deserialize_problem<'de, D: serde::Deserializer<'de>>(d: D) -> Result<EvaluatorDescriptor, D::Error> {
    ProblemField::deserialize(d).map(Into::into)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Registered problem name or an evaluator table.
    #[serde(deserialize_with = "deserialize_problem")]
    pub problem: EvaluatorDescriptor,
    pub algorithms: Vec<Algorithm>,
    pub budget: usize,
    pub init: usize,
    #[serde(default = "one")]
    pub runs: usize,
    /// Run `k` (0-based) uses seed `base_seed + k`.
    #[serde(default)]
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub inner: InnerOptConfig,
    #[serde(default)]
    pub acquisition: AcquisitionConfig,
    #[serde(default)]
    pub fit: FitConfig,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, HarnessError> {
        toml::from_str(s).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn seed_for(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }

    pub fn engine_config(&self, algorithm: Algorithm, run: usize) -> EngineConfig {
        EngineConfig {
            inner: self.inner.clone(),
            acq: self.acquisition,
            fit: self.fit.clone(),
            ..EngineConfig::new(algorithm, self.init, self.budget, self.seed_for(run))
        }
    }

    /// Checks everything that can be checked before starting a run.
    pub fn validate(&self) -> Result<ProblemSpec, HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        if self.init == 0 || self.init > self.budget {
            return bad(format!("need 1 <= init ({}) <= budget ({})", self.init, self.budget));
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        self.inner.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.acquisition.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        let spec = self.problem.spec()?;
        if spec.num_constraints == 0 && self.algorithms.contains(&Algorithm::Trace) {
            return bad(format!("problem {} has no constraints; trace needs at least one", spec.name));
        }
        Ok(spec)
    }
}

impl EvaluatorDescriptor {
    pub fn spec(&self) -> Result<ProblemSpec, HarnessError> {
        match self {
            EvaluatorDescriptor::Builtin { name } => bench::problem(name)
                .map(|p| p.spec)
                .map_err(|e| HarnessError::Config(e.to_string())),
            EvaluatorDescriptor::External(d) => {
                if d.command.is_empty() {
                    return Err(HarnessError::Config("external evaluator command is empty".into()));
                }
                if d.lower.len() != d.dim || d.upper.len() != d.dim {
                    return Err(HarnessError::Config(format!(
                        "external evaluator declares dim {} but {} lower / {} upper bounds",
                        d.dim,
                        d.lower.len(),
                        d.upper.len()
                    )));
                }
                if !(d.timeout_secs > 0.0 && d.timeout_secs.is_finite()) {
                    return Err(HarnessError::Config(format!("bad timeout {}", d.timeout_secs)));
                }
                let space = SearchSpace::new(d.lower.clone(), d.upper.clone())
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                Ok(ProblemSpec { name: d.name.clone(), space, num_constraints: d.constraints, sense: d.sense })
            }
        }
    }

    pub fn name(&self) -> &str {
        match self {
            EvaluatorDescriptor::Builtin { name } => name,
            EvaluatorDescriptor::External(d) => &d.name,
        }
    }

    /// A fresh evaluator; external ones spawn their own child process.
    pub fn open(&self) -> Result<Box<dyn Evaluator + Send>, HarnessError> {
        match self {
            EvaluatorDescriptor::Builtin { name } => {
                let p = bench::problem(name).map_err(|e| HarnessError::Config(e.to_string()))?;
                Ok(Box::new(move |x: &[f64]| Ok(p.evaluate(x)?)))
            }
            EvaluatorDescriptor::External(d) => Ok(Box::new(ExternalEvaluator::spawn(
                &d.command,
                d.constraints,
                Duration::from_secs_f64(d.timeout_secs),
            )?)),
        }
    }
}
