//! Problem definition, search-space geometry and the evaluation log.
//!
//! Everything the optimizers see lives in the unit hypercube; raw bounds are
//! only applied when a point is handed to an [`Evaluator`].

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Error type returned by evaluation backends.
pub type EvalError = Box<dyn std::error::Error + Send + Sync>;

/// Axis-aligned box `[lower_j, upper_j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidSpace("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidSpace(format!(
                "{} lower bounds but {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidSpace(format!(
                    "axis {j}: lower {lo} must be finite and below upper {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Raw coordinates to the unit hypercube.
    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
            .collect()
    }

    /// Unit-hypercube coordinates to raw bounds.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| lo + v * (hi - lo))
            .collect()
    }

    /// Index of the equal-width stratum (out of `n`) holding `value` on `axis`.
    pub fn stratum(&self, axis: usize, value: f64, n: usize) -> usize {
        let t = (value - self.lower[axis]) / (self.upper[axis] - self.lower[axis]);
        ((t * n as f64).floor() as usize).min(n - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// Native objective value to the minimization form used internally.
    pub fn to_internal(self, f: f64) -> f64 {
        match self {
            Sense::Minimize => f,
            Sense::Maximize => -f,
        }
    }

    /// Inverse of [`Sense::to_internal`].
    pub fn to_native(self, f: f64) -> f64 {
        // negation is its own inverse
        self.to_internal(f)
    }

    /// True when native value `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        self.to_internal(a) < self.to_internal(b)
    }
}

impl std::str::FromStr for Sense {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "min" | "minimize" => Ok(Sense::Minimize),
            "max" | "maximize" => Ok(Sense::Maximize),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    pub space: SearchSpace,
    pub num_constraints: usize,
    pub sense: Sense,
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// Objective and constraint values returned by an evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub f: f64,
    pub c: Vec<f64>,
}

/// Black-box backend: raw coordinates in, native objective and constraints out.
pub trait Evaluator {
    fn evaluate(&mut self, x: &[f64]) -> std::result::Result<Outcome, EvalError>;
}

impl<F> Evaluator for F
where
    F: FnMut(&[f64]) -> std::result::Result<Outcome, EvalError>,
{
    fn evaluate(&mut self, x: &[f64]) -> std::result::Result<Outcome, EvalError> {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Initial,
    Selected,
}

/// One evaluated design. `x` is raw, `f` is in the problem's native sense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub x: Vec<f64>,
    pub f: f64,
    pub c: Vec<f64>,
    pub tag: Tag,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        is_feasible(&self.c)
    }

    /// Largest constraint value, or `None` without constraints.
    pub fn max_violation(&self) -> Option<f64> {
        self.c.iter().copied().reduce(f64::max)
    }
}

/// `max_i c_i <= 0`; vacuously true without constraints.
pub fn is_feasible(c: &[f64]) -> bool {
    c.iter().all(|v| *v <= 0.0)
}

/// Append-only log of evaluations in evaluation order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    records: Vec<Evaluation>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, e: Evaluation) {
        self.records.push(e);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Evaluation] {
        &self.records
    }

    pub fn iter(&self) -> impl Iterator<Item = &Evaluation> {
        self.records.iter()
    }

    /// Feasible record with the smallest internal objective.
    pub fn best_feasible(&self, sense: Sense) -> Option<&Evaluation> {
        best_feasible(&self.records, sense)
    }
}

pub fn best_feasible(records: &[Evaluation], sense: Sense) -> Option<&Evaluation> {
    records
        .iter()
        .filter(|e| e.is_feasible())
        .min_by(|a, b| sense.to_internal(a.f).total_cmp(&sense.to_internal(b.f)))
}

/// Latin hypercube sample of `n` points inside `space`.
///
/// Along every axis each of the `n` equal-width strata holds exactly one point.
pub fn latin_hypercube(space: &SearchSpace, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "latin hypercube needs at least one point".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = space.dim();
    let mut unit = vec![vec![0.0; d]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..d {
        strata.shuffle(&mut rng);
        for (point, &k) in unit.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            point[j] = (k as f64 + u) / n as f64;
        }
    }
    Ok(unit
        .into_iter()
        .map(|u| {
            // keep the raw point inside its stratum despite rounding in from_unit
            let raw = space.from_unit(&u);
            raw.into_iter()
                .enumerate()
                .map(|(j, v)| v.clamp(space.lower()[j], space.upper()[j]))
                .collect()
        })
        .collect())
}
