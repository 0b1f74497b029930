//! Outer optimization loop for the tiered algorithm and the four baselines.
//!
//! All algorithms share the Latin hypercube initialization and the same
//! budget accounting: a finished run holds exactly `total_budget`
//! evaluations, the first `initial_samples` of them tagged
//! [`Tag::Initial`].

use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acquisition::{AcquisitionConfig, SurrogateBundle};
use crate::error::Error;
use crate::gp::{self, FitConfig, KernelParams};
use crate::inner_opt::{
    self, CandidateScorer, EnsembleScorer, FeasibilityWeightedScorer, Improvement, InnerOptConfig,
    TieredScorer,
};
use crate::problem::{
    is_feasible, latin_hypercube, Dataset, Evaluation, Evaluator, ProblemSpec, SearchSpace, Sense,
    Tag,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pso,
    Pipf,
    Eipf,
    Mace,
    Trace,
}

impl Algorithm {
    /// In comparison-table row order.
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Pso, Algorithm::Pipf, Algorithm::Eipf, Algorithm::Mace, Algorithm::Trace];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Trace => "trace",
            Algorithm::Mace => "mace",
            Algorithm::Eipf => "eipf",
            Algorithm::Pipf => "pipf",
            Algorithm::Pso => "pso",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Trace => "TRACE",
            Algorithm::Mace => "MACE",
            Algorithm::Eipf => "EIPF",
            Algorithm::Pipf => "PIPF",
            Algorithm::Pso => "PSO",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

/// Static penalty weight of the direct swarm baseline.
pub const PSO_PENALTY: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub initial_samples: usize,
    pub total_budget: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub inner: InnerOptConfig,
    pub acq: AcquisitionConfig,
    pub fit: FitConfig,
    /// Random restarts once a previous fit is available as warm start.
    #[serde(default = "default_refit_restarts")]
    pub refit_restarts: usize,
}

fn default_refit_restarts() -> usize {
    2
}

impl EngineConfig {
    pub fn new(algorithm: Algorithm, initial_samples: usize, total_budget: usize, seed: u64) -> Self {
        Self {
            initial_samples,
            total_budget,
            algorithm,
            seed,
            inner: InnerOptConfig::default(),
            acq: AcquisitionConfig::default(),
            fit: FitConfig::default(),
            refit_restarts: default_refit_restarts(),
        }
    }

    fn validate(&self, problem: &ProblemSpec) -> Result<(), Error> {
        if self.initial_samples < 1 || self.initial_samples > self.total_budget {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= initial samples ({}) <= budget ({})",
                self.initial_samples, self.total_budget
            )));
        }
        if self.algorithm == Algorithm::Trace && problem.num_constraints == 0 {
            return Err(Error::NoConstraints("trace"));
        }
        self.inner.validate()?;
        self.acq.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based evaluation index.
    pub index: usize,
    /// Raw coordinates.
    pub x: Vec<f64>,
    /// Native-sense objective.
    pub f: f64,
    pub c: Vec<f64>,
    pub feasible: bool,
    /// Best feasible native objective among evaluations `1..=index`.
    pub best_feasible: Option<f64>,
    pub tag: Tag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub best: Option<f64>,
    /// Worst feasible native objective seen during the run.
    pub worst: Option<f64>,
    pub cv_percent: f64,
    /// False when the run made no post-initialization evaluation.
    pub cv_defined: bool,
    pub selected: usize,
    pub infeasible_selected: usize,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub sense: Sense,
    pub iterations: Vec<IterationRecord>,
    pub summary: RunSummary,
    pub final_dataset: Dataset,
}

impl RunRecord {
    /// Incumbent trace (native sense), one entry per evaluation.
    pub fn incumbent_trace(&self) -> Vec<Option<f64>> {
        self.iterations.iter().map(|it| it.best_feasible).collect()
    }
}

/// A run that stopped early; `partial` holds everything evaluated so far.
#[derive(Debug, Error)]
#[error("{algorithm} run aborted after {} evaluations: {source}", partial.iterations.len())]
pub struct RunError {
    pub algorithm: Algorithm,
    pub partial: Box<RunRecord>,
    #[source]
    pub source: Error,
}

struct RunState<'a> {
    problem: &'a ProblemSpec,
    algorithm: Algorithm,
    seed: u64,
    started: Instant,
    dataset: Dataset,
    iterations: Vec<IterationRecord>,
    unit_inputs: Vec<Vec<f64>>,
}

impl<'a> RunState<'a> {
    fn new(problem: &'a ProblemSpec, cfg: &EngineConfig) -> Self {
        Self {
            problem,
            algorithm: cfg.algorithm,
            seed: cfg.seed,
            started: Instant::now(),
            dataset: Dataset::new(),
            iterations: Vec::new(),
            unit_inputs: Vec::new(),
        }
    }

    fn space(&self) -> &SearchSpace {
        &self.problem.space
    }

    fn sense(&self) -> Sense {
        self.problem.sense
    }

    /// Evaluates a unit-hypercube point and logs it.
    fn evaluate<E: Evaluator + ?Sized>(
        &mut self,
        eval: &mut E,
        unit: Vec<f64>,
        tag: Tag,
    ) -> Result<&Evaluation, Error> {
        let unit: Vec<f64> = unit.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let space = self.space();
        let raw: Vec<f64> = space
            .from_unit(&unit)
            .into_iter()
            .enumerate()
            .map(|(j, v)| v.clamp(space.lower()[j], space.upper()[j]))
            .collect();
        let index = self.dataset.len() + 1;
        let out = eval
            .evaluate(&raw)
            .map_err(|source| Error::Evaluation { index, source })?;
        if out.c.len() != self.problem.num_constraints {
            return Err(Error::ConstraintCount {
                expected: self.problem.num_constraints,
                got: out.c.len(),
            });
        }
        if !out.f.is_finite() || out.c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("evaluator output"));
        }
        let feasible = is_feasible(&out.c);
        let sense = self.sense();
        let prev = self.iterations.last().and_then(|it| it.best_feasible);
        let best_feasible = match (prev, feasible) {
            (Some(p), true) if sense.better(out.f, p) => Some(out.f),
            (None, true) => Some(out.f),
            (p, _) => p,
        };
        self.iterations.push(IterationRecord {
            index,
            x: raw.clone(),
            f: out.f,
            c: out.c.clone(),
            feasible,
            best_feasible,
            tag,
        });
        self.unit_inputs.push(unit);
        self.dataset.push(Evaluation { x: raw, f: out.f, c: out.c, tag });
        Ok(self.dataset.records().last().expect("just pushed"))
    }

    fn finish(self) -> RunRecord {
        let sense = self.sense();
        let selected: Vec<&IterationRecord> =
            self.iterations.iter().filter(|it| it.tag == Tag::Selected).collect();
        let infeasible = selected.iter().filter(|it| !it.feasible).count();
        let (cv_percent, cv_defined) = if selected.is_empty() {
            (0.0, false)
        } else {
            (100.0 * infeasible as f64 / selected.len() as f64, true)
        };
        let worst = self
            .iterations
            .iter()
            .filter(|it| it.feasible)
            .map(|it| it.f)
            .reduce(|a, b| if sense.better(a, b) { b } else { a });
        RunRecord {
            problem: self.problem.name.clone(),
            algorithm: self.algorithm,
            seed: self.seed,
            sense,
            summary: RunSummary {
                best: self.iterations.last().and_then(|it| it.best_feasible),
                worst,
                cv_percent,
                cv_defined,
                selected: selected.len(),
                infeasible_selected: infeasible,
                wall_time_secs: self.started.elapsed().as_secs_f64(),
            },
            iterations: self.iterations,
            final_dataset: self.dataset,
        }
    }
}

/// Runs `cfg.algorithm` on `problem`, evaluating through `eval`.
pub fn run<E: Evaluator + ?Sized>(
    problem: &ProblemSpec,
    cfg: &EngineConfig,
    eval: &mut E,
) -> Result<RunRecord, RunError> {
    let mut state = RunState::new(problem, cfg);
    match drive(&mut state, cfg, eval) {
        Ok(()) => Ok(state.finish()),
        Err(source) => Err(RunError { algorithm: cfg.algorithm, partial: Box::new(state.finish()), source }),
    }
}

/// Tiered-acquisition run; `cfg.algorithm` is ignored.
pub fn run_trace<E: Evaluator + ?Sized>(
    problem: &ProblemSpec,
    cfg: &EngineConfig,
    eval: &mut E,
) -> Result<RunRecord, RunError> {
    run(problem, &EngineConfig { algorithm: Algorithm::Trace, ..cfg.clone() }, eval)
}

/// One of the comparison algorithms (`mace`, `eipf`, `pipf`, `pso`).
pub fn run_baseline<E: Evaluator + ?Sized>(
    problem: &ProblemSpec,
    cfg: &EngineConfig,
    eval: &mut E,
) -> Result<RunRecord, RunError> {
    if cfg.algorithm == Algorithm::Trace {
        let state = RunState::new(problem, cfg);
        return Err(RunError {
            algorithm: cfg.algorithm,
            partial: Box::new(state.finish()),
            source: Error::InvalidArgument("trace is not a baseline".into()),
        });
    }
    run(problem, cfg, eval)
}

fn drive<E: Evaluator + ?Sized>(
    state: &mut RunState<'_>,
    cfg: &EngineConfig,
    eval: &mut E,
) -> Result<(), Error> {
    cfg.validate(state.problem)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dim = state.problem.dim();
    let init = latin_hypercube(&SearchSpace::unit(dim)?, cfg.initial_samples, rng.next_u64())?;
    for x in init {
        state.evaluate(eval, x, Tag::Initial)?;
    }
    match cfg.algorithm {
        Algorithm::Pso => pso_loop(state, cfg, eval, &mut rng),
        _ => bo_loop(state, cfg, eval, &mut rng),
    }
}

/// Incumbent in minimization form: best feasible objective, or the best
/// objective overall while nothing feasible has been seen.
pub fn incumbent(dataset: &Dataset, sense: Sense) -> Option<f64> {
    let internal = |e: &Evaluation| sense.to_internal(e.f);
    dataset
        .best_feasible(sense)
        .map(internal)
        .or_else(|| dataset.iter().map(internal).reduce(f64::min))
}

/// Fits the objective (minimization form) and every constraint surrogate.
///
/// `warm` holds the previous hyperparameters in the same order as the
/// returned ones (objective first); it may be empty.
pub fn fit_surrogates(
    unit_inputs: &[Vec<f64>],
    dataset: &Dataset,
    sense: Sense,
    fit: &FitConfig,
    warm: &[KernelParams],
) -> Result<(SurrogateBundle, Vec<KernelParams>), Error> {
    let num_c = dataset.records().first().map_or(0, |e| e.c.len());
    let models = (0..=num_c)
        .map(|k| {
            let y: Vec<f64> = match k {
                0 => dataset.iter().map(|e| sense.to_internal(e.f)).collect(),
                _ => dataset.iter().map(|e| e.c[k - 1]).collect(),
            };
            let cfg = FitConfig {
                seed: fit.seed.wrapping_add(k as u64),
                warm_start: warm.get(k).cloned(),
                ..fit.clone()
            };
            gp::fit(unit_inputs, &y, &cfg)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let params = models.iter().map(|m| m.params().clone()).collect();
    let mut models = models.into_iter();
    let objective = models.next().expect("objective model");
    Ok((SurrogateBundle::from_models(objective, models.collect()), params))
}

fn bo_loop<E: Evaluator + ?Sized>(
    state: &mut RunState<'_>,
    cfg: &EngineConfig,
    eval: &mut E,
    rng: &mut ChaCha8Rng,
) -> Result<(), Error> {
    let dim = state.problem.dim();
    let sense = state.sense();
    let mut warm: Vec<KernelParams> = Vec::new();
    for _ in cfg.initial_samples..cfg.total_budget {
        let restarts = if warm.is_empty() { cfg.fit.restarts } else { cfg.refit_restarts };
        let fit = FitConfig { seed: rng.next_u64(), restarts, ..cfg.fit.clone() };
        let inner = InnerOptConfig { seed: rng.next_u64(), ..cfg.inner.clone() };
        let (bundle, params) = fit_surrogates(&state.unit_inputs, &state.dataset, sense, &fit, &warm)?;
        warm = params;
        let tau = incumbent(&state.dataset, sense).expect("initial samples evaluated");
        let acq = cfg.acq.with_tau(tau);
        let scorer: Box<dyn CandidateScorer + '_> = match cfg.algorithm {
            Algorithm::Trace => Box::new(TieredScorer { bundle: &bundle, acq }),
            Algorithm::Mace => Box::new(EnsembleScorer { bundle: &bundle, acq }),
            Algorithm::Eipf => Box::new(FeasibilityWeightedScorer {
                bundle: &bundle,
                acq,
                kind: Improvement::Expected,
            }),
            Algorithm::Pipf => Box::new(FeasibilityWeightedScorer {
                bundle: &bundle,
                acq,
                kind: Improvement::Probability,
            }),
            Algorithm::Pso => unreachable!("handled by pso_loop"),
        };
        let archive = inner_opt::optimize(scorer.as_ref(), dim, &inner)?;
        let x = inner_opt::pick_candidate(&archive, &state.unit_inputs, rng)?;
        state.evaluate(eval, x, Tag::Selected)?;
    }
    Ok(())
}

fn penalized(e: &Evaluation, sense: Sense) -> f64 {
    sense.to_internal(e.f) + PSO_PENALTY * e.c.iter().map(|v| v.max(0.0)).sum::<f64>()
}

/// Direct penalty swarm over the true evaluator; one evaluation per particle move.
fn pso_loop<E: Evaluator + ?Sized>(
    state: &mut RunState<'_>,
    cfg: &EngineConfig,
    eval: &mut E,
    rng: &mut ChaCha8Rng,
) -> Result<(), Error> {
    let dim = state.problem.dim();
    let sense = state.sense();
    let n = cfg.inner.population_size;
    let budget = cfg.total_budget;

    // seed the swarm with the best initial samples
    let mut order: Vec<usize> = (0..state.dataset.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = &state.dataset.records()[a];
        let rb = &state.dataset.records()[b];
        penalized(ra, sense).total_cmp(&penalized(rb, sense))
    });
    let mut pos: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut value: Vec<f64> = Vec::with_capacity(n);
    for &i in order.iter().take(n) {
        pos.push(state.unit_inputs[i].clone());
        value.push(penalized(&state.dataset.records()[i], sense));
    }
    while pos.len() < n && state.dataset.len() < budget {
        let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let v = penalized(state.evaluate(eval, x.clone(), Tag::Selected)?, sense);
        pos.push(x);
        value.push(v);
    }
    let mut pbest = pos.clone();
    let mut pbest_value = value.clone();
    let mut g = 0;
    for i in 1..pos.len() {
        if pbest_value[i] < pbest_value[g] {
            g = i;
        }
    }
    let mut velocity = vec![vec![0.0; dim]; pos.len()];
    let vmax = cfg.inner.max_velocity;
    while state.dataset.len() < budget {
        for i in 0..pos.len() {
            if state.dataset.len() >= budget {
                break;
            }
            for j in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = cfg.inner.inertia * velocity[i][j]
                    + cfg.inner.cognitive_coef * r1 * (pbest[i][j] - pos[i][j])
                    + cfg.inner.social_coef * r2 * (pbest[g][j] - pos[i][j]);
                velocity[i][j] = v.clamp(-vmax, vmax);
                pos[i][j] += velocity[i][j];
                if !(0.0..=1.0).contains(&pos[i][j]) {
                    pos[i][j] = pos[i][j].clamp(0.0, 1.0);
                    velocity[i][j] = 0.0;
                }
            }
            let v = penalized(state.evaluate(eval, pos[i].clone(), Tag::Selected)?, sense);
            if v < pbest_value[i] {
                pbest_value[i] = v;
                pbest[i] = pos[i].clone();
                if v < pbest_value[g] {
                    g = i;
                }
            }
        }
    }
    Ok(())
}

/// Statistics over several runs of one algorithm on one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub best: Option<f64>,
    pub worst: Option<f64>,
    pub mean: Option<f64>,
    /// Sample (n - 1) standard deviation; 0 for a single run.
    pub std: Option<f64>,
    pub cv_percent: f64,
    pub feasible_run_count: usize,
    pub runs: usize,
}

/// Best/worst/mean/std of the per-run best feasible values (native sense,
/// runs without a feasible point excluded) and the mean CV%.
pub fn summarize_runs(records: &[RunRecord]) -> Result<Summary, Error> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidArgument("no runs to summarize".into()))?;
    let sense = first.sense;
    if records.iter().any(|r| r.sense != sense || r.problem != first.problem) {
        return Err(Error::InvalidArgument("runs come from different problems".into()));
    }
    let bests: Vec<f64> = records.iter().filter_map(|r| r.summary.best).collect();
    let (best, worst, mean, std) = if bests.is_empty() {
        (None, None, None, None)
    } else {
        let n = bests.len() as f64;
        let mean = bests.iter().sum::<f64>() / n;
        let std = if bests.len() > 1 {
            (bests.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let pick = |prefer_better: bool| {
            bests
                .iter()
                .copied()
                .reduce(|a, b| if sense.better(b, a) == prefer_better { b } else { a })
        };
        (pick(true), pick(false), Some(mean), Some(std))
    };
    let defined: Vec<f64> = records
        .iter()
        .filter(|r| r.summary.cv_defined)
        .map(|r| r.summary.cv_percent)
        .collect();
    let cv_percent = if defined.is_empty() {
        0.0
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    Ok(Summary {
        best,
        worst,
        mean,
        std,
        cv_percent,
        feasible_run_count: bests.len(),
        runs: records.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;

    fn record(best: Option<f64>, cv: f64, sense: Sense) -> RunRecord {
        RunRecord {
            problem: "p".into(),
            algorithm: Algorithm::Trace,
            seed: 0,
            sense,
            iterations: vec![],
            summary: RunSummary {
                best,
                worst: best,
                cv_percent: cv,
                cv_defined: true,
                selected: 10,
                infeasible_selected: 0,
                wall_time_secs: 0.0,
            },
            final_dataset: Dataset::new(),
        }
    }

    #[test]
    fn algorithm_names_roundtrip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("nsga".parse::<Algorithm>().is_err());
    }

    #[test]
    fn summary_examples() {
        let none = vec![record(None, 100.0, Sense::Maximize); 3];
        let s = summarize_runs(&none).unwrap();
        assert_eq!(s.feasible_run_count, 0);
        assert!(s.best.is_none() && s.mean.is_none() && s.std.is_none());
        assert_eq!(s.cv_percent, 100.0);

        let one = summarize_runs(&[record(Some(0.7), 20.0, Sense::Maximize)]).unwrap();
        assert_eq!((one.best, one.worst, one.mean, one.std), (Some(0.7), Some(0.7), Some(0.7), Some(0.0)));

        let three: Vec<RunRecord> = [1.0, 2.0, 3.0].iter().map(|b| record(Some(*b), 0.0, Sense::Minimize)).collect();
        let s = summarize_runs(&three).unwrap();
        assert_eq!(s.mean, Some(2.0));
        assert_eq!(s.std, Some(1.0));
        assert_eq!(s.best, Some(1.0));
        assert_eq!(s.worst, Some(3.0));

        let three: Vec<RunRecord> = [1.0, 2.0, 3.0].iter().map(|b| record(Some(*b), 0.0, Sense::Maximize)).collect();
        let s = summarize_runs(&three).unwrap();
        assert_eq!((s.best, s.worst), (Some(3.0), Some(1.0)));
    }

    #[test]
    fn summary_excludes_infeasible_runs() {
        let runs = vec![record(Some(1.0), 10.0, Sense::Minimize), record(None, 50.0, Sense::Minimize)];
        let s = summarize_runs(&runs).unwrap();
        assert_eq!(s.feasible_run_count, 1);
        assert_eq!(s.mean, Some(1.0));
        assert_eq!(s.cv_percent, 30.0);
        assert!(summarize_runs(&[]).is_err());
    }

    #[test]
    fn zero_iteration_run() {
        let p = bench::problem("linear").unwrap();
        let cfg = EngineConfig::new(Algorithm::Trace, 8, 8, 1);
        let r = run_trace(&p.spec, &cfg, &mut p.evaluator()).unwrap();
        assert_eq!(r.iterations.len(), 8);
        assert!(r.iterations.iter().all(|it| it.tag == Tag::Initial));
        assert!(!r.summary.cv_defined);
        assert_eq!(r.summary.cv_percent, 0.0);
    }

    #[test]
    fn trace_needs_constraints() {
        let p = bench::problem("sphere").unwrap();
        let cfg = EngineConfig::new(Algorithm::Trace, 5, 10, 1);
        let err = run_trace(&p.spec, &cfg, &mut p.evaluator()).unwrap_err();
        assert!(matches!(err.source, Error::NoConstraints(_)));
    }

    #[test]
    fn rejects_bad_budget() {
        let p = bench::problem("linear").unwrap();
        let cfg = EngineConfig::new(Algorithm::Mace, 0, 10, 1);
        assert!(run(&p.spec, &cfg, &mut p.evaluator()).is_err());
        let cfg = EngineConfig::new(Algorithm::Mace, 11, 10, 1);
        assert!(run(&p.spec, &cfg, &mut p.evaluator()).is_err());
    }

    #[test]
    fn evaluator_failure_keeps_partial_record() {
        let p = bench::problem("linear").unwrap();
        let mut calls = 0;
        let mut eval = |x: &[f64]| {
            calls += 1;
            if calls > 12 {
                return Err("simulator crashed".into());
            }
            Ok(p.evaluate(x)?)
        };
        let cfg = EngineConfig::new(Algorithm::Trace, 10, 20, 3);
        let err = run_trace(&p.spec, &cfg, &mut eval).unwrap_err();
        assert_eq!(err.partial.iterations.len(), 12);
        assert!(matches!(err.source, Error::Evaluation { index: 13, .. }));
    }

    #[test]
    fn wrong_constraint_count_aborts() {
        let p = bench::problem("linear").unwrap();
        let mut eval = |x: &[f64]| {
            let mut o = p.evaluate(x)?;
            o.c.push(0.0);
            Ok(o)
        };
        let cfg = EngineConfig::new(Algorithm::Mace, 3, 5, 3);
        let err = run(&p.spec, &cfg, &mut eval).unwrap_err();
        assert!(matches!(err.source, Error::ConstraintCount { expected: 1, got: 2 }));
    }

    #[test]
    fn incumbent_falls_back_to_best_overall() {
        let mut d = Dataset::new();
        d.push(Evaluation { x: vec![0.0], f: 3.0, c: vec![1.0], tag: Tag::Initial });
        d.push(Evaluation { x: vec![0.0], f: 5.0, c: vec![2.0], tag: Tag::Initial });
        assert_eq!(incumbent(&d, Sense::Minimize), Some(3.0));
        assert_eq!(incumbent(&d, Sense::Maximize), Some(-5.0));
        d.push(Evaluation { x: vec![0.0], f: 4.0, c: vec![-1.0], tag: Tag::Selected });
        assert_eq!(incumbent(&d, Sense::Minimize), Some(4.0));
    }

    #[test]
    fn every_algorithm_fills_budget_with_monotone_incumbent() {
        let p = bench::problem("linear").unwrap();
        for a in Algorithm::ALL {
            let mut cfg = EngineConfig::new(a, 6, 14, 11);
            cfg.inner.max_iterations = 20;
            let r = run(&p.spec, &cfg, &mut p.evaluator()).unwrap();
            assert_eq!(r.final_dataset.len(), 14, "{a}");
            assert_eq!(r.summary.selected, 8, "{a}");
            let trace = r.incumbent_trace();
            for w in trace.windows(2) {
                if let (Some(prev), next) = (w[0], w[1]) {
                    assert!(next.unwrap() <= prev, "{a}");
                }
            }
            assert!(r.iterations.iter().all(|it| p.spec.space.contains(&it.x)));
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let p = bench::problem("tf1").unwrap();
        let mut cfg = EngineConfig::new(Algorithm::Trace, 5, 9, 42);
        cfg.inner.max_iterations = 15;
        let a = run(&p.spec, &cfg, &mut p.evaluator()).unwrap();
        let b = run(&p.spec, &cfg, &mut p.evaluator()).unwrap();
        assert_eq!(a.final_dataset, b.final_dataset);
        cfg.seed = 43;
        let c = run(&p.spec, &cfg, &mut p.evaluator()).unwrap();
        assert_ne!(a.final_dataset, c.final_dataset);
    }

    #[test]
    fn pso_solves_sphere() {
        let p = bench::problem("sphere").unwrap();
        let cfg = EngineConfig::new(Algorithm::Pso, 20, 300, 5);
        let r = run(&p.spec, &cfg, &mut p.evaluator()).unwrap();
        assert_eq!(r.final_dataset.len(), 300);
        assert!(r.summary.best.unwrap() < 1e-2, "{:?}", r.summary.best);
    }

    #[test]
    fn eipf_with_neutral_feasibility_follows_improvement() {
        use crate::acquisition::FnSurrogate;
        use crate::gp::Prediction;
        // objective mean decreasing in x, constraint model certain of feasibility
        let bundle = SurrogateBundle::new(
            Box::new(FnSurrogate(|x: &[f64]| Prediction { mean: 1.0 - x[0], std: 0.1 })),
            vec![Box::new(FnSurrogate(|_: &[f64]| Prediction { mean: -100.0, std: 1e-3 }))],
        );
        let scorer = FeasibilityWeightedScorer {
            bundle: &bundle,
            acq: AcquisitionConfig::default().with_tau(0.5),
            kind: Improvement::Expected,
        };
        let cfg = InnerOptConfig { seed: 3, ..InnerOptConfig::default() };
        let archive = inner_opt::optimize(&scorer, 1, &cfg).unwrap();
        let top = archive.iter().map(|c| c.x[0]).fold(0.0, f64::max);
        assert!(top > 0.99, "{top}");
        let mean = archive.iter().map(|c| c.x[0]).sum::<f64>() / archive.len() as f64;
        assert!(mean > 0.8, "{mean}");
    }
}
