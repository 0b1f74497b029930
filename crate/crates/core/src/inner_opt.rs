//! Particle swarm over the acquisition landscape, driven by the combined
//! two-tier rank.
//!
//! Each iteration scores every particle, ranks the swarm, merges its best
//! combined-rank members into an external archive, updates personal bests by
//! joint re-ranking, and moves the particles towards a personal best and a
//! leader drawn uniformly from the archive.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::acquisition::{self, AcquisitionConfig, SurrogateBundle};
use crate::dominance::{self, combined_compare, Preference, ScoredCandidate};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InnerOptConfig {
    pub population_size: usize,
    pub max_iterations: usize,
    pub inertia: f64,
    pub cognitive_coef: f64,
    pub social_coef: f64,
    /// Per-particle probability of resampling one coordinate; `None` means `1/d`.
    pub mutation_prob: Option<f64>,
    pub max_velocity: f64,
    pub archive_capacity: usize,
    pub dedup_tol: f64,
    pub seed: u64,
}

impl Default for InnerOptConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            max_iterations: 100,
            inertia: 0.729,
            cognitive_coef: 1.49445,
            social_coef: 1.49445,
            mutation_prob: None,
            max_velocity: 0.2,
            archive_capacity: 100,
            dedup_tol: 1e-9,
            seed: 0,
        }
    }
}

impl InnerOptConfig {
    pub fn validate(&self) -> Result<()> {
        let coefs = [self.inertia, self.cognitive_coef, self.social_coef, self.max_velocity];
        if self.population_size < 2
            || self.max_iterations < 1
            || self.archive_capacity < 1
            || coefs.iter().any(|c| !(*c >= 0.0))
            || self.mutation_prob.is_some_and(|p| !(0.0..=1.0).contains(&p))
        {
            return Err(Error::InvalidArgument(format!("invalid inner optimizer config {self:?}")));
        }
        Ok(())
    }
}

/// Maps a unit-hypercube point to its tier-1 and tier-2 objective vectors
/// (both minimized). An empty tier-1 vector gives single-level ranking.
pub trait CandidateScorer {
    fn score(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)>;
}

/// `F1 = [f_cv1, f_cv2]`, `F2 = [LCB, -PI, -EI]`.
pub struct TieredScorer<'a> {
    pub bundle: &'a SurrogateBundle,
    pub acq: AcquisitionConfig,
}

impl CandidateScorer for TieredScorer<'_> {
    fn score(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let p = self.bundle.predict(x);
        let f1 = acquisition::tier1_from(&p.constraints, &self.acq)?;
        let f2 = acquisition::tier2_from(&p.objective, &self.acq);
        Ok((f1.to_vec(), f2.to_vec()))
    }
}

/// Single-level ensemble `[LCB, -EI*PF, -PI*PF]`.
pub struct EnsembleScorer<'a> {
    pub bundle: &'a SurrogateBundle,
    pub acq: AcquisitionConfig,
}

impl CandidateScorer for EnsembleScorer<'_> {
    fn score(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let p = self.bundle.predict(x);
        let (mu, sigma) = (p.objective.mean, p.objective.std);
        let pf = acquisition::pf_from(&p.constraints);
        let f2 = vec![
            acquisition::lcb(mu, sigma, &self.acq),
            -acquisition::ei(mu, sigma, &self.acq) * pf,
            -acquisition::pi(mu, sigma, &self.acq) * pf,
        ];
        Ok((Vec::new(), f2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Improvement {
    Expected,
    Probability,
}

/// Scalar `-(EI * PF)` or `-(PI * PF)`.
pub struct FeasibilityWeightedScorer<'a> {
    pub bundle: &'a SurrogateBundle,
    pub acq: AcquisitionConfig,
    pub kind: Improvement,
}

impl CandidateScorer for FeasibilityWeightedScorer<'_> {
    fn score(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let p = self.bundle.predict(x);
        let (mu, sigma) = (p.objective.mean, p.objective.std);
        let gain = match self.kind {
            Improvement::Expected => acquisition::ei(mu, sigma, &self.acq),
            Improvement::Probability => acquisition::pi(mu, sigma, &self.acq),
        };
        Ok((Vec::new(), vec![-(gain * acquisition::pf_from(&p.constraints))]))
    }
}

fn score_at<S: CandidateScorer + ?Sized>(scorer: &S, x: Vec<f64>) -> Result<ScoredCandidate> {
    let (f1, f2) = scorer.score(&x)?;
    if f1.iter().chain(&f2).any(|v| v.is_nan()) {
        return Err(Error::NonFinite("acquisition value"));
    }
    Ok(ScoredCandidate::new(x, f1, f2))
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

struct Archive {
    members: Vec<ScoredCandidate>,
    capacity: usize,
    tol: f64,
}

impl Archive {
    /// Adds population members that hold combined rank 1 in their own
    /// population; the oldest entries go first once over capacity.
    fn merge(&mut self, incoming: impl IntoIterator<Item = ScoredCandidate>) {
        for c in incoming {
            if self.members.iter().all(|m| distance(&m.x, &c.x) > self.tol) {
                self.members.push(c);
            }
        }
        if self.members.len() > self.capacity {
            let excess = self.members.len() - self.capacity;
            self.members.drain(..excess);
        }
    }
}

/// Runs the swarm and returns the final archive of best combined-rank candidates.
pub fn optimize<S: CandidateScorer + ?Sized>(
    scorer: &S,
    dim: usize,
    cfg: &InnerOptConfig,
) -> Result<Vec<ScoredCandidate>> {
    cfg.validate()?;
    if dim == 0 {
        return Err(Error::InvalidArgument("zero-dimensional search".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.population_size;
    let mutation_prob = cfg.mutation_prob.unwrap_or(1.0 / dim as f64);

    let mut pop = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        pop.push(score_at(scorer, x)?);
    }
    let mut velocity = vec![vec![0.0; dim]; n];
    let mut pbest = pop.clone();
    let mut archive = Archive { members: Vec::new(), capacity: cfg.archive_capacity, tol: cfg.dedup_tol };

    for it in 0..cfg.max_iterations {
        if it > 0 {
            for i in 0..n {
                let leader = &archive.members[rng.random_range(0..archive.members.len())];
                let mut x = pop[i].x.clone();
                for j in 0..dim {
                    let r1: f64 = rng.random();
                    let r2: f64 = rng.random();
                    let v = cfg.inertia * velocity[i][j]
                        + cfg.cognitive_coef * r1 * (pbest[i].x[j] - x[j])
                        + cfg.social_coef * r2 * (leader.x[j] - x[j]);
                    velocity[i][j] = v.clamp(-cfg.max_velocity, cfg.max_velocity);
                    x[j] += velocity[i][j];
                    if !(0.0..=1.0).contains(&x[j]) {
                        x[j] = x[j].clamp(0.0, 1.0);
                        velocity[i][j] = 0.0;
                    }
                }
                if rng.random::<f64>() < mutation_prob {
                    let j = rng.random_range(0..dim);
                    x[j] = rng.random();
                }
                pop[i] = score_at(scorer, x)?;
            }
        }

        let ranks = dominance::multi_dominance_rank(&mut pop)?;
        archive.merge(dominance::best_indices(&ranks).into_iter().map(|i| pop[i].clone()));

        // bests are population-relative, so re-rank them together with the swarm
        let mut joint: Vec<ScoredCandidate> = pop.iter().chain(&pbest).cloned().collect();
        dominance::multi_dominance_rank(&mut joint)?;
        for i in 0..n {
            let replace = match combined_compare(&joint[i], &joint[n + i]) {
                Preference::ABetter => true,
                Preference::Equivalent => rng.random::<bool>(),
                Preference::BBetter => false,
            };
            if replace {
                pbest[i] = pop[i].clone();
            }
        }
    }
    Ok(archive.members)
}

/// Two-tier search used by the tiered algorithm.
pub fn optimize_acquisitions(
    bundle: &SurrogateBundle,
    dim: usize,
    cfg: &InnerOptConfig,
    acq: &AcquisitionConfig,
) -> Result<Vec<ScoredCandidate>> {
    if bundle.num_constraints() == 0 {
        return Err(Error::NoConstraints("tiered acquisition"));
    }
    acq.validate()?;
    optimize(&TieredScorer { bundle, acq: *acq }, dim, cfg)
}

const DUPLICATE_RADIUS: f64 = 1e-6;
const PERTURB_STD: f64 = 0.01;

/// Uniform random archive member not within 1e-6 of an evaluated point;
/// falls back to a Gaussian perturbation of a random member.
pub fn pick_candidate<R: Rng + ?Sized>(
    archive: &[ScoredCandidate],
    evaluated: &[Vec<f64>],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if archive.is_empty() {
        return Err(Error::InvalidArgument("cannot pick from an empty archive".into()));
    }
    let fresh = |x: &[f64], r: f64| evaluated.iter().all(|e| distance(e, x) > r);
    let mut order: Vec<usize> = (0..archive.len()).collect();
    order.shuffle(rng);
    if let Some(&i) = order.iter().find(|&&i| fresh(&archive[i].x, DUPLICATE_RADIUS)) {
        return Ok(archive[i].x.clone());
    }
    let noise = Normal::new(0.0, PERTURB_STD).expect("valid normal");
    let base = &archive[rng.random_range(0..archive.len())].x;
    loop {
        let x: Vec<f64> = base
            .iter()
            .map(|v| (v + noise.sample(rng)).clamp(0.0, 1.0))
            .collect();
        if fresh(&x, 0.0) {
            return Ok(x);
        }
    }
}
