//! Analytic constrained test problems and brute-force oracles.
//!
//! Besides the three benchmark problems there are two stubs: `linear`
//! (a half-plane constraint with a known boundary optimum) and `sphere`
//! (unconstrained).

use std::f64::consts::PI;

use crate::acquisition::tier1_from;
use crate::acquisition::AcquisitionConfig;
use crate::error::{Error, Result};
use crate::gp::Prediction;
use crate::problem::{is_feasible, EvalError, Evaluator, Outcome, ProblemSpec, SearchSpace, Sense};

/// Evaluation budget and initial sample size a problem is usually run with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Protocol {
    pub budget: usize,
    pub init: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BraninVariant {
    /// `10 (1 - 1/(8 pi)) cos(x1)`, the usual Branin term.
    Canonical,
    /// `10 (1 - 8/pi) cos(x1)`, as the coefficient is sometimes printed.
    Literal,
}

/// One constraint's zero set, traced as `axis_fixed = t` for `t` in
/// `range` and found by bisection along `axis_search` between a feasible
/// and an infeasible end.
struct BoundaryFamily {
    constraint: usize,
    axis_fixed: usize,
    axis_search: usize,
    range: (f64, f64),
    feasible_end: fn(f64) -> f64,
    infeasible_end: fn(f64) -> f64,
}

pub struct BenchmarkProblem {
    pub spec: ProblemSpec,
    pub reference: Option<Protocol>,
    func: fn(&[f64]) -> Outcome,
    boundary: Option<BoundaryFamily>,
}

impl std::fmt::Debug for BenchmarkProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BenchmarkProblem")
            .field("spec", &self.spec)
            .field("reference", &self.reference)
            .finish()
    }
}

const DOMAIN_SLACK: f64 = 1e-9;

impl BenchmarkProblem {
    pub fn name(&self) -> &str {
        &self.spec.name
    }

    /// Closed-form evaluation; rejects points outside the domain.
    pub fn evaluate(&self, x: &[f64]) -> Result<Outcome> {
        let s = &self.spec.space;
        if x.len() != s.dim() {
            return Err(Error::DimensionMismatch { expected: s.dim(), got: x.len() });
        }
        let inside = x.iter().enumerate().all(|(j, v)| {
            let slack = DOMAIN_SLACK * (s.upper()[j] - s.lower()[j]);
            *v >= s.lower()[j] - slack && *v <= s.upper()[j] + slack
        });
        if !inside {
            return Err(Error::OutOfDomain { problem: self.spec.name.clone(), point: x.to_vec() });
        }
        Ok((self.func)(x))
    }

    pub fn evaluator(&self) -> BenchEvaluator<'_> {
        BenchEvaluator { problem: self }
    }
}

pub struct BenchEvaluator<'a> {
    problem: &'a BenchmarkProblem,
}

impl Evaluator for BenchEvaluator<'_> {
    fn evaluate(&mut self, x: &[f64]) -> std::result::Result<Outcome, EvalError> {
        Ok(self.problem.evaluate(x)?)
    }
}

fn tf1_raw(x: &[f64]) -> Outcome {
    let (a, b) = (x[0], x[1]);
    Outcome {
        f: (2.0 * a).cos() * b.cos() + a.sin(),
        c: vec![a.cos() * b.cos() - a.sin() * b.sin() - 0.5],
    }
}

fn tf2_raw(x: &[f64]) -> Outcome {
    let (a, b) = (x[0], x[1]);
    Outcome {
        f: (a - 1.0).powi(2) + (b - 0.5).powi(2),
        c: vec![
            ((a - 3.0).powi(2) + (b + 2.0).powi(2)) * (-b.powi(7)).exp() - 12.0,
            10.0 * a + b - 7.0,
            (a - 0.5).powi(2) + (b - 0.5).powi(2) - 0.2,
        ],
    }
}

fn branin_valley(x1: f64) -> f64 {
    5.1 / (4.0 * PI * PI) * x1 * x1 - 5.0 / PI * x1 + 6.0
}

fn branin_with(x: &[f64], coefficient: f64) -> Outcome {
    let (a, b) = (x[0], x[1]);
    Outcome {
        f: (a - 10.0).powi(2) + (b - 15.0).powi(2),
        c: vec![(b - branin_valley(a)).powi(2) + coefficient * a.cos() + 5.0],
    }
}

pub fn branin_coefficient(variant: BraninVariant) -> f64 {
    match variant {
        BraninVariant::Canonical => 10.0 * (1.0 - 1.0 / (8.0 * PI)),
        BraninVariant::Literal => 10.0 * (1.0 - 8.0 / PI),
    }
}

fn branin_canonical_raw(x: &[f64]) -> Outcome {
    branin_with(x, branin_coefficient(BraninVariant::Canonical))
}

fn branin_literal_raw(x: &[f64]) -> Outcome {
    branin_with(x, branin_coefficient(BraninVariant::Literal))
}

fn linear_raw(x: &[f64]) -> Outcome {
    Outcome { f: (x[0] - 0.8).powi(2) + (x[1] - 0.3).powi(2), c: vec![x[0] - 0.5] }
}

fn sphere_raw(x: &[f64]) -> Outcome {
    Outcome { f: x.iter().map(|v| v * v).sum(), c: vec![] }
}

/// Minimize `cos(2 x1) cos(x2) + sin(x1)` s.t. `cos(x1 + x2) <= 0.5`, on `[0, 6]^2`.
pub fn tf1(x: &[f64]) -> Result<Outcome> {
    problem("tf1")?.evaluate(x)
}

/// Maximize `(x1 - 1)^2 + (x2 - 0.5)^2` under three constraints, on `[0, 1]^2`.
pub fn tf2(x: &[f64]) -> Result<Outcome> {
    problem("tf2")?.evaluate(x)
}

/// Maximize `(x1 - 10)^2 + (x2 - 15)^2` s.t. a Branin-shaped constraint,
/// on `[-5, 10] x [0, 15]`.
pub fn branin_c(x: &[f64], variant: BraninVariant) -> Result<Outcome> {
    let name = match variant {
        BraninVariant::Canonical => "branin",
        BraninVariant::Literal => "branin-literal",
    };
    problem(name)?.evaluate(x)
}

pub const PROBLEM_NAMES: &[&str] = &["tf1", "tf2", "branin", "branin-literal", "linear", "sphere"];

fn spec(name: &str, lower: Vec<f64>, upper: Vec<f64>, c: usize, sense: Sense) -> ProblemSpec {
    ProblemSpec {
        name: name.to_string(),
        space: SearchSpace::new(lower, upper).expect("static bounds are valid"),
        num_constraints: c,
        sense,
    }
}

/// Looks up a registered problem by name.
pub fn problem(name: &str) -> Result<BenchmarkProblem> {
    let p = match name {
        "tf1" => BenchmarkProblem {
            spec: spec(name, vec![0.0, 0.0], vec![6.0, 6.0], 1, Sense::Minimize),
            reference: Some(Protocol { budget: 50, init: 10 }),
            func: tf1_raw,
            boundary: Some(BoundaryFamily {
                constraint: 0,
                axis_fixed: 1,
                axis_search: 0,
                range: (0.0, 1.0),
                feasible_end: |t| PI - t,
                infeasible_end: |_| 0.0,
            }),
        },
        "tf2" => BenchmarkProblem {
            spec: spec(name, vec![0.0, 0.0], vec![1.0, 1.0], 3, Sense::Maximize),
            reference: Some(Protocol { budget: 160, init: 30 }),
            func: tf2_raw,
            boundary: Some(BoundaryFamily {
                constraint: 1,
                axis_fixed: 1,
                axis_search: 0,
                range: (0.05, 0.95),
                feasible_end: |_| 0.6,
                infeasible_end: |_| 1.0,
            }),
        },
        "branin" => BenchmarkProblem {
            spec: spec(name, vec![-5.0, 0.0], vec![10.0, 15.0], 1, Sense::Maximize),
            reference: Some(Protocol { budget: 200, init: 30 }),
            func: branin_canonical_raw,
            boundary: Some(BoundaryFamily {
                constraint: 0,
                axis_fixed: 0,
                axis_search: 1,
                range: (2.6, 3.7),
                feasible_end: branin_valley,
                infeasible_end: |_| 15.0,
            }),
        },
        "branin-literal" => BenchmarkProblem {
            spec: spec(name, vec![-5.0, 0.0], vec![10.0, 15.0], 1, Sense::Maximize),
            reference: Some(Protocol { budget: 200, init: 30 }),
            func: branin_literal_raw,
            boundary: Some(BoundaryFamily {
                constraint: 0,
                axis_fixed: 0,
                axis_search: 1,
                range: (-1.0, 1.0),
                feasible_end: branin_valley,
                infeasible_end: |_| 15.0,
            }),
        },
        "linear" => BenchmarkProblem {
            spec: spec(name, vec![0.0, 0.0], vec![1.0, 1.0], 1, Sense::Minimize),
            reference: Some(Protocol { budget: 50, init: 10 }),
            func: linear_raw,
            boundary: Some(BoundaryFamily {
                constraint: 0,
                axis_fixed: 1,
                axis_search: 0,
                range: (0.0, 1.0),
                feasible_end: |_| 0.0,
                infeasible_end: |_| 1.0,
            }),
        },
        "sphere" => BenchmarkProblem {
            spec: spec(name, vec![-5.0, -5.0], vec![5.0, 5.0], 0, Sense::Minimize),
            reference: None,
            func: sphere_raw,
            boundary: None,
        },
        other => return Err(Error::UnknownName(other.to_string())),
    };
    Ok(p)
}

/// Regular `resolution x resolution` grid over a 2-D space, `x1` major.
pub fn grid_points(space: &SearchSpace, resolution: usize) -> Result<Vec<Vec<f64>>> {
    if space.dim() != 2 {
        return Err(Error::Precondition("grid oracles need a 2-D problem".into()));
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!("grid resolution {resolution} is below 2")));
    }
    let axis = |j: usize, k: usize| {
        let (lo, hi) = (space.lower()[j], space.upper()[j]);
        if k + 1 == resolution {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (resolution - 1) as f64
        }
    };
    let mut pts = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        for k in 0..resolution {
            pts.push(vec![axis(0, i), axis(1, k)]);
        }
    }
    Ok(pts)
}

#[derive(Debug, Clone)]
pub struct GridOracle {
    pub resolution: usize,
    /// Feasibility of every grid point in [`grid_points`] order.
    pub mask: Vec<bool>,
    /// Best feasible point and its native objective value.
    pub best: Option<(Vec<f64>, f64)>,
}

impl GridOracle {
    pub fn feasible_fraction(&self) -> f64 {
        self.mask.iter().filter(|m| **m).count() as f64 / self.mask.len() as f64
    }

    pub fn best_value(&self) -> Option<f64> {
        self.best.as_ref().map(|(_, v)| *v)
    }
}

/// Exhaustive evaluation on a regular grid.
pub fn feasible_grid_oracle(p: &BenchmarkProblem, resolution: usize) -> Result<GridOracle> {
    let pts = grid_points(&p.spec.space, resolution)?;
    let sense = p.spec.sense;
    let mut mask = Vec::with_capacity(pts.len());
    let mut best: Option<(Vec<f64>, f64)> = None;
    for x in pts {
        let o = p.evaluate(&x)?;
        let ok = is_feasible(&o.c);
        mask.push(ok);
        if ok && best.as_ref().is_none_or(|(_, b)| sense.better(o.f, *b)) {
            best = Some((x, o.f));
        }
    }
    Ok(GridOracle { resolution, mask, best })
}

/// Bisection between a feasible and an infeasible parameter value; returns
/// the feasible-side end once the bracket stops shrinking.
fn bisect(g: impl Fn(f64) -> f64, mut feasible: f64, mut infeasible: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (feasible + infeasible);
        if mid == feasible || mid == infeasible {
            break;
        }
        if g(mid) <= 0.0 {
            feasible = mid;
        } else {
            infeasible = mid;
        }
    }
    feasible
}

/// Up to `count` feasible points lying on one constraint's zero set (to
/// within floating-point resolution).
pub fn boundary_points(p: &BenchmarkProblem, count: usize) -> Result<Vec<Vec<f64>>> {
    let fam = p.boundary.as_ref().ok_or_else(|| {
        Error::Precondition(format!("{} has no constraint boundary", p.spec.name))
    })?;
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let t = if count == 1 {
            0.5 * (fam.range.0 + fam.range.1)
        } else {
            fam.range.0 + (fam.range.1 - fam.range.0) * k as f64 / (count - 1) as f64
        };
        let point_at = |s: f64| {
            let mut x = vec![0.0; 2];
            x[fam.axis_fixed] = t;
            x[fam.axis_search] = s;
            x
        };
        let ci = |s: f64| (p.func)(&point_at(s)).c[fam.constraint];
        let s = bisect(ci, (fam.feasible_end)(t), (fam.infeasible_end)(t));
        let x = point_at(s);
        if p.spec.space.contains(&x) && is_feasible(&(p.func)(&x).c) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Regular grid plus `extra` analytic boundary points.
pub fn boundary_augmented_grid(
    p: &BenchmarkProblem,
    resolution: usize,
    extra: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut pts = grid_points(&p.spec.space, resolution)?;
    pts.extend(boundary_points(p, extra)?);
    Ok(pts)
}

/// A point counts as lying on a boundary when its smallest |c_i| is below this.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Tier-1 vector with the exact constraint values standing in for the
/// surrogate means and no exploration shift.
pub fn exact_tier1(c: &[f64]) -> Result<[f64; 2]> {
    let preds: Vec<Prediction> = c.iter().map(|v| Prediction { mean: *v, std: 0.0 }).collect();
    let cfg = AcquisitionConfig { alpha: 0.0, ..Default::default() };
    tier1_from(&preds, &cfg)
}

/// For each query, whether some reference point Pareto-dominates it (2-D,
/// minimization). Sort-and-sweep, `O((n + m) log m)`.
pub fn dominated_by_any(queries: &[[f64; 2]], reference: &[[f64; 2]]) -> Vec<bool> {
    let mut refs: Vec<[f64; 2]> = reference.to_vec();
    refs.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut prefix_min = Vec::with_capacity(refs.len());
    let mut m = f64::INFINITY;
    for r in &refs {
        m = m.min(r[1]);
        prefix_min.push(m);
    }
    queries
        .iter()
        .map(|q| {
            // refs strictly better in the first objective
            let lt = refs.partition_point(|r| r[0] < q[0]);
            if lt > 0 && prefix_min[lt - 1] <= q[1] {
                return true;
            }
            // equal first objective: the group is sorted, its head has the smallest second
            refs.get(lt).is_some_and(|r| r[0] == q[0] && r[1] < q[1])
        })
        .collect()
}

/// Checks, on a finite point set, that with exact constraint values the
/// tier-1 Pareto set is exactly the feasible set: (a) no feasible point is
/// dominated by any point, and (b) every infeasible point is dominated by
/// some feasible point.
///
/// The set must contain a feasible point on a constraint boundary, otherwise
/// (b) need not hold and the check is refused.
pub fn theorem1_check(p: &BenchmarkProblem, grid: &[Vec<f64>]) -> Result<bool> {
    if p.spec.num_constraints == 0 {
        return Err(Error::NoConstraints("tier-1 check"));
    }
    let mut all = Vec::with_capacity(grid.len());
    let mut feasible = Vec::new();
    let mut infeasible = Vec::new();
    let mut has_boundary = false;
    for x in grid {
        let o = p.evaluate(x)?;
        let f1 = exact_tier1(&o.c)?;
        all.push(f1);
        if is_feasible(&o.c) {
            has_boundary |= f1[1] <= BOUNDARY_TOL;
            feasible.push(f1);
        } else {
            infeasible.push(f1);
        }
    }
    if !has_boundary {
        return Err(Error::Precondition(
            "point set has no feasible point on a constraint boundary".into(),
        ));
    }
    let part_a = dominated_by_any(&feasible, &all).iter().all(|d| !d);
    let part_b = dominated_by_any(&infeasible, &feasible).iter().all(|d| *d);
    Ok(part_a && part_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tf1_examples() {
        let o = tf1(&[0.0, 0.0]).unwrap();
        assert_eq!(o.f, 1.0);
        assert_relative_eq!(o.c[0], 0.5, epsilon = 1e-15);
        let o = tf1(&[PI / 3.0, 0.0]).unwrap();
        assert!(o.c[0].abs() < 1e-15);
        assert!(tf1(&[6.5, 0.0]).is_err());
    }

    #[test]
    fn tf2_examples() {
        let o = tf2(&[0.5, 0.5]).unwrap();
        assert_relative_eq!(o.f, 0.25, epsilon = 1e-15);
        assert_relative_eq!(o.c[2], -0.2, epsilon = 1e-15);
        let o = tf2(&[1.0, 1.0]).unwrap();
        assert_eq!(o.c[1], 4.0);
        assert!(tf2(&[-0.1, 0.5]).is_err());
    }

    #[test]
    fn branin_examples() {
        let o = branin_c(&[-5.0, 15.0], BraninVariant::Canonical).unwrap();
        assert_eq!(o.f, 225.0);
        // near the third Branin minimizer the canonical Branin value is 0.397887,
        // so the constraint sits at about 0.397887 - 5
        let o = branin_c(&[9.42478, 2.475], BraninVariant::Canonical).unwrap();
        assert_relative_eq!(o.c[0], 0.397887 - 5.0, epsilon = 1e-5);
        assert!(o.c[0] < 0.0);
        assert!(branin_c(&[0.0, 16.0], BraninVariant::Literal).is_err());
        assert_relative_eq!(branin_coefficient(BraninVariant::Canonical), 9.602112642270262, epsilon = 1e-12);
    }

    #[test]
    fn unknown_problem() {
        assert!(matches!(problem("nope"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn oracle_rejects_tiny_resolution() {
        assert!(feasible_grid_oracle(&problem("tf2").unwrap(), 1).is_err());
    }

    #[test]
    fn oracle_corners_of_tf2() {
        let p = problem("tf2").unwrap();
        let g = feasible_grid_oracle(&p, 2).unwrap();
        assert_eq!(g.mask.len(), 4);
        let expected: Vec<bool> = grid_points(&p.spec.space, 2)
            .unwrap()
            .iter()
            .map(|x| is_feasible(&p.evaluate(x).unwrap().c))
            .collect();
        assert_eq!(g.mask, expected);
    }

    #[test]
    fn oracle_unconstrained_is_all_feasible() {
        let g = feasible_grid_oracle(&problem("sphere").unwrap(), 21).unwrap();
        assert!(g.mask.iter().all(|m| *m));
        assert_eq!(g.best_value(), Some(0.0));
    }

    #[test]
    fn boundary_points_sit_on_the_boundary() {
        for name in ["tf1", "tf2", "branin", "branin-literal", "linear"] {
            let p = problem(name).unwrap();
            let pts = boundary_points(&p, 100).unwrap();
            assert!(pts.len() >= 50, "{name}: {}", pts.len());
            for x in &pts {
                let c = p.evaluate(x).unwrap().c;
                assert!(is_feasible(&c));
                let tier = exact_tier1(&c).unwrap();
                assert!(tier[1] <= BOUNDARY_TOL, "{name}: {x:?} {c:?}");
            }
        }
    }

    fn brute_dominated(queries: &[[f64; 2]], reference: &[[f64; 2]]) -> Vec<bool> {
        queries
            .iter()
            .map(|q| reference.iter().any(|r| crate::dominance::dominates(r, q)))
            .collect()
    }

    #[test]
    fn sweep_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            // coarse integer values force plenty of ties
            let mut pt = || [rng.random_range(0..6) as f64, rng.random_range(0..6) as f64];
            let q: Vec<[f64; 2]> = (0..40).map(|_| pt()).collect();
            let r: Vec<[f64; 2]> = (0..30).map(|_| pt()).collect();
            assert_eq!(dominated_by_any(&q, &r), brute_dominated(&q, &r));
        }
    }

    #[test]
    fn theorem1_on_linear_line() {
        let p = problem("linear").unwrap();
        let grid: Vec<Vec<f64>> = (0..=10).map(|i| vec![i as f64 / 10.0, 0.5]).collect();
        assert!(theorem1_check(&p, &grid).unwrap());

        let without: Vec<Vec<f64>> = grid.into_iter().filter(|x| x[0] != 0.5).collect();
        assert!(matches!(theorem1_check(&p, &without), Err(Error::Precondition(_))));
    }

    #[test]
    fn theorem1_needs_constraints() {
        let p = problem("sphere").unwrap();
        assert!(theorem1_check(&p, &[vec![0.0, 0.0]]).is_err());
    }
}
