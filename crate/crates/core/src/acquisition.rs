//! Acquisition functions over surrogate predictions.
//!
//! Objective-side functions (LCB, PI, EI) follow the usual minimization
//! forms. The constraint-side pair `f_cv1`/`f_cv2` screens for predicted
//! feasibility, with each constraint mean shifted by `-alpha * sigma`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::gp::{GpModel, Prediction};

/// Below this a predictive standard deviation is treated as zero.
pub const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcquisitionConfig {
    pub beta: f64,
    pub epsilon: f64,
    pub alpha: f64,
    /// Incumbent objective value (minimization form).
    pub tau: f64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self { beta: 0.3, epsilon: 0.001, alpha: 0.2, tau: 0.0 }
    }
}

impl AcquisitionConfig {
    pub fn with_tau(self, tau: f64) -> Self {
        Self { tau, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta >= 0.0 && self.epsilon >= 0.0 && self.alpha >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "beta, epsilon and alpha must be non-negative: {self:?}"
            )))
        }
    }
}

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn lcb(mu: f64, sigma: f64, cfg: &AcquisitionConfig) -> f64 {
    mu - cfg.beta * sigma
}

pub fn pi(mu: f64, sigma: f64, cfg: &AcquisitionConfig) -> f64 {
    let target = cfg.tau - cfg.epsilon;
    if sigma < SIGMA_FLOOR {
        return if mu < target { 1.0 } else { 0.0 };
    }
    norm_cdf((target - mu) / sigma)
}

pub fn ei(mu: f64, sigma: f64, cfg: &AcquisitionConfig) -> f64 {
    let target = cfg.tau - cfg.epsilon;
    if sigma < SIGMA_FLOOR {
        return (target - mu).max(0.0);
    }
    let lambda = (target - mu) / sigma;
    (sigma * (lambda * norm_cdf(lambda) + norm_pdf(lambda))).max(0.0)
}

/// Anything that yields a posterior mean and standard deviation at a
/// unit-hypercube point.
pub trait Surrogate: Send + Sync {
    fn predict(&self, x: &[f64]) -> Prediction;
}

impl Surrogate for GpModel {
    fn predict(&self, x: &[f64]) -> Prediction {
        GpModel::predict(self, x)
    }
}

/// Closure-backed surrogate, used for exact-mean stubs.
pub struct FnSurrogate<F>(pub F);

impl<F> Surrogate for FnSurrogate<F>
where
    F: Fn(&[f64]) -> Prediction + Send + Sync,
{
    fn predict(&self, x: &[f64]) -> Prediction {
        (self.0)(x)
    }
}

/// One surrogate for the objective (minimization form) and one per
/// constraint (raw values, feasible when `<= 0`).
pub struct SurrogateBundle {
    objective: Box<dyn Surrogate>,
    constraints: Vec<Box<dyn Surrogate>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundlePrediction {
    pub objective: Prediction,
    pub constraints: Vec<Prediction>,
}

impl SurrogateBundle {
    pub fn new(objective: Box<dyn Surrogate>, constraints: Vec<Box<dyn Surrogate>>) -> Self {
        Self { objective, constraints }
    }

    pub fn from_models(objective: GpModel, constraints: Vec<GpModel>) -> Self {
        Self::new(
            Box::new(objective),
            constraints.into_iter().map(|m| Box::new(m) as Box<dyn Surrogate>).collect(),
        )
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &dyn Surrogate {
        self.objective.as_ref()
    }

    pub fn constraint(&self, i: usize) -> &dyn Surrogate {
        self.constraints[i].as_ref()
    }

    pub fn predict(&self, x: &[f64]) -> BundlePrediction {
        BundlePrediction {
            objective: self.objective.predict(x),
            constraints: self.predict_constraints(x),
        }
    }

    pub fn predict_constraints(&self, x: &[f64]) -> Vec<Prediction> {
        self.constraints.iter().map(|c| c.predict(x)).collect()
    }
}

fn adjusted(p: &Prediction, alpha: f64) -> f64 {
    p.mean - alpha * p.std
}

/// `max_i (mu_i - alpha * sigma_i)`.
pub fn cv1_from(constraints: &[Prediction], alpha: f64) -> Result<f64> {
    constraints
        .iter()
        .map(|p| adjusted(p, alpha))
        .reduce(f64::max)
        .ok_or(Error::NoConstraints("f_cv1"))
}

/// `min_i |mu_i - alpha * sigma_i|`.
pub fn cv2_from(constraints: &[Prediction], alpha: f64) -> Result<f64> {
    constraints
        .iter()
        .map(|p| adjusted(p, alpha).abs())
        .reduce(f64::min)
        .ok_or(Error::NoConstraints("f_cv2"))
}

/// Product of per-constraint feasibility probabilities; 1 without constraints.
pub fn pf_from(constraints: &[Prediction]) -> f64 {
    constraints
        .iter()
        .map(|p| {
            if p.std < SIGMA_FLOOR {
                if p.mean < 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                norm_cdf(-p.mean / p.std)
            }
        })
        .product()
}

pub fn f_cv1(b: &SurrogateBundle, x: &[f64], cfg: &AcquisitionConfig) -> Result<f64> {
    cv1_from(&b.predict_constraints(x), cfg.alpha)
}

pub fn f_cv2(b: &SurrogateBundle, x: &[f64], cfg: &AcquisitionConfig) -> Result<f64> {
    cv2_from(&b.predict_constraints(x), cfg.alpha)
}

/// Uses the raw constraint means; `alpha` does not enter here.
pub fn prob_feasible(b: &SurrogateBundle, x: &[f64]) -> f64 {
    pf_from(&b.predict_constraints(x))
}

pub fn tier1_from(constraints: &[Prediction], cfg: &AcquisitionConfig) -> Result<[f64; 2]> {
    Ok([cv1_from(constraints, cfg.alpha)?, cv2_from(constraints, cfg.alpha)?])
}

pub fn tier2_from(objective: &Prediction, cfg: &AcquisitionConfig) -> [f64; 3] {
    let (mu, sigma) = (objective.mean, objective.std);
    [lcb(mu, sigma, cfg), -pi(mu, sigma, cfg), -ei(mu, sigma, cfg)]
}

/// `[f_cv1, f_cv2]`, both minimized.
pub fn tier1_vector(b: &SurrogateBundle, x: &[f64], cfg: &AcquisitionConfig) -> Result<[f64; 2]> {
    tier1_from(&b.predict_constraints(x), cfg)
}

/// `[LCB, -PI, -EI]`, all minimized.
pub fn tier2_vector(b: &SurrogateBundle, x: &[f64], cfg: &AcquisitionConfig) -> [f64; 3] {
    tier2_from(&b.objective.predict(x), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(tau: f64) -> AcquisitionConfig {
        AcquisitionConfig::default().with_tau(tau)
    }

    fn pred(mean: f64, std: f64) -> Prediction {
        Prediction { mean, std }
    }

    fn stub_bundle(objective: Prediction, constraints: Vec<Prediction>) -> SurrogateBundle {
        SurrogateBundle::new(
            Box::new(FnSurrogate(move |_: &[f64]| objective)),
            constraints
                .into_iter()
                .map(|p| Box::new(FnSurrogate(move |_: &[f64]| p)) as Box<dyn Surrogate>)
                .collect(),
        )
    }

    #[test]
    fn lcb_examples() {
        let c = cfg(0.0);
        assert_eq!(lcb(1.0, 0.0, &c), 1.0);
        assert_relative_eq!(lcb(1.0, 2.0, &c), 0.4, epsilon = 1e-15);
        let off = AcquisitionConfig { beta: 0.0, ..c };
        assert_eq!(lcb(-3.2, 7.0, &off), -3.2);
    }

    #[test]
    fn pi_examples() {
        let c = cfg(2.0);
        assert_relative_eq!(pi(2.0 - 0.001, 1.0, &c), 0.5, epsilon = 1e-15);
        assert_eq!(pi(2.0 - 0.001 - 1.0, 0.0, &c), 1.0);
        assert_eq!(pi(2.0, 0.0, &c), 0.0);
        // standard normal table: Phi(1.96) = 0.9750021
        assert_relative_eq!(pi(2.0 - 0.001 - 1.96, 1.0, &c), 0.975002, epsilon = 1e-6);
    }

    #[test]
    fn ei_examples() {
        let c = cfg(1.0);
        assert_relative_eq!(ei(1.0 - 0.001, 1.0, &c), 0.398942, epsilon = 1e-6);
        assert_eq!(ei(1.0, 0.0, &c), 0.0);
        assert_relative_eq!(ei(0.5, 0.0, &c), 0.499, epsilon = 1e-12);
    }

    #[test]
    fn cv_examples() {
        let no_alpha = AcquisitionConfig { alpha: 0.0, ..cfg(0.0) };
        let b = stub_bundle(pred(0.0, 1.0), vec![pred(-1.0, 0.3), pred(2.0, 0.1), pred(0.5, 0.0)]);
        assert_eq!(f_cv1(&b, &[0.0], &no_alpha).unwrap(), 2.0);
        assert_eq!(f_cv2(&b, &[0.0], &no_alpha).unwrap(), 0.5);

        let single = stub_bundle(pred(0.0, 1.0), vec![pred(1.0, 0.5)]);
        assert_relative_eq!(f_cv1(&single, &[0.0], &cfg(0.0)).unwrap(), 0.9, epsilon = 1e-15);

        let boundary = stub_bundle(pred(0.0, 1.0), vec![pred(0.0, 0.0), pred(7.0, 0.0)]);
        assert_eq!(f_cv2(&boundary, &[0.0], &no_alpha).unwrap(), 0.0);
    }

    #[test]
    fn cv_needs_constraints() {
        let b = stub_bundle(pred(0.0, 1.0), vec![]);
        assert!(f_cv1(&b, &[0.0], &cfg(0.0)).is_err());
        assert!(f_cv2(&b, &[0.0], &cfg(0.0)).is_err());
        assert!(tier1_vector(&b, &[0.0], &cfg(0.0)).is_err());
    }

    #[test]
    fn pf_examples() {
        for c in 1..5 {
            let b = stub_bundle(pred(0.0, 1.0), vec![pred(0.0, 1.0); c]);
            assert_relative_eq!(prob_feasible(&b, &[0.0]), 0.5f64.powi(c as i32), epsilon = 1e-15);
        }
        let b = stub_bundle(pred(0.0, 1.0), vec![pred(-3.0, 1.0)]);
        // Phi(3) = 0.9986501
        assert_relative_eq!(prob_feasible(&b, &[0.0]), 0.99865, epsilon = 1e-5);
        let b = stub_bundle(pred(0.0, 1.0), vec![pred(-3.0, 1.0), pred(0.2, 0.0)]);
        assert_eq!(prob_feasible(&b, &[0.0]), 0.0);
    }

    #[test]
    fn tier2_examples() {
        let c = cfg(1.5);
        let b = stub_bundle(pred(1.5, 0.0), vec![pred(-1.0, 0.0)]);
        assert_eq!(tier2_vector(&b, &[0.0], &c), [1.5, -0.0, -0.0]);

        let sigma = 2.0;
        let mu = 1.5 - 0.001;
        let b = stub_bundle(pred(mu, sigma), vec![pred(-1.0, 0.0)]);
        let v = tier2_vector(&b, &[0.0], &c);
        assert_relative_eq!(v[0], mu - 0.3 * sigma, epsilon = 1e-15);
        assert_relative_eq!(v[1], -0.5, epsilon = 1e-15);
        assert_relative_eq!(v[2], -sigma * 0.398942, epsilon = 1e-6);
    }

    #[test]
    fn tier1_of_feasible_point_is_antisymmetric() {
        let c = AcquisitionConfig { alpha: 0.0, ..cfg(0.0) };
        let b = stub_bundle(pred(0.0, 1.0), vec![pred(-0.3, 0.0), pred(-1.2, 0.0), pred(-0.31, 0.0)]);
        let [a, z] = tier1_vector(&b, &[0.0], &c).unwrap();
        assert_eq!(a, -z);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ranges(mu in -50.0f64..50.0, sigma in 0.0f64..20.0, tau in -50.0f64..50.0) {
                let c = cfg(tau);
                let e = ei(mu, sigma, &c);
                let p = pi(mu, sigma, &c);
                prop_assert!(e >= 0.0);
                prop_assert!((0.0..=1.0).contains(&p));
                let pf = pf_from(&[pred(mu, sigma), pred(tau, sigma * 0.5)]);
                prop_assert!((0.0..=1.0).contains(&pf));
            }

            #[test]
            fn ei_pi_non_increasing_in_mu(mu in -20.0f64..20.0, d in 0.0f64..5.0, sigma in 0.0f64..10.0, tau in -20.0f64..20.0) {
                let c = cfg(tau);
                prop_assert!(ei(mu + d, sigma, &c) <= ei(mu, sigma, &c) + 1e-12);
                prop_assert!(pi(mu + d, sigma, &c) <= pi(mu, sigma, &c));
            }

            #[test]
            fn feasible_cv_identity(means in proptest::collection::vec(-10.0f64..0.0, 1..6),
                                    stds in proptest::collection::vec(0.0f64..3.0, 6),
                                    alpha in 0.0f64..1.0) {
                let preds: Vec<Prediction> = means.iter().zip(&stds).map(|(m, s)| pred(*m, *s)).collect();
                // adjusted means are all <= 0 because alpha, sigma >= 0
                let a = cv1_from(&preds, alpha).unwrap();
                let b = cv2_from(&preds, alpha).unwrap();
                prop_assert_eq!(a, -b);
            }
        }
    }
}
