//! Gaussian process regression with an ARD squared-exponential kernel.
//!
//! Targets are standardized before fitting so a zero prior mean is
//! appropriate. Hyperparameters maximize the log marginal likelihood with a
//! multi-start coordinate search in log space.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;
const DEGENERATE_STD: f64 = 1e-12;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub signal_variance: f64,
    pub lengthscales: Vec<f64>,
    pub noise_variance: f64,
}

impl KernelParams {
    pub fn isotropic(signal_variance: f64, lengthscale: f64, dim: usize, noise_variance: f64) -> Self {
        Self { signal_variance, lengthscales: vec![lengthscale; dim], noise_variance }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.signal_variance > 0.0
            && self.signal_variance.is_finite()
            && self.noise_variance >= 0.0
            && self.noise_variance.is_finite()
            && !self.lengthscales.is_empty()
            && self.lengthscales.iter().all(|l| *l > 0.0 && l.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid kernel hyperparameters {self:?}")))
        }
    }
}

/// `s * exp(-0.5 * sum_j ((x_j - x2_j) / l_j)^2)`.
pub fn kernel(x: &[f64], x2: &[f64], p: &KernelParams) -> Result<f64> {
    p.validate()?;
    if x.len() != p.lengthscales.len() {
        return Err(Error::DimensionMismatch { expected: p.lengthscales.len(), got: x.len() });
    }
    if x2.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: x2.len() });
    }
    Ok(sq_exp(x, x2, &p.lengthscales, p.signal_variance))
}

#[inline]
fn sq_exp(x: &[f64], x2: &[f64], lengthscales: &[f64], signal_variance: f64) -> f64 {
    let r2: f64 = x
        .iter()
        .zip(x2)
        .zip(lengthscales)
        .map(|((a, b), l)| {
            let t = (a - b) / l;
            t * t
        })
        .sum();
    signal_variance * (-0.5 * r2).exp()
}

/// Box and effort for the hyperparameter search. Variances refer to
/// standardized targets, lengthscales to unit-hypercube inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub restarts: usize,
    pub lengthscale_bounds: (f64, f64),
    pub signal_variance_bounds: (f64, f64),
    pub noise_variance_bounds: (f64, f64),
    /// Likelihood evaluations allowed per restart.
    pub max_evals_per_restart: usize,
    /// Search stops once the log-space step shrinks below this.
    pub min_step: f64,
    pub seed: u64,
    /// Extra start tried before the random restarts, typically the previous fit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start: Option<KernelParams>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            restarts: 5,
            lengthscale_bounds: (1e-2, 10.0),
            signal_variance_bounds: (1e-3, 1e3),
            noise_variance_bounds: (1e-8, 1e-2),
            max_evals_per_restart: 60,
            min_step: 0.1,
            seed: 0,
            warm_start: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub std: f64,
}

/// Start points of the multi-start search and the likelihood reached.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub starts: Vec<(KernelParams, f64)>,
    pub best_log_likelihood: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct GpModel {
    params: KernelParams,
    dim: usize,
    /// Row-major `n x dim`, unit-hypercube coordinates.
    inputs: Vec<f64>,
    targets: DVector<f64>,
    chol: DMatrix<f64>,
    alpha: DVector<f64>,
    target_mean: f64,
    target_std: f64,
    jitter: f64,
    log_likelihood: f64,
}

/// Pairwise squared coordinate differences, one lower-triangular `n x n`
/// block per input dimension; reused across likelihood evaluations.
struct Distances {
    n: usize,
    per_dim: Vec<Vec<f64>>,
}

impl Distances {
    fn new(inputs: &[f64], n: usize, dim: usize) -> Self {
        let per_dim = (0..dim)
            .map(|j| {
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    for k in 0..i {
                        let t = inputs[i * dim + j] - inputs[k * dim + j];
                        m[i * n + k] = t * t;
                    }
                }
                m
            })
            .collect();
        Self { n, per_dim }
    }

    fn covariance(&self, p: &KernelParams, diag: f64) -> DMatrix<f64> {
        let n = self.n;
        let inv: Vec<f64> = p.lengthscales.iter().map(|l| 0.5 / (l * l)).collect();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for c in 0..i {
                let mut r = 0.0;
                for (m, w) in self.per_dim.iter().zip(&inv) {
                    r += m[i * n + c] * w;
                }
                let v = p.signal_variance * (-r).exp();
                k[(i, c)] = v;
                k[(c, i)] = v;
            }
            k[(i, i)] = p.signal_variance + diag;
        }
        k
    }
}

/// Cholesky of `K + (noise + jitter) I`, escalating jitter tenfold from
/// 1e-10 up to 1e-4 when the factorization fails.
fn factor(dist: &Distances, p: &KernelParams) -> Option<(DMatrix<f64>, f64)> {
    let mut jitter = 0.0;
    loop {
        let k = dist.covariance(p, p.noise_variance + jitter);
        if let Some(ch) = k.cholesky() {
            return Some((ch.unpack(), jitter));
        }
        jitter = if jitter == 0.0 { JITTER_START } else { jitter * 10.0 };
        if jitter > JITTER_MAX * 1.000_001 {
            return None;
        }
    }
}

fn solve_lower(l: &DMatrix<f64>, b: &mut DVector<f64>) {
    let n = l.nrows();
    let b = b.as_mut_slice();
    for j in 0..n {
        let col = &l.as_slice()[j * n..(j + 1) * n];
        let v = b[j] / col[j];
        b[j] = v;
        for (bi, lij) in b[j + 1..].iter_mut().zip(&col[j + 1..]) {
            *bi -= lij * v;
        }
    }
}

fn solve_upper_transposed(l: &DMatrix<f64>, b: &mut DVector<f64>) {
    let n = l.nrows();
    let b = b.as_mut_slice();
    for i in (0..n).rev() {
        let col = &l.as_slice()[i * n..(i + 1) * n];
        let s: f64 = col[i + 1..].iter().zip(&b[i + 1..]).map(|(a, c)| a * c).sum();
        b[i] = (b[i] - s) / col[i];
    }
}

fn cholesky_solve(l: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let mut a = y.clone();
    solve_lower(l, &mut a);
    solve_upper_transposed(l, &mut a);
    a
}

fn log_likelihood_from(l: &DMatrix<f64>, y: &DVector<f64>, alpha: &DVector<f64>) -> f64 {
    let n = y.len() as f64;
    let log_det_half: f64 = (0..l.nrows()).map(|i| l[(i, i)].ln()).sum();
    -0.5 * y.dot(alpha) - log_det_half - 0.5 * n * LN_2PI
}

struct Prepared {
    n: usize,
    dim: usize,
    inputs: Vec<f64>,
    targets: DVector<f64>,
    mean: f64,
    std: f64,
}

fn prepare(x: &[Vec<f64>], y: &[f64]) -> Result<Prepared> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "gaussian process needs at least 2 training points, got {n}"
        )));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training targets"));
    }
    let dim = x[0].len();
    if dim == 0 {
        return Err(Error::InvalidArgument("zero-dimensional inputs".into()));
    }
    let mut inputs = Vec::with_capacity(n * dim);
    for row in x {
        if row.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
        }
        for v in row {
            if !v.is_finite() {
                return Err(Error::NonFinite("training inputs"));
            }
            if *v < -1e-9 || *v > 1.0 + 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "training input {row:?} lies outside the unit hypercube"
                )));
            }
        }
        inputs.extend_from_slice(row);
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let mut std = var.sqrt();
    if std < DEGENERATE_STD {
        // constant targets: centre only, the model then predicts the constant
        std = 1.0;
    }
    let targets = DVector::from_iterator(n, y.iter().map(|v| (v - mean) / std));
    Ok(Prepared { n, dim, inputs, targets, mean, std })
}

impl GpModel {
    /// Builds the posterior for fixed hyperparameters.
    pub fn with_params(x: &[Vec<f64>], y: &[f64], params: KernelParams) -> Result<Self> {
        params.validate()?;
        let prep = prepare(x, y)?;
        if params.lengthscales.len() != prep.dim {
            return Err(Error::DimensionMismatch {
                expected: prep.dim,
                got: params.lengthscales.len(),
            });
        }
        let dist = Distances::new(&prep.inputs, prep.n, prep.dim);
        Self::assemble(prep, &dist, params)
    }

    fn assemble(prep: Prepared, dist: &Distances, params: KernelParams) -> Result<Self> {
        let (chol, jitter) = factor(dist, &params).ok_or_else(|| {
            Error::Fit(format!("covariance not positive definite with jitter {JITTER_MAX}"))
        })?;
        let alpha = cholesky_solve(&chol, &prep.targets);
        let log_likelihood = log_likelihood_from(&chol, &prep.targets, &alpha);
        Ok(Self {
            params,
            dim: prep.dim,
            inputs: prep.inputs,
            targets: prep.targets,
            chol,
            alpha,
            target_mean: prep.mean,
            target_std: prep.std,
            jitter,
            log_likelihood,
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn target_std(&self) -> f64 {
        self.target_std
    }

    /// Jitter added on top of the noise variance to make the factorization succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Log marginal likelihood of the standardized targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    /// Lower-triangular factor of `K + (noise + jitter) I`.
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn train_input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    /// Standardized training targets.
    pub fn train_targets(&self) -> &DVector<f64> {
        &self.targets
    }

    /// Posterior mean and standard deviation in the original target units.
    pub fn predict(&self, x: &[f64]) -> Prediction {
        assert_eq!(x.len(), self.dim, "prediction point has wrong dimension");
        let mut clamped = None;
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            log::warn!("prediction point {x:?} outside the unit hypercube, clamping");
            clamped = Some(x.iter().map(|v| v.clamp(0.0, 1.0)).collect::<Vec<_>>());
        }
        let x = clamped.as_deref().unwrap_or(x);
        let n = self.len();
        let s = self.params.signal_variance;
        let ls = &self.params.lengthscales;
        let mut k = DVector::from_iterator(
            n,
            (0..n).map(|i| sq_exp(x, self.train_input(i), ls, s)),
        );
        let mean = k.dot(&self.alpha);
        solve_lower(&self.chol, &mut k);
        let var = (s - k.norm_squared()).max(0.0);
        Prediction {
            mean: mean * self.target_std + self.target_mean,
            std: var.sqrt() * self.target_std,
        }
    }
}

/// Log marginal likelihood of the standardized version of `y` under `params`.
pub fn log_marginal_likelihood(x: &[Vec<f64>], y: &[f64], params: &KernelParams) -> Result<f64> {
    Ok(GpModel::with_params(x, y, params.clone())?.log_marginal_likelihood())
}

fn params_to_log(p: &KernelParams, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    p.lengthscales
        .iter()
        .chain([&p.signal_variance, &p.noise_variance])
        .zip(lo.iter().zip(hi))
        .map(|(v, (a, b))| v.ln().clamp(*a, *b))
        .collect()
}

fn params_from_log(theta: &[f64], dim: usize) -> KernelParams {
    KernelParams {
        lengthscales: theta[..dim].iter().map(|v| v.exp()).collect(),
        signal_variance: theta[dim].exp(),
        noise_variance: theta[dim + 1].exp(),
    }
}

/// Coordinate-wise pattern search maximizing `objective` inside `[lo, hi]`.
fn coordinate_search(
    mut theta: Vec<f64>,
    lo: &[f64],
    hi: &[f64],
    max_evals: usize,
    min_step: f64,
    evals: &mut usize,
    objective: &mut dyn FnMut(&[f64]) -> f64,
) -> (Vec<f64>, f64, f64) {
    let start_value = objective(&theta);
    *evals += 1;
    let mut used = 1;
    let mut best = start_value;
    let mut step = 1.0;
    'outer: while step >= min_step {
        let mut improved = false;
        for i in 0..theta.len() {
            for dir in [1.0, -1.0] {
                if used >= max_evals {
                    break 'outer;
                }
                let moved = (theta[i] + dir * step).clamp(lo[i], hi[i]);
                if moved == theta[i] {
                    continue;
                }
                let mut cand = theta.clone();
                cand[i] = moved;
                let v = objective(&cand);
                used += 1;
                *evals += 1;
                if v > best {
                    best = v;
                    theta = cand;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (theta, best, start_value)
}

/// Fits hyperparameters by bounded maximum likelihood and returns the posterior.
pub fn fit(x: &[Vec<f64>], y: &[f64], cfg: &FitConfig) -> Result<GpModel> {
    fit_with_report(x, y, cfg).map(|(m, _)| m)
}

pub fn fit_with_report(x: &[Vec<f64>], y: &[f64], cfg: &FitConfig) -> Result<(GpModel, FitReport)> {
    if cfg.restarts == 0 && cfg.warm_start.is_none() {
        return Err(Error::InvalidArgument("at least one start is required".into()));
    }
    let prep = prepare(x, y)?;
    let dim = prep.dim;
    let dist = Distances::new(&prep.inputs, prep.n, dim);

    let mut lo = vec![cfg.lengthscale_bounds.0.ln(); dim];
    let mut hi = vec![cfg.lengthscale_bounds.1.ln(); dim];
    lo.push(cfg.signal_variance_bounds.0.ln());
    hi.push(cfg.signal_variance_bounds.1.ln());
    lo.push(cfg.noise_variance_bounds.0.ln());
    hi.push(cfg.noise_variance_bounds.1.ln());
    if lo.iter().zip(&hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid hyperparameter bounds {cfg:?}")));
    }

    let targets = prep.targets.clone();
    let mut objective = |theta: &[f64]| -> f64 {
        let p = params_from_log(theta, dim);
        match factor(&dist, &p) {
            Some((l, _)) => {
                let alpha = cholesky_solve(&l, &targets);
                let v = log_likelihood_from(&l, &targets, &alpha);
                if v.is_finite() {
                    v
                } else {
                    f64::NEG_INFINITY
                }
            }
            None => f64::NEG_INFINITY,
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evals = 0;
    let warm = match &cfg.warm_start {
        Some(p) if p.lengthscales.len() == dim => Some(params_to_log(p, &lo, &hi)),
        _ => None,
    };
    let mut starts = Vec::with_capacity(cfg.restarts + 1);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for k in 0..cfg.restarts + usize::from(warm.is_some()) {
        let theta0: Vec<f64> = match (&warm, k) {
            (Some(w), 0) => w.clone(),
            _ => lo
                .iter()
                .zip(&hi)
                .map(|(a, b)| if a == b { *a } else { rng.random_range(*a..=*b) })
                .collect(),
        };
        let (theta, value, start_value) = coordinate_search(
            theta0.clone(),
            &lo,
            &hi,
            cfg.max_evals_per_restart.max(1),
            cfg.min_step,
            &mut evals,
            &mut objective,
        );
        starts.push((params_from_log(&theta0, dim), start_value));
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((theta, value));
        }
    }
    let (theta, value) = best.expect("at least one restart");
    if !value.is_finite() {
        return Err(Error::Fit(format!(
            "no hyperparameter setting gave a positive definite covariance (jitter up to {JITTER_MAX})"
        )));
    }
    let model = GpModel::assemble(prep, &dist, params_from_log(&theta, dim))?;
    let report = FitReport { starts, best_log_likelihood: model.log_likelihood, evaluations: evals };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_examples() {
        let p = KernelParams::isotropic(2.5, 0.7, 3, 0.0);
        assert_eq!(kernel(&[0.1, 0.2, 0.3], &[0.1, 0.2, 0.3], &p).unwrap(), 2.5);

        let p = KernelParams::isotropic(1.0, 1.0, 1, 0.0);
        let k = kernel(&[0.0], &[2f64.sqrt()], &p).unwrap();
        assert_relative_eq!(k, (-1.0f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(k, 0.367879, epsilon = 1e-6);

        let p = KernelParams { signal_variance: 1.3, lengthscales: vec![0.2, 0.9], noise_variance: 0.0 };
        let a = [0.31, 0.77];
        let b = [0.05, 0.42];
        assert_eq!(kernel(&a, &b, &p).unwrap(), kernel(&b, &a, &p).unwrap());
    }

    #[test]
    fn kernel_rejects_bad_params() {
        let p = KernelParams::isotropic(0.0, 1.0, 1, 0.0);
        assert!(kernel(&[0.0], &[1.0], &p).is_err());
        let p = KernelParams::isotropic(1.0, -1.0, 1, 0.0);
        assert!(kernel(&[0.0], &[1.0], &p).is_err());
        let p = KernelParams::isotropic(1.0, 1.0, 2, 0.0);
        assert!(kernel(&[0.0], &[1.0], &p).is_err());
    }

    #[test]
    fn fit_requires_two_points() {
        assert!(fit(&[vec![0.5]], &[1.0], &FitConfig::default()).is_err());
    }

    #[test]
    fn fit_rejects_nan() {
        let x = vec![vec![0.1], vec![0.9]];
        assert!(fit(&x, &[1.0, f64::NAN], &FitConfig::default()).is_err());
    }

    #[test]
    fn fit_rejects_inputs_outside_unit_box() {
        let x = vec![vec![0.1], vec![1.5]];
        assert!(fit(&x, &[1.0, 2.0], &FitConfig::default()).is_err());
    }

    #[test]
    fn zero_targets_give_zero_mean() {
        let x = vec![vec![0.2, 0.3], vec![0.8, 0.6]];
        let m = fit(&x, &[0.0, 0.0], &FitConfig::default()).unwrap();
        for i in 0..=10 {
            for j in 0..=10 {
                let p = m.predict(&[i as f64 / 10.0, j as f64 / 10.0]);
                assert!(p.mean.abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn interpolates_training_points_at_noise_floor() {
        let x = vec![vec![0.1], vec![0.4], vec![0.75], vec![0.95]];
        let y = [3.0, -1.0, 0.5, 2.0];
        let m = GpModel::with_params(&x, &y, KernelParams::isotropic(1.0, 0.2, 1, 1e-8)).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            let p = m.predict(xi);
            assert!((p.mean - yi).abs() <= 1e-4, "{} vs {}", p.mean, yi);
            assert!(p.std <= 1e-3);
        }
    }

    #[test]
    fn reverts_to_prior_far_from_data() {
        let x = vec![vec![0.0, 0.0], vec![0.01, 0.02], vec![0.02, 0.0]];
        let y = [1.0, 2.0, 4.0];
        let p = KernelParams::isotropic(1.7, 0.05, 2, 1e-6);
        let m = GpModel::with_params(&x, &y, p).unwrap();
        // (1, 1) is ~28 lengthscales from every training point
        let pred = m.predict(&[1.0, 1.0]);
        assert!((pred.mean - m.target_mean()).abs() < 1e-3);
        assert!((pred.std - 1.7f64.sqrt() * m.target_std()).abs() < 1e-3);
    }

    #[test]
    fn cholesky_reconstructs_covariance() {
        let x: Vec<Vec<f64>> = (0..12).map(|i| vec![(i as f64 * 0.37) % 1.0, (i as f64 * 0.61) % 1.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0].sin() + r[1]).collect();
        let p = KernelParams { signal_variance: 0.8, lengthscales: vec![0.3, 0.5], noise_variance: 1e-6 };
        let m = GpModel::with_params(&x, &y, p.clone()).unwrap();
        let l = m.cholesky_factor();
        let rebuilt = l * l.transpose();
        for i in 0..x.len() {
            for j in 0..x.len() {
                let mut k = kernel(&x[i], &x[j], &p).unwrap();
                if i == j {
                    k += p.noise_variance + m.jitter();
                }
                assert!((rebuilt[(i, j)] - k).abs() <= 1e-8 * k.abs().max(1e-300) + 1e-15);
            }
        }
    }

    #[test]
    fn duplicate_points_trigger_jitter() {
        let x = vec![vec![0.5], vec![0.5], vec![0.5 + 1e-12], vec![0.2]];
        let y = [1.0, 1.0, 1.0, 0.0];
        let m = GpModel::with_params(&x, &y, KernelParams::isotropic(1.0, 5.0, 1, 0.0)).unwrap();
        assert!(m.jitter() > 0.0);
        assert!(m.predict(&[0.5]).mean.is_finite());
    }

    #[test]
    fn fitted_likelihood_beats_every_start() {
        let x: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64 / 14.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| (6.0 * r[0]).sin()).collect();
        let (m, report) = fit_with_report(&x, &y, &FitConfig { seed: 9, ..Default::default() }).unwrap();
        assert_eq!(report.starts.len(), 5);
        for (_, v) in &report.starts {
            assert!(m.log_marginal_likelihood() >= *v);
        }
        let tol = 3.0 * (m.params().noise_variance + m.jitter()).sqrt() * m.target_std();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((m.predict(xi).mean - yi).abs() <= tol.max(1e-6));
        }
    }

    #[test]
    fn training_variance_below_far_variance() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![0.05 * i as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] * r[0]).collect();
        let m = GpModel::with_params(&x, &y, KernelParams::isotropic(1.0, 0.05, 1, 1e-6)).unwrap();
        let far = m.predict(&[1.0]).std;
        for xi in &x {
            assert!(m.predict(xi).std <= far);
        }
    }
}
