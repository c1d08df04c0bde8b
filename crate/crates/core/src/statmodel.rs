//! Observation models: a log-density/sampling interface, Gaussian models
//! with parameter-dependent mean, and the blind channel model
//! `y = s * h + noise` whose scalar ambiguity makes the FIM singular.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::{CrbError, Result};

/// A parametric family `p(y; θ)`.
pub trait Model: Send + Sync {
    fn param_dim(&self) -> usize;

    fn obs_dim(&self) -> usize;

    fn log_density(&self, y: &DVector<f64>, theta: &DVector<f64>) -> f64;

    fn sample(&self, theta: &DVector<f64>, rng: &mut dyn RngCore) -> DVector<f64>;

    /// Analytic score `∂ ln p / ∂θ`, if the model has one.
    fn score(&self, _y: &DVector<f64>, _theta: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }
}

/// Step used by the finite-difference score for coordinate `i`.
pub fn fd_step(theta_i: f64) -> f64 {
    1e-5 * (1.0 + theta_i.abs())
}

/// Central finite-difference score of `log_density`.
pub fn finite_difference_score<M: Model + ?Sized>(
    model: &M,
    y: &DVector<f64>,
    theta: &DVector<f64>,
) -> DVector<f64> {
    let mut probe = theta.clone();
    DVector::from_fn(theta.len(), |i, _| {
        let h = fd_step(theta[i]);
        probe[i] = theta[i] + h;
        let up = model.log_density(y, &probe);
        probe[i] = theta[i] - h;
        let down = model.log_density(y, &probe);
        probe[i] = theta[i];
        (up - down) / (2.0 * h)
    })
}

/// The model's score, falling back to finite differences.
pub fn score_or_fd<M: Model + ?Sized>(model: &M, y: &DVector<f64>, theta: &DVector<f64>) -> DVector<f64> {
    model
        .score(y, theta)
        .unwrap_or_else(|| finite_difference_score(model, y, theta))
}

pub type MeanFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type MeanJacFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// `y ~ N(μ(θ), Σ)` with fixed positive-definite noise covariance.
#[derive(Clone)]
pub struct GaussianMeanModel {
    param_dim: usize,
    obs_dim: usize,
    mean_fn: MeanFn,
    mean_jac: MeanJacFn,
    noise_cov: DMatrix<f64>,
    noise_chol: Cholesky<f64, Dyn>,
    precision: DMatrix<f64>,
    log_norm: f64,
}

impl fmt::Debug for GaussianMeanModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaussianMeanModel")
            .field("param_dim", &self.param_dim)
            .field("obs_dim", &self.obs_dim)
            .field("noise_cov", &self.noise_cov)
            .finish_non_exhaustive()
    }
}

impl GaussianMeanModel {
    pub fn new(
        param_dim: usize,
        mean_fn: MeanFn,
        mean_jac: MeanJacFn,
        noise_cov: DMatrix<f64>,
    ) -> Result<Self> {
        let obs_dim = noise_cov.nrows();
        if !noise_cov.is_square() || obs_dim == 0 {
            return Err(CrbError::InvalidModel("noise covariance must be square and nonempty".into()));
        }
        if noise_cov.iter().any(|v| !v.is_finite()) || noise_cov != noise_cov.transpose() {
            return Err(CrbError::InvalidModel("noise covariance must be finite and symmetric".into()));
        }
        let noise_chol = Cholesky::new(noise_cov.clone())
            .ok_or_else(|| CrbError::InvalidModel("noise covariance is not positive definite".into()))?;
        let precision = noise_chol.inverse();
        let log_det: f64 = noise_chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        if !log_det.is_finite() || precision.iter().any(|v| !v.is_finite()) {
            return Err(CrbError::InvalidModel("noise covariance is numerically singular".into()));
        }
        Ok(Self {
            param_dim,
            obs_dim,
            mean_fn,
            mean_jac,
            noise_cov,
            noise_chol,
            precision,
            log_norm: -0.5 * (log_det + obs_dim as f64 * (2.0 * PI).ln()),
        })
    }

    /// Linear model `μ(θ) = A θ`; singular FIM whenever `A` is column-rank
    /// deficient.
    pub fn linear(design: DMatrix<f64>, noise_cov: DMatrix<f64>) -> Result<Self> {
        if design.nrows() != noise_cov.nrows() {
            return Err(CrbError::InvalidModel(format!(
                "design has {} rows but noise covariance is {}x{}",
                design.nrows(),
                noise_cov.nrows(),
                noise_cov.ncols()
            )));
        }
        let n = design.ncols();
        let a = Arc::new(design);
        let a2 = Arc::clone(&a);
        Self::new(
            n,
            Arc::new(move |t: &DVector<f64>| &*a * t),
            Arc::new(move |_: &DVector<f64>| (*a2).clone()),
            noise_cov,
        )
    }

    /// Gaussian location family `μ(θ) = θ`.
    pub fn location(noise_cov: DMatrix<f64>) -> Result<Self> {
        let n = noise_cov.nrows();
        Self::linear(DMatrix::identity(n, n), noise_cov)
    }

    pub fn mean(&self, theta: &DVector<f64>) -> DVector<f64> {
        (self.mean_fn)(theta)
    }

    pub fn mean_jacobian(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        (self.mean_jac)(theta)
    }

    pub fn noise_cov(&self) -> &DMatrix<f64> {
        &self.noise_cov
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }
}

impl Model for GaussianMeanModel {
    fn param_dim(&self) -> usize {
        self.param_dim
    }

    fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    fn log_density(&self, y: &DVector<f64>, theta: &DVector<f64>) -> f64 {
        let r = y - self.mean(theta);
        let white = self.noise_chol.l_dirty().solve_lower_triangular(&r).expect("nonsingular L");
        self.log_norm - 0.5 * white.norm_squared()
    }

    fn sample(&self, theta: &DVector<f64>, rng: &mut dyn RngCore) -> DVector<f64> {
        let z = DVector::from_fn(self.obs_dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        self.mean(theta) + self.noise_chol.l() * z
    }

    fn score(&self, y: &DVector<f64>, theta: &DVector<f64>) -> Option<DVector<f64>> {
        let g = self.mean_jacobian(theta);
        Some(g.transpose() * (&self.precision * (y - self.mean(theta))))
    }
}

/// Full linear convolution, length `|s| + |h| - 1`.
pub fn convolve(s: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    if s.is_empty() || h.is_empty() {
        return Err(CrbError::InvalidInput("convolution operands must be nonempty".into()));
    }
    let mut y = vec![0.0; s.len() + h.len() - 1];
    for (i, &si) in s.iter().enumerate() {
        for (j, &hj) in h.iter().enumerate() {
            y[i + j] += si * hj;
        }
    }
    Ok(y)
}

fn split_theta(theta: &[f64], s_len: usize, h_len: usize) -> Result<(&[f64], &[f64])> {
    if s_len == 0 || h_len == 0 {
        return Err(CrbError::InvalidInput("s_len and h_len must be positive".into()));
    }
    if theta.len() != s_len + h_len {
        return Err(CrbError::InvalidInput(format!(
            "θ has length {}, expected s_len + h_len = {}",
            theta.len(),
            s_len + h_len
        )));
    }
    Ok(theta.split_at(s_len))
}

/// Jacobian of `s * h` with respect to `θ = (s, h)`. Column `i < s_len` is
/// `h` shifted down by `i`; column `s_len + j` is `s` shifted down by `j`.
pub fn blind_channel_mean_jac(theta: &[f64], s_len: usize, h_len: usize) -> Result<DMatrix<f64>> {
    let (s, h) = split_theta(theta, s_len, h_len)?;
    let obs = s_len + h_len - 1;
    let mut g = DMatrix::zeros(obs, s_len + h_len);
    for i in 0..s_len {
        for (j, &hj) in h.iter().enumerate() {
            g[(i + j, i)] = hj;
        }
    }
    for j in 0..h_len {
        for (i, &si) in s.iter().enumerate() {
            g[(i + j, s_len + j)] = si;
        }
    }
    Ok(g)
}

/// Unit tangent of the curve `α ↦ (α s, h / α)` at `α = 1`, i.e. `(s, -h)`
/// normalized. It spans the FIM kernel at generic θ.
pub fn scalar_ambiguity_direction(theta: &[f64], s_len: usize, h_len: usize) -> Result<DVector<f64>> {
    let (s, h) = split_theta(theta, s_len, h_len)?;
    let d = DVector::from_iterator(s_len + h_len, s.iter().copied().chain(h.iter().map(|v| -v)));
    let norm = d.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(CrbError::DegenerateParameter("θ = (s, h) is zero or non-finite".into()));
    }
    Ok(d / norm)
}

/// Blind channel estimation with i.i.d. Gaussian noise of variance
/// `noise_var`; `θ = (s, h)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlindChannelModel {
    pub s_len: usize,
    pub h_len: usize,
    pub noise_var: f64,
}

impl BlindChannelModel {
    pub fn new(s_len: usize, h_len: usize, noise_var: f64) -> Result<Self> {
        if s_len == 0 || h_len == 0 {
            return Err(CrbError::InvalidModel("s_len and h_len must be positive".into()));
        }
        if !(noise_var > 0.0) || !noise_var.is_finite() {
            return Err(CrbError::InvalidModel(format!("noise variance must be positive, got {noise_var}")));
        }
        Ok(Self { s_len, h_len, noise_var })
    }

    pub fn n_params(&self) -> usize {
        self.s_len + self.h_len
    }

    pub fn n_obs(&self) -> usize {
        self.s_len + self.h_len - 1
    }

    pub fn mean(&self, theta: &[f64]) -> Result<DVector<f64>> {
        let (s, h) = split_theta(theta, self.s_len, self.h_len)?;
        Ok(DVector::from_vec(convolve(s, h)?))
    }

    pub fn mean_jacobian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        blind_channel_mean_jac(theta, self.s_len, self.h_len)
    }

    pub fn ambiguity_direction(&self, theta: &[f64]) -> Result<DVector<f64>> {
        scalar_ambiguity_direction(theta, self.s_len, self.h_len)
    }

    /// Generic evaluation point, entries uniform in `[0.5, 1.5]`.
    pub fn random_theta<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        DVector::from_fn(self.n_params(), |_, _| rng.random_range(0.5..1.5))
    }

    /// The same model as a general [`GaussianMeanModel`].
    pub fn to_gaussian(&self) -> GaussianMeanModel {
        let (a, b) = (*self, *self);
        GaussianMeanModel::new(
            self.n_params(),
            Arc::new(move |t: &DVector<f64>| a.mean(t.as_slice()).expect("θ length checked by caller")),
            Arc::new(move |t: &DVector<f64>| b.mean_jacobian(t.as_slice()).expect("θ length checked by caller")),
            DMatrix::identity(self.n_obs(), self.n_obs()) * self.noise_var,
        )
        .expect("positive noise variance")
    }
}

impl Model for BlindChannelModel {
    fn param_dim(&self) -> usize {
        self.n_params()
    }

    fn obs_dim(&self) -> usize {
        self.n_obs()
    }

    fn log_density(&self, y: &DVector<f64>, theta: &DVector<f64>) -> f64 {
        let mu = self.mean(theta.as_slice()).expect("θ length checked by caller");
        let k = self.n_obs() as f64;
        -0.5 * (y - mu).norm_squared() / self.noise_var - 0.5 * k * (2.0 * PI * self.noise_var).ln()
    }

    fn sample(&self, theta: &DVector<f64>, rng: &mut dyn RngCore) -> DVector<f64> {
        let mu = self.mean(theta.as_slice()).expect("θ length checked by caller");
        let sd = self.noise_var.sqrt();
        mu.map(|m| m + sd * rng.sample::<f64, _>(StandardNormal))
    }

    fn score(&self, y: &DVector<f64>, theta: &DVector<f64>) -> Option<DVector<f64>> {
        let mu = self.mean(theta.as_slice()).ok()?;
        let g = self.mean_jacobian(theta.as_slice()).ok()?;
        Some(g.transpose() * (y - mu) / self.noise_var)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn convolve_examples() {
        assert_eq!(convolve(&[1.0], &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(convolve(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), vec![1.0, 2.0, 1.0]);
        assert_eq!(convolve(&[2.0, 0.0], &[3.0]).unwrap(), vec![6.0, 0.0]);
        assert!(matches!(convolve(&[], &[1.0]), Err(CrbError::InvalidInput(_))));
    }

    #[test]
    fn observational_equivalence_is_exact() {
        let s = [0.7, 1.3, 0.9];
        let h = [1.1, 0.6];
        let y = convolve(&s, &h).unwrap();
        for alpha in [2.0, -1.0, 0.5] {
            let sa: Vec<f64> = s.iter().map(|v| alpha * v).collect();
            let ha: Vec<f64> = h.iter().map(|v| v / alpha).collect();
            assert_eq!(convolve(&sa, &ha).unwrap(), y);
        }
    }

    #[test]
    fn mean_jacobian_examples() {
        assert_eq!(blind_channel_mean_jac(&[1.0, 1.0], 1, 1).unwrap(), DMatrix::from_row_slice(1, 2, &[1.0, 1.0]));
        assert_eq!(
            blind_channel_mean_jac(&[1.0, 0.0, 1.0], 2, 1).unwrap(),
            DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0])
        );
        assert!(matches!(blind_channel_mean_jac(&[1.0, 0.0], 2, 1), Err(CrbError::InvalidInput(_))));
    }

    #[test]
    fn mean_jacobian_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = BlindChannelModel::new(3, 3, 1.0).unwrap();
        for _ in 0..10 {
            let theta = model.random_theta(&mut rng);
            let g = model.mean_jacobian(theta.as_slice()).unwrap();
            let h = 1e-6;
            for c in 0..6 {
                let mut up = theta.clone();
                let mut dn = theta.clone();
                up[c] += h;
                dn[c] -= h;
                let fd = (model.mean(up.as_slice()).unwrap() - model.mean(dn.as_slice()).unwrap()) / (2.0 * h);
                for r in 0..5 {
                    assert_abs_diff_eq!(g[(r, c)], fd[r], epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn ambiguity_direction_examples() {
        let d = scalar_ambiguity_direction(&[1.0, 2.0], 1, 1).unwrap();
        let expect = DVector::from_vec(vec![1.0, -2.0]) / 5f64.sqrt();
        assert_abs_diff_eq!(d, expect, epsilon = 1e-15);
        assert_abs_diff_eq!(d.norm(), 1.0, epsilon = 1e-15);
        assert!(matches!(
            scalar_ambiguity_direction(&[0.0, 0.0], 1, 1),
            Err(CrbError::DegenerateParameter(_))
        ));
    }

    #[test]
    fn analytic_score_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = BlindChannelModel::new(2, 3, 0.7).unwrap();
        let gauss = model.to_gaussian();
        for _ in 0..10 {
            let theta = model.random_theta(&mut rng);
            let y = model.sample(&theta, &mut rng);
            assert!(model.log_density(&y, &theta).is_finite());
            assert_abs_diff_eq!(model.log_density(&y, &theta), gauss.log_density(&y, &theta), epsilon = 1e-12);
            let analytic = model.score(&y, &theta).unwrap();
            let fd = finite_difference_score(&model, &y, &theta);
            for i in 0..theta.len() {
                let scale = analytic[i].abs().max(1.0);
                assert!((analytic[i] - fd[i]).abs() <= 1e-4 * scale, "{} vs {}", analytic[i], fd[i]);
            }
            let gs = gauss.score(&y, &theta).unwrap();
            assert_abs_diff_eq!(gs, analytic, epsilon = 1e-12);
        }
    }

    #[test]
    fn gaussian_rejects_bad_covariance() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(GaussianMeanModel::location(bad), Err(CrbError::InvalidModel(_))));
        assert!(GaussianMeanModel::linear(DMatrix::identity(3, 2), DMatrix::identity(2, 2)).is_err());
        assert!(BlindChannelModel::new(2, 2, 0.0).is_err());
    }

    #[test]
    fn mean_score_is_zero_at_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let model = BlindChannelModel::new(2, 2, 1.0).unwrap();
        let theta = model.random_theta(&mut rng);
        let n = 20_000;
        let mut sum = DVector::zeros(4);
        let mut sumsq = DVector::zeros(4);
        for _ in 0..n {
            let y = model.sample(&theta, &mut rng);
            let s = model.score(&y, &theta).unwrap();
            sumsq += s.component_mul(&s);
            sum += s;
        }
        let nf = n as f64;
        for i in 0..4 {
            let mean = sum[i] / nf;
            let se = ((sumsq[i] / nf - mean * mean) / nf).sqrt();
            assert!(mean.abs() <= 3.0 * se, "component {i}: mean {mean}, se {se}");
        }
    }
}
