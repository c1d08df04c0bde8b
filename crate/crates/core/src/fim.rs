//! Fisher information `J = E[score scoreᵀ]` at an explicit evaluation point,
//! in closed form for Gaussian-mean models and by Monte-Carlo averaging of
//! score outer products for anything implementing [`Model`].

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::matlin::{eigh_desc, symmetrize, SymMatrix};
use crate::statmodel::{score_or_fd, BlindChannelModel, GaussianMeanModel, Model};
use crate::tol::DEFAULT_PSD_TOL_REL;
use crate::{CrbError, Result};

/// Minimum Monte-Carlo sample count.
pub const MIN_MC_SAMPLES: usize = 100;

/// Samples per independent random stream. Fixed so results do not depend
/// on the number of worker threads.
pub const MC_PARTITION: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FimMethod {
    Analytic,
    MonteCarlo,
}

impl FimMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FimMethod::Analytic => "analytic",
            FimMethod::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FimEstimate {
    pub matrix: SymMatrix,
    pub method: FimMethod,
    /// 0 for analytic estimates.
    pub n_samples: usize,
    /// Frobenius norm of the entrywise standard errors; 0 for analytic.
    pub std_err_bound: f64,
    /// Entrywise standard errors (zeros for analytic).
    pub std_err: DMatrix<f64>,
    /// Magnitude of the most negative eigenvalue clipped to zero.
    pub clipped: f64,
}

impl FimEstimate {
    fn analytic(matrix: SymMatrix) -> Self {
        let n = matrix.dim();
        Self {
            matrix,
            method: FimMethod::Analytic,
            n_samples: 0,
            std_err_bound: 0.0,
            std_err: DMatrix::zeros(n, n),
            clipped: 0.0,
        }
    }
}

fn check_theta(theta: &DVector<f64>, n: usize) -> Result<()> {
    if theta.len() != n {
        return Err(CrbError::InvalidInput(format!("θ has length {}, model expects {n}", theta.len())));
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(CrbError::InvalidInput("θ has non-finite entries".into()));
    }
    Ok(())
}

/// `J = Gᵀ Σ⁻¹ G` with `G` the mean Jacobian at `theta`.
pub fn fim_gaussian_mean(model: &GaussianMeanModel, theta: &DVector<f64>) -> Result<FimEstimate> {
    check_theta(theta, model.param_dim())?;
    let g = model.mean_jacobian(theta);
    if g.shape() != (model.obs_dim(), model.param_dim()) {
        return Err(CrbError::InvalidModel(format!(
            "mean Jacobian is {}x{}, expected {}x{}",
            g.nrows(),
            g.ncols(),
            model.obs_dim(),
            model.param_dim()
        )));
    }
    let j = g.transpose() * model.precision() * &g;
    Ok(FimEstimate::analytic(SymMatrix::new(j)?))
}

/// `J = GᵀG / σ²` for the blind channel model.
pub fn fim_blind_channel(model: &BlindChannelModel, theta: &DVector<f64>) -> Result<FimEstimate> {
    check_theta(theta, model.n_params())?;
    let g = model.mean_jacobian(theta.as_slice())?;
    Ok(FimEstimate::analytic(SymMatrix::new(g.transpose() * &g / model.noise_var)?))
}

#[derive(Clone, Debug)]
pub struct MonteCarloConfig {
    pub n_samples: usize,
    pub rng_seed: u64,
    /// Absolute clipping threshold; `None` means `1e-9 * sigma_max`.
    pub psd_tol: Option<f64>,
}

impl MonteCarloConfig {
    pub fn new(n_samples: usize, rng_seed: u64) -> Self {
        Self {
            n_samples,
            rng_seed,
            psd_tol: None,
        }
    }
}

struct PartialSums {
    sum: DMatrix<f64>,
    sumsq: DMatrix<f64>,
}

fn run_partition<M: Model + ?Sized>(
    model: &M,
    theta: &DVector<f64>,
    seed: u64,
    index: usize,
    count: usize,
) -> Result<PartialSums> {
    let n = theta.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut sum = DMatrix::zeros(n, n);
    let mut sumsq = DMatrix::zeros(n, n);
    for k in 0..count {
        let y = model.sample(theta, &mut rng);
        let s = score_or_fd(model, &y, theta);
        if s.len() != n || s.iter().any(|v| !v.is_finite()) {
            return Err(CrbError::NumericalFailure(format!(
                "non-finite score at sample {}",
                index * MC_PARTITION + k
            )));
        }
        let outer = &s * s.transpose();
        sumsq += outer.component_mul(&outer);
        sum += outer;
    }
    Ok(PartialSums { sum, sumsq })
}

/// Monte-Carlo FIM; bit-identical for a given seed regardless of threads.
pub fn fim_monte_carlo<M: Model + ?Sized>(
    model: &M,
    theta: &DVector<f64>,
    n_samples: usize,
    rng_seed: u64,
) -> Result<FimEstimate> {
    fim_monte_carlo_with(model, theta, &MonteCarloConfig::new(n_samples, rng_seed))
}

pub fn fim_monte_carlo_with<M: Model + ?Sized>(
    model: &M,
    theta: &DVector<f64>,
    cfg: &MonteCarloConfig,
) -> Result<FimEstimate> {
    check_theta(theta, model.param_dim())?;
    if cfg.n_samples < MIN_MC_SAMPLES {
        return Err(CrbError::InvalidInput(format!(
            "need at least {MIN_MC_SAMPLES} samples, got {}",
            cfg.n_samples
        )));
    }
    let n = theta.len();
    let parts = cfg.n_samples.div_ceil(MC_PARTITION);
    let partials: Vec<Result<PartialSums>> = (0..parts)
        .into_par_iter()
        .map(|p| {
            let count = MC_PARTITION.min(cfg.n_samples - p * MC_PARTITION);
            run_partition(model, theta, cfg.rng_seed, p, count)
        })
        .collect();

    let mut sum = DMatrix::zeros(n, n);
    let mut sumsq = DMatrix::zeros(n, n);
    for part in partials {
        let part = part?;
        sum += part.sum;
        sumsq += part.sumsq;
    }

    let count = cfg.n_samples as f64;
    let mean = symmetrize(sum / count);
    let var = DMatrix::from_fn(n, n, |i, j| {
        let m = mean[(i, j)];
        (sumsq[(i, j)] / count - m * m).max(0.0) * count / (count - 1.0)
    });
    let std_err = symmetrize(var.map(|v| (v / count).sqrt()));
    let std_err_bound = std_err.norm();

    let (matrix, clipped) = clip_negative(mean, cfg.psd_tol)?;
    Ok(FimEstimate {
        matrix,
        method: FimMethod::MonteCarlo,
        n_samples: cfg.n_samples,
        std_err_bound,
        std_err,
        clipped,
    })
}

/// Clips eigenvalues in `[-psd_tol, 0)` to zero. Anything more negative is
/// a numerical failure.
fn clip_negative(m: DMatrix<f64>, psd_tol: Option<f64>) -> Result<(SymMatrix, f64)> {
    let (values, vectors) = eigh_desc(&m);
    let Some(&min) = values.last() else {
        return Ok((SymMatrix::new(m)?, 0.0));
    };
    if min >= 0.0 {
        return Ok((SymMatrix::new(m)?, 0.0));
    }
    let sigma_max = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tol = psd_tol.unwrap_or(DEFAULT_PSD_TOL_REL * sigma_max);
    if min < -tol {
        return Err(CrbError::NumericalFailure(format!(
            "Monte-Carlo FIM has eigenvalue {min:e} below -psd_tol {tol:e}"
        )));
    }
    let d = DVector::from_iterator(values.len(), values.iter().map(|v| v.max(0.0)));
    let rebuilt = &vectors * DMatrix::from_diagonal(&d) * vectors.transpose();
    Ok((SymMatrix::new(rebuilt)?, -min))
}
