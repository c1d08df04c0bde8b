//! Reference computations for integration tests. Nothing here calls the
//! library's factorization code: spectra come from a cyclic Jacobi sweep,
//! singular values and pseudoinverses from a one-sided Jacobi SVD, and
//! null bases from Gram-Schmidt.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub const RANK_TOL_REL: f64 = 1e-10;

pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Random orthogonal `n x n` from QR of a Gaussian matrix.
pub fn orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    gaussian(n, n, rng).qr().q()
}

/// `Q diag(d) Qᵀ` for a random orthogonal `Q`.
pub fn with_spectrum<R: Rng + ?Sized>(d: &[f64], rng: &mut R) -> DMatrix<f64> {
    let q = orthogonal(d.len(), rng);
    let m = &q * DMatrix::from_diagonal(&DVector::from_column_slice(d)) * q.transpose();
    (&m + m.transpose()) * 0.5
}

/// PSD matrix of the given rank; nonzero eigenvalues log-uniform in [0.1, 10].
pub fn psd<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> DMatrix<f64> {
    let d: Vec<f64> = (0..n)
        .map(|i| if i < rank { 10f64.powf(rng.random_range(-1.0..1.0)) } else { 0.0 })
        .collect();
    with_spectrum(&d, rng)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigvals(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut v: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// One-sided (Hestenes) Jacobi SVD: `A V = W` with mutually orthogonal
/// columns of `W`; `σ_i = ‖w_i‖`. Sorted by descending `σ`.
pub struct JacobiSvd {
    pub sigma: Vec<f64>,
    /// `w_i / σ_i` (zero column when `σ_i = 0`).
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

pub fn jacobi_svd(a: &DMatrix<f64>) -> JacobiSvd {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let (x, y) = (w[(k, p)], w[(k, q)]);
                    w[(k, p)] = c * x - s * y;
                    w[(k, q)] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * x - s * y;
                    v[(k, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|i| w.column(i).norm()).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sigma: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let u = DMatrix::from_fn(m, n, |r, c| {
        let i = order[c];
        if norms[i] > 0.0 {
            w[(r, i)] / norms[i]
        } else {
            0.0
        }
    });
    let v = v.select_columns(&order);
    JacobiSvd { sigma, u, v }
}

/// Rank with cutoff `σ_max · max(m, n) · 1e-10`.
pub fn oracle_rank(a: &DMatrix<f64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sigma = jacobi_svd(a).sigma;
    let cutoff = sigma[0] * a.nrows().max(a.ncols()) as f64 * RANK_TOL_REL;
    sigma.iter().filter(|&&s| s > cutoff).count()
}

pub struct SvdOracle {
    pub pinv: DMatrix<f64>,
    pub rank: usize,
    /// Singular vectors whose singular value is at or below the cutoff.
    pub kernel: DMatrix<f64>,
    pub range: DMatrix<f64>,
}

/// Pseudoinverse `Σ v_i u_iᵀ / σ_i` of a symmetric matrix from
/// [`jacobi_svd`], cutoff `σ_max · n · 1e-10`.
pub fn svd_oracle(a: &DMatrix<f64>) -> SvdOracle {
    let n = a.nrows();
    let svd = jacobi_svd(a);
    let cutoff = svd.sigma.first().copied().unwrap_or(0.0) * n as f64 * RANK_TOL_REL;
    let rank = svd.sigma.iter().filter(|&&s| s > cutoff).count();
    let mut pinv = DMatrix::zeros(n, n);
    for i in 0..rank {
        pinv += svd.v.column(i) * svd.u.column(i).transpose() / svd.sigma[i];
    }
    SvdOracle {
        pinv: (&pinv + pinv.transpose()) * 0.5,
        rank,
        kernel: svd.v.columns(rank, n - rank).into_owned(),
        range: svd.v.columns(0, rank).into_owned(),
    }
}

/// Orthonormal basis of `ker F` by Gram-Schmidt: orthonormalize the rows
/// of `F`, then greedily add the unit vector with the largest residual.
pub fn gs_null_basis(f: &DMatrix<f64>) -> DMatrix<f64> {
    let n = f.ncols();
    let scale = f.norm().max(f64::MIN_POSITIVE);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let orth = |v: &mut DVector<f64>, basis: &[DVector<f64>]| {
        for _ in 0..2 {
            for b in basis {
                let c = b.dot(v);
                *v -= b * c;
            }
        }
    };
    for r in 0..f.nrows() {
        let mut v = f.row(r).transpose();
        orth(&mut v, &basis);
        if v.norm() > 1e-10 * scale {
            basis.push(v.normalize());
        }
    }
    let row_dim = basis.len();
    while basis.len() < n {
        let best = (0..n)
            .map(|i| {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                orth(&mut e, &basis);
                e
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap();
        basis.push(best.normalize());
    }
    let cols: Vec<DVector<f64>> = basis.into_iter().skip(row_dim).collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// `U (UᵀJU)⁻¹ Uᵀ` with `U` from [`gs_null_basis`], or `None` when the
/// restriction is singular relative to `λ_max(J) · n · 1e-10`.
pub fn constrained_bound_oracle(j: &DMatrix<f64>, f: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = j.nrows();
    let u = gs_null_basis(f);
    if u.ncols() == 0 {
        return Some(DMatrix::zeros(n, n));
    }
    let r = u.transpose() * j * &u;
    let r = (&r + r.transpose()) * 0.5;
    let lmax = jacobi_eigvals(j).first().copied().unwrap_or(0.0).abs();
    if *jacobi_eigvals(&r).last().unwrap() <= lmax * n as f64 * RANK_TOL_REL {
        return None;
    }
    let b = &u * r.try_inverse().unwrap() * u.transpose();
    Some((&b + b.transpose()) * 0.5)
}

/// Smallest eigenvalue of `UᵀJU` with `U` from [`gs_null_basis`].
pub fn restriction_min_eig(j: &DMatrix<f64>, f: &DMatrix<f64>) -> f64 {
    let u = gs_null_basis(f);
    if u.ncols() == 0 {
        return f64::INFINITY;
    }
    let r = u.transpose() * j * &u;
    *jacobi_eigvals(&((&r + r.transpose()) * 0.5)).last().unwrap()
}

/// Spectrum of `U(UᵀJU)⁻¹Uᵀ`, descending: reciprocals of the Jacobi
/// eigenvalues of `UᵀJU` (Gram-Schmidt `U`), padded with zeros.
pub fn constrained_spectrum_oracle(j: &DMatrix<f64>, f: &DMatrix<f64>) -> Vec<f64> {
    let u = gs_null_basis(f);
    let r = u.transpose() * j * &u;
    reciprocals_padded(&jacobi_eigvals(&((&r + r.transpose()) * 0.5)), j.nrows())
}

/// Spectrum of `J†`, descending, from the Jacobi SVD of `J`.
pub fn pinv_spectrum_oracle(j: &DMatrix<f64>) -> Vec<f64> {
    let svd = jacobi_svd(j);
    let cutoff = svd.sigma.first().copied().unwrap_or(0.0) * j.nrows() as f64 * RANK_TOL_REL;
    let kept: Vec<f64> = svd.sigma.into_iter().filter(|&s| s > cutoff).collect();
    reciprocals_padded(&kept, j.nrows())
}

fn reciprocals_padded(values: &[f64], n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = values.iter().map(|v| 1.0 / v).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out.resize(n, 0.0);
    out
}

/// Blind channel FIM `GᵀG/σ²`, where `G = [∂y/∂s | ∂y/∂h]` is written out
/// from `y_k = Σ s_i h_{k-i}`.
pub fn blind_channel_fim(s: &[f64], h: &[f64], noise_var: f64) -> DMatrix<f64> {
    let (ls, lh) = (s.len(), h.len());
    let k = ls + lh - 1;
    let mut g = DMatrix::<f64>::zeros(k, ls + lh);
    for i in 0..ls {
        for l in 0..lh {
            g[(i + l, i)] += h[l];
            g[(i + l, ls + l)] += s[i];
        }
    }
    g.transpose() * g / noise_var
}

pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}
