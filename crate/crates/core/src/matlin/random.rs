//! Random test matrices: Haar-distributed orthonormal frames and PSD
//! matrices of prescribed rank `Q diag(d) Qᵀ`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::SymMatrix;

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `n x k` matrix with orthonormal columns, uniform on the Stiefel manifold.
pub fn random_orthonormal<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(k <= n, "cannot draw {k} orthonormal columns in dimension {n}");
    if k == 0 {
        return DMatrix::zeros(n, 0);
    }
    let g = gaussian_matrix(n, k, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    // Sign-fix against R's diagonal so the distribution is Haar.
    for c in 0..k {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

/// Random PSD matrix `Q diag(d) Qᵀ` with exactly `rank` nonzero eigenvalues
/// drawn log-uniformly from `[lo, hi]`.
pub fn random_psd<R: Rng + ?Sized>(n: usize, rank: usize, lo: f64, hi: f64, rng: &mut R) -> SymMatrix {
    assert!(rank <= n && lo > 0.0 && hi >= lo);
    let d: Vec<f64> = (0..n)
        .map(|i| {
            if i < rank {
                (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
            } else {
                0.0
            }
        })
        .collect();
    psd_with_spectrum(&d, rng)
}

/// `Q diag(d) Qᵀ` for a Haar-random orthogonal `Q`.
pub fn psd_with_spectrum<R: Rng + ?Sized>(d: &[f64], rng: &mut R) -> SymMatrix {
    let n = d.len();
    let q = random_orthonormal(n, n, rng);
    let m = &q * DMatrix::from_diagonal(&DVector::from_column_slice(d)) * q.transpose();
    SymMatrix::new(m).expect("finite by construction")
}
