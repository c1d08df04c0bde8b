//! Dense symmetric linear algebra: rank-revealing factorizations, the
//! basis form of the Moore-Penrose pseudoinverse, spectra, PSD tests and
//! orthonormal complements of constraint Jacobians.
//!
//! The symmetric eigensolver comes from `nalgebra`; singular values are
//! derived from it. Everything that decides rank, picks bases, or
//! assembles bounds lives here.

pub mod matx;
pub mod random;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::tol::{Tolerances, DEFAULT_RANK_TOL_REL};
use crate::{CrbError, Result};

/// Dense real symmetric matrix. Entries are symmetrized on construction so
/// `a[(i, j)] == a[(j, i)]` holds bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(CrbError::InvalidMatrix(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(CrbError::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self(symmetrize(m)))
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(CrbError::InvalidMatrix(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Frobenius distance to `other`.
    pub fn distance(&self, other: &SymMatrix) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        Self::new(&self.0 * factor)
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(CrbError::InvalidInput(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Self::new(&self.0 - &other.0)
    }
}

impl std::ops::Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// `(m + mᵀ) / 2`, written so the result is exactly symmetric.
pub fn symmetrize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Eigenvalues in descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSpectrum {
    pub values: Vec<f64>,
}

impl EigenSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn min(&self) -> Option<f64> {
        self.values.last().copied()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Rank-revealing factorization `M = U_r diag(sigma) U_rᵀ` of a symmetric
/// nonnegative-definite matrix, with `u_bar` spanning the kernel.
#[derive(Clone, Debug)]
pub struct RankedSvd {
    pub u_r: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub u_bar: DMatrix<f64>,
    pub rank: usize,
}

impl RankedSvd {
    pub fn nullity(&self) -> usize {
        self.u_bar.ncols()
    }

    pub fn dim(&self) -> usize {
        self.u_r.nrows()
    }

    pub fn range_projector(&self) -> DMatrix<f64> {
        &self.u_r * self.u_r.transpose()
    }

    pub fn kernel_projector(&self) -> DMatrix<f64> {
        &self.u_bar * self.u_bar.transpose()
    }
}

/// Orthonormal basis `U` (n x k) of the tangent space of a constraint:
/// `UᵀU = I` and `F U = 0`.
#[derive(Clone, Debug)]
pub struct NullBasis(DMatrix<f64>);

impl NullBasis {
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn width(&self) -> usize {
        self.0.ncols()
    }

    /// `U Uᵀ`, the basis-independent record of the tangent space.
    pub fn projector(&self) -> SymMatrix {
        SymMatrix(symmetrize(&self.0 * self.0.transpose()))
    }
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CrbError::InvalidMatrix("non-finite entry".into()))
    }
}

/// Symmetric eigendecomposition sorted by descending eigenvalue.
pub(crate) fn eigh_desc(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Singular values (descending) and matching right singular vectors of a
/// rectangular matrix, from the symmetric eigenproblem of
/// `[[0, A], [Aᵀ, 0]]`, whose eigenvalues are `±σ_i` plus zeros.
///
/// nalgebra's bidiagonal SVD returns wrong singular values for some
/// rank-deficient inputs, so it is not used anywhere in this crate.
fn embedded_svd(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return (Vec::new(), DMatrix::zeros(n, 0));
    }
    let mut h = DMatrix::zeros(m + n, m + n);
    h.view_mut((0, m), (m, n)).copy_from(a);
    h.view_mut((m, 0), (n, m)).copy_from(&a.transpose());
    let (values, vectors) = eigh_desc(&h);
    let sigma: Vec<f64> = values[..k].iter().map(|v| v.max(0.0)).collect();
    let v = DMatrix::from_fn(n, k, |r, c| vectors[(m + r, c)]);
    let v = DMatrix::from_columns(
        &v.column_iter()
            .map(|col| {
                let norm = col.norm();
                if norm > 0.0 {
                    col / norm
                } else {
                    col.into_owned()
                }
            })
            .collect::<Vec<_>>(),
    );
    (sigma, v)
}

/// Singular values of a rectangular matrix, descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    embedded_svd(a).0
}

/// Numerical rank of an arbitrary rectangular matrix.
pub fn numerical_rank(a: &DMatrix<f64>, rank_tol_rel: f64) -> usize {
    let sv = singular_values(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    let cutoff = smax * a.nrows().max(a.ncols()) as f64 * rank_tol_rel;
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Rank-revealing decomposition of a symmetric matrix. Singular values
/// `<= sigma_max * n * rank_tol_rel` are treated as zero.
pub fn ranked_svd(m: &SymMatrix, rank_tol_rel: f64) -> Result<RankedSvd> {
    if !(rank_tol_rel > 0.0) {
        return Err(CrbError::InvalidInput(format!(
            "rank tolerance must be positive, got {rank_tol_rel}"
        )));
    }
    check_finite(m.as_matrix())?;
    let n = m.dim();
    let (values, vectors) = eigh_desc(m.as_matrix());

    // Singular values of a symmetric matrix are |eigenvalues|.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
    let sigma_max = order.first().map_or(0.0, |&i| values[i].abs());
    let cutoff = sigma_max * n as f64 * rank_tol_rel;
    let rank = order.iter().filter(|&&i| values[i].abs() > cutoff).count();

    let u_r = DMatrix::from_fn(n, rank, |r, c| vectors[(r, order[c])]);
    let u_bar = DMatrix::from_fn(n, n - rank, |r, c| vectors[(r, order[rank + c])]);
    let sigma = order[..rank].iter().map(|&i| values[i].abs()).collect();
    Ok(RankedSvd {
        u_r,
        sigma,
        u_bar,
        rank,
    })
}

/// `U_r (U_rᵀ M U_r)^{-1} U_rᵀ` with the default rank tolerance.
pub fn pinv_via_basis(m: &SymMatrix) -> Result<SymMatrix> {
    pinv_via_basis_with(m, DEFAULT_RANK_TOL_REL)
}

pub fn pinv_via_basis_with(m: &SymMatrix, rank_tol_rel: f64) -> Result<SymMatrix> {
    let svd = ranked_svd(m, rank_tol_rel)?;
    if svd.rank == 0 {
        return Ok(SymMatrix::zeros(m.dim()));
    }
    let restricted = svd.u_r.transpose() * m.as_matrix() * &svd.u_r;
    let inv = invert(&restricted)?;
    SymMatrix::new(&svd.u_r * inv * svd.u_r.transpose())
}

/// Inverse of a small nonsingular matrix.
pub(crate) fn invert(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    a.clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|v| v.is_finite()))
        .ok_or_else(|| CrbError::NumericalFailure("matrix inversion failed".into()))
}

pub fn eigvals_desc(m: &SymMatrix) -> Result<EigenSpectrum> {
    check_finite(m.as_matrix())?;
    Ok(EigenSpectrum {
        values: eigh_desc(m.as_matrix()).0,
    })
}

/// True iff the smallest eigenvalue is `>= -psd_tol`. With `psd_tol = None`
/// the tolerance is `1e-9 * sigma_max`.
pub fn is_psd(m: &SymMatrix, psd_tol: Option<f64>) -> Result<bool> {
    let spec = eigvals_desc(m)?;
    let Some(min) = spec.min() else {
        return Ok(true);
    };
    let sigma_max = spec.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tol = Tolerances {
        psd_tol,
        ..Tolerances::default()
    }
    .psd_tol_for(sigma_max);
    Ok(min >= -tol)
}

/// Orthonormal basis of `ker(f_jac)` for a full-row-rank Jacobian.
pub fn null_complement(f_jac: &DMatrix<f64>, rank_tol_rel: f64) -> Result<NullBasis> {
    check_finite(f_jac)?;
    let m = f_jac.nrows();
    let (basis, rank) = kernel_basis(f_jac, rank_tol_rel);
    if rank < m {
        return Err(CrbError::RankDeficientConstraint { rank, expected: m });
    }
    Ok(NullBasis(basis))
}

/// Orthonormal kernel basis of any `m x n` matrix plus its numerical rank.
/// The kernel has dimension `n - rank`.
pub(crate) fn kernel_basis(a: &DMatrix<f64>, rank_tol_rel: f64) -> (DMatrix<f64>, usize) {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return (DMatrix::identity(n, n), 0);
    }
    let (sigma, v) = embedded_svd(a);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let cutoff = smax * a.nrows().max(n) as f64 * rank_tol_rel;
    let rank = sigma.iter().filter(|&&s| s > cutoff).count();

    // The complement projector has eigenvalues exactly 0 or 1, so its
    // top eigenvectors give a well-separated orthonormal kernel basis.
    let row_basis = v.columns(0, rank);
    let projector = symmetrize(DMatrix::identity(n, n) - row_basis * row_basis.transpose());
    let (_, vectors) = eigh_desc(&projector);
    (vectors.columns(0, n - rank).into_owned(), rank)
}

/// Max entrywise deviation of `VᵀV` from the identity.
pub fn orthonormality_error(v: &DMatrix<f64>) -> f64 {
    let k = v.ncols();
    (v.transpose() * v - DMatrix::<f64>::identity(k, k)).amax()
}
