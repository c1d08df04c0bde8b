//! Unconstrained and constrained Cramér-Rao bounds.
//!
//! Unconstrained: `cov ≥ J†`. Under a constraint with Jacobian `F` and
//! orthonormal tangent basis `U` (`F U = 0`), the bound is
//! `U (UᵀJU)⁻¹ Uᵀ`, finite iff `UᵀJU` is nonsingular.

use nalgebra::DMatrix;

use crate::matlin::{
    eigh_desc, eigvals_desc, invert, null_complement, pinv_via_basis_with, ranked_svd, EigenSpectrum, SymMatrix,
};
use crate::tol::Tolerances;
use crate::{CrbError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    None,
    Affine,
    JacobianOnly,
}

impl ConstraintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::None => "none",
            ConstraintKind::Affine => "affine",
            ConstraintKind::JacobianOnly => "jacobian-only",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CrbReport {
    /// `None` when the bound is infinite.
    pub bound: Option<SymMatrix>,
    pub exists: bool,
    pub trace: Option<f64>,
    pub eigenvalues: Option<EigenSpectrum>,
    pub constraint_used: ConstraintKind,
    /// `U Uᵀ`; the identity for the unconstrained bound.
    pub u_projector: SymMatrix,
    /// `J` itself is singular, so no unbiased estimator of θ has finite
    /// variance without a constraint. Informational only.
    pub singular_fim: bool,
}

impl CrbReport {
    fn from_bound(bound: Option<SymMatrix>, kind: ConstraintKind, u_projector: SymMatrix, singular_fim: bool) -> Result<Self> {
        let (trace, eigenvalues) = match &bound {
            Some(b) => (Some(b.trace()), Some(eigvals_desc(b)?)),
            None => (None, None),
        };
        Ok(Self {
            exists: bound.is_some(),
            bound,
            trace,
            eigenvalues,
            constraint_used: kind,
            u_projector,
            singular_fim,
        })
    }
}

/// Result of testing `UᵀJU` for singularity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestrictionTest {
    pub nonsingular: bool,
    /// Smallest eigenvalue of `UᵀJU` (`+inf` when `U` has no columns).
    pub min_eig: f64,
    /// Eigenvalues at or below this count as zero: `λ_max(J) · n · rank_tol`.
    pub cutoff: f64,
}

fn spectral_scale(j: &SymMatrix) -> f64 {
    eigh_desc(j.as_matrix()).0.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Decides whether `UᵀJU` is nonsingular. The cutoff is measured against
/// the scale of `J`, not of `UᵀJU`, so a basis lying almost inside
/// `ker J` is classified as singular.
pub fn restriction_test(j: &SymMatrix, u: &DMatrix<f64>, tol: &Tolerances) -> RestrictionTest {
    let cutoff = tol.rank_cutoff(spectral_scale(j), j.dim());
    if u.ncols() == 0 {
        return RestrictionTest {
            nonsingular: true,
            min_eig: f64::INFINITY,
            cutoff,
        };
    }
    let utju = u.transpose() * j.as_matrix() * u;
    let (values, _) = eigh_desc(&crate::matlin::symmetrize(utju));
    let min_eig = *values.last().expect("nonempty");
    RestrictionTest {
        nonsingular: min_eig > cutoff,
        min_eig,
        cutoff,
    }
}

fn check_dims(j: &SymMatrix, u: &DMatrix<f64>) -> Result<()> {
    if u.nrows() != j.dim() {
        return Err(CrbError::InvalidInput(format!(
            "basis has {} rows but J is {}x{}",
            u.nrows(),
            j.dim(),
            j.dim()
        )));
    }
    Ok(())
}

/// `V (VᵀJV)⁻¹ Vᵀ` for any orthonormal `V`, or `None` if `VᵀJV` is
/// numerically singular.
pub fn restricted_bound(j: &SymMatrix, v: &DMatrix<f64>, tol: &Tolerances) -> Result<Option<SymMatrix>> {
    check_dims(j, v)?;
    if !restriction_test(j, v, tol).nonsingular {
        return Ok(None);
    }
    if v.ncols() == 0 {
        return Ok(Some(SymMatrix::zeros(j.dim())));
    }
    let inv = invert(&(v.transpose() * j.as_matrix() * v))?;
    Ok(Some(SymMatrix::new(v * inv * v.transpose())?))
}

pub fn unconstrained_crb(j: &SymMatrix, tol: &Tolerances) -> Result<CrbReport> {
    let svd = ranked_svd(j, tol.rank_tol_rel)?;
    let bound = pinv_via_basis_with(j, tol.rank_tol_rel)?;
    CrbReport::from_bound(
        Some(bound),
        ConstraintKind::None,
        SymMatrix::identity(j.dim()),
        svd.rank < j.dim(),
    )
}

/// Constrained bound from the constraint Jacobian at the evaluation point.
pub fn constrained_crb(j: &SymMatrix, f_jac: &DMatrix<f64>, tol: &Tolerances) -> Result<CrbReport> {
    constrained_crb_as(j, f_jac, ConstraintKind::JacobianOnly, tol)
}

pub(crate) fn constrained_crb_as(
    j: &SymMatrix,
    f_jac: &DMatrix<f64>,
    kind: ConstraintKind,
    tol: &Tolerances,
) -> Result<CrbReport> {
    if f_jac.ncols() != j.dim() {
        return Err(CrbError::InvalidInput(format!(
            "constraint Jacobian has {} columns but J is {}x{}",
            f_jac.ncols(),
            j.dim(),
            j.dim()
        )));
    }
    let u = null_complement(f_jac, tol.rank_tol_rel)?;
    let bound = restricted_bound(j, u.as_matrix(), tol)?;
    let singular_fim = ranked_svd(j, tol.rank_tol_rel)?.rank < j.dim();
    CrbReport::from_bound(bound, kind, u.projector(), singular_fim)
}

/// True iff the constrained bound is finite.
pub fn crb_exists(j: &SymMatrix, f_jac: &DMatrix<f64>, tol: &Tolerances) -> Result<bool> {
    if f_jac.ncols() != j.dim() {
        return Err(CrbError::InvalidInput("constraint Jacobian width must equal dim(J)".into()));
    }
    let u = null_complement(f_jac, tol.rank_tol_rel)?;
    Ok(restriction_test(j, u.as_matrix(), tol).nonsingular)
}
