//! Numerical thresholds shared by every routine in the crate.

/// Relative cutoff for numerical rank. Singular values at or below
/// `sigma_max * n * rank_tol_rel` count as zero.
pub const DEFAULT_RANK_TOL_REL: f64 = 1e-10;

/// Relative factor for the PSD test when no absolute tolerance is given:
/// `psd_tol = DEFAULT_PSD_TOL_REL * sigma_max`.
pub const DEFAULT_PSD_TOL_REL: f64 = 1e-9;

/// Absolute slack allowed on trace and eigenvalue margins.
pub const DEFAULT_MARGIN_TOL: f64 = 1e-9;

/// Orthonormality tolerance for user-supplied bases (entrywise).
pub const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rank_tol_rel: f64,
    /// Absolute PSD tolerance. `None` scales with the matrix.
    pub psd_tol: Option<f64>,
    pub margin_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol_rel: DEFAULT_RANK_TOL_REL,
            psd_tol: None,
            margin_tol: DEFAULT_MARGIN_TOL,
        }
    }
}

impl Tolerances {
    /// Rank cutoff for a matrix with largest singular value `sigma_max`
    /// and largest dimension `dim`.
    pub fn rank_cutoff(&self, sigma_max: f64, dim: usize) -> f64 {
        sigma_max * dim as f64 * self.rank_tol_rel
    }

    pub fn psd_tol_for(&self, sigma_max: f64) -> f64 {
        self.psd_tol.unwrap_or(DEFAULT_PSD_TOL_REL * sigma_max)
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.rank_tol_rel > 0.0
            && self.rank_tol_rel.is_finite()
            && self.margin_tol > 0.0
            && self.margin_tol.is_finite()
            && self.psd_tol.is_none_or(|t| t > 0.0 && t.is_finite());
        if ok {
            Ok(())
        } else {
            Err(crate::CrbError::InvalidInput(format!(
                "tolerances must be positive and finite: {self:?}"
            )))
        }
    }
}
