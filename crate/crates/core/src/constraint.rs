//! Constraint functions `f(θ) = 0`, represented by their Jacobian at the
//! evaluation point (plus an offset for affine constraints).
//!
//! A constraint is *minimum* for a singular FIM `J` when
//! 1. `F = ∂f/∂θᵀ` has full row rank,
//! 2. `UᵀJU` is nonsingular for the tangent basis `U`, and
//! 3. `rank F + rank J = n`.
//!
//! Among minimum constraints, `F = Ū_rᵀ` (rows spanning `ker J`) gives the
//! smallest total variance, and its bound is exactly `J†`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::crb::{constrained_crb_as, restriction_test, ConstraintKind, CrbReport};
use crate::matlin::random::random_orthonormal;
use crate::matlin::{kernel_basis, matx, numerical_rank, ranked_svd, SymMatrix};
use crate::tol::Tolerances;
use crate::{CrbError, Result};

/// Residual allowed on `F θ₀ + C` for affine constraints.
pub const AFFINE_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSpec {
    pub f_jac: DMatrix<f64>,
    /// `C` in `f(θ) = F θ + C`; present only for affine constraints.
    pub offset: Option<DVector<f64>>,
    pub label: String,
}

impl ConstraintSpec {
    /// A general constraint known only through its Jacobian.
    pub fn jacobian(f_jac: DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        if f_jac.nrows() > f_jac.ncols() {
            return Err(CrbError::InvalidInput(format!(
                "constraint has {} rows but only {} parameters",
                f_jac.nrows(),
                f_jac.ncols()
            )));
        }
        if f_jac.iter().any(|v| !v.is_finite()) {
            return Err(CrbError::InvalidInput("constraint Jacobian has non-finite entries".into()));
        }
        Ok(Self {
            f_jac,
            offset: None,
            label: label.into(),
        })
    }

    /// Affine constraint `F θ + C = 0`, which must hold at `theta0`.
    pub fn affine(f_jac: DMatrix<f64>, offset: DVector<f64>, theta0: &DVector<f64>, label: impl Into<String>) -> Result<Self> {
        let mut spec = Self::jacobian(f_jac, label)?;
        if offset.len() != spec.m() {
            return Err(CrbError::InvalidInput(format!(
                "offset has length {} but constraint has {} rows",
                offset.len(),
                spec.m()
            )));
        }
        spec.offset = Some(offset);
        spec.check_holds_at(theta0)?;
        Ok(spec)
    }

    /// Affine constraint through `theta0` with the given Jacobian.
    pub fn affine_through(f_jac: DMatrix<f64>, theta0: &DVector<f64>, label: impl Into<String>) -> Result<Self> {
        if theta0.len() != f_jac.ncols() {
            return Err(CrbError::InvalidInput("θ₀ length must match the constraint width".into()));
        }
        let offset = -(&f_jac * theta0);
        Self::affine(f_jac, offset, theta0, label)
    }

    pub fn m(&self) -> usize {
        self.f_jac.nrows()
    }

    pub fn n(&self) -> usize {
        self.f_jac.ncols()
    }

    pub fn kind(&self) -> ConstraintKind {
        if self.offset.is_some() {
            ConstraintKind::Affine
        } else {
            ConstraintKind::JacobianOnly
        }
    }

    /// `f(θ) = F θ + C` for affine constraints.
    pub fn evaluate(&self, theta: &DVector<f64>) -> Option<DVector<f64>> {
        self.offset.as_ref().map(|c| &self.f_jac * theta + c)
    }

    pub fn check_holds_at(&self, theta0: &DVector<f64>) -> Result<()> {
        if theta0.len() != self.n() {
            return Err(CrbError::InvalidInput(format!(
                "θ₀ has length {}, constraint expects {}",
                theta0.len(),
                self.n()
            )));
        }
        if let Some(c) = &self.offset {
            let residual = (&self.f_jac * theta0 + c).amax();
            let scale = c.amax().max(1.0);
            if residual > AFFINE_RESIDUAL_TOL * scale {
                return Err(CrbError::InvalidInput(format!(
                    "affine constraint does not vanish at θ₀ (residual {residual:e})"
                )));
            }
        }
        Ok(())
    }

    pub fn crb(&self, j: &SymMatrix, tol: &Tolerances) -> Result<CrbReport> {
        constrained_crb_as(j, &self.f_jac, self.kind(), tol)
    }

    /// matx block for `F`, then an `offset` line if the constraint is affine.
    pub fn to_matx(&self) -> String {
        let mut out = matx::to_string(&self.f_jac);
        if let Some(c) = &self.offset {
            let vals: Vec<String> = c.iter().map(|&v| matx::fmt_f64(v)).collect();
            let _ = writeln!(out, "offset {}", vals.join(" "));
        }
        out
    }

    pub fn parse_matx(text: &str, label: impl Into<String>) -> Result<Self> {
        let (f_jac, consumed) = matx::parse_prefix(text)?;
        let mut offset = None;
        for (i, line) in text.lines().enumerate().skip(consumed) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let rest = line.strip_prefix("offset").filter(|_| offset.is_none()).ok_or_else(|| CrbError::Parse {
                line: i + 1,
                msg: format!("unexpected content `{line}`"),
            })?;
            let vals = rest
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| CrbError::Parse {
                        line: i + 1,
                        msg: format!("bad number `{t}`"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != f_jac.nrows() {
                return Err(CrbError::Parse {
                    line: i + 1,
                    msg: format!("offset needs {} values, got {}", f_jac.nrows(), vals.len()),
                });
            }
            offset = Some(DVector::from_vec(vals));
        }
        let mut spec = Self::jacobian(f_jac, label)?;
        spec.offset = offset;
        Ok(spec)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_matx())?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinConstraintDetails {
    pub m: usize,
    pub n: usize,
    pub rank_f: usize,
    pub rank_j: usize,
    /// Smallest eigenvalue of `UᵀJU` (`+inf` if `U` is empty).
    pub restriction_min_eig: f64,
    pub restriction_cutoff: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinConstraintReport {
    pub full_rank_jacobian: bool,
    pub utju_nonsingular: bool,
    pub rank_sum_is_n: bool,
    pub is_minimum: bool,
    pub details: MinConstraintDetails,
}

pub fn check_minimum_constraint(j: &SymMatrix, spec: &ConstraintSpec, tol: &Tolerances) -> Result<MinConstraintReport> {
    let n = j.dim();
    if spec.n() != n {
        return Err(CrbError::InvalidInput(format!(
            "constraint width {} does not match dim(J) = {n}",
            spec.n()
        )));
    }
    let rank_j = ranked_svd(j, tol.rank_tol_rel)?.rank;
    let rank_f = numerical_rank(&spec.f_jac, tol.rank_tol_rel);
    // With a rank-deficient F the tangent space is still ker F, of
    // dimension n - rank F.
    let (u, _) = kernel_basis(&spec.f_jac, tol.rank_tol_rel);
    let test = restriction_test(j, &u, tol);

    let full_rank_jacobian = rank_f == spec.m();
    let utju_nonsingular = test.nonsingular;
    let rank_sum_is_n = rank_f + rank_j == n;
    Ok(MinConstraintReport {
        full_rank_jacobian,
        utju_nonsingular,
        rank_sum_is_n,
        is_minimum: full_rank_jacobian && utju_nonsingular && rank_sum_is_n,
        details: MinConstraintDetails {
            m: spec.m(),
            n,
            rank_f,
            rank_j,
            restriction_min_eig: test.min_eig,
            restriction_cutoff: test.cutoff,
        },
    })
}

/// The trace-optimal affine constraint `Ū_rᵀ θ + C = 0` through `theta0`,
/// with `C = -Ū_rᵀ θ₀`.
pub fn optimal_affine_constraint(j: &SymMatrix, theta0: &DVector<f64>, tol: &Tolerances) -> Result<ConstraintSpec> {
    if theta0.len() != j.dim() {
        return Err(CrbError::InvalidInput(format!(
            "θ₀ has length {} but J is {}x{}",
            theta0.len(),
            j.dim(),
            j.dim()
        )));
    }
    let svd = ranked_svd(j, tol.rank_tol_rel)?;
    if svd.rank == j.dim() {
        return Err(CrbError::FullRankFim { rank: svd.rank });
    }
    ConstraintSpec::affine_through(svd.u_bar.transpose(), theta0, "optimal-affine")
}

#[derive(Clone, Debug)]
pub struct SampledConstraint {
    pub spec: ConstraintSpec,
    /// Draws rejected immediately before this one was accepted.
    pub retries: usize,
}

/// Draws `count` random minimum constraints with `n - rank J` rows. Each
/// Jacobian is `Qᵀ` for `Q` uniform on the Stiefel manifold, redrawn until
/// it passes [`check_minimum_constraint`].
pub fn sample_minimum_constraints(j: &SymMatrix, count: usize, rng_seed: u64, tol: &Tolerances) -> Result<Vec<SampledConstraint>> {
    if count == 0 {
        return Err(CrbError::InvalidInput("count must be at least 1".into()));
    }
    let n = j.dim();
    let rank = ranked_svd(j, tol.rank_tol_rel)?.rank;
    if rank == n {
        return Err(CrbError::FullRankFim { rank });
    }
    let m = n - rank;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let budget = 100 * count;
    let mut out = Vec::with_capacity(count);
    let mut streak = 0usize;
    while out.len() < count {
        let q = random_orthonormal(n, m, &mut rng);
        let spec = ConstraintSpec::jacobian(q.transpose(), format!("sampled-{}", out.len()))?;
        if check_minimum_constraint(j, &spec, tol)?.is_minimum {
            out.push(SampledConstraint { spec, retries: streak });
            streak = 0;
        } else {
            streak += 1;
            if streak >= budget {
                return Err(CrbError::SamplingExhausted { attempts: streak });
            }
        }
    }
    Ok(out)
}
