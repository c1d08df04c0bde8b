//! Numerical certificates for the pseudoinverse results:
//!
//! * trace bound: `tr(U(UᵀJU)⁻¹Uᵀ) ≥ tr(J†)` for every minimum constraint;
//! * eigenvalue dominance: `λ_i(V(VᵀJV)⁻¹Vᵀ) ≥ λ_i(J†)` for orthonormal
//!   `V` of width `rank J`;
//! * Poincaré separation: `λ_i(VᵀJV) ≤ λ_i(J)`;
//! * equivalence: every full-rank `F` with `F U_r = 0` yields `J†`;
//! * minimum rank: fewer than `n - rank J` constraints leave `UᵀJU`
//!   singular, while `n - rank J` suffice;
//! * counterexample: eigenvalue dominance does not lift to Loewner order.
//!
//! Each check returns a [`TheoremCertificate`]; margins are signed slacks
//! (negative means violated).

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constraint::{check_minimum_constraint, optimal_affine_constraint, sample_minimum_constraints, ConstraintSpec};
use crate::crb::{restricted_bound, restriction_test};
use crate::matlin::random::{gaussian_matrix, random_orthonormal, random_psd};
use crate::matlin::{
    eigh_desc, eigvals_desc, is_psd, matx, null_complement, numerical_rank, orthonormality_error, pinv_via_basis_with,
    ranked_svd, singular_values, SymMatrix,
};
use crate::seed::derive_seed;
use crate::tol::{Tolerances, ORTHONORMAL_TOL};
use crate::{CrbError, Result};

/// CSV header comment shared by every report the crate writes.
pub const CSV_VERSION_LINE: &str = "# crb-kit v1";

/// `D = V(VᵀJV)⁻¹Vᵀ - J†` must have an eigenvalue below this to count as
/// a Loewner-order violation.
pub const COUNTEREXAMPLE_NEG_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TheoremId {
    TraceBound,
    EigenDominance,
    Poincare,
    Equivalence,
    MinRank,
    Counterexample,
}

impl TheoremId {
    pub const ALL: [TheoremId; 6] = [
        TheoremId::TraceBound,
        TheoremId::EigenDominance,
        TheoremId::Poincare,
        TheoremId::Equivalence,
        TheoremId::MinRank,
        TheoremId::Counterexample,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::TraceBound => "trace_bound",
            TheoremId::EigenDominance => "eigen_dominance",
            TheoremId::Poincare => "poincare",
            TheoremId::Equivalence => "equivalence",
            TheoremId::MinRank => "min_rank",
            TheoremId::Counterexample => "counterexample",
        }
    }
}

/// A failing case with the matrices needed to replay it.
#[derive(Clone, Debug)]
pub struct Witness {
    pub case_index: usize,
    pub description: String,
    pub matrices: Vec<(String, DMatrix<f64>)>,
}

#[derive(Clone, Debug)]
pub struct TheoremCertificate {
    pub theorem_id: TheoremId,
    pub passed: bool,
    pub n_cases: usize,
    /// Smallest signed slack over all cases (`+inf` with no cases).
    pub worst_margin: f64,
    pub tolerance: f64,
    pub witnesses: Vec<Witness>,
    /// Named diagnostic values reported alongside the verdict.
    pub metrics: Vec<(String, f64)>,
}

impl TheoremCertificate {
    fn new(theorem_id: TheoremId, tolerance: f64) -> Self {
        Self {
            theorem_id,
            passed: true,
            n_cases: 0,
            worst_margin: f64::INFINITY,
            tolerance,
            witnesses: Vec::new(),
            metrics: Vec::new(),
        }
    }

    /// Records one case; `ok` decides the verdict, `margin` is reported.
    fn record(&mut self, margin: f64, ok: bool, witness: impl FnOnce() -> (String, Vec<(String, DMatrix<f64>)>)) {
        let case_index = self.n_cases;
        self.n_cases += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if !ok {
            self.passed = false;
            let (description, matrices) = witness();
            self.witnesses.push(Witness {
                case_index,
                description,
                matrices,
            });
        }
    }

    fn record_margin(&mut self, margin: f64, witness: impl FnOnce() -> (String, Vec<(String, DMatrix<f64>)>)) {
        let ok = margin >= -self.tolerance;
        self.record(margin, ok, witness);
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    fn set_metric(&mut self, name: &str, value: f64) {
        match self.metrics.iter_mut().find(|(k, _)| k == name) {
            Some(slot) => slot.1 = value,
            None => self.metrics.push((name.to_string(), value)),
        }
    }

    /// Concatenates certificates of the same theorem in the given order.
    /// Metrics are combined with `max` for names starting `max_` and `min`
    /// otherwise.
    pub fn merge(theorem_id: TheoremId, tolerance: f64, parts: impl IntoIterator<Item = TheoremCertificate>) -> Self {
        let mut out = Self::new(theorem_id, tolerance);
        for (p, part) in parts.into_iter().enumerate() {
            debug_assert_eq!(part.theorem_id, theorem_id);
            let offset = out.n_cases;
            out.n_cases += part.n_cases;
            out.worst_margin = out.worst_margin.min(part.worst_margin);
            out.passed &= part.passed;
            out.witnesses.extend(part.witnesses.into_iter().map(|mut w| {
                w.case_index += offset;
                w.description = format!("group {p}: {}", w.description);
                w
            }));
            for (k, v) in part.metrics {
                let merged = match out.metric(&k) {
                    None => v,
                    Some(old) if k.starts_with("max_") => old.max(v),
                    Some(old) => old.min(v),
                };
                out.set_metric(&k, merged);
            }
        }
        out
    }

    pub fn note(&self) -> String {
        self.metrics
            .iter()
            .map(|(k, v)| format!("{k}={}", matx::fmt_f64(*v)))
            .collect::<Vec<_>>()
            .join(";")
    }
}

fn descending_margins(lhs: &[f64], rhs: &[f64]) -> f64 {
    lhs.iter().zip(rhs).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min)
}

fn check_orthonormal(v: &DMatrix<f64>, n: usize) -> Result<()> {
    if v.nrows() != n || v.ncols() > n {
        return Err(CrbError::InvalidInput(format!(
            "V is {}x{}, expected {n} rows and at most {n} columns",
            v.nrows(),
            v.ncols()
        )));
    }
    let err = orthonormality_error(v);
    if !(err <= ORTHONORMAL_TOL) {
        return Err(CrbError::InvalidInput(format!("V is not orthonormal (max |VᵀV - I| = {err:e})")));
    }
    Ok(())
}

/// Trace bound for each constraint; every spec must be a minimum constraint.
pub fn verify_trace_bound(j: &SymMatrix, specs: &[ConstraintSpec], tol: &Tolerances) -> Result<TheoremCertificate> {
    let pinv_trace = pinv_via_basis_with(j, tol.rank_tol_rel)?.trace();
    let mut cert = TheoremCertificate::new(TheoremId::TraceBound, tol.margin_tol);
    for (index, spec) in specs.iter().enumerate() {
        if !check_minimum_constraint(j, spec, tol)?.is_minimum {
            return Err(CrbError::NotMinimumConstraint { index });
        }
        let report = spec.crb(j, tol)?;
        let trace = report.trace.ok_or(CrbError::NotMinimumConstraint { index })?;
        let margin = trace - pinv_trace;
        cert.record_margin(margin, || {
            (
                format!("spec {index} ({}): trace {trace:e} < tr(J†) {pinv_trace:e}", spec.label),
                vec![("J".into(), j.as_matrix().clone()), ("F".into(), spec.f_jac.clone())],
            )
        });
    }
    Ok(cert)
}

/// Spectrum of `V M⁻¹ Vᵀ` (descending, length `n`) from that of `M`.
fn reciprocal_spectrum(values: &[f64], n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = values.iter().map(|v| 1.0 / v).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out.resize(n, 0.0);
    out
}

/// Per-index eigenvalue dominance of `V(VᵀJV)⁻¹Vᵀ` over `J†`.
///
/// Both spectra are taken from their `r x r` cores (`VᵀJV` and the nonzero
/// part of `J`) and padded with exact zeros. Eigensolving the assembled
/// `n x n` bound instead leaves its zero eigenvalues with errors of order
/// `ε‖V(VᵀJV)⁻¹Vᵀ‖`, which exceed the tolerance when `VᵀJV` is
/// ill-conditioned.
pub fn verify_eigen_dominance(j: &SymMatrix, v: &DMatrix<f64>, tol: &Tolerances) -> Result<TheoremCertificate> {
    check_orthonormal(v, j.dim())?;
    let n = j.dim();
    let svd = ranked_svd(j, tol.rank_tol_rel)?;
    if v.ncols() != svd.rank {
        return Err(CrbError::InvalidInput(format!("V has {} columns but rank(J) = {}", v.ncols(), svd.rank)));
    }
    let test = restriction_test(j, v, tol);
    if !test.nonsingular {
        return Err(CrbError::SingularRestriction {
            min_eig: test.min_eig,
            cutoff: test.cutoff,
        });
    }
    let (core, _) = eigh_desc(&crate::matlin::symmetrize(v.transpose() * j.as_matrix() * v));
    let lhs = reciprocal_spectrum(&core, n);
    let rhs = reciprocal_spectrum(&svd.sigma, n);
    let margin = descending_margins(&lhs, &rhs);
    let mut cert = TheoremCertificate::new(TheoremId::EigenDominance, tol.margin_tol);
    cert.record_margin(margin, || {
        (
            format!("eigenvalue dominance violated by {:e}", -margin),
            vec![("J".into(), j.as_matrix().clone()), ("V".into(), v.clone())],
        )
    });
    Ok(cert)
}

/// Poincaré separation `λ_i(VᵀJV) ≤ λ_i(J)`, `i = 1..k`, for orthonormal
/// `V` of any width `k ≤ n`.
pub fn verify_poincare(j: &SymMatrix, v: &DMatrix<f64>, tol: &Tolerances) -> Result<TheoremCertificate> {
    check_orthonormal(v, j.dim())?;
    let (restricted, _) = eigh_desc(&crate::matlin::symmetrize(v.transpose() * j.as_matrix() * v));
    let full = eigvals_desc(j)?;
    let margin = descending_margins(&full.values, &restricted);
    let mut cert = TheoremCertificate::new(TheoremId::Poincare, tol.margin_tol);
    cert.record_margin(margin, || {
        (
            format!("restricted spectrum exceeds top-k spectrum by {:e}", -margin),
            vec![("J".into(), j.as_matrix().clone()), ("V".into(), v.clone())],
        )
    });
    Ok(cert)
}

/// Every full-row-rank `F` annihilating `U_r` yields the bound `J†`.
pub fn verify_constraint_equivalence(
    j: &SymMatrix,
    theta0: &DVector<f64>,
    alt_jacobians: &[DMatrix<f64>],
    tol: &Tolerances,
) -> Result<TheoremCertificate> {
    let n = j.dim();
    let svd = ranked_svd(j, tol.rank_tol_rel)?;
    let pinv = pinv_via_basis_with(j, tol.rank_tol_rel)?;
    let mut cert = TheoremCertificate::new(TheoremId::Equivalence, tol.margin_tol);
    for (index, f) in alt_jacobians.iter().enumerate() {
        if f.shape() != (n - svd.rank, n) {
            return Err(CrbError::InvalidInput(format!(
                "alternative {index} is {}x{}, expected {}x{n}",
                f.nrows(),
                f.ncols(),
                n - svd.rank
            )));
        }
        if numerical_rank(f, tol.rank_tol_rel) != f.nrows() {
            return Err(CrbError::InvalidInput(format!("alternative {index} is not full row rank")));
        }
        let leak = (f * &svd.u_r).amax();
        if leak > 1e-9 * f.amax().max(1.0) {
            return Err(CrbError::InvalidInput(format!(
                "alternative {index} does not annihilate U_r (max |F U_r| = {leak:e})"
            )));
        }
        let spec = ConstraintSpec::affine_through(f.clone(), theta0, format!("alt-{index}"))?;
        let margin = match spec.crb(j, tol)?.bound {
            Some(b) => -b.distance(&pinv),
            None => f64::NEG_INFINITY,
        };
        cert.record_margin(margin, || {
            (
                format!("alternative {index} bound differs from J† by {:e}", -margin),
                vec![("J".into(), j.as_matrix().clone()), ("F".into(), f.clone())],
            )
        });
    }
    Ok(cert)
}

/// Random constraints with `m < n - rank J` rows never give a finite bound;
/// the optimal constraint with `m = n - rank J` does. Margins are
/// `cutoff - λ_min(UᵀJU)` for the former and `λ_min - cutoff` for the latter.
pub fn verify_min_rank(j: &SymMatrix, trials: usize, rng_seed: u64, tol: &Tolerances) -> Result<TheoremCertificate> {
    let n = j.dim();
    let rank = ranked_svd(j, tol.rank_tol_rel)?.rank;
    if rank >= n {
        return Err(CrbError::InvalidInput("minimum-rank check needs a singular J".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut cert = TheoremCertificate::new(TheoremId::MinRank, 0.0);
    for trial in 0..trials {
        let m = rng.random_range(0..n - rank);
        let f = gaussian_matrix(m, n, &mut rng);
        let u = null_complement(&f, tol.rank_tol_rel)?;
        let test = restriction_test(j, u.as_matrix(), tol);
        let margin = test.cutoff - test.min_eig;
        cert.record(margin, !test.nonsingular, || {
            (
                format!("trial {trial}: m = {m} < {} yet UᵀJU is nonsingular (λ_min {:e})", n - rank, test.min_eig),
                vec![("J".into(), j.as_matrix().clone()), ("F".into(), f.clone())],
            )
        });
    }
    let opt = optimal_affine_constraint(j, &DVector::zeros(n), tol)?;
    let u = null_complement(&opt.f_jac, tol.rank_tol_rel)?;
    let test = restriction_test(j, u.as_matrix(), tol);
    cert.record(test.min_eig - test.cutoff, test.nonsingular, || {
        (
            "optimal constraint leaves UᵀJU singular".into(),
            vec![("J".into(), j.as_matrix().clone()), ("F".into(), opt.f_jac.clone())],
        )
    });
    Ok(cert)
}

/// The fixed `J = diag(1, 1, 0, 0)` and orthonormal `V` for which
/// eigenvalue dominance holds but `V(VᵀJV)⁻¹Vᵀ - J†` is indefinite.
pub fn counterexample_fixture() -> (SymMatrix, DMatrix<f64>) {
    let j = SymMatrix::from_diagonal(&[1.0, 1.0, 0.0, 0.0]).expect("finite");
    let v = DMatrix::from_row_slice(4, 2, &[-1.0, 1.0, -1.0, -1.0, -1.0, 1.0, -1.0, -1.0]) * 0.5;
    (j, v)
}

pub fn counterexample_check(tol: &Tolerances) -> Result<TheoremCertificate> {
    let (j, v) = counterexample_fixture();
    let bound = restricted_bound(&j, &v, tol)?.ok_or_else(|| CrbError::NumericalFailure("fixture VᵀJV is singular".into()))?;
    let pinv = pinv_via_basis_with(&j, tol.rank_tol_rel)?;
    let d = bound.sub(&pinv)?;
    let min_eig = eigvals_desc(&d)?.min().expect("4x4");
    let d_is_psd = is_psd(&d, None)?;
    let trace_d = d.trace();
    let dominance = verify_eigen_dominance(&j, &v, tol)?;

    let mut cert = TheoremCertificate::new(TheoremId::Counterexample, tol.margin_tol);
    let fixture = || vec![("J".to_string(), j.as_matrix().clone()), ("V".to_string(), v.clone()), ("D".to_string(), d.as_matrix().clone())];
    cert.record(-COUNTEREXAMPLE_NEG_TOL - min_eig, min_eig < -COUNTEREXAMPLE_NEG_TOL && !d_is_psd, || {
        (format!("D is PSD (min eigenvalue {min_eig:e}); Loewner dominance unexpectedly holds"), fixture())
    });
    cert.record_margin(trace_d, || (format!("tr(D) = {trace_d:e} < 0"), fixture()));
    cert.record_margin(dominance.worst_margin, || ("per-index eigenvalue dominance fails".into(), fixture()));
    cert.metrics = vec![
        ("min_eig_d".into(), min_eig),
        ("trace_d".into(), trace_d),
        ("dominance_margin".into(), dominance.worst_margin),
    ];
    Ok(cert)
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Random singular matrices to draw.
    pub matrices: usize,
    /// Sampled minimum constraints per matrix.
    pub constraints_per_matrix: usize,
    pub equivalence_per_matrix: usize,
    pub min_rank_trials: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    /// Nonzero eigenvalues of random `J` are log-uniform in this range.
    pub spectrum: (f64, f64),
    pub tol: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            matrices: 100,
            constraints_per_matrix: 20,
            equivalence_per_matrix: 5,
            min_rank_trials: 5,
            min_dim: 2,
            max_dim: 8,
            spectrum: (0.1, 10.0),
            tol: Tolerances::default(),
        }
    }
}

/// Random singular PSD matrix with `min_dim ≤ n ≤ max_dim`, `1 ≤ rank < n`.
pub fn random_singular_fim<R: Rng + ?Sized>(cfg: &SuiteConfig, rng: &mut R) -> SymMatrix {
    let n = rng.random_range(cfg.min_dim.max(2)..=cfg.max_dim.max(2));
    let rank = rng.random_range(1..n);
    random_psd(n, rank, cfg.spectrum.0, cfg.spectrum.1, rng)
}

/// Alternative Jacobians `M Ū_rᵀ` with `M` a random well-conditioned
/// invertible matrix; the first one is `Ū_rᵀ` itself.
pub fn row_space_variants<R: Rng + ?Sized>(j: &SymMatrix, count: usize, rng: &mut R, tol: &Tolerances) -> Result<Vec<DMatrix<f64>>> {
    let svd = ranked_svd(j, tol.rank_tol_rel)?;
    let k = svd.nullity();
    let base = svd.u_bar.transpose();
    let mut out = Vec::with_capacity(count);
    if count > 0 {
        out.push(base.clone());
    }
    while out.len() < count {
        let m = gaussian_matrix(k, k, rng);
        let sv = singular_values(&m);
        let (smax, smin) = (sv[0], sv[k - 1]);
        if smin > 0.0 && smax / smin < 1e4 {
            out.push(m * &base);
        }
    }
    Ok(out)
}

/// Per-matrix certificates in [`TheoremId::ALL`] order, minus the
/// counterexample.
fn certify_matrix(j: &SymMatrix, cfg: &SuiteConfig, index: u64) -> Result<Vec<TheoremCertificate>> {
    let tol = &cfg.tol;
    let n = j.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "suite/matrix-aux", index));
    let theta0 = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));

    let optimal = optimal_affine_constraint(j, &theta0, tol)?;
    let sampled = sample_minimum_constraints(j, cfg.constraints_per_matrix, derive_seed(cfg.seed, "suite/constraints", index), tol)?;
    let mut specs = vec![optimal.clone()];
    specs.extend(sampled.iter().map(|s| s.spec.clone()));
    let mut trace = verify_trace_bound(j, &specs, tol)?;
    let optimal_gap = {
        let pinv_trace = pinv_via_basis_with(j, tol.rank_tol_rel)?.trace();
        (optimal.crb(j, tol)?.trace.unwrap_or(f64::INFINITY) - pinv_trace).abs()
    };
    trace.set_metric("max_optimal_gap", optimal_gap);

    let rank = ranked_svd(j, tol.rank_tol_rel)?.rank;
    let mut dominance = Vec::with_capacity(specs.len());
    let mut poincare = Vec::with_capacity(specs.len() + 1);
    for spec in &specs {
        let u = null_complement(&spec.f_jac, tol.rank_tol_rel)?;
        dominance.push(verify_eigen_dominance(j, u.as_matrix(), tol)?);
        poincare.push(verify_poincare(j, u.as_matrix(), tol)?);
    }
    poincare.push(verify_poincare(j, &random_orthonormal(n, rank, &mut rng), tol)?);

    let variants = row_space_variants(j, cfg.equivalence_per_matrix, &mut rng, tol)?;
    let equivalence = verify_constraint_equivalence(j, &theta0, &variants, tol)?;
    let min_rank = verify_min_rank(j, cfg.min_rank_trials, derive_seed(cfg.seed, "suite/min-rank", index), tol)?;

    Ok(vec![
        trace,
        TheoremCertificate::merge(TheoremId::EigenDominance, tol.margin_tol, dominance),
        TheoremCertificate::merge(TheoremId::Poincare, tol.margin_tol, poincare),
        equivalence,
        min_rank,
    ])
}

fn assemble(per_matrix: Vec<Vec<TheoremCertificate>>, tol: &Tolerances) -> Result<Vec<TheoremCertificate>> {
    let mut columns: Vec<Vec<TheoremCertificate>> = vec![Vec::new(); 5];
    for certs in per_matrix {
        for (slot, cert) in columns.iter_mut().zip(certs) {
            slot.push(cert);
        }
    }
    let mut out: Vec<TheoremCertificate> = TheoremId::ALL[..5]
        .iter()
        .zip(columns)
        .map(|(&id, parts)| {
            let t = if id == TheoremId::MinRank { 0.0 } else { tol.margin_tol };
            TheoremCertificate::merge(id, t, parts)
        })
        .collect();
    out.push(counterexample_check(tol)?);
    Ok(out)
}

/// Runs every certificate over `cfg.matrices` random singular matrices
/// plus the counterexample fixture. Matrices are processed in parallel;
/// results are merged in matrix order.
pub fn run_theorem_suite(cfg: &SuiteConfig) -> Result<Vec<TheoremCertificate>> {
    cfg.tol.validate()?;
    let per_matrix = (0..cfg.matrices as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "suite/matrix", i));
            let j = random_singular_fim(cfg, &mut rng);
            certify_matrix(&j, cfg, i)
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(per_matrix, &cfg.tol)
}

/// Same certificates for one given singular `J`.
pub fn run_theorem_suite_on(j: &SymMatrix, cfg: &SuiteConfig) -> Result<Vec<TheoremCertificate>> {
    cfg.tol.validate()?;
    let rank = ranked_svd(j, cfg.tol.rank_tol_rel)?.rank;
    if rank == j.dim() {
        return Err(CrbError::FullRankFim { rank });
    }
    assemble(vec![certify_matrix(j, cfg, 0)?], &cfg.tol)
}

pub fn certificates_csv(certs: &[TheoremCertificate]) -> String {
    let mut out = format!("{CSV_VERSION_LINE}\ntheorem_id,passed,n_cases,worst_margin,note\n");
    for c in certs {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.theorem_id.as_str(),
            c.passed,
            c.n_cases,
            matx::fmt_f64(c.worst_margin),
            c.note()
        );
    }
    out
}

/// Writes each witness matrix as `<theorem>_<case>_<name>.matx` under `dir`.
pub fn write_witnesses(certs: &[TheoremCertificate], dir: &Path) -> Result<usize> {
    let mut written = 0;
    for c in certs {
        for w in &c.witnesses {
            if written == 0 {
                std::fs::create_dir_all(dir)?;
            }
            for (name, m) in &w.matrices {
                let path = dir.join(format!("{}_{}_{}.matx", c.theorem_id.as_str(), w.case_index, name));
                matx::write(&path, m)?;
                written += 1;
            }
            let path = dir.join(format!("{}_{}.txt", c.theorem_id.as_str(), w.case_index));
            std::fs::write(path, format!("{}\n", w.description))?;
        }
    }
    Ok(written)
}
