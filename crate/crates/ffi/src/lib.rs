//! C ABI for `crb-kit`.
//!
//! Objects cross the boundary as opaque handles (`CrbMatrix`, `CrbReport`,
//! `CrbConstraint`) that the caller releases with the matching `*_free`.
//! Every fallible call returns a [`CrbStatus`]; on failure the message is
//! available from [`crb_last_error`] on the same thread. Matrices are
//! exchanged in row-major order; FIM arguments are symmetrized as
//! `(A + Aᵀ) / 2`. A null `CrbTolerances` pointer selects the
//! defaults.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use crb_kit::constraint::{check_minimum_constraint, optimal_affine_constraint, sample_minimum_constraints, ConstraintSpec};
use crb_kit::crb::{constrained_crb, unconstrained_crb};
use crb_kit::fim::fim_blind_channel;
use crb_kit::matlin::{matx, pinv_via_basis_with, ranked_svd, SymMatrix};
use crb_kit::statmodel::BlindChannelModel;
use crb_kit::verify::{counterexample_check, run_theorem_suite, SuiteConfig};
use crb_kit::{CrbError, Tolerances};
use nalgebra::{DMatrix, DVector};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrbStatus {
    Ok = 0,
    NullPointer,
    InvalidMatrix,
    InvalidInput,
    InvalidModel,
    RankDeficientConstraint,
    FullRankFim,
    NotMinimumConstraint,
    SingularRestriction,
    SamplingExhausted,
    NumericalFailure,
    DegenerateParameter,
    Parse,
    Io,
    /// The requested bound is infinite.
    InfiniteBound,
    BufferTooSmall,
    Panic,
}

impl From<&CrbError> for CrbStatus {
    fn from(e: &CrbError) -> Self {
        match e {
            CrbError::InvalidMatrix(_) => CrbStatus::InvalidMatrix,
            CrbError::InvalidInput(_) => CrbStatus::InvalidInput,
            CrbError::InvalidModel(_) => CrbStatus::InvalidModel,
            CrbError::RankDeficientConstraint { .. } => CrbStatus::RankDeficientConstraint,
            CrbError::FullRankFim { .. } => CrbStatus::FullRankFim,
            CrbError::NotMinimumConstraint { .. } => CrbStatus::NotMinimumConstraint,
            CrbError::SingularRestriction { .. } => CrbStatus::SingularRestriction,
            CrbError::SamplingExhausted { .. } => CrbStatus::SamplingExhausted,
            CrbError::NumericalFailure(_) => CrbStatus::NumericalFailure,
            CrbError::DegenerateParameter(_) => CrbStatus::DegenerateParameter,
            CrbError::Parse { .. } => CrbStatus::Parse,
            CrbError::Io(_) => CrbStatus::Io,
        }
    }
}

/// Numerical tolerances. `psd_tol <= 0` means "relative default".
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CrbTolerances {
    pub rank_tol_rel: f64,
    pub psd_tol: f64,
    pub margin_tol: f64,
}

/// Outcome of the three minimum-constraint requirements.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct CrbMinConstraint {
    pub full_rank_jacobian: bool,
    pub utju_nonsingular: bool,
    pub rank_sum_is_n: bool,
    pub is_minimum: bool,
    pub rank_f: usize,
    pub rank_j: usize,
}

/// Dense real matrix.
pub struct CrbMatrix {
    inner: DMatrix<f64>,
}

/// Cramér-Rao bound computation result.
pub struct CrbReport {
    inner: crb_kit::CrbReport,
}

/// Constraint Jacobian, with an offset if affine.
pub struct CrbConstraint {
    inner: ConstraintSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn fail(status: CrbStatus, msg: impl Into<String>) -> CrbStatus {
    set_error(msg);
    status
}

fn from_err(e: CrbError) -> CrbStatus {
    let status = CrbStatus::from(&e);
    fail(status, e.to_string())
}

/// Runs `f`, converting panics into [`CrbStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), CrbStatus>) -> CrbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CrbStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(CrbStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, CrbStatus>;
}

impl<T> OrStatus<T> for crb_kit::Result<T> {
    fn or_status(self) -> Result<T, CrbStatus> {
        self.map_err(from_err)
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, CrbStatus> {
    p.as_ref().ok_or_else(|| fail(CrbStatus::NullPointer, format!("{what} is null")))
}

fn check_out<T>(p: *mut T, what: &str) -> Result<(), CrbStatus> {
    if p.is_null() {
        Err(fail(CrbStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn tolerances(p: *const CrbTolerances) -> Result<Tolerances, CrbStatus> {
    let tol = match p.as_ref() {
        None => Tolerances::default(),
        Some(t) => Tolerances {
            rank_tol_rel: t.rank_tol_rel,
            psd_tol: (t.psd_tol > 0.0).then_some(t.psd_tol),
            margin_tol: t.margin_tol,
        },
    };
    tol.validate().or_status()?;
    Ok(tol)
}

unsafe fn slice<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], CrbStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(fail(CrbStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a Path, CrbStatus> {
    if p.is_null() {
        return Err(fail(CrbStatus::NullPointer, "path is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(CrbStatus::InvalidInput, "path is not valid UTF-8"))
}

unsafe fn sym(m: *const CrbMatrix) -> Result<SymMatrix, CrbStatus> {
    SymMatrix::new(deref(m, "matrix")?.inner.clone()).or_status()
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn crb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread; valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn crb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn crb_tolerances_default() -> CrbTolerances {
    let t = Tolerances::default();
    CrbTolerances {
        rank_tol_rel: t.rank_tol_rel,
        psd_tol: 0.0,
        margin_tol: t.margin_tol,
    }
}

// ---- matrices ----

/// Copies `rows * cols` row-major values into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crb_matrix_new(rows: usize, cols: usize, data: *const f64, out: *mut *mut CrbMatrix) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| fail(CrbStatus::InvalidInput, "matrix size overflows"))?;
        let values = slice(data, len, "data")?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(fail(CrbStatus::InvalidMatrix, "non-finite entry"));
        }
        *out = boxed(CrbMatrix {
            inner: DMatrix::from_row_slice(rows, cols, values),
        });
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crb_matrix_free(m: *mut CrbMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a valid handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn crb_matrix_rows(m: *const CrbMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.nrows())
}

/// # Safety
/// `m` must be a valid handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn crb_matrix_cols(m: *const CrbMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.ncols())
}

/// Writes the entries row-major into `buf`, which holds `len` doubles.
///
/// # Safety
/// `m` must be a valid handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn crb_matrix_copy(m: *const CrbMatrix, buf: *mut f64, len: usize) -> CrbStatus {
    guard(|| {
        let m = &deref(m, "matrix")?.inner;
        let need = m.len();
        if len < need {
            return Err(fail(CrbStatus::BufferTooSmall, format!("need {need} doubles, got {len}")));
        }
        if need > 0 {
            check_out(buf, "buf")?;
        }
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                *buf.add(r * m.ncols() + c) = m[(r, c)];
            }
        }
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crb_matrix_read_matx(path_: *const c_char, out: *mut *mut CrbMatrix) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let inner = matx::read(path(path_)?).or_status()?;
        *out = boxed(CrbMatrix { inner });
        Ok(())
    })
}

/// # Safety
/// `m` must be a valid handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn crb_matrix_write_matx(m: *const CrbMatrix, path_: *const c_char) -> CrbStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        matx::write(path(path_)?, &m.inner).or_status()
    })
}

// ---- linear algebra ----

/// Numerical rank of a symmetric matrix.
///
/// # Safety
/// `j` must be a valid handle; `tol` valid or null; `out_rank` writable.
#[no_mangle]
pub unsafe extern "C" fn crb_rank(j: *const CrbMatrix, tol: *const CrbTolerances, out_rank: *mut usize) -> CrbStatus {
    guard(|| {
        check_out(out_rank, "out_rank")?;
        let tol = tolerances(tol)?;
        *out_rank = ranked_svd(&sym(j)?, tol.rank_tol_rel).or_status()?.rank;
        Ok(())
    })
}

/// Moore-Penrose pseudoinverse of a symmetric matrix.
///
/// # Safety
/// `j` must be a valid handle; `tol` valid or null; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crb_pinv(j: *const CrbMatrix, tol: *const CrbTolerances, out: *mut *mut CrbMatrix) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let tol = tolerances(tol)?;
        let p = pinv_via_basis_with(&sym(j)?, tol.rank_tol_rel).or_status()?;
        *out = boxed(CrbMatrix { inner: p.into_inner() });
        Ok(())
    })
}

// ---- bounds ----

/// # Safety
/// `j` must be a valid handle; `tol` valid or null; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crb_unconstrained(j: *const CrbMatrix, tol: *const CrbTolerances, out: *mut *mut CrbReport) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let tol = tolerances(tol)?;
        let inner = unconstrained_crb(&sym(j)?, &tol).or_status()?;
        *out = boxed(CrbReport { inner });
        Ok(())
    })
}

/// Bound under a constraint with Jacobian `f` (`m x n`). An infinite bound
/// is a successful result; query it with [`crb_report_exists`].
///
/// # Safety
/// `j` and `f` must be valid handles; `tol` valid or null; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crb_constrained(
    j: *const CrbMatrix,
    f: *const CrbMatrix,
    tol: *const CrbTolerances,
    out: *mut *mut CrbReport,
) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let tol = tolerances(tol)?;
        let f = &deref(f, "f")?.inner;
        let inner = constrained_crb(&sym(j)?, f, &tol).or_status()?;
        *out = boxed(CrbReport { inner });
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crb_report_free(r: *mut CrbReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be a valid handle or null (returns false).
#[no_mangle]
pub unsafe extern "C" fn crb_report_exists(r: *const CrbReport) -> bool {
    r.as_ref().is_some_and(|r| r.inner.exists)
}

/// True when the FIM itself is singular.
///
/// # Safety
/// `r` must be a valid handle or null (returns false).
#[no_mangle]
pub unsafe extern "C" fn crb_report_singular_fim(r: *const CrbReport) -> bool {
    r.as_ref().is_some_and(|r| r.inner.singular_fim)
}

/// # Safety
/// `r` must be a valid handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crb_report_trace(r: *const CrbReport, out: *mut f64) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let r = deref(r, "report")?;
        *out = r
            .inner
            .trace
            .ok_or_else(|| fail(CrbStatus::InfiniteBound, "bound is infinite"))?;
        Ok(())
    })
}

/// Copies the bound matrix into a new handle.
///
/// # Safety
/// `r` must be a valid handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crb_report_bound(r: *const CrbReport, out: *mut *mut CrbMatrix) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let r = deref(r, "report")?;
        let b = r
            .inner
            .bound
            .as_ref()
            .ok_or_else(|| fail(CrbStatus::InfiniteBound, "bound is infinite"))?;
        *out = boxed(CrbMatrix {
            inner: b.as_matrix().clone(),
        });
        Ok(())
    })
}

/// Eigenvalues of the bound, descending, into `buf` (length `dim`).
///
/// # Safety
/// `r` must be a valid handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn crb_report_eigenvalues(r: *const CrbReport, buf: *mut f64, len: usize) -> CrbStatus {
    guard(|| {
        let r = deref(r, "report")?;
        let e = r
            .inner
            .eigenvalues
            .as_ref()
            .ok_or_else(|| fail(CrbStatus::InfiniteBound, "bound is infinite"))?;
        if len < e.len() {
            return Err(fail(CrbStatus::BufferTooSmall, format!("need {} doubles, got {len}", e.len())));
        }
        check_out(buf, "buf")?;
        ptr::copy_nonoverlapping(e.values.as_ptr(), buf, e.len());
        Ok(())
    })
}

// ---- constraints ----

/// General constraint from its Jacobian (`m x n`, `m <= n`).
///
/// # Safety
/// `f` must be a valid handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crb_constraint_from_jacobian(f: *const CrbMatrix, out: *mut *mut CrbConstraint) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let inner = ConstraintSpec::jacobian(deref(f, "f")?.inner.clone(), "ffi").or_status()?;
        *out = boxed(CrbConstraint { inner });
        Ok(())
    })
}

/// The trace-optimal affine constraint through `theta0` (length `n`).
///
/// # Safety
/// `j` must be a valid handle; `theta0` must hold `n` doubles; `tol` valid
/// or null; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crb_optimal_constraint(
    j: *const CrbMatrix,
    theta0: *const f64,
    n: usize,
    tol: *const CrbTolerances,
    out: *mut *mut CrbConstraint,
) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let tol = tolerances(tol)?;
        let theta = DVector::from_column_slice(slice(theta0, n, "theta0")?);
        let inner = optimal_affine_constraint(&sym(j)?, &theta, &tol).or_status()?;
        *out = boxed(CrbConstraint { inner });
        Ok(())
    })
}

/// Draws `count` random minimum constraints into `out[0..count]`.
///
/// # Safety
/// `j` must be a valid handle; `out` must hold `count` pointers.
#[no_mangle]
pub unsafe extern "C" fn crb_sample_minimum_constraints(
    j: *const CrbMatrix,
    count: usize,
    seed: u64,
    tol: *const CrbTolerances,
    out: *mut *mut CrbConstraint,
) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let tol = tolerances(tol)?;
        let specs = sample_minimum_constraints(&sym(j)?, count, seed, &tol).or_status()?;
        for (i, s) in specs.into_iter().enumerate() {
            *out.add(i) = boxed(CrbConstraint { inner: s.spec });
        }
        Ok(())
    })
}

/// # Safety
/// `c` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crb_constraint_free(c: *mut CrbConstraint) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `c` must be a valid handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crb_constraint_jacobian(c: *const CrbConstraint, out: *mut *mut CrbMatrix) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = boxed(CrbMatrix {
            inner: deref(c, "constraint")?.inner.f_jac.clone(),
        });
        Ok(())
    })
}

/// Offset `C` of an affine constraint into `buf` (length `m`). Fails with
/// `InvalidInput` for constraints without an offset.
///
/// # Safety
/// `c` must be a valid handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn crb_constraint_offset(c: *const CrbConstraint, buf: *mut f64, len: usize) -> CrbStatus {
    guard(|| {
        let c = deref(c, "constraint")?;
        let off = c
            .inner
            .offset
            .as_ref()
            .ok_or_else(|| fail(CrbStatus::InvalidInput, "constraint has no offset"))?;
        if len < off.len() {
            return Err(fail(CrbStatus::BufferTooSmall, format!("need {} doubles, got {len}", off.len())));
        }
        if !off.is_empty() {
            check_out(buf, "buf")?;
            ptr::copy_nonoverlapping(off.as_ptr(), buf, off.len());
        }
        Ok(())
    })
}

/// # Safety
/// `c` and `j` must be valid handles; `tol` valid or null; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crb_constraint_crb(
    c: *const CrbConstraint,
    j: *const CrbMatrix,
    tol: *const CrbTolerances,
    out: *mut *mut CrbReport,
) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let tol = tolerances(tol)?;
        let inner = deref(c, "constraint")?.inner.crb(&sym(j)?, &tol).or_status()?;
        *out = boxed(CrbReport { inner });
        Ok(())
    })
}

/// # Safety
/// `j` and `c` must be valid handles; `tol` valid or null; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crb_check_minimum_constraint(
    j: *const CrbMatrix,
    c: *const CrbConstraint,
    tol: *const CrbTolerances,
    out: *mut CrbMinConstraint,
) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let tol = tolerances(tol)?;
        let r = check_minimum_constraint(&sym(j)?, &deref(c, "constraint")?.inner, &tol).or_status()?;
        *out = CrbMinConstraint {
            full_rank_jacobian: r.full_rank_jacobian,
            utju_nonsingular: r.utju_nonsingular,
            rank_sum_is_n: r.rank_sum_is_n,
            is_minimum: r.is_minimum,
            rank_f: r.details.rank_f,
            rank_j: r.details.rank_j,
        };
        Ok(())
    })
}

// ---- models and certification ----

/// Analytic FIM of the blind channel model at `theta` (`s` then `h`).
///
/// # Safety
/// `theta` must hold `s_len + h_len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crb_fim_blind_channel(
    s_len: usize,
    h_len: usize,
    noise_var: f64,
    theta: *const f64,
    out: *mut *mut CrbMatrix,
) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let model = BlindChannelModel::new(s_len, h_len, noise_var).or_status()?;
        let theta = DVector::from_column_slice(slice(theta, model.n_params(), "theta")?);
        let est = fim_blind_channel(&model, &theta).or_status()?;
        *out = boxed(CrbMatrix {
            inner: est.matrix.into_inner(),
        });
        Ok(())
    })
}

/// Smallest eigenvalue of `V(VᵀJV)⁻¹Vᵀ − J†` for the fixed counterexample
/// fixture (negative: matrix dominance fails there).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crb_counterexample_min_eig(out: *mut f64) -> CrbStatus {
    guard(|| {
        check_out(out, "out")?;
        let cert = counterexample_check(&Tolerances::default()).or_status()?;
        *out = cert
            .metric("min_eig_d")
            .ok_or_else(|| fail(CrbStatus::NumericalFailure, "metric missing"))?;
        Ok(())
    })
}

/// Runs the randomized certificate suite; `out_passed` receives whether
/// every certificate passed.
///
/// # Safety
/// `tol` valid or null; `out_passed` writable.
#[no_mangle]
pub unsafe extern "C" fn crb_certify(
    seed: u64,
    matrices: usize,
    constraints_per_matrix: usize,
    tol: *const CrbTolerances,
    out_passed: *mut bool,
) -> CrbStatus {
    guard(|| {
        check_out(out_passed, "out_passed")?;
        let cfg = SuiteConfig {
            seed,
            matrices,
            constraints_per_matrix,
            tol: tolerances(tol)?,
            ..SuiteConfig::default()
        };
        *out_passed = run_theorem_suite(&cfg).or_status()?.iter().all(|c| c.passed);
        Ok(())
    })
}
