#ifndef CRBKIT_H
#define CRBKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CrbStatus {
  CRB_STATUS_OK = 0,
  CRB_STATUS_NULL_POINTER,
  CRB_STATUS_INVALID_MATRIX,
  CRB_STATUS_INVALID_INPUT,
  CRB_STATUS_INVALID_MODEL,
  CRB_STATUS_RANK_DEFICIENT_CONSTRAINT,
  CRB_STATUS_FULL_RANK_FIM,
  CRB_STATUS_NOT_MINIMUM_CONSTRAINT,
  CRB_STATUS_SINGULAR_RESTRICTION,
  CRB_STATUS_SAMPLING_EXHAUSTED,
  CRB_STATUS_NUMERICAL_FAILURE,
  CRB_STATUS_DEGENERATE_PARAMETER,
  CRB_STATUS_PARSE,
  CRB_STATUS_IO,
  /**
   * The requested bound is infinite.
   */
  CRB_STATUS_INFINITE_BOUND,
  CRB_STATUS_BUFFER_TOO_SMALL,
  CRB_STATUS_PANIC,
} CrbStatus;

/**
 * Constraint Jacobian, with an offset if affine.
 */
typedef struct CrbConstraint CrbConstraint;

/**
 * Dense real matrix.
 */
typedef struct CrbMatrix CrbMatrix;

/**
 * Cramér-Rao bound computation result.
 */
typedef struct CrbReport CrbReport;

/**
 * Numerical tolerances. `psd_tol <= 0` means "relative default".
 */
typedef struct CrbTolerances {
  double rank_tol_rel;
  double psd_tol;
  double margin_tol;
} CrbTolerances;

/**
 * Outcome of the three minimum-constraint requirements.
 */
typedef struct CrbMinConstraint {
  bool full_rank_jacobian;
  bool utju_nonsingular;
  bool rank_sum_is_n;
  bool is_minimum;
  size_t rank_f;
  size_t rank_j;
} CrbMinConstraint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *crb_version(void);

/**
 * Message for the most recent failure on this thread; valid until the
 * next failing call on the same thread.
 */
const char *crb_last_error(void);

struct CrbTolerances crb_tolerances_default(void);

/**
 * Copies `rows * cols` row-major values into a new matrix.
 *
 * # Safety
 * `data` must point to `rows * cols` doubles; `out` must be writable.
 */
enum CrbStatus crb_matrix_new(size_t rows, size_t cols, const double *data, struct CrbMatrix **out);

/**
 * # Safety
 * `m` must be null or a handle from this library, not yet freed.
 */
void crb_matrix_free(struct CrbMatrix *m);

/**
 * # Safety
 * `m` must be a valid handle or null (returns 0).
 */
size_t crb_matrix_rows(const struct CrbMatrix *m);

/**
 * # Safety
 * `m` must be a valid handle or null (returns 0).
 */
size_t crb_matrix_cols(const struct CrbMatrix *m);

/**
 * Writes the entries row-major into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `m` must be a valid handle and `buf` must hold `len` doubles.
 */
enum CrbStatus crb_matrix_copy(const struct CrbMatrix *m, double *buf, size_t len);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum CrbStatus crb_matrix_read_matx(const char *path_, struct CrbMatrix **out);

/**
 * # Safety
 * `m` must be a valid handle; `path` a NUL-terminated string.
 */
enum CrbStatus crb_matrix_write_matx(const struct CrbMatrix *m, const char *path_);

/**
 * Numerical rank of a symmetric matrix.
 *
 * # Safety
 * `j` must be a valid handle; `tol` valid or null; `out_rank` writable.
 */
enum CrbStatus crb_rank(const struct CrbMatrix *j,
                        const struct CrbTolerances *tol,
                        size_t *out_rank);

/**
 * Moore-Penrose pseudoinverse of a symmetric matrix.
 *
 * # Safety
 * `j` must be a valid handle; `tol` valid or null; `out` writable.
 */
enum CrbStatus crb_pinv(const struct CrbMatrix *j,
                        const struct CrbTolerances *tol,
                        struct CrbMatrix **out);

/**
 * # Safety
 * `j` must be a valid handle; `tol` valid or null; `out` writable.
 */
enum CrbStatus crb_unconstrained(const struct CrbMatrix *j,
                                 const struct CrbTolerances *tol,
                                 struct CrbReport **out);

/**
 * Bound under a constraint with Jacobian `f` (`m x n`). An infinite bound
 * is a successful result; query it with [`crb_report_exists`].
 *
 * # Safety
 * `j` and `f` must be valid handles; `tol` valid or null; `out` writable.
 */
enum CrbStatus crb_constrained(const struct CrbMatrix *j,
                               const struct CrbMatrix *f,
                               const struct CrbTolerances *tol,
                               struct CrbReport **out);

/**
 * # Safety
 * `r` must be null or a handle from this library, not yet freed.
 */
void crb_report_free(struct CrbReport *r);

/**
 * # Safety
 * `r` must be a valid handle or null (returns false).
 */
bool crb_report_exists(const struct CrbReport *r);

/**
 * True when the FIM itself is singular.
 *
 * # Safety
 * `r` must be a valid handle or null (returns false).
 */
bool crb_report_singular_fim(const struct CrbReport *r);

/**
 * # Safety
 * `r` must be a valid handle; `out` writable.
 */
enum CrbStatus crb_report_trace(const struct CrbReport *r, double *out);

/**
 * Copies the bound matrix into a new handle.
 *
 * # Safety
 * `r` must be a valid handle; `out` writable.
 */
enum CrbStatus crb_report_bound(const struct CrbReport *r, struct CrbMatrix **out);

/**
 * Eigenvalues of the bound, descending, into `buf` (length `dim`).
 *
 * # Safety
 * `r` must be a valid handle; `buf` must hold `len` doubles.
 */
enum CrbStatus crb_report_eigenvalues(const struct CrbReport *r, double *buf, size_t len);

/**
 * General constraint from its Jacobian (`m x n`, `m <= n`).
 *
 * # Safety
 * `f` must be a valid handle; `out` writable.
 */
enum CrbStatus crb_constraint_from_jacobian(const struct CrbMatrix *f, struct CrbConstraint **out);

/**
 * The trace-optimal affine constraint through `theta0` (length `n`).
 *
 * # Safety
 * `j` must be a valid handle; `theta0` must hold `n` doubles; `tol` valid
 * or null; `out` writable.
 */
enum CrbStatus crb_optimal_constraint(const struct CrbMatrix *j,
                                      const double *theta0,
                                      size_t n,
                                      const struct CrbTolerances *tol,
                                      struct CrbConstraint **out);

/**
 * Draws `count` random minimum constraints into `out[0..count]`.
 *
 * # Safety
 * `j` must be a valid handle; `out` must hold `count` pointers.
 */
enum CrbStatus crb_sample_minimum_constraints(const struct CrbMatrix *j,
                                              size_t count,
                                              uint64_t seed,
                                              const struct CrbTolerances *tol,
                                              struct CrbConstraint **out);

/**
 * # Safety
 * `c` must be null or a handle from this library, not yet freed.
 */
void crb_constraint_free(struct CrbConstraint *c);

/**
 * # Safety
 * `c` must be a valid handle; `out` writable.
 */
enum CrbStatus crb_constraint_jacobian(const struct CrbConstraint *c, struct CrbMatrix **out);

/**
 * Offset `C` of an affine constraint into `buf` (length `m`). Fails with
 * `InvalidInput` for constraints without an offset.
 *
 * # Safety
 * `c` must be a valid handle; `buf` must hold `len` doubles.
 */
enum CrbStatus crb_constraint_offset(const struct CrbConstraint *c, double *buf, size_t len);

/**
 * # Safety
 * `c` and `j` must be valid handles; `tol` valid or null; `out` writable.
 */
enum CrbStatus crb_constraint_crb(const struct CrbConstraint *c,
                                  const struct CrbMatrix *j,
                                  const struct CrbTolerances *tol,
                                  struct CrbReport **out);

/**
 * # Safety
 * `j` and `c` must be valid handles; `tol` valid or null; `out` writable.
 */
enum CrbStatus crb_check_minimum_constraint(const struct CrbMatrix *j,
                                            const struct CrbConstraint *c,
                                            const struct CrbTolerances *tol,
                                            struct CrbMinConstraint *out);

/**
 * Analytic FIM of the blind channel model at `theta` (`s` then `h`).
 *
 * # Safety
 * `theta` must hold `s_len + h_len` doubles; `out` writable.
 */
enum CrbStatus crb_fim_blind_channel(size_t s_len,
                                     size_t h_len,
                                     double noise_var,
                                     const double *theta,
                                     struct CrbMatrix **out);

/**
 * Smallest eigenvalue of `V(VᵀJV)⁻¹Vᵀ − J†` for the fixed counterexample
 * fixture (negative: matrix dominance fails there).
 *
 * # Safety
 * `out` must be writable.
 */
enum CrbStatus crb_counterexample_min_eig(double *out);

/**
 * Runs the randomized certificate suite; `out_passed` receives whether
 * every certificate passed.
 *
 * # Safety
 * `tol` valid or null; `out_passed` writable.
 */
enum CrbStatus crb_certify(uint64_t seed,
                           size_t matrices,
                           size_t constraints_per_matrix,
                           const struct CrbTolerances *tol,
                           bool *out_passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRBKIT_H */
