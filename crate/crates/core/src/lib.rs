//! Cramér-Rao bounds for estimation problems whose Fisher information is
//! singular.
//!
//! A singular FIM `J` admits no finite-variance unbiased estimator of the
//! full parameter, but constraining the parameter restores one. Among all
//! minimum constraints, the affine constraint whose rows span `ker J` gives
//! the smallest total variance, and its bound is the Moore-Penrose
//! pseudoinverse `J†`. This crate computes FIMs and bounds, checks and
//! synthesizes constraints, and certifies those relationships numerically.
//!
//! Modules:
//! * [`matlin`]: rank-revealing factorizations, `J†`, spectra, null bases, matx I/O
//! * [`statmodel`]: model interface, Gaussian-mean models, blind channel model
//! * [`fim`]: analytic and Monte-Carlo Fisher information
//! * [`crb`]: unconstrained/constrained bounds and finiteness
//! * [`constraint`]: minimum-constraint checks, optimal constraint, sampling
//! * [`verify`]: theorem certificates and the randomized suite
//! * [`cli`]: the `crb-kit` command-line front end

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constraint;
pub mod crb;
pub mod error;
pub mod fim;
pub mod matlin;
pub mod seed;
pub mod statmodel;
pub mod tol;
pub mod verify;

pub use constraint::{
    check_minimum_constraint, optimal_affine_constraint, sample_minimum_constraints, ConstraintSpec,
    MinConstraintReport,
};
pub use crb::{constrained_crb, crb_exists, unconstrained_crb, ConstraintKind, CrbReport};
pub use error::{CrbError, Result};
pub use fim::{fim_blind_channel, fim_gaussian_mean, fim_monte_carlo, FimEstimate, FimMethod};
pub use matlin::{
    eigvals_desc, is_psd, null_complement, pinv_via_basis, ranked_svd, EigenSpectrum, NullBasis, RankedSvd, SymMatrix,
};
pub use statmodel::{BlindChannelModel, GaussianMeanModel, Model};
pub use tol::Tolerances;
pub use verify::{TheoremCertificate, TheoremId};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
