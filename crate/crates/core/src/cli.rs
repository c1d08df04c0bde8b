//! `crb-kit` command-line front end.
//!
//! Settings come from an optional flat TOML config file (`--config`) and
//! command-line flags; flags win. Every run writes `manifest.toml` into the
//! output directory. The manifest is itself a valid config file, so
//! `crb-kit <command> --config <out>/manifest.toml` replays the run.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure,
//! 4 certificate or margin failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constraint::{check_minimum_constraint, optimal_affine_constraint, sample_minimum_constraints};
use crate::crb::unconstrained_crb;
use crate::fim::{fim_blind_channel, fim_gaussian_mean, fim_monte_carlo_with, FimEstimate, MonteCarloConfig};
use crate::matlin::{eigvals_desc, is_psd, matx, ranked_svd, SymMatrix};
use crate::seed::{derive_rng, derive_seed};
use crate::statmodel::{BlindChannelModel, GaussianMeanModel, Model};
use crate::tol::Tolerances;
use crate::verify::{certificates_csv, run_theorem_suite, run_theorem_suite_on, write_witnesses, SuiteConfig, CSV_VERSION_LINE};
use crate::{CrbError, VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CERTIFICATE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "crb-kit", version, about = "Cramér-Rao bounds under singular Fisher information")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// FIM, rank, pseudoinverse, optimal affine constraint and constrained bound.
    Analyze(RunArgs),
    /// Run the theorem certificate suite.
    Certify(RunArgs),
    /// Sample minimum constraints and record the trace of each bound.
    Experiment(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat key-value TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// FIM as a matx file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Built-in model: `blind-channel` or `linear-gaussian`.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Constraints per matrix (certify) or samples to draw (experiment).
    #[arg(long)]
    pub count: Option<usize>,
    /// Random matrices in the certify suite.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Monte-Carlo samples for the FIM of a model (0 = analytic only).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "rank-tol")]
    pub rank_tol: Option<f64>,
    #[arg(long = "psd-tol")]
    pub psd_tol: Option<f64>,
    #[arg(long = "margin-tol")]
    pub margin_tol: Option<f64>,
    #[arg(long = "s-len")]
    pub s_len: Option<usize>,
    #[arg(long = "h-len")]
    pub h_len: Option<usize>,
    #[arg(long = "noise-var")]
    pub noise_var: Option<f64>,
    /// Evaluation point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// Design matrix (matx) for `linear-gaussian`.
    #[arg(long)]
    pub design: Option<PathBuf>,
    /// Experiment: make sample 0 the optimal affine constraint.
    #[arg(long = "include-optimal")]
    pub include_optimal: bool,
}

/// Keys accepted in config files and written to manifests.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psd_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_var: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub include_optimal: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Analyze,
    Certify,
    Experiment,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Analyze => "analyze",
            CommandKind::Certify => "certify",
            CommandKind::Experiment => "experiment",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InputSource {
    Matrix(PathBuf),
    BlindChannel { s_len: usize, h_len: usize, noise_var: f64 },
    LinearGaussian { design: PathBuf, noise_var: f64 },
    /// Certify only: random matrices.
    Random,
}

/// Fully resolved run settings.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input: InputSource,
    pub theta: Option<Vec<f64>>,
    pub tol: Tolerances,
    pub seed: u64,
    pub count: usize,
    pub trials: usize,
    pub n_samples: usize,
    pub out_dir: PathBuf,
    pub include_optimal: bool,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub stage: &'static str,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    fn invalid(stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID_INPUT,
            stage,
            message: message.into(),
        }
    }
}

fn exit_code_for(err: &CrbError) -> i32 {
    match err {
        CrbError::NumericalFailure(_)
        | CrbError::SamplingExhausted { .. }
        | CrbError::SingularRestriction { .. }
        | CrbError::RankDeficientConstraint { .. } => EXIT_NUMERICAL,
        _ => EXIT_INVALID_INPUT,
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, CliError>;
}

impl<T> Stage<T> for crate::Result<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, CliError> {
        self.map_err(|e| CliError {
            code: exit_code_for(&e),
            stage,
            message: e.to_string(),
        })
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn merge_args(file: FileConfig, args: &RunArgs) -> FileConfig {
    FileConfig {
        command: file.command,
        version: file.version,
        input: args.input.clone().or(file.input),
        model: args.model.clone().or(file.model),
        seed: args.seed.or(file.seed),
        count: args.count.or(file.count),
        trials: args.trials.or(file.trials),
        samples: args.samples.or(file.samples),
        out: args.out.clone().or(file.out),
        rank_tol: args.rank_tol.or(file.rank_tol),
        psd_tol: args.psd_tol.or(file.psd_tol),
        margin_tol: args.margin_tol.or(file.margin_tol),
        s_len: args.s_len.or(file.s_len),
        h_len: args.h_len.or(file.h_len),
        noise_var: args.noise_var.or(file.noise_var),
        theta: args.theta.clone().or(file.theta),
        design: args.design.clone().or(file.design),
        include_optimal: if args.include_optimal { Some(true) } else { file.include_optimal },
    }
}

pub fn load_file_config(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid("config", format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::invalid("config", format!("{}: {e}", path.display())))
}

/// Resolves file values and flag overrides into a [`RunConfig`].
pub fn resolve(command: CommandKind, args: &RunArgs) -> CliResult<RunConfig> {
    let file = match &args.config {
        Some(p) => load_file_config(p)?,
        None => FileConfig::default(),
    };
    if let Some(c) = &file.command {
        if c != command.as_str() {
            return Err(CliError::invalid(
                "config",
                format!("config was written for `{c}`, not `{}`", command.as_str()),
            ));
        }
    }
    let cfg = merge_args(file, args);

    let input = match (&cfg.input, cfg.model.as_deref()) {
        (Some(_), Some(_)) => return Err(CliError::invalid("config", "give either --input or --model, not both")),
        (Some(p), None) => InputSource::Matrix(p.clone()),
        (None, Some("blind-channel")) => InputSource::BlindChannel {
            s_len: cfg.s_len.unwrap_or(3),
            h_len: cfg.h_len.unwrap_or(3),
            noise_var: cfg.noise_var.unwrap_or(1.0),
        },
        (None, Some("linear-gaussian")) => InputSource::LinearGaussian {
            design: cfg
                .design
                .clone()
                .ok_or_else(|| CliError::invalid("config", "linear-gaussian needs --design <matx>"))?,
            noise_var: cfg.noise_var.unwrap_or(1.0),
        },
        (None, Some(other)) => {
            return Err(CliError::invalid(
                "config",
                format!("unknown model `{other}` (expected blind-channel or linear-gaussian)"),
            ))
        }
        (None, None) if command == CommandKind::Certify => InputSource::Random,
        (None, None) => return Err(CliError::invalid("config", "an input source is required: --input or --model")),
    };

    let tol = Tolerances {
        rank_tol_rel: cfg.rank_tol.unwrap_or(crate::tol::DEFAULT_RANK_TOL_REL),
        psd_tol: cfg.psd_tol,
        margin_tol: cfg.margin_tol.unwrap_or(crate::tol::DEFAULT_MARGIN_TOL),
    };
    tol.validate().stage("config")?;

    let count = cfg.count.unwrap_or(match command {
        CommandKind::Experiment => 1000,
        _ => 20,
    });
    if count == 0 {
        return Err(CliError::invalid("config", "count must be at least 1"));
    }
    Ok(RunConfig {
        command,
        input,
        theta: cfg.theta,
        tol,
        seed: cfg.seed.unwrap_or(0),
        count,
        trials: cfg.trials.unwrap_or(100),
        n_samples: cfg.samples.unwrap_or(0),
        out_dir: cfg.out.unwrap_or_else(|| PathBuf::from("crb-kit-out")),
        include_optimal: cfg.include_optimal.unwrap_or(false),
    })
}

/// The FIM under analysis and where it came from.
pub struct LoadedFim {
    pub j: SymMatrix,
    pub theta: DVector<f64>,
    pub blind_channel: Option<BlindChannelModel>,
    pub model: Option<Box<dyn Model>>,
    pub estimate: FimEstimate,
}

fn theta_for(cfg: &RunConfig, n: usize, draw: impl FnOnce() -> DVector<f64>) -> CliResult<DVector<f64>> {
    match &cfg.theta {
        Some(t) if t.len() != n => Err(CliError::invalid("input", format!("theta has {} entries, expected {n}", t.len()))),
        Some(t) => Ok(DVector::from_column_slice(t)),
        None => Ok(draw()),
    }
}

pub fn load_fim(cfg: &RunConfig) -> CliResult<LoadedFim> {
    match &cfg.input {
        InputSource::Matrix(path) => {
            let m = matx::read(path).stage("input")?;
            let j = SymMatrix::new(m).stage("input")?;
            if !is_psd(&j, cfg.tol.psd_tol).stage("input")? {
                return Err(CliError::invalid("input", format!("{} is not nonnegative definite", path.display())));
            }
            let theta = theta_for(cfg, j.dim(), || DVector::zeros(j.dim()))?;
            let estimate = FimEstimate {
                matrix: j.clone(),
                method: crate::fim::FimMethod::Analytic,
                n_samples: 0,
                std_err_bound: 0.0,
                std_err: DMatrix::zeros(j.dim(), j.dim()),
                clipped: 0.0,
            };
            Ok(LoadedFim {
                j,
                theta,
                blind_channel: None,
                model: None,
                estimate,
            })
        }
        InputSource::BlindChannel { s_len, h_len, noise_var } => {
            let model = BlindChannelModel::new(*s_len, *h_len, *noise_var).stage("model")?;
            let theta = theta_for(cfg, model.n_params(), || {
                model.random_theta(&mut derive_rng(cfg.seed, "model/theta", 0))
            })?;
            let estimate = fim_blind_channel(&model, &theta).stage("fim")?;
            Ok(LoadedFim {
                j: estimate.matrix.clone(),
                theta,
                blind_channel: Some(model),
                model: Some(Box::new(model)),
                estimate,
            })
        }
        InputSource::LinearGaussian { design, noise_var } => {
            let a = matx::read(design).stage("input")?;
            let k = a.nrows();
            let model = GaussianMeanModel::linear(a, DMatrix::identity(k, k) * *noise_var).stage("model")?;
            let n = model.param_dim();
            let theta = theta_for(cfg, n, || {
                let mut rng = derive_rng(cfg.seed, "model/theta", 0);
                DVector::from_fn(n, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0))
            })?;
            let estimate = fim_gaussian_mean(&model, &theta).stage("fim")?;
            Ok(LoadedFim {
                j: estimate.matrix.clone(),
                theta,
                blind_channel: None,
                model: Some(Box::new(model)),
                estimate,
            })
        }
        InputSource::Random => Err(CliError::invalid("input", "this command needs --input or --model")),
    }
}

fn manifest(cfg: &RunConfig, theta: Option<&DVector<f64>>) -> FileConfig {
    let mut f = FileConfig {
        command: Some(cfg.command.as_str().into()),
        version: Some(VERSION.into()),
        seed: Some(cfg.seed),
        count: Some(cfg.count),
        trials: Some(cfg.trials),
        samples: Some(cfg.n_samples),
        out: Some(cfg.out_dir.clone()),
        rank_tol: Some(cfg.tol.rank_tol_rel),
        psd_tol: cfg.tol.psd_tol,
        margin_tol: Some(cfg.tol.margin_tol),
        theta: theta.map(|t| t.iter().copied().collect()).or_else(|| cfg.theta.clone()),
        include_optimal: Some(cfg.include_optimal),
        ..FileConfig::default()
    };
    match &cfg.input {
        InputSource::Matrix(p) => f.input = Some(p.clone()),
        InputSource::BlindChannel { s_len, h_len, noise_var } => {
            f.model = Some("blind-channel".into());
            f.s_len = Some(*s_len);
            f.h_len = Some(*h_len);
            f.noise_var = Some(*noise_var);
        }
        InputSource::LinearGaussian { design, noise_var } => {
            f.model = Some("linear-gaussian".into());
            f.design = Some(design.clone());
            f.noise_var = Some(*noise_var);
        }
        InputSource::Random => {}
    }
    f
}

fn write_manifest(cfg: &RunConfig, theta: Option<&DVector<f64>>) -> CliResult<()> {
    let text = toml::to_string(&manifest(cfg, theta))
        .map_err(|e| CliError::invalid("manifest", e.to_string()))?;
    write_file(&cfg.out_dir.join("manifest.toml"), &text)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::invalid("output", format!("{}: {e}", path.display())))
}

fn prepare_out(cfg: &RunConfig) -> CliResult<()> {
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::invalid("output", format!("{}: {e}", cfg.out_dir.display())))
}

fn write_matx(cfg: &RunConfig, name: &str, m: &DMatrix<f64>) -> CliResult<()> {
    write_file(&cfg.out_dir.join(name), &matx::to_string(m))
}

fn kv_csv(rows: &[(String, String)]) -> String {
    let mut out = format!("{CSV_VERSION_LINE}\nkey,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

/// Headline numbers from `analyze`.
#[derive(Clone, Debug)]
pub struct AnalyzeSummary {
    pub n: usize,
    pub rank: usize,
    pub pinv_trace: f64,
    pub constrained_trace: Option<f64>,
    pub constraint_f: Option<DMatrix<f64>>,
    pub is_minimum: Option<bool>,
    pub note: String,
    pub mc_std_err_bound: Option<f64>,
}

pub fn cmd_analyze(cfg: &RunConfig) -> CliResult<AnalyzeSummary> {
    let loaded = load_fim(cfg)?;
    prepare_out(cfg)?;
    let j = &loaded.j;
    let n = j.dim();
    let tol = &cfg.tol;

    let svd = ranked_svd(j, tol.rank_tol_rel).stage("rank")?;
    let unc = unconstrained_crb(j, tol).stage("pseudoinverse")?;
    let pinv = unc.bound.clone().expect("unconstrained bound always exists");
    let fim_eigs = eigvals_desc(j).stage("eigenvalues")?;
    let pinv_eigs = unc.eigenvalues.clone().expect("present with bound");

    let f = |v: f64| matx::fmt_f64(v);
    let mut rows: Vec<(String, String)> = vec![
        ("n".into(), n.to_string()),
        ("rank".into(), svd.rank.to_string()),
        ("nullity".into(), (n - svd.rank).to_string()),
        ("fim_method".into(), loaded.estimate.method.as_str().into()),
        ("trace_fim".into(), f(j.trace())),
        ("trace_pinv".into(), f(pinv.trace())),
        ("singular_fim".into(), unc.singular_fim.to_string()),
    ];

    write_matx(cfg, "fim.matx", j.as_matrix())?;
    write_matx(cfg, "pinv.matx", pinv.as_matrix())?;
    write_matx(cfg, "theta.matx", &DMatrix::from_column_slice(n, 1, loaded.theta.as_slice()))?;

    let mut summary = AnalyzeSummary {
        n,
        rank: svd.rank,
        pinv_trace: pinv.trace(),
        constrained_trace: None,
        constraint_f: None,
        is_minimum: None,
        note: String::new(),
        mc_std_err_bound: None,
    };

    let mut crb_eigs = None;
    if svd.rank < n {
        let spec = optimal_affine_constraint(j, &loaded.theta, tol).stage("optimal constraint")?;
        let report = spec.crb(j, tol).stage("constrained bound")?;
        let bound = report
            .bound
            .as_ref()
            .ok_or_else(|| CliError {
                code: EXIT_NUMERICAL,
                stage: "constrained bound",
                message: "optimal constraint produced an infinite bound".into(),
            })?;
        let check = check_minimum_constraint(j, &spec, tol).stage("minimum constraint")?;
        write_file(&cfg.out_dir.join("constraint.matx"), &spec.to_matx())?;
        write_matx(cfg, "crb_constrained.matx", bound.as_matrix())?;
        rows.push(("trace_constrained".into(), f(bound.trace())));
        rows.push(("constrained_minus_pinv_frobenius".into(), f(bound.distance(&pinv))));
        rows.push(("constraint_rows".into(), spec.m().to_string()));
        rows.push(("constraint_is_minimum".into(), check.is_minimum.to_string()));
        summary.note = "singular FIM: bound attained by the optimal affine constraint".into();
        summary.constrained_trace = Some(bound.trace());
        summary.constraint_f = Some(spec.f_jac.clone());
        summary.is_minimum = Some(check.is_minimum);
        crb_eigs = report.eigenvalues.clone();
    } else {
        summary.note = "no constraint needed: FIM is full rank, pinv is the inverse".into();
    }
    rows.push(("note".into(), summary.note.clone()));

    if let Some(model) = loaded.blind_channel {
        let d = model.ambiguity_direction(loaded.theta.as_slice()).stage("ambiguity direction")?;
        let resid = (j.as_matrix() * &d).norm() / j.frobenius_norm().max(f64::MIN_POSITIVE);
        rows.push(("ambiguity_residual_rel".into(), f(resid)));
    }

    if cfg.n_samples > 0 {
        let model = loaded
            .model
            .as_deref()
            .ok_or_else(|| CliError::invalid("fim", "--samples needs a --model input"))?;
        let mc = fim_monte_carlo_with(
            model,
            &loaded.theta,
            &MonteCarloConfig {
                n_samples: cfg.n_samples,
                rng_seed: derive_seed(cfg.seed, "fim/monte-carlo", 0),
                psd_tol: cfg.tol.psd_tol,
            },
        )
        .stage("monte-carlo fim")?;
        write_matx(cfg, "fim_mc.matx", mc.matrix.as_matrix())?;
        write_matx(cfg, "fim_mc_stderr.matx", &mc.std_err)?;
        rows.push(("mc_samples".into(), mc.n_samples.to_string()));
        rows.push(("mc_std_err_bound".into(), f(mc.std_err_bound)));
        rows.push(("mc_minus_analytic_frobenius".into(), f(mc.matrix.distance(j))));
        rows.push(("mc_clipped".into(), f(mc.clipped)));
        summary.mc_std_err_bound = Some(mc.std_err_bound);
    }

    let mut eig_csv = format!("{CSV_VERSION_LINE}\nindex,fim,pinv{}\n", if crb_eigs.is_some() { ",crb_constrained" } else { "" });
    for i in 0..n {
        let _ = write!(eig_csv, "{},{},{}", i + 1, f(fim_eigs.values[i]), f(pinv_eigs.values[i]));
        if let Some(c) = &crb_eigs {
            let _ = write!(eig_csv, ",{}", f(c.values[i]));
        }
        eig_csv.push('\n');
    }
    write_file(&cfg.out_dir.join("eigenvalues.csv"), &eig_csv)?;
    write_file(&cfg.out_dir.join("report.csv"), &kv_csv(&rows))?;
    write_manifest(cfg, Some(&loaded.theta))?;
    Ok(summary)
}

pub struct CertifySummary {
    pub all_passed: bool,
    pub certificates: Vec<crate::verify::TheoremCertificate>,
}

pub fn cmd_certify(cfg: &RunConfig) -> CliResult<CertifySummary> {
    let suite = SuiteConfig {
        seed: cfg.seed,
        matrices: cfg.trials,
        constraints_per_matrix: cfg.count,
        tol: cfg.tol,
        ..SuiteConfig::default()
    };
    let (certs, theta) = match cfg.input {
        InputSource::Random => (run_theorem_suite(&suite).stage("certify")?, None),
        _ => {
            let loaded = load_fim(cfg)?;
            (run_theorem_suite_on(&loaded.j, &suite).stage("certify")?, Some(loaded.theta))
        }
    };
    prepare_out(cfg)?;
    write_file(&cfg.out_dir.join("certificates.csv"), &certificates_csv(&certs))?;
    let all_passed = certs.iter().all(|c| c.passed);
    if !all_passed {
        write_witnesses(&certs, &cfg.out_dir.join("witnesses")).stage("witnesses")?;
    }
    write_manifest(cfg, theta.as_ref())?;
    Ok(CertifySummary {
        all_passed,
        certificates: certs,
    })
}

#[derive(Clone, Debug)]
pub struct ExperimentRow {
    pub sample_index: usize,
    pub trace: f64,
    pub margin: f64,
}

pub struct ExperimentSummary {
    pub pinv_trace: f64,
    pub rows: Vec<ExperimentRow>,
    pub min_margin: f64,
}

pub fn cmd_experiment(cfg: &RunConfig) -> CliResult<ExperimentSummary> {
    let loaded = load_fim(cfg)?;
    let j = &loaded.j;
    let tol = &cfg.tol;
    let pinv_trace = unconstrained_crb(j, tol).stage("pseudoinverse")?.trace.expect("always finite");

    let mut specs = Vec::with_capacity(cfg.count);
    if cfg.include_optimal {
        specs.push(optimal_affine_constraint(j, &loaded.theta, tol).stage("optimal constraint")?);
    }
    let remaining = cfg.count - specs.len();
    let mut max_retries = 0;
    if remaining > 0 {
        let sampled = sample_minimum_constraints(j, remaining, derive_seed(cfg.seed, "experiment/constraints", 0), tol)
            .stage("sampling")?;
        max_retries = sampled.iter().map(|s| s.retries).max().unwrap_or(0);
        specs.extend(sampled.into_iter().map(|s| s.spec));
    }

    let mut rows = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let trace = spec.crb(j, tol).stage("constrained bound")?.trace.ok_or_else(|| CliError {
            code: EXIT_NUMERICAL,
            stage: "constrained bound",
            message: format!("sample {i} has an infinite bound"),
        })?;
        rows.push(ExperimentRow {
            sample_index: i,
            trace,
            margin: trace - pinv_trace,
        });
    }
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let min_trace = rows.iter().map(|r| r.trace).fold(f64::INFINITY, f64::min);

    prepare_out(cfg)?;
    let f = |v: f64| matx::fmt_f64(v);
    let mut csv = format!("{CSV_VERSION_LINE}\nsample_index,trace,margin\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{}", r.sample_index, f(r.trace), f(r.margin));
    }
    write_file(&cfg.out_dir.join("experiment.csv"), &csv)?;
    write_file(
        &cfg.out_dir.join("experiment_summary.csv"),
        &kv_csv(&[
            ("pinv_trace".into(), f(pinv_trace)),
            ("count".into(), rows.len().to_string()),
            ("min_trace".into(), f(min_trace)),
            ("min_margin".into(), f(min_margin)),
            ("max_retries".into(), max_retries.to_string()),
        ]),
    )?;
    write_manifest(cfg, Some(&loaded.theta))?;
    Ok(ExperimentSummary {
        pinv_trace,
        rows,
        min_margin,
    })
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (kind, args) = match &cli.command {
        Command::Analyze(a) => (CommandKind::Analyze, a),
        Command::Certify(a) => (CommandKind::Certify, a),
        Command::Experiment(a) => (CommandKind::Experiment, a),
    };
    match execute(kind, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("crb-kit {}: error in {}", kind.as_str(), e);
            e.code
        }
    }
}

fn execute(kind: CommandKind, args: &RunArgs) -> CliResult<i32> {
    let cfg = resolve(kind, args)?;
    match kind {
        CommandKind::Analyze => {
            let s = cmd_analyze(&cfg)?;
            println!("n = {}, rank = {}, tr(J†) = {}", s.n, s.rank, matx::fmt_f64(s.pinv_trace));
            if let Some(t) = s.constrained_trace {
                println!("optimal affine constraint: tr(CRB) = {}", matx::fmt_f64(t));
            }
            println!("{}", s.note);
            println!("report written to {}", cfg.out_dir.display());
            Ok(EXIT_OK)
        }
        CommandKind::Certify => {
            let s = cmd_certify(&cfg)?;
            for c in &s.certificates {
                println!(
                    "{:<16} {:<4} cases={:<6} worst_margin={}",
                    c.theorem_id.as_str(),
                    if c.passed { "PASS" } else { "FAIL" },
                    c.n_cases,
                    matx::fmt_f64(c.worst_margin)
                );
            }
            Ok(if s.all_passed { EXIT_OK } else { EXIT_CERTIFICATE })
        }
        CommandKind::Experiment => {
            let s = cmd_experiment(&cfg)?;
            println!(
                "{} samples, tr(J†) = {}, min margin = {}",
                s.rows.len(),
                matx::fmt_f64(s.pinv_trace),
                matx::fmt_f64(s.min_margin)
            );
            Ok(if s.min_margin >= -cfg.tol.margin_tol { EXIT_OK } else { EXIT_CERTIFICATE })
        }
    }
}
