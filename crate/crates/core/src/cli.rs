//! Batch front end: `verify`, `evolve`, `spectrum`, `enumerate`, `synth`.
//!
//! Exit codes: 0 success, 1 failed invariant or domain error, 2 usage or
//! schema error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::algebra::{
    self, c, hermitian_eig, hermitian_part, hermitian_residual, operator_norm, singular_values, CVector, C64,
    DEFAULT_TOL,
};
use crate::bridge::{scaled_spectrum, selfadjoint_extension, spectrum_csv};
use crate::extension::{
    build_extension, build_extension_unchecked, classify, is_unitary_generator, Contraction, Extension, ExtensionError,
};
use crate::io::{self, fmt_f64, vector_from_json, ModelJson, ModelKind, PencilJson, QuadrupleJson, SchemaError};
use crate::pencil::{check_skew_symmetric, SkewPencil};
use crate::quadruple::{quadruple_from_deficiency, quadruple_from_form, synth_pencil, BoundaryQuadruple};
use crate::random;
use crate::report::{all_pass, Check};
use crate::sbp::{build_model, SbpModel};
use crate::semigroup::{propagate_cn, propagate_exact, SemigroupError};

#[derive(Parser, Debug)]
#[command(name = "dissipgen", version, about = "Boundary quadruples and dissipative extensions of skew pencils")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the invariants of a pencil or quadruple document.
    Verify(Common),
    /// Evolve a model and write the trajectory CSV.
    Evolve(Common),
    /// Write the spectrum of a model extension as CSV.
    Spectrum(Common),
    /// Tabulate extensions for sampled contractions.
    Enumerate(Common),
    /// Write a synthetic pencil document.
    Synth(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output file (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "X", env = "DISSIPGEN_TOL")]
    pub tol: Option<f64>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ExtensionError> for CliError {
    fn from(e: ExtensionError) -> Self {
        match e {
            ExtensionError::DimensionMismatch(_) => CliError::Usage(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<SemigroupError> for CliError {
    fn from(e: SemigroupError) -> Self {
        match e {
            SemigroupError::DimensionMismatch { .. } | SemigroupError::InvalidTimes => CliError::Usage(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let target: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(target, "{}", e.render());
            return if code == 0 { 0 } else { 2 };
        }
    };
    let outcome = match &cli.command {
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Evolve(a) => cmd_evolve(a, stdout),
        Command::Spectrum(a) => cmd_spectrum(a, stdout),
        Command::Enumerate(a) => cmd_enumerate(a, stdout),
        Command::Synth(a) => cmd_synth(a, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}

fn tolerance(a: &Common) -> Result<f64, CliError> {
    match a.tol {
        None => Ok(DEFAULT_TOL),
        Some(t) if t.is_finite() && t > 0.0 => Ok(t),
        Some(t) => Err(CliError::Usage(format!("tolerance must be positive and finite, got {t}"))),
    }
}

fn seed(a: &Common, from_config: Option<u64>) -> u64 {
    a.seed.or(from_config).unwrap_or(0)
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| SchemaError::Read { path: path.to_path_buf(), source })?;
    Ok(serde_json::from_str(&text).map_err(SchemaError::from)?)
}

fn emit(a: &Common, contents: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    match &a.out {
        Some(path) => io::write_atomic(path, contents)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(contents).map_err(|e| CliError::Usage(format!("cannot write output: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s.into_bytes()
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub subject: &'static str,
    pub pass: bool,
    pub tolerance: f64,
    pub checks: Vec<Check>,
}

fn pencil_checks(doc: &PencilJson, tol: f64) -> Result<(Vec<Check>, Option<SkewPencil>), CliError> {
    let (w, a, core) = doc.to_matrices()?;
    let mut checks = vec![Check::at_most("weight hermitian", hermitian_residual(&w), algebra::HERMITIAN_TOL)];
    let (vals, _) = hermitian_eig(&hermitian_part(&w));
    let wn = operator_norm(&w).max(f64::MIN_POSITIVE);
    checks.push(Check::above("weight positive definite", vals.first().copied().unwrap_or(0.0) / wn, 0.0));
    let margin = if core.ncols() == 0 {
        1.0
    } else {
        let s = singular_values(&core);
        if s[0] == 0.0 || core.ncols() > core.nrows() {
            0.0
        } else {
            s[core.ncols() - 1] / s[0]
        }
    };
    checks.push(Check::above("core full rank", margin, tol));
    let t = &w * &a + a.adjoint() * &w;
    let scale = operator_norm(&w) * operator_norm(&a) * operator_norm(&core);
    let core_res = if core.ncols() == 0 || scale == 0.0 { 0.0 } else { operator_norm(&(&t * &core)) / scale };
    checks.push(Check::at_most("core in kernel of boundary form", core_res, tol));
    if !all_pass(&checks) {
        return Ok((checks, None));
    }
    let pencil = match SkewPencil::new(w, a, core) {
        Ok(p) => p,
        Err(e) => {
            checks.push(Check {
                name: format!("pencil construction: {e}"),
                residual: 1.0,
                tolerance: 0.0,
                pass: false,
            });
            return Ok((checks, None));
        }
    };
    let skew = check_skew_symmetric(&pencil, tol);
    let skew_scale = (operator_norm(pencil.weight()) * operator_norm(pencil.a_max())).max(1.0);
    checks.push(Check {
        name: "skew on core".into(),
        residual: skew.residual,
        tolerance: tol * skew_scale,
        pass: skew.pass,
    });
    Ok((checks, Some(pencil)))
}

fn cmd_verify(a: &Common, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let tol = tolerance(a)?;
    let text =
        std::fs::read_to_string(&a.config).map_err(|source| SchemaError::Read { path: a.config.clone(), source })?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(SchemaError::from)?;
    let is_quadruple = value.get("pencil_ref").is_some();
    let report = if is_quadruple {
        let doc: QuadrupleJson = serde_json::from_value(value).map_err(SchemaError::from)?;
        let pencil_doc = doc.resolve_pencil(a.config.parent())?;
        let (mut checks, pencil) = pencil_checks(&pencil_doc, tol)?;
        if let Some(p) = pencil {
            let q = doc.to_quadruple(Arc::new(p)).map_err(|e| CliError::Usage(e.to_string()))?;
            checks.extend(q.verify(tol));
        }
        VerifyReport { subject: "quadruple", pass: all_pass(&checks), tolerance: tol, checks }
    } else {
        let doc: PencilJson = serde_json::from_value(value).map_err(SchemaError::from)?;
        let (mut checks, pencil) = pencil_checks(&doc, tol)?;
        if let Some(p) = pencil {
            match quadruple_from_form(Arc::new(p), tol) {
                Ok(q) => checks.extend(q.verify(tol).into_iter().map(|mut c| {
                    c.name = format!("form quadruple: {}", c.name);
                    c
                })),
                Err(e) => checks.push(Check {
                    name: format!("form quadruple: {e}"),
                    residual: 1.0,
                    tolerance: 0.0,
                    pass: false,
                }),
            }
        }
        VerifyReport { subject: "pencil", pass: all_pass(&checks), tolerance: tol, checks }
    };
    emit(a, &to_json(&report), stdout)?;
    Ok(if report.pass { 0 } else { 1 })
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Explicit ambient vector of `[re, im]` pairs.
    Vector(Vec<[f64; 2]>),
    /// `exp(−((x − center)/width)²)` in one solution component.
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default)]
        component: usize,
    },
    /// Random coordinates in the extension domain.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_end: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Exact,
    CrankNicolson,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub model: ModelJson,
    pub u0: InitialState,
    pub times: TimeGrid,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn model_and_extension(doc: &ModelJson) -> Result<(SbpModel, Extension), CliError> {
    let model = build_model(doc.kind, doc.n, doc.m, doc.a, doc.b).map_err(|e| CliError::Usage(e.to_string()))?;
    let phi = Contraction::new(doc.phi.to_matrix()?)?;
    let e = build_extension(&model.quadruple, &phi)?;
    Ok((model, e))
}

fn initial_state(init: &InitialState, model: &SbpModel, e: &Extension, seed: u64) -> Result<CVector, CliError> {
    let dim = model.pencil.dim();
    match init {
        InitialState::Vector(v) => {
            if v.len() != dim {
                return Err(CliError::Usage(format!("u0 must have {dim} entries, got {}", v.len())));
            }
            Ok(vector_from_json(v)?)
        }
        InitialState::Gaussian { center, width, component } => {
            let blocks = match model.kind {
                ModelKind::Transport => model.geometry.m,
                ModelKind::SecondDerivative => 1,
                ModelKind::Wave => 2,
            };
            if *component >= blocks {
                return Err(CliError::Usage(format!("component {component} out of range (model has {blocks})")));
            }
            if !(width.is_finite() && *width > 0.0 && center.is_finite()) {
                return Err(CliError::Usage("gaussian needs a finite center and positive width".into()));
            }
            let n = model.geometry.n;
            let mut u = CVector::zeros(dim);
            for (i, x) in model.op.grid().iter().enumerate() {
                let idx = match model.kind {
                    ModelKind::Transport => i * blocks + component,
                    _ => component * n + i,
                };
                u[idx] = c((-((x - center) / width).powi(2)).exp(), 0.0);
            }
            Ok(u)
        }
        InitialState::Random => {
            let mut rng = random::seeded(seed);
            Ok(e.ambient(&random::complex_gaussian_vector(&mut rng, e.s())))
        }
    }
}

fn cmd_evolve(a: &Common, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let cfg: EvolveConfig = read_config(&a.config)?;
    if !(cfg.times.t_end.is_finite() && cfg.times.t_end >= 0.0) || cfg.times.steps == 0 {
        return Err(CliError::Usage("times need t_end ≥ 0 and steps ≥ 1".into()));
    }
    let (model, e) = model_and_extension(&cfg.model)?;
    let u0 = initial_state(&cfg.u0, &model, &e, seed(a, cfg.seed))?;
    let TimeGrid { t_end, steps } = cfg.times;
    let traj = match cfg.method {
        Method::Exact => {
            let times: Vec<f64> = (0..=steps).map(|k| t_end * k as f64 / steps as f64).collect();
            propagate_exact(&e, &u0, &times)?
        }
        Method::CrankNicolson => propagate_cn(&e, &u0, t_end / steps as f64, steps)?,
    };
    emit(a, traj.to_csv(&e).as_bytes(), stdout)?;
    let line = format!("final_energy={}\n", fmt_f64(traj.final_energy().unwrap_or(0.0)));
    if a.out.is_some() {
        let _ = stdout.write_all(line.as_bytes());
    }
    Ok(0)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub model: ModelJson,
}

fn cmd_spectrum(a: &Common, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let cfg: SpectrumConfig = read_config(&a.config)?;
    let (model, e) = model_and_extension(&cfg.model)?;
    // For A = iS report the spectrum of S itself.
    let values: Vec<C64> = match model.kind {
        ModelKind::SecondDerivative => {
            let phi = Contraction::new(e.phi().clone())?;
            if phi.is_unitary() {
                let sa =
                    selfadjoint_extension(&model.quadruple, &phi).map_err(|err| CliError::Domain(err.to_string()))?;
                sa.spectrum.iter().map(|&x| c(x, 0.0)).collect()
            } else {
                scaled_spectrum(&e, c(0.0, -1.0)).map_err(|err| CliError::Domain(err.to_string()))?
            }
        }
        _ => scaled_spectrum(&e, c(1.0, 0.0)).map_err(|err| CliError::Domain(err.to_string()))?,
    };
    emit(a, spectrum_csv(&values).as_bytes(), stdout)?;
    Ok(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub k0: usize,
    pub kp: usize,
    pub km: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PencilSource {
    Synth { k0: usize, kp: usize, km: usize },
    Inline(PencilJson),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constructor {
    #[default]
    FormSpectral,
    Deficiency,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateConfig {
    pub pencil: PencilSource,
    pub samples: usize,
    #[serde(default)]
    pub constructor: Constructor,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn cmd_enumerate(a: &Common, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let cfg: EnumerateConfig = read_config(&a.config)?;
    let tol = tolerance(a)?;
    let seed = seed(a, cfg.seed);
    let pencil = match &cfg.pencil {
        PencilSource::Synth { k0, kp, km } => {
            synth_pencil(*k0, *kp, *km, seed).map_err(|e| CliError::Usage(e.to_string()))?
        }
        PencilSource::Inline(doc) => doc.to_pencil().map_err(|e| CliError::Domain(e.to_string()))?,
    };
    let pencil = Arc::new(pencil);
    let q: BoundaryQuadruple = match cfg.constructor {
        Constructor::FormSpectral => quadruple_from_form(pencil, tol),
        Constructor::Deficiency => quadruple_from_deficiency(pencil, tol),
    }
    .map_err(|e| CliError::Domain(e.to_string()))?;
    let regime = classify(q.p(), q.q());
    let mut rng = random::seeded(seed);
    let header: Vec<String> = [
        "sample",
        "p",
        "q",
        "regime",
        "sigma_max",
        "sigma_min",
        "lambda_max_herm",
        "dissipative",
        "unitary_phi",
        "unitary_generator",
    ]
    .map(String::from)
    .to_vec();
    let mut rows = Vec::with_capacity(cfg.samples);
    let mut ok = true;
    for k in 0..cfg.samples {
        let phi = Contraction::new(random::contraction(&mut rng, q.q(), q.p()))?;
        let e = build_extension_unchecked(&q, phi.phi())?;
        let cert = e.certificate();
        let unitary_gen = is_unitary_generator(&e);
        ok &= cert.is_dissipative() && (!phi.is_unitary() || unitary_gen);
        rows.push(vec![
            k.to_string(),
            q.p().to_string(),
            q.q().to_string(),
            regime.label().to_string(),
            fmt_f64(phi.sigma_max()),
            fmt_f64(phi.sigma_min()),
            fmt_f64(cert.lambda_max_herm),
            cert.is_dissipative().to_string(),
            phi.is_unitary().to_string(),
            unitary_gen.to_string(),
        ]);
    }
    emit(a, io::csv(&header, rows).as_bytes(), stdout)?;
    Ok(if ok { 0 } else { 1 })
}

fn cmd_synth(a: &Common, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let cfg: SynthConfig = read_config(&a.config)?;
    let pencil = synth_pencil(cfg.k0, cfg.kp, cfg.km, seed(a, cfg.seed)).map_err(|e| CliError::Usage(e.to_string()))?;
    emit(a, &to_json(&PencilJson::from(&pencil)), stdout)?;
    Ok(0)
}
