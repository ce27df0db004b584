//! The `curvlab` command line.
//!
//! Exit codes: 0 when every tolerance is met, 2 when a check misses its
//! tolerance (the report is still written), 1 on usage or configuration
//! errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::atlas::{self, AtlasRequest, OutputFormat, StabilityQuery, VerdictKind};
use crate::chart::{
    build_grid, euler_s3, make_model, perturbed_torus, random_trig_tensor, s3_polynomial,
    s3_random_tensor, MetricField, ModelKind, QuadratureGrid, POINCARE_R_MAX,
};
use crate::error::{CurvError, Result};
use crate::functionals::{self, Coefficients, FunctionalReport};
use crate::spectral::{self, RayleighReport, TorusTTMode};
use crate::tensor::{self, SpaceFormDefect};
use crate::variation::{
    self, HessianCase, IdentityCheck, ModeKind, VariationReport, D1_T_STEP, DEFAULT_T_STEP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;

/// Environment variable capping the worker threads (0 or unset: automatic).
pub const THREADS_ENV: &str = "CURVLAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "curvlab",
    version,
    about = "Numerical checks for quadratic curvature functionals"
)]
pub struct Cli {
    /// JSON object of flag defaults; explicit flags override it
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Write the report here instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Space-form curvature check and functional breakdown of a model metric
    #[command(args_override_self = true)]
    Curvature(CurvatureArgs),
    /// TT and conformal integral-identity batteries on the round S³
    #[command(args_override_self = true)]
    CheckIdentities(IdentityArgs),
    /// Finite-difference first variations against the gradient tensor
    #[command(args_override_self = true)]
    VerifyGradient(GradientArgs),
    /// Numeric second variation along an eigen-mode against its prediction
    #[command(args_override_self = true)]
    VerifyHessian(HessianArgs),
    /// Rayleigh quotient of the Lichnerowicz Laplacian on an explicit TT mode
    #[command(args_override_self = true)]
    Rayleigh(RayleighArgs),
    /// Stability verdict for one (n, λ, mode, s, τ)
    #[command(args_override_self = true)]
    Classify(ClassifyArgs),
    /// Stability verdicts over an (s, τ) grid
    #[command(args_override_self = true)]
    Atlas(AtlasArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Torus,
    Sphere,
    Poincare,
    S3Euler,
}

impl ModelName {
    fn kind(self) -> ModelKind {
        match self {
            ModelName::Torus => ModelKind::Torus,
            ModelName::Sphere => ModelKind::Sphere,
            ModelName::Poincare => ModelKind::PoincareBall,
            ModelName::S3Euler => ModelKind::EulerS3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GradientModel {
    Torus,
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseName {
    S3Invariant,
    TorusTt,
    TorusConformal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Tt,
    Conformal,
}

impl From<ModeArg> for ModeKind {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Tt => ModeKind::Tt,
            ModeArg::Conformal => ModeKind::Conformal,
        }
    }
}

#[derive(Debug, Args)]
pub struct CoeffArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
}

impl CoeffArgs {
    fn resolve(&self) -> Result<Coefficients> {
        Coefficients::new(self.s.unwrap_or(0.0), self.tau.unwrap_or(0.0))
    }
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[arg(long, value_enum, default_value = "sphere")]
    pub model: ModelName,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Sectional curvature; for the spheres this fixes the radius
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Torus side, sphere radius or Poincaré chart radius bound
    #[arg(long)]
    pub radius: Option<f64>,
    /// Nodes per axis, one value or a comma list
    #[arg(long, value_parser = parse_usize_list)]
    pub res: Option<UsizeList>,
    #[command(flatten)]
    pub coeff: CoeffArgs,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    #[arg(long, value_parser = parse_usize_list)]
    pub res: Option<UsizeList>,
    /// Diagonal of the invariant TT mode, summing to zero
    #[arg(long, value_parser = parse_f64_list, allow_hyphen_values = true)]
    pub d: Option<F64List>,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct GradientArgs {
    #[arg(long, value_enum, default_value = "torus")]
    pub model: GradientModel,
    /// Number of random perturbation directions
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Amplitude of the random perturbation directions
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long, value_parser = parse_usize_list)]
    pub res: Option<UsizeList>,
    #[command(flatten)]
    pub coeff: CoeffArgs,
    #[arg(long, default_value_t = D1_T_STEP)]
    pub t_step: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    /// Diagonal of the S³ invariant TT mode
    #[arg(long, value_parser = parse_f64_list, allow_hyphen_values = true)]
    pub d: Option<F64List>,
    /// Torus wave vector
    #[arg(long, value_parser = parse_i64_list, allow_hyphen_values = true)]
    pub k: Option<I64List>,
    /// Torus amplitude matrix, row-major
    #[arg(long, value_parser = parse_f64_list, allow_hyphen_values = true)]
    pub a: Option<F64List>,
}

#[derive(Debug, Args)]
pub struct HessianArgs {
    #[arg(long, value_enum, default_value = "s3-invariant")]
    pub model: CaseName,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[arg(long, value_parser = parse_usize_list)]
    pub res: Option<UsizeList>,
    #[command(flatten)]
    pub coeff: CoeffArgs,
    #[arg(long, default_value_t = DEFAULT_T_STEP)]
    pub t_step: f64,
    /// Relative tolerance on the second variation
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
    /// Relative tolerance on the first variation
    #[arg(long, default_value_t = 1e-4)]
    pub tol_d1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RayleighModel {
    S3Invariant,
    TorusTt,
}

#[derive(Debug, Args)]
pub struct RayleighArgs {
    #[arg(long, value_enum, default_value = "s3-invariant")]
    pub model: RayleighModel,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[arg(long, value_parser = parse_usize_list)]
    pub res: Option<UsizeList>,
    /// Tolerance on the quotient: absolute on S³, relative on the torus
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: i32,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub coeff: CoeffArgs,
}

#[derive(Debug, Args)]
pub struct AtlasArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: i32,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long, allow_hyphen_values = true)]
    pub s_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub s_max: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_max: f64,
    /// Grid points per axis
    #[arg(long, default_value_t = 50)]
    pub res: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UsizeList(pub Vec<usize>);
#[derive(Debug, Clone, PartialEq)]
pub struct F64List(pub Vec<f64>);
#[derive(Debug, Clone, PartialEq)]
pub struct I64List(pub Vec<i64>);

fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| format!("cannot parse {p:?}"))
        })
        .collect()
}

fn parse_usize_list(s: &str) -> std::result::Result<UsizeList, String> {
    parse_list(s).map(UsizeList)
}

fn parse_f64_list(s: &str) -> std::result::Result<F64List, String> {
    parse_list(s).map(F64List)
}

fn parse_i64_list(s: &str) -> std::result::Result<I64List, String> {
    parse_list(s).map(I64List)
}

/// A finished report and whether every tolerance held.
struct Outcome {
    body: String,
    passed: bool,
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn csv_row<T: Serialize>(value: &T) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(value)?;
    let bytes = w.into_inner().map_err(|e| CurvError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn render<T: Serialize>(value: &T, format: Format, flat: bool) -> Result<String> {
    match format {
        Format::Json => json(value),
        Format::Csv if flat => csv_row(value),
        Format::Csv => Err(CurvError::Config(
            "csv output is only available for flat reports".into(),
        )),
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CurvError::Config(format!(
            "--{name} must be a positive number, got {v}"
        )))
    }
}

fn grid_for(
    field: &MetricField,
    res: &Option<UsizeList>,
    default: &[usize],
) -> Result<QuadratureGrid> {
    let n = field.dim();
    let r = match res {
        Some(UsizeList(v)) if v.len() == 1 => vec![v[0]; n],
        Some(UsizeList(v)) if v.len() == n => v.clone(),
        Some(UsizeList(v)) => {
            return Err(CurvError::Config(format!(
                "--res needs 1 or {n} values, got {}",
                v.len()
            )))
        }
        None => default.to_vec(),
    };
    build_grid(field.domain(), &r)
}

fn d_vector(d: &Option<F64List>) -> Result<[f64; 3]> {
    match d {
        None => Ok([2.0, -1.0, -1.0]),
        Some(F64List(v)) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
        Some(F64List(v)) => Err(CurvError::Config(format!(
            "--d needs 3 values, got {}",
            v.len()
        ))),
    }
}

fn torus_mode(m: &ModeArgs) -> Result<(Vec<i64>, Vec<f64>)> {
    let k = m.k.clone().map(|l| l.0).unwrap_or_else(|| vec![1, 0, 0]);
    let n = k.len();
    let a = match &m.a {
        Some(F64List(v)) => v.clone(),
        None if n == 3 && k == [1, 0, 0] => vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0],
        None => return Err(CurvError::Config("--a is required unless k = 1,0,0".into())),
    };
    Ok((k, a))
}

// ---------------------------------------------------------------------------
// Subcommands

#[derive(Serialize)]
struct CurvatureReport {
    model: String,
    n: usize,
    lambda: f64,
    nodes: usize,
    defect: SpaceFormDefect,
    weyl_max: Option<f64>,
    functional: Option<FunctionalReport>,
    decomposition_residual: Option<f64>,
    tol: f64,
    pass: bool,
}

fn cmd_curvature(a: &CurvatureArgs, format: Format) -> Result<Outcome> {
    let kind = a.model.kind();
    let tol = positive("tol", a.tol)?;
    let sign = kind.curvature_sign();
    let coeff = a.coeff.resolve()?;
    let (lambda, scale) = match kind {
        ModelKind::Torus => (a.lambda.unwrap_or(0.0), a.radius.unwrap_or(1.0)),
        ModelKind::PoincareBall => (a.lambda.unwrap_or(-1.0), a.radius.unwrap_or(POINCARE_R_MAX)),
        ModelKind::Sphere | ModelKind::EulerS3 => match (a.lambda, a.radius) {
            (Some(l), None) => (l, 1.0 / positive("lambda", l)?.sqrt()),
            (None, Some(r)) => (1.0 / (r * r), r),
            (None, None) => (1.0, 1.0),
            (Some(l), Some(r)) => {
                if (l - 1.0 / (r * r)).abs() > 1e-12 * l.abs() {
                    return Err(CurvError::Config(format!(
                        "--lambda {l} and --radius {r} disagree"
                    )));
                }
                (l, r)
            }
        },
    };
    if (kind == ModelKind::PoincareBall && lambda != -1.0)
        || (kind == ModelKind::Torus && lambda != 0.0)
    {
        return Err(CurvError::Config(format!(
            "model {} has λ = {sign}",
            kind.name()
        )));
    }
    let field = make_model(kind, a.n, sign, scale)?;
    let lambda = field.curvature().unwrap_or(lambda);
    let grid = grid_for(&field, &a.res, &vec![6; a.n])?;
    let n = a.n;
    let per_node = grid
        .nodes
        .iter()
        .map(|x| {
            let b = tensor::curvature(&field, x)?;
            let w = if n >= 3 {
                tensor::norm2(&b.weyl, 4, n, &b.ginv).sqrt()
            } else {
                0.0
            };
            Ok((tensor::space_form_defect(&b, lambda), w))
        })
        .collect::<Result<Vec<_>>>()?;
    let defect = per_node
        .iter()
        .fold(SpaceFormDefect::default(), |acc, (d, _)| acc.max(d));
    let weyl_max = (n >= 3).then(|| per_node.iter().map(|p| p.1).fold(0.0, f64::max));
    let (functional, decomposition_residual) = if field.allows_integrals() {
        let f = functionals::evaluate(&field, &grid, coeff)?;
        let d = if n >= 3 {
            Some(functionals::decomposition_residual(&field, &grid)?)
        } else {
            None
        };
        (Some(f), d)
    } else {
        (None, None)
    };
    let pass = defect.worst() <= tol
        && weyl_max.is_none_or(|w| w <= tol)
        && decomposition_residual.is_none_or(|d| d <= tol);
    let report = CurvatureReport {
        model: field.label().to_string(),
        n,
        lambda,
        nodes: grid.len(),
        defect,
        weyl_max,
        functional,
        decomposition_residual,
        tol,
        pass,
    };
    Ok(Outcome {
        body: render(&report, format, false)?,
        passed: pass,
    })
}

#[derive(Serialize)]
struct IdentityReport {
    model: String,
    tt: Vec<IdentityCheck>,
    conformal: Vec<IdentityCheck>,
    max_rel_err: f64,
    tol: f64,
    pass: bool,
}

fn cmd_identities(a: &IdentityArgs, format: Format) -> Result<Outcome> {
    let tol = positive("tol", a.tol)?;
    let base = euler_s3(1.0)?;
    let grid = grid_for(&base, &a.res, &[14, 10, 10])?;
    let h = spectral::s3_invariant_tt(d_vector(&a.d)?)?;
    let tt = variation::tt_identity_suite(&base, &h, &grid)?;
    let f = s3_polynomial(vec![
        (1.0, [1, 1, 0, 0]),
        (0.5, [0, 0, 1, 0]),
        (-0.3, [0, 0, 2, 0]),
    ]);
    let conformal = variation::conformal_identity_suite(&base, &f, &grid)?;
    let max_rel_err = tt
        .iter()
        .chain(&conformal)
        .map(|c| c.rel_err)
        .fold(0.0, f64::max);
    let pass = max_rel_err <= tol;
    let report = IdentityReport {
        model: base.label().to_string(),
        tt,
        conformal,
        max_rel_err,
        tol,
        pass,
    };
    Ok(Outcome {
        body: render(&report, format, false)?,
        passed: pass,
    })
}

#[derive(Serialize)]
struct GradientCase {
    index: usize,
    seed: u64,
    d1_numeric: f64,
    d1_analytic: f64,
    rel_err: f64,
}

#[derive(Serialize)]
struct GradientReport {
    model: String,
    n: usize,
    s: f64,
    tau: f64,
    t_step: f64,
    cases: Vec<GradientCase>,
    max_rel_err: f64,
    tol: f64,
    pass: bool,
}

fn cmd_gradient(a: &GradientArgs, format: Format) -> Result<Outcome> {
    let tol = positive("tol", a.tol)?;
    let t_step = positive("t-step", a.t_step)?;
    let coeff = a.coeff.resolve()?;
    if a.count == 0 {
        return Err(CurvError::Config("--count must be at least 1".into()));
    }
    let (base, default_res, amp) = match a.model {
        GradientModel::Torus => (perturbed_torus(3, 0.1, 2, a.seed)?, vec![8, 8, 8], 0.4),
        GradientModel::Sphere => (euler_s3(1.0)?, vec![8, 6, 6], 0.3),
    };
    let amp = positive("amplitude", a.amplitude.unwrap_or(amp))?;
    let grid = grid_for(&base, &a.res, &default_res)?;
    let mut cases = Vec::with_capacity(a.count);
    for index in 0..a.count {
        let seed = a.seed.wrapping_mul(1000).wrapping_add(index as u64 + 1);
        let h = match a.model {
            GradientModel::Torus => random_trig_tensor(&[1.0; 3], amp, 2, 1, seed),
            GradientModel::Sphere => s3_random_tensor(amp, seed),
        };
        let d1_analytic = variation::first_variation(&base, &grid, &h, coeff)?;
        let d1_numeric = variation::first_variation_numeric(&base, &grid, &h, coeff, t_step)?;
        cases.push(GradientCase {
            index,
            seed,
            d1_numeric,
            d1_analytic,
            rel_err: (d1_numeric - d1_analytic).abs() / d1_analytic.abs().max(1.0),
        });
    }
    let max_rel_err = cases.iter().map(|c| c.rel_err).fold(0.0, f64::max);
    let pass = max_rel_err <= tol;
    let report = GradientReport {
        model: base.label().to_string(),
        n: base.dim(),
        s: coeff.s,
        tau: coeff.tau,
        t_step,
        cases,
        max_rel_err,
        tol,
        pass,
    };
    Ok(Outcome {
        body: render(&report, format, false)?,
        passed: pass,
    })
}

fn cmd_hessian(a: &HessianArgs, format: Format) -> Result<Outcome> {
    let tol = positive("tol", a.tol)?;
    let tol_d1 = positive("tol-d1", a.tol_d1)?;
    let t_step = positive("t-step", a.t_step)?;
    let coeff = a.coeff.resolve()?;
    let (case, default_res) = match a.model {
        CaseName::S3Invariant => (
            HessianCase::s3_invariant(d_vector(&a.mode.d)?)?,
            vec![12, 8, 8],
        ),
        CaseName::TorusTt => {
            let (k, amp) = torus_mode(&a.mode)?;
            let mut r = vec![4; k.len()];
            r[0] = 8;
            (HessianCase::torus_tt(&k, &amp)?, r)
        }
        CaseName::TorusConformal => {
            let k = a
                .mode
                .k
                .clone()
                .map(|l| l.0)
                .unwrap_or_else(|| vec![1, 0, 0]);
            (HessianCase::torus_conformal(&k)?, vec![8; k.len()])
        }
    };
    let grid = grid_for(&case.base, &a.res, &default_res)?;
    let report: VariationReport = variation::verify_hessian(&case, &grid, coeff, t_step)?;
    let passed = report.rel_err_d2 <= tol && report.rel_err_d1 <= tol_d1;
    Ok(Outcome {
        body: render(&report, format, true)?,
        passed,
    })
}

fn cmd_rayleigh(a: &RayleighArgs, format: Format) -> Result<Outcome> {
    let (report, passed): (RayleighReport, bool) = match a.model {
        RayleighModel::S3Invariant => {
            let tol = positive("tol", a.tol.unwrap_or(1e-3))?;
            let d = d_vector(&a.mode.d)?;
            let base = euler_s3(1.0)?;
            let grid = grid_for(&base, &a.res, &[24, 24, 24])?;
            let h = spectral::s3_invariant_tt(d)?;
            let desc = format!("s3 invariant d=({},{},{})", d[0], d[1], d[2]);
            let r = spectral::rayleigh_report(&base, &h, &grid, &desc)?;
            let bound = spectral::tt_lower_bound(3, 1.0).unwrap_or(0.0);
            let ok =
                (r.quotient - 12.0).abs() <= tol && r.quotient >= bound - spectral::BOUND_SLACK;
            (r, ok)
        }
        RayleighModel::TorusTt => {
            let tol = positive("tol", a.tol.unwrap_or(1e-6))?;
            let (k, amp) = torus_mode(&a.mode)?;
            let mode = TorusTTMode::new(k.clone(), amp)?;
            let base = crate::chart::flat_torus(&vec![1.0; k.len()])?;
            let grid = grid_for(&base, &a.res, &vec![8; k.len()])?;
            let desc = format!("torus k={k:?}");
            let r = spectral::rayleigh_report(&base, &mode.field(), &grid, &desc)?;
            let want = mode.eigenvalue();
            let ok = (r.quotient - want).abs() <= tol * want;
            (r, ok)
        }
    };
    Ok(Outcome {
        body: render(&report, format, true)?,
        passed,
    })
}

#[derive(Serialize)]
struct ClassifyReport {
    n: usize,
    lambda: i32,
    mode: ModeKind,
    s: f64,
    tau: f64,
    verdict: VerdictKind,
    citation: Option<String>,
}

fn cmd_classify(a: &ClassifyArgs, format: Format) -> Result<Outcome> {
    let coeff = a.coeff.resolve()?;
    let q = StabilityQuery::new(a.n, a.lambda, a.mode.into(), coeff.s, coeff.tau)?;
    let v = atlas::classify(&q);
    let report = ClassifyReport {
        n: q.n,
        lambda: q.lambda,
        mode: q.mode,
        s: q.s,
        tau: q.tau,
        verdict: v.value,
        citation: v.citation,
    };
    Ok(Outcome {
        body: render(&report, format, true)?,
        passed: true,
    })
}

fn cmd_atlas(a: &AtlasArgs, format: Option<Format>, out: Option<&Path>) -> Result<(Outcome, bool)> {
    let req = AtlasRequest {
        n: a.n,
        lambda: a.lambda,
        mode: a.mode.into(),
        s_range: (a.s_min, a.s_max),
        tau_range: (a.tau_min, a.tau_max),
        resolution: a.res,
    };
    let format = match (format, out) {
        (Some(Format::Json), _) => OutputFormat::Json,
        (Some(Format::Csv), _) => OutputFormat::Csv,
        (None, Some(p)) if p.extension().is_some_and(|e| e == "json") => OutputFormat::Json,
        (None, _) => OutputFormat::Csv,
    };
    match out {
        Some(path) => {
            let rows = atlas::emit_atlas(&req, format, path)?;
            #[derive(Serialize)]
            struct Summary<'a> {
                rows: usize,
                path: &'a Path,
            }
            let body = json(&Summary { rows, path })?;
            Ok((Outcome { body, passed: true }, true))
        }
        None => {
            let mut buf = Vec::new();
            atlas::write_atlas(&atlas::atlas_rows(&req)?, format, &mut buf)?;
            let body = String::from_utf8(buf).expect("atlas output is utf-8");
            Ok((Outcome { body, passed: true }, false))
        }
    }
}

// ---------------------------------------------------------------------------
// Entry point

/// Splices the `--config` JSON object in as flags right after the subcommand,
/// so explicit flags (which come later) override it.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CurvError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| CurvError::Config("config file must hold a JSON object".into()))?;
    let mut extra = Vec::new();
    for (key, v) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        let val = match v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(x) => x.to_string(),
            serde_json::Value::Array(items) => items
                .iter()
                .map(|x| match x {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            other => {
                return Err(CurvError::Config(format!(
                    "config value for {key:?} is not usable: {other}"
                )))
            }
        };
        extra.push(OsString::from(flag));
        extra.push(OsString::from(val));
    }
    let names = [
        "curvature",
        "check-identities",
        "verify-gradient",
        "verify-hessian",
        "rayleigh",
        "classify",
        "atlas",
    ];
    let pos = args
        .iter()
        .position(|a| names.contains(&a.to_string_lossy().as_ref()))
        .ok_or_else(|| CurvError::Config("no subcommand given".into()))?;
    let mut out: Vec<OsString> = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| {
            CurvError::Config(format!(
                "{THREADS_ENV} must be a non-negative integer, got {v:?}"
            ))
        }),
    }
}

fn dispatch(cli: &Cli) -> Result<(Outcome, bool)> {
    let format = cli.format.unwrap_or(Format::Json);
    let plain = |o: Result<Outcome>| o.map(|o| (o, false));
    match &cli.command {
        Command::Curvature(a) => plain(cmd_curvature(a, format)),
        Command::CheckIdentities(a) => plain(cmd_identities(a, format)),
        Command::VerifyGradient(a) => plain(cmd_gradient(a, format)),
        Command::VerifyHessian(a) => plain(cmd_hessian(a, format)),
        Command::Rayleigh(a) => plain(cmd_rayleigh(a, format)),
        Command::Classify(a) => plain(cmd_classify(a, format)),
        Command::Atlas(a) => cmd_atlas(a, cli.format, cli.out.as_deref()),
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let result = if threads == 0 {
        dispatch(&cli)
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(CurvError::Config(format!(
                "cannot start {threads} threads: {e}"
            ))),
        }
    };
    match result {
        Ok((outcome, written)) => {
            let io = match (&cli.out, written) {
                (Some(path), false) => std::fs::write(path, &outcome.body),
                _ => stdout.write_all(outcome.body.as_bytes()),
            };
            if let Err(e) = io {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_USAGE;
            }
            if outcome.passed {
                EXIT_OK
            } else {
                let _ = writeln!(stderr, "tolerance check failed");
                EXIT_TOLERANCE
            }
        }
        Err(CurvError::Tolerance { what, err, tol }) => {
            let _ = writeln!(stderr, "tolerance exceeded: {what} ({err:.3e} > {tol:.3e})");
            EXIT_TOLERANCE
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
