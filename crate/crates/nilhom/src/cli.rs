//! Subcommands and the exit-code contract: 0 yes/pass, 1 no/violations,
//! 2 usage error, 3 numeric failure.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nilhom_core::algebra::LieAlgebra;
use nilhom_core::decompose::{decompose_automorphism, DecomposeError};
use nilhom_core::grading::{classify_automorphism, classify_derivation, ExistenceVerdict, GradingError};
use nilhom_core::group::{GroupError, NilpotentGroup};
use nilhom_core::matrix::{Matrix, RealMatrix};
use nilhom_core::metric::{
    box_ball_certificate, build_distance, verify_a_convexity, AxiomReport, BallConstruction, BoxCertificate, CapMethod,
    ConvexityReport, Distance, HomogeneousBall, HomogeneousDistance, MetricError,
};
use nilhom_core::spectral::SpectralError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{self, Operator};
use crate::io::{self, AlgebraSpec, InputError};
use crate::render;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

fn grading_is_usage(e: &GradingError) -> bool {
    matches!(e, GradingError::NotDerivation(_) | GradingError::NotAutomorphism(_) | GradingError::InvalidScale(_))
}

fn group_is_usage(e: &GroupError) -> bool {
    !matches!(e, GroupError::Spectral(_))
}

fn metric_is_usage(e: &MetricError) -> bool {
    match e {
        MetricError::NoDistance(_)
        | MetricError::Dimension { .. }
        | MetricError::NotDerivation
        | MetricError::InvalidScale(_) => true,
        MetricError::Grading(g) => grading_is_usage(g),
        MetricError::Group(g) => group_is_usage(g),
        _ => false,
    }
}

fn classify_error(usage: bool, message: String) -> CliError {
    if usage {
        CliError::Usage(message)
    } else {
        CliError::Numeric(message)
    }
}

impl From<GradingError> for CliError {
    fn from(e: GradingError) -> Self {
        classify_error(grading_is_usage(&e), e.to_string())
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        classify_error(group_is_usage(&e), e.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        classify_error(metric_is_usage(&e), e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<DecomposeError> for CliError {
    fn from(e: DecomposeError) -> Self {
        let usage = match &e {
            DecomposeError::InvalidScale(_)
            | DecomposeError::NotAutomorphism(_)
            | DecomposeError::NotDerivation(_)
            | DecomposeError::NoDistance(_)
            | DecomposeError::Hypothesis(_) => true,
            DecomposeError::Grading(g) => grading_is_usage(g),
            DecomposeError::Metric(m) => metric_is_usage(m),
            _ => false,
        };
        classify_error(usage, e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

#[derive(Debug, Parser)]
#[command(name = "nilhom", version, about = "Homogeneous distances on nilpotent Lie groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a homogeneous distance exists.
    Classify(Subject),
    /// Construct the unit ball and print it as JSON.
    Build {
        #[command(flatten)]
        subject: Subject,
        /// Write the ball here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the distance on point pairs read from CSV rows `p1..pn,q1..qn`.
    Eval {
        #[command(flatten)]
        subject: Subject,
        #[arg(long)]
        points: PathBuf,
        /// A ball written by `build`; built afresh when absent.
        #[arg(long)]
        ball: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled metric axioms, A-convexity and, for the box ball, the scalar certificate.
    Verify(VerifyArgs),
    /// Split an automorphism as `K λ^A`.
    Decompose(Subject),
    /// Polar sweep of the unit sphere in a coordinate plane.
    Render(RenderArgs),
    /// Recompute every catalog entry against its expected verdict.
    Catalog {
        /// Also write each entry as an input file into this directory.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Subject {
    /// A JSON input file or the name of a catalog entry.
    pub input: String,
    /// Named derivation of a catalog entry; alone, the derivation of a file.
    #[arg(long, num_args = 0..=1, default_missing_value = "", conflicts_with = "automorphism")]
    pub derivation: Option<String>,
    /// Named automorphism of a catalog entry; alone, the automorphism of a file.
    #[arg(long, num_args = 0..=1, default_missing_value = "")]
    pub automorphism: Option<String>,
    /// Dilation factor of the automorphism.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// The inductive construction.
    Built,
    /// The Euclidean unit ball.
    Euclidean,
    /// The sup-norm ball `[−1, 1]ⁿ`.
    Box,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub subject: Subject,
    #[arg(long, value_enum, default_value_t = Shape::Built)]
    pub shape: Shape,
    /// Multiply every cap constant by this factor (negative control).
    #[arg(long)]
    pub corrupt_cap: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 10_000)]
    pub convexity_samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Points are drawn from `[−radius, radius]ⁿ`.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Bound on the symmetry, identity, triangle and left-invariance residuals.
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub homogeneity_tolerance: f64,
    /// Convexity excess tolerated before a sample counts as a violation.
    #[arg(long, default_value_t = 1e-9)]
    pub margin: f64,
    #[arg(long, default_value_t = 100_000)]
    pub certificate_grid: usize,
    /// Worker threads for the axiom checks; all cores by default.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub subject: Subject,
    /// 1-based coordinate plane `i,j`; required choice in dimension 3, default `1,2`.
    #[arg(long)]
    pub slice: Option<String>,
    #[arg(long, default_value_t = 720)]
    pub resolution: usize,
    #[arg(long, value_enum, default_value_t = Shape::Built)]
    pub shape: Shape,
    /// Output format; inferred from the `--out` extension, CSV otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// An algebra with the operator the command acts on.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub name: String,
    pub algebra: LieAlgebra,
    pub operator_name: String,
    pub operator: Operator,
}

#[derive(Clone, Copy, PartialEq)]
enum Prefer {
    Derivation,
    Automorphism,
}

fn resolve(s: &Subject, prefer: Option<Prefer>) -> Result<Resolved, CliError> {
    let (name, algebra, operators) = if Path::new(&s.input).is_file() {
        let input = io::read_input(Path::new(&s.input))?;
        let mut ops = Vec::new();
        if let Some(a) = input.derivation {
            ops.push(("derivation".to_string(), Operator::Derivation(a)));
        }
        if let Some(m) = input.automorphism {
            let lambda = s.lambda.or(input.lambda).ok_or_else(|| {
                CliError::Usage("automorphism needs a dilation factor: pass --lambda or add a \"lambda\" field".into())
            })?;
            ops.push(("automorphism".to_string(), Operator::Automorphism { matrix: m, lambda }));
        }
        (input.algebra.name().to_string(), input.algebra, ops)
    } else if let Some(e) = catalog::entry(&s.input) {
        let ops = e.operators.into_iter().map(|o| (o.name, o.operator)).collect();
        (e.name.to_string(), e.algebra, ops)
    } else {
        return Err(CliError::Usage(format!("{:?} is neither a file nor a catalog entry", s.input)));
    };
    let wanted = match (&s.derivation, &s.automorphism) {
        (Some(n), _) => Some((Prefer::Derivation, n.as_str())),
        (_, Some(n)) => Some((Prefer::Automorphism, n.as_str())),
        _ => None,
    };
    let is = |op: &Operator, kind: Prefer| {
        matches!((op, kind), (Operator::Derivation(_), Prefer::Derivation))
            || matches!((op, kind), (Operator::Automorphism { .. }, Prefer::Automorphism))
    };
    let found = match wanted {
        Some((kind, n)) => operators.into_iter().find(|(name, op)| is(op, kind) && (n.is_empty() || name == n)),
        None => match prefer {
            Some(kind) => operators.into_iter().find(|(_, op)| is(op, kind)),
            None => operators.into_iter().next(),
        },
    };
    let (operator_name, mut operator) =
        found.ok_or_else(|| CliError::Usage(format!("{name}: no matching derivation or automorphism")))?;
    if let (Operator::Automorphism { lambda, .. }, Some(l)) = (&mut operator, s.lambda) {
        *lambda = l;
    }
    Ok(Resolved { name, algebra, operator_name, operator })
}

fn derivation_of(r: &Resolved) -> Result<&RealMatrix, CliError> {
    match &r.operator {
        Operator::Derivation(a) => Ok(a),
        Operator::Automorphism { .. } => Err(CliError::Usage("this command needs a derivation".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerJson {
    pub t: f64,
    pub dim: usize,
}

/// `{"answer", "reasons", "layers", "Q"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub answer: String,
    pub reasons: Vec<String>,
    pub layers: Vec<LayerJson>,
    #[serde(rename = "Q")]
    pub q: f64,
}

impl From<&ExistenceVerdict> for VerdictJson {
    fn from(v: &ExistenceVerdict) -> Self {
        VerdictJson {
            answer: if v.answer { "yes" } else { "no" }.to_string(),
            reasons: v.reasons.iter().map(|r| r.to_string()).collect(),
            layers: v.grading.layers.iter().map(|l| LayerJson { t: l.weight, dim: l.dimension() }).collect(),
            q: v.grading.hausdorff_dimension(),
        }
    }
}

pub fn classify(g: &LieAlgebra, op: &Operator) -> Result<ExistenceVerdict, CliError> {
    Ok(match op {
        Operator::Derivation(a) => classify_derivation(g, a)?,
        Operator::Automorphism { matrix, lambda } => classify_automorphism(g, matrix, *lambda)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CapMethodJson {
    TwoLayer { beta: f64, kappa: f64, chi: f64 },
    Sampled { sup_ratio: f64, doublings: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapJson {
    pub weight: f64,
    pub dimension: usize,
    pub constant: f64,
    pub rescale: f64,
    #[serde(flatten)]
    pub method: CapMethodJson,
}

/// What `build` writes and `eval --ball` reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallFile {
    pub name: String,
    pub generator: RealMatrix,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub caps: Vec<CapJson>,
    pub ball: HomogeneousBall,
}

impl BallFile {
    pub fn new(name: &str, generator: &RealMatrix, c: &BallConstruction) -> Self {
        let caps = c
            .caps
            .iter()
            .map(|cap| CapJson {
                weight: cap.weight,
                dimension: cap.dimension,
                constant: cap.constant,
                rescale: cap.rescale,
                method: match cap.method {
                    CapMethod::TwoLayer { beta, kappa, chi } => CapMethodJson::TwoLayer { beta, kappa, chi },
                    CapMethod::Sampled { sup_ratio, doublings } => CapMethodJson::Sampled { sup_ratio, doublings },
                },
            })
            .collect();
        BallFile {
            name: name.to_string(),
            generator: generator.clone(),
            theta: c.frame.theta,
            epsilon: c.frame.epsilon,
            caps,
            ball: c.ball.clone(),
        }
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// The constructed distance, or `Err(code)` after printing a negative verdict.
fn built_distance(
    r: &Resolved,
    out: &mut dyn Write,
) -> Result<Result<(HomogeneousDistance, BallConstruction), u8>, CliError> {
    let a = derivation_of(r)?;
    let verdict = classify(&r.algebra, &r.operator)?;
    if !verdict.answer {
        print_json(out, &VerdictJson::from(&verdict))?;
        return Ok(Err(1));
    }
    let group = NilpotentGroup::new(r.algebra.clone())?;
    Ok(Ok(build_distance(&group, a)?))
}

fn shaped_distance(
    r: &Resolved,
    shape: Shape,
    out: &mut dyn Write,
) -> Result<Result<HomogeneousDistance, u8>, CliError> {
    let a = derivation_of(r)?;
    let n = r.algebra.dimension();
    let ball = match shape {
        Shape::Built => return Ok(built_distance(r, out)?.map(|(d, _)| d)),
        Shape::Euclidean => HomogeneousBall::euclidean(n),
        Shape::Box => HomogeneousBall::unit_box(n),
    };
    let group = NilpotentGroup::new(r.algebra.clone())?;
    Ok(Ok(HomogeneousDistance::new(group, a.clone(), ball)?))
}

fn cmd_classify(s: &Subject, out: &mut dyn Write) -> Result<u8, CliError> {
    let r = resolve(s, None)?;
    let verdict = classify(&r.algebra, &r.operator)?;
    print_json(out, &VerdictJson::from(&verdict))?;
    Ok(if verdict.answer { 0 } else { 1 })
}

fn cmd_build(s: &Subject, path: Option<&Path>, out: &mut dyn Write) -> Result<u8, CliError> {
    let r = resolve(s, Some(Prefer::Derivation))?;
    let (d, c) = match built_distance(&r, out)? {
        Ok(built) => built,
        Err(code) => return Ok(code),
    };
    let file = BallFile::new(&r.name, d.generator(), &c);
    match path {
        Some(p) => {
            let mut w = create(p)?;
            print_json(&mut w, &file)?;
            w.flush()?;
        }
        None => print_json(out, &file)?,
    }
    Ok(0)
}

fn cmd_eval(
    s: &Subject,
    points: &Path,
    ball: Option<&Path>,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let r = resolve(s, Some(Prefer::Derivation))?;
    let d = match ball {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| InputError::Read { path: p.to_path_buf(), source })?;
            let file: BallFile = serde_json::from_str(&text)
                .map_err(|source| InputError::Json { origin: p.display().to_string(), source })?;
            HomogeneousDistance::new(NilpotentGroup::new(r.algebra.clone())?, file.generator, file.ball)?
        }
        None => match built_distance(&r, out)? {
            Ok((d, _)) => d,
            Err(code) => return Ok(code),
        },
    };
    let reader = File::open(points).map_err(|source| InputError::Read { path: points.to_path_buf(), source })?;
    let pairs = io::read_pairs(reader, d.dimension(), &points.display().to_string())?;
    let mut rows = Vec::with_capacity(pairs.len());
    for (i, (p, q)) in pairs.iter().enumerate() {
        rows.push((i + 1, d.distance(p, q)?));
    }
    let write = |w: &mut dyn Write| -> Result<(), CliError> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["pair", "distance"])?;
        for (i, v) in &rows {
            csv.write_record([i.to_string(), v.to_string()])?;
        }
        csv.flush()?;
        Ok(())
    };
    match path {
        Some(p) => {
            let mut w = create(p)?;
            write(&mut w)?;
            w.flush()?;
        }
        None => write(out)?,
    }
    Ok(0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomJson {
    pub samples: usize,
    pub symmetry: f64,
    pub identity: f64,
    pub min_separated: f64,
    pub triangle: f64,
    pub left_invariance: f64,
    pub homogeneity: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityJson {
    pub samples: usize,
    pub skipped: usize,
    pub violations: usize,
    pub worst_excess: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateJson {
    pub grid_points: usize,
    pub max_f: f64,
    pub argmax: f64,
    pub symmetry_residual: f64,
    pub h_half: f64,
    pub h_one: f64,
    pub min_h_second: f64,
    pub passed: bool,
}

impl From<&BoxCertificate> for CertificateJson {
    fn from(c: &BoxCertificate) -> Self {
        CertificateJson {
            grid_points: c.grid_points,
            max_f: c.max_f,
            argmax: c.argmax,
            symmetry_residual: c.symmetry_residual,
            h_half: c.h_half,
            h_one: c.h_one,
            min_h_second: c.min_h_second,
            passed: c.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub name: String,
    pub shape: Shape,
    pub generator: RealMatrix,
    pub axioms: AxiomJson,
    pub convexity: ConvexityJson,
    pub certificate: Option<CertificateJson>,
    pub passed: bool,
}

/// Whether the axiom residuals are within the given bounds.
pub fn axioms_pass(r: &AxiomReport, tolerance: f64, homogeneity_tolerance: f64) -> bool {
    r.symmetry <= tolerance
        && r.identity <= tolerance
        && r.min_separated > 0.0
        && r.triangle <= tolerance
        && r.left_invariance <= tolerance
        && r.homogeneity.map_or(true, |h| h <= homogeneity_tolerance)
}

fn spiral() -> RealMatrix {
    Matrix::from_row_slice(2, 2, &[2.0, -1.0, 1.0, 2.0])
}

fn cmd_verify(v: &VerifyArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let r = resolve(&v.subject, Some(Prefer::Derivation))?;
    let mut d = match shaped_distance(&r, v.shape, out)? {
        Ok(d) => d,
        Err(code) => return Ok(code),
    };
    if let Some(factor) = v.corrupt_cap {
        let ball = d.ball().scale_caps(factor);
        d = HomogeneousDistance::new(d.group().clone(), d.generator().clone(), ball)?;
    }
    let threads = v.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let axioms = crate::axioms_parallel(&d, Some(d.flow()), v.samples, v.seed, v.radius, threads)?;
    let axioms_ok = axioms_pass(&axioms, v.tolerance, v.homogeneity_tolerance);
    let conv: ConvexityReport =
        verify_a_convexity(d.ball(), d.group(), d.generator(), v.convexity_samples, v.seed, v.margin)?;
    let conv_ok = conv.violations == 0 && conv.skipped < conv.samples.max(1);
    let certificate = (v.shape == Shape::Box && d.generator().distance_to(&spiral()) <= 1e-12)
        .then(|| CertificateJson::from(&box_ball_certificate(v.certificate_grid)));
    let passed = axioms_ok && conv_ok && certificate.as_ref().map_or(true, |c| c.passed);
    let report = VerifyReport {
        name: r.name.clone(),
        shape: v.shape,
        generator: d.generator().clone(),
        axioms: AxiomJson {
            samples: axioms.samples,
            symmetry: axioms.symmetry,
            identity: axioms.identity,
            min_separated: axioms.min_separated,
            triangle: axioms.triangle,
            left_invariance: axioms.left_invariance,
            homogeneity: axioms.homogeneity,
            passed: axioms_ok,
        },
        convexity: ConvexityJson {
            samples: conv.samples,
            skipped: conv.skipped,
            violations: conv.violations,
            worst_excess: conv.worst_excess,
            passed: conv_ok,
        },
        certificate,
        passed,
    };
    print_json(out, &report)?;
    Ok(if passed { 0 } else { 1 })
}

fn cmd_decompose(s: &Subject, out: &mut dyn Write) -> Result<u8, CliError> {
    let r = resolve(s, Some(Prefer::Automorphism))?;
    let Operator::Automorphism { matrix, lambda } = &r.operator else {
        return Err(CliError::Usage("decompose needs an automorphism".into()));
    };
    let dec = decompose_automorphism(&r.algebra, matrix, *lambda)?;
    print_json(out, &dec)?;
    Ok(0)
}

fn parse_slice(text: &str, n: usize) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("--slice expects two distinct indices i,j in 1..={n}, got {text:?}"));
    let mut parts = text.split(',').map(|p| p.trim().parse::<usize>());
    let (Some(Ok(i)), Some(Ok(j)), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(bad());
    };
    if i == j || !(1..=n).contains(&i) || !(1..=n).contains(&j) {
        return Err(bad());
    }
    Ok((i - 1, j - 1))
}

fn cmd_render(v: &RenderArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let r = resolve(&v.subject, Some(Prefer::Derivation))?;
    let n = r.algebra.dimension();
    if !(n == 2 || n == 3) {
        return Err(CliError::Usage(format!("render supports dimensions 2 and 3, not {n}")));
    }
    if v.resolution == 0 {
        return Err(CliError::Usage("--resolution must be positive".into()));
    }
    let plane = parse_slice(v.slice.as_deref().unwrap_or("1,2"), n)?;
    let d = match shaped_distance(&r, v.shape, out)? {
        Ok(d) => d,
        Err(code) => return Ok(code),
    };
    let points = render::sphere_slice(&d, plane, v.resolution)?;
    let format = v.format.unwrap_or_else(|| match v.out.as_ref().and_then(|p| p.extension()) {
        Some(ext) if ext.eq_ignore_ascii_case("svg") => Format::Svg,
        _ => Format::Csv,
    });
    let mut file = v.out.as_deref().map(create).transpose()?;
    let w: &mut dyn Write = match file.as_mut() {
        Some(f) => f,
        None => out,
    };
    match format {
        Format::Csv => render::write_csv(&points, &mut *w)?,
        Format::Svg => w.write_all(render::svg(&points).as_bytes())?,
    }
    w.flush()?;
    Ok(0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorCheck {
    pub name: String,
    pub kind: &'static str,
    pub lambda: Option<f64>,
    pub answer: String,
    #[serde(rename = "Q")]
    pub q: f64,
    pub determinant_residual: Option<f64>,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedJson {
    pub answer: String,
    #[serde(rename = "Q")]
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogCheck {
    pub name: String,
    pub dimension: usize,
    pub expected: ExpectedJson,
    pub operators: Vec<OperatorCheck>,
    pub matches: bool,
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

/// Recomputes every entry's verdict and `Q` for each of its operators.
pub fn check_catalog() -> Result<Vec<CatalogCheck>, CliError> {
    let mut rows = Vec::new();
    for e in catalog::catalog() {
        let mut ops = Vec::new();
        for op in &e.operators {
            let v = classify(&e.algebra, &op.operator)?;
            let q = v.grading.hausdorff_dimension();
            let matches = v.answer == e.expected.answer
                && (q - e.expected.hausdorff_dimension).abs() <= 1e-9 * e.expected.hausdorff_dimension.max(1.0);
            ops.push(OperatorCheck {
                name: op.name.clone(),
                kind: op.operator.kind(),
                lambda: match op.operator {
                    Operator::Automorphism { lambda, .. } => Some(lambda),
                    Operator::Derivation(_) => None,
                },
                answer: yes_no(v.answer),
                q,
                determinant_residual: v.grading.determinant_residual,
                matches,
            });
        }
        let matches = ops.iter().all(|o| o.matches);
        rows.push(CatalogCheck {
            name: e.name.to_string(),
            dimension: e.algebra.dimension(),
            expected: ExpectedJson { answer: yes_no(e.expected.answer), q: e.expected.hausdorff_dimension },
            operators: ops,
            matches,
        });
    }
    Ok(rows)
}

fn cmd_catalog(export: Option<&Path>, out: &mut dyn Write) -> Result<u8, CliError> {
    if let Some(dir) = export {
        fs::create_dir_all(dir)?;
        for e in catalog::catalog() {
            let spec = AlgebraSpec::from_algebra(&e.algebra, Some(e.derivation()));
            let mut w = create(&dir.join(format!("{}.json", e.name)))?;
            print_json(&mut w, &spec)?;
            w.flush()?;
        }
    }
    let rows = check_catalog()?;
    print_json(out, &rows)?;
    Ok(if rows.iter().all(|r| r.matches) { 0 } else { 1 })
}

/// Runs one command, writing its primary output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match &cli.command {
        Command::Classify(s) => cmd_classify(s, out),
        Command::Build { subject, out: path } => cmd_build(subject, path.as_deref(), out),
        Command::Eval { subject, points, ball, out: path } => {
            cmd_eval(subject, points, ball.as_deref(), path.as_deref(), out)
        }
        Command::Verify(v) => cmd_verify(v, out),
        Command::Decompose(s) => cmd_decompose(s, out),
        Command::Render(v) => cmd_render(v, out),
        Command::Catalog { export } => cmd_catalog(export.as_deref(), out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subject(input: &str) -> Subject {
        Subject { input: input.into(), derivation: None, automorphism: None, lambda: None }
    }

    #[test]
    fn resolves_catalog_operators() {
        let r = resolve(&subject("heisenberg"), None).unwrap();
        assert_eq!(r.operator_name, "standard");
        let r = resolve(&subject("heisenberg"), Some(Prefer::Automorphism)).unwrap();
        assert_eq!(r.operator_name, "standard@2");
        let mut s = subject("heisenberg");
        s.automorphism = Some("standard@0.5".into());
        assert!(matches!(resolve(&s, None).unwrap().operator, Operator::Automorphism { lambda, .. } if lambda == 0.5));
        s.automorphism = Some("nope".into());
        assert!(matches!(resolve(&s, None), Err(CliError::Usage(_))));
    }

    #[test]
    fn unknown_input_is_usage_error() {
        let e = resolve(&subject("no-such-thing"), None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn slices() {
        assert_eq!(parse_slice("1,3", 3).unwrap(), (0, 2));
        assert!(parse_slice("1,1", 3).is_err());
        assert!(parse_slice("0,1", 3).is_err());
        assert!(parse_slice("1,2,3", 3).is_err());
    }

    #[test]
    fn verdict_json_shape() {
        let e = catalog::entry("heisenberg").unwrap();
        let v = classify(&e.algebra, &e.operators[0].operator).unwrap();
        let json = serde_json::to_value(VerdictJson::from(&v)).unwrap();
        assert_eq!(json["answer"], "yes");
        assert_eq!(json["Q"], 4.0);
        assert_eq!(json["layers"][1]["dim"], 1);
        assert!(json["reasons"].as_array().unwrap().is_empty());
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(MetricError::NotDerivation).exit_code(), 2);
        assert_eq!(CliError::from(MetricError::EmptySample).exit_code(), 3);
        assert_eq!(CliError::from(SpectralError::NoConvergence).exit_code(), 3);
    }
}
