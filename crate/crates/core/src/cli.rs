//! Experiment runner behind the `sdrelax` binary.
//!
//! One JSON config file describes one experiment:
//!
//! ```json
//! {"command": "verify-expl", "dim": 2, "samples": 100, "seed": 7}
//! ```
//!
//! `command` selects the experiment, `seed` drives every random draw and
//! `output_path` names the result file; the remaining keys are the
//! command's parameters. Tables are written as CSV whose first line is a
//! `#` comment describing the columns; reports are written as JSON.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::cell::{estimate_h_bulk, estimate_h_surface, verify_expl, ExplOptions, OptimizerBudget};
use crate::energy::{
    check_h1, check_h2_h3_h4, check_h5_to_h8, BulkDensity, DensitySet, DesignDensities, HypothesisReport,
    InterfacePairDensity, SamplingOptions, SurfaceDensity,
};
use crate::error::{Error, Result};
use crate::fields::{sequence_report, StructuredDeformation};
use crate::frame::Frame;
use crate::optdesign::{estimate_h_surface_design, DesignBoundaryData};
use crate::relaxed::{random_structured_deformation, verify_vpm_identity};
use crate::tensor::{Mat, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sequence,
    Cell,
    HCell,
    VerifyExpl,
    Vpm,
    Design,
    ValidateDensities,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(flatten)]
    pub parameters: Map<String, Value>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn params<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(Value::Object(self.parameters.clone()))
            .map_err(|e| Error::invalid(format!("{:?} parameters: {e}", self.command)))
    }

    fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::invalid("random cases need a `seed`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Result of an experiment: the file contents and their format.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub format: Format,
    pub text: String,
}

impl Artifact {
    fn json<T: Serialize>(value: &T) -> Result<Self> {
        Ok(Artifact { format: Format::Json, text: serde_json::to_string_pretty(value)? + "\n" })
    }
}

/// Accumulates CSV text: a comment line, a header, then data rows.
struct Table {
    text: String,
}

impl Table {
    fn new(comment: &str, header: &[&str]) -> Self {
        Table { text: format!("# {comment}\n{}\n", header.join(",")) }
    }

    fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    fn done(self) -> Artifact {
        Artifact { format: Format::Csv, text: self.text }
    }
}

fn num(x: f64) -> String {
    format!("{x:.17e}")
}

fn list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.17e}")).collect();
    format!("\"[{}]\"", parts.join(" "))
}

fn opt_n(n: Option<usize>) -> String {
    n.map_or_else(|| "inf".into(), |n| n.to_string())
}

fn random_mat(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Mat {
    let rows: Vec<Vec<f64>> =
        (0..dim).map(|_| (0..dim).map(|_| rng.gen_range(-radius..radius)).collect()).collect();
    Mat::from_rows(&rows).expect("square rows")
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Ok(u) = Vector::new(&v).normalized() {
            if Vector::new(&v).norm() > 1e-3 {
                return u;
            }
        }
    }
}

fn check_dim(dim: usize) -> Result<usize> {
    if (1..=3).contains(&dim) {
        Ok(dim)
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

fn default_radius() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceParams {
    example: String,
    n: Vec<usize>,
    #[serde(default)]
    density: Option<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatPair {
    #[serde(rename = "A")]
    a: Mat,
    #[serde(rename = "B")]
    b: Mat,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CellParams {
    #[serde(default)]
    cases: Vec<MatPair>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    samples: usize,
    #[serde(default = "default_radius")]
    radius: f64,
    #[serde(default)]
    bulk: Option<Value>,
    #[serde(default)]
    surface: Option<Value>,
    #[serde(default)]
    budget: Option<OptimizerBudget>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JumpCase {
    lambda: Vector,
    nu: Vector,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HCellParams {
    #[serde(default)]
    cases: Vec<JumpCase>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    samples: usize,
    #[serde(default = "default_radius")]
    radius: f64,
    #[serde(default)]
    surface: Option<Value>,
    #[serde(default)]
    budget: Option<OptimizerBudget>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplParams {
    #[serde(default)]
    cases: Vec<MatPair>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    samples: usize,
    #[serde(default = "default_radius")]
    radius: f64,
    #[serde(default)]
    grid_resolution: Option<usize>,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    budget: Option<OptimizerBudget>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VpmParams {
    #[serde(default)]
    examples: Vec<String>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    samples: usize,
    #[serde(default = "default_resolution")]
    resolution: usize,
}

fn default_resolution() -> usize {
    4
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignParams {
    #[serde(default)]
    cases: Vec<DesignBoundaryData>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    samples: usize,
    #[serde(default = "default_radius")]
    radius: f64,
    #[serde(default)]
    surface: Option<Value>,
    #[serde(default)]
    pair: Option<Value>,
    #[serde(default)]
    budget: Option<OptimizerBudget>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValidateParams {
    density: Value,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    radius: Option<f64>,
    #[serde(default)]
    dim: Option<usize>,
}

fn surface_or(spec: &Option<Value>, default: SurfaceDensity) -> Result<SurfaceDensity> {
    spec.as_ref().map_or(Ok(default), SurfaceDensity::from_spec)
}

fn budget_or_default(b: Option<OptimizerBudget>) -> Result<OptimizerBudget> {
    let b = b.unwrap_or_default();
    b.validate()?;
    Ok(b)
}

/// Explicit cases first, then `samples` random ones drawn from the seed.
fn mat_cases(
    cfg: &ExperimentConfig,
    cases: Vec<MatPair>,
    dim: Option<usize>,
    samples: usize,
    radius: f64,
) -> Result<Vec<(Mat, Mat)>> {
    let mut out: Vec<(Mat, Mat)> = cases.into_iter().map(|c| (c.a, c.b)).collect();
    if samples > 0 {
        let dim = check_dim(dim.ok_or_else(|| Error::invalid("random cases need `dim`"))?)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.require_seed()?);
        for _ in 0..samples {
            let a = random_mat(&mut rng, dim, radius);
            let b = random_mat(&mut rng, dim, radius);
            out.push((a, b));
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("no cases: give `cases` or `samples` with `dim`"));
    }
    Ok(out)
}

fn run_sequence(cfg: &ExperimentConfig) -> Result<Artifact> {
    let p: SequenceParams = cfg.params()?;
    let (sd, default_density) = match p.example.as_str() {
        "broken-ramp" => (StructuredDeformation::broken_ramp(), SurfaceDensity::jump_norm()),
        "deck-of-cards" => (StructuredDeformation::deck_of_cards(), SurfaceDensity::abs_normal_jump()),
        other => return Err(Error::invalid(format!("unknown example `{other}`"))),
    };
    if p.n.iter().any(|&n| n == 0) {
        return Err(Error::invalid("refinement indices must be positive"));
    }
    let ds = DensitySet::interfacial(surface_or(&p.density, default_density)?);
    let frame = Frame::identity(sd.g.dim());
    let mut t = Table::new(
        &format!(
            "{}: n = refinement index; l1_error = L1 distance of u_n to g; singular_tv = |D^s u_n|; energy = sum of {} over the jump set of u_n",
            p.example,
            ds.surface.name()
        ),
        &["n", "l1_error", "singular_tv", "energy"],
    );
    for r in sequence_report(&sd, &frame, &p.n, &ds)? {
        t.row(&[r.n.to_string(), num(r.l1_error), num(r.singular_tv), num(r.energy)]);
    }
    Ok(t.done())
}

fn run_cell(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Artifact> {
    let p: CellParams = cfg.params()?;
    let cases = mat_cases(cfg, p.cases, p.dim, p.samples, p.radius)?;
    let budget = budget_or_default(p.budget)?;
    let dim = cases[0].0.cols();
    let bulk = p.bulk.as_ref().map_or(Ok(BulkDensity::zero()), |s| BulkDensity::from_spec(s, dim))?;
    let ds = DensitySet::new(bulk, surface_or(&p.surface, SurfaceDensity::abs_normal_jump())?);
    let rows: Vec<_> = pool.install(|| {
        cases.par_iter().map(|(a, b)| estimate_h_bulk(a, b, &ds, &budget)).collect::<Result<Vec<_>>>()
    })?;
    let mut t = Table::new(
        "upper bound for the bulk cell problem H(A, B) over staircase competitors; n = inf marks the limit energy",
        &["case", "A", "B", "value", "frame_angles", "n", "family"],
    );
    for (i, ((a, b), s)) in cases.iter().zip(rows).enumerate() {
        t.row(&[
            i.to_string(),
            list(&a.entries().collect::<Vec<_>>()),
            list(&b.entries().collect::<Vec<_>>()),
            num(s.value),
            list(&s.frame.map(|f| f.angles).unwrap_or_default()),
            opt_n(s.refinement_n),
            s.family,
        ]);
    }
    Ok(t.done())
}

fn run_h_cell(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Artifact> {
    let p: HCellParams = cfg.params()?;
    let mut cases: Vec<(Vector, Vector)> = p.cases.into_iter().map(|c| (c.lambda, c.nu)).collect();
    if p.samples > 0 {
        let dim = check_dim(p.dim.ok_or_else(|| Error::invalid("random cases need `dim`"))?)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.require_seed()?);
        for _ in 0..p.samples {
            let lambda = Vector::new(&(0..dim).map(|_| rng.gen_range(-p.radius..p.radius)).collect::<Vec<_>>());
            cases.push((lambda, random_unit(&mut rng, dim)));
        }
    }
    if cases.is_empty() {
        return Err(Error::invalid("no cases: give `cases` or `samples` with `dim`"));
    }
    let psi = surface_or(&p.surface, SurfaceDensity::abs_normal_jump())?;
    let budget = budget_or_default(p.budget)?;
    let rows: Vec<_> = pool.install(|| {
        cases.par_iter().map(|(l, n)| estimate_h_surface(l, n, &psi, &budget)).collect::<Result<Vec<_>>>()
    })?;
    let mut t = Table::new(
        &format!("upper bound for the surface cell problem h(lambda, nu) with {}; initial = psi(lambda, nu)", psi.name()),
        &["case", "lambda", "nu", "value", "initial", "family"],
    );
    for (i, ((l, n), s)) in cases.iter().zip(rows).enumerate() {
        t.row(&[
            i.to_string(),
            list(l.as_slice()),
            list(n.as_slice()),
            num(s.value),
            num(psi.eval(l, n)),
            s.family,
        ]);
    }
    Ok(t.done())
}

fn run_verify_expl(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Artifact> {
    let p: ExplParams = cfg.params()?;
    let cases = mat_cases(cfg, p.cases, p.dim, p.samples, p.radius)?;
    let budget = budget_or_default(p.budget)?;
    let mut opts = ExplOptions::for_dim(cases[0].0.cols());
    if let Some(g) = p.grid_resolution {
        opts.grid_resolution = g;
    }
    if let Some(tol) = p.tolerance {
        opts.tolerance = tol;
    }
    let rows: Vec<_> = pool.install(|| {
        cases.par_iter().map(|(a, b)| verify_expl(a, b, &budget, &opts)).collect::<Result<Vec<_>>>()
    })?;
    let mut t = Table::new(
        "lower = exact relaxed density, mid = frame grid oracle, upper = optimized staircase bound; gaps are mid - lower and upper - lower",
        &["case", "variant", "lower", "mid", "upper", "mid_gap", "upper_gap", "oracle_angles", "frame_angles", "n"],
    );
    for (i, case_rows) in rows.into_iter().enumerate() {
        for r in case_rows {
            t.row(&[
                i.to_string(),
                r.variant.name().into(),
                num(r.lower),
                num(r.mid),
                num(r.upper),
                num(r.mid_gap),
                num(r.upper_gap),
                list(&r.oracle_angles),
                list(&r.frame_angles),
                opt_n(r.refinement_n),
            ]);
        }
    }
    Ok(t.done())
}

fn run_vpm(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Artifact> {
    let p: VpmParams = cfg.params()?;
    let mut cases: Vec<(String, StructuredDeformation)> = Vec::new();
    for name in &p.examples {
        let sd = match name.as_str() {
            "broken-ramp" => StructuredDeformation::broken_ramp(),
            "deck-of-cards" => StructuredDeformation::deck_of_cards(),
            other => return Err(Error::invalid(format!("unknown example `{other}`"))),
        };
        cases.push((name.clone(), sd));
    }
    if p.samples > 0 {
        let dim = check_dim(p.dim.ok_or_else(|| Error::invalid("random cases need `dim`"))?)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.require_seed()?);
        for i in 0..p.samples {
            cases.push((format!("random-{i}"), random_structured_deformation(dim, p.resolution, rng.gen())?));
        }
    }
    if cases.is_empty() {
        return Err(Error::invalid("no cases: give `examples` or `samples` with `dim`"));
    }
    let reports: Vec<_> =
        pool.install(|| cases.par_iter().map(|(_, sd)| verify_vpm_identity(sd)).collect::<Result<Vec<_>>>())?;
    let mut t = Table::new(
        "V_abs, V_plus, V_minus = relaxed energies with |tr M|, (tr M)^+, (tr M)^- and |[g].nu|, ([g].nu)^±; residual = relative error of V_± = V_abs/2 ± (tr_m_integral + jump_trace_integral)/2",
        &["case", "v_abs", "v_plus", "v_minus", "tr_m_integral", "jump_trace_integral", "residual"],
    );
    for ((name, _), r) in cases.iter().zip(reports) {
        t.row(&[
            name.clone(),
            num(r.v_abs),
            num(r.v_plus),
            num(r.v_minus),
            num(r.tr_m_integral),
            num(r.jump_trace_integral),
            num(r.residual),
        ]);
    }
    Ok(t.done())
}

fn run_design(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Artifact> {
    let p: DesignParams = cfg.params()?;
    let mut cases = Vec::new();
    for c in p.cases {
        cases.push(DesignBoundaryData::new(c.a, c.b, c.c, c.d, c.nu)?);
    }
    if p.samples > 0 {
        let dim = check_dim(p.dim.ok_or_else(|| Error::invalid("random cases need `dim`"))?)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.require_seed()?);
        for _ in 0..p.samples {
            let mut v = || Vector::new(&(0..dim).map(|_| rng.gen_range(-p.radius..p.radius)).collect::<Vec<_>>());
            let (c, d) = (v(), v());
            let (a, b) = (rng.gen_range(0..2u8), rng.gen_range(0..2u8));
            cases.push(DesignBoundaryData::new(a, b, c, d, random_unit(&mut rng, dim))?);
        }
    }
    if cases.is_empty() {
        return Err(Error::invalid("no cases: give `cases` or `samples` with `dim`"));
    }
    let surface = surface_or(&p.surface, SurfaceDensity::abs_normal_jump())?;
    let pair = p.pair.as_ref().map_or(Ok(InterfacePairDensity::phase_normal_jump()), InterfacePairDensity::from_spec)?;
    let dd = DesignDensities::uniform(&DensitySet::interfacial(surface), pair);
    let budget = budget_or_default(p.budget)?;
    let rows: Vec<_> = pool.install(|| {
        cases.par_iter().map(|c| estimate_h_surface_design(c, &dd, &budget)).collect::<Result<Vec<_>>>()
    })?;
    let mut t = Table::new(
        "upper bound for the two-phase surface cell problem h(a, b, c, d, nu) over layered competitors",
        &["case", "a", "b", "c", "d", "nu", "value", "competitor"],
    );
    for (i, (c, s)) in cases.iter().zip(rows).enumerate() {
        t.row(&[
            i.to_string(),
            c.a.to_string(),
            c.b.to_string(),
            list(c.c.as_slice()),
            list(c.d.as_slice()),
            list(c.nu.as_slice()),
            num(s.value),
            format!("\"{}\"", s.competitor),
        ]);
    }
    Ok(t.done())
}

/// Looks the density up as a surface, interface or bulk density, in that
/// order, and runs the matching validators.
pub fn validate_density(spec: &Value, opts: &SamplingOptions) -> Result<HypothesisReport> {
    if let Ok(psi) = SurfaceDensity::from_spec(spec) {
        return Ok(check_h2_h3_h4(&psi, opts));
    }
    if let Ok(pair) = InterfacePairDensity::from_spec(spec) {
        return Ok(check_h5_to_h8(&pair, opts));
    }
    let w = BulkDensity::from_spec(spec, opts.dim)?;
    Ok(check_h1(&w, opts))
}

fn run_validate(cfg: &ExperimentConfig) -> Result<Artifact> {
    let p: ValidateParams = cfg.params()?;
    let mut opts = SamplingOptions { seed: cfg.seed.unwrap_or(0), ..Default::default() };
    if let Some(s) = p.samples {
        if s == 0 {
            return Err(Error::invalid("`samples` must be positive"));
        }
        opts.samples = s;
    }
    if let Some(r) = p.radius {
        opts.radius = r;
    }
    if let Some(d) = p.dim {
        opts.dim = check_dim(d)?;
    }
    Artifact::json(&validate_density(&p.density, &opts)?)
}

/// Runs one experiment on `jobs` worker threads.
pub fn run(cfg: &ExperimentConfig, jobs: usize) -> Result<Artifact> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    match cfg.command {
        Command::Sequence => run_sequence(cfg),
        Command::Cell => run_cell(cfg, &pool),
        Command::HCell => run_h_cell(cfg, &pool),
        Command::VerifyExpl => run_verify_expl(cfg, &pool),
        Command::Vpm => run_vpm(cfg, &pool),
        Command::Design => run_design(cfg, &pool),
        Command::ValidateDensities => run_validate(cfg),
    }
}

/// Process exit code for an error: 2 configuration, 3 numerical failure,
/// 4 I/O.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 4,
        Error::SandwichViolation(_) | Error::IdentityViolation(_) | Error::NonFiniteEnergy { .. } => 3,
        _ => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::DimensionMismatch(_) => "dimension_mismatch",
        Error::UnsupportedDimension(_) => "unsupported_dimension",
        Error::NonUnitNormal(_) => "non_unit_normal",
        Error::OutsideDomain(_) => "outside_domain",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::NonFiniteEnergy { .. } => "non_finite_energy",
        Error::SandwichViolation(_) => "sandwich_violation",
        Error::IdentityViolation(_) => "identity_violation",
        Error::UnknownDensity(_) => "unknown_density",
        Error::Json(_) => "config_parse",
        Error::Io(_) => "io",
    }
}

/// Machine-readable error report written to stderr.
pub fn error_report(e: &Error) -> String {
    serde_json::json!({ "error": error_kind(e), "message": e.to_string(), "exit_code": exit_code(e) }).to_string()
}

#[derive(Parser, Debug)]
#[command(name = "sdrelax", version, about = "Run a structured-deformation relaxation experiment")]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output file; overrides `output_path`. Defaults to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(args: &Args) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", args.config.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    let artifact = run(&cfg, args.jobs)?;
    match args.output.clone().or_else(|| cfg.output_path.as_ref().map(PathBuf::from)) {
        Some(path) => std::fs::write(path, artifact.text)?,
        None => print!("{}", artifact.text),
    }
    Ok(())
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 2;
        }
    };
    match execute(&args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_report(&e));
            exit_code(&e)
        }
    }
}
