//! Command-line interface. [`run`] is the whole program; the binary only
//! forwards its arguments and exit code.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check fails,
//! 2 on usage or input errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::counterexample::{format_matrix, run_counterexample};
use crate::error::{Error, Result};
use crate::function_space::{paper_functions, sup_metric, PiecewiseFunction, WeightedLb};
use crate::graph::graph_negative_type_report;
use crate::io;
use crate::kernels::{gram, KernelSpec, MetricSpec, Point, SpecJson};
use crate::linalg::{is_psd, DEFAULT_TOL};
use crate::sampling::{
    ramp_functions, random_linear_functions, sample_points, Sample, DEFAULT_SEED,
};
use crate::validators::{
    check_cnd, check_metric, check_normalized, check_pd, check_similarity_normalized,
    ValidationReport, Verdict, AXIOM_TOL,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const HALF_WIDTH: f64 = 2.0;

#[derive(Debug, Parser)]
#[command(
    name = "simkernel",
    version,
    about = "Check metric axioms and kernel definiteness on finite samples"
)]
pub struct Cli {
    /// Seed for generated samples.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Tolerance; defaults to 1e-12 for axiom comparisons and 1e-9 for definiteness.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Read and generate complex points (CSV columns pair up as re, im).
    #[arg(long, global = true)]
    pub complex: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gram matrix of a kernel on a point set, with its PSD verdict.
    Gram(GramArgs),
    /// Metric, normalized-metric, similarity and CND checks on a point set.
    Audit(AuditArgs),
    /// Reproduce the sup-metric counterexample.
    Counterexample(CounterexampleArgs),
    /// Hop-count distance matrix of a graph given as an edge list.
    Graph(GraphArgs),
    /// Weighted L^b metric on continuous piecewise-linear functions and the Gram of e^(-d).
    Theorem5(Theorem5Args),
}

#[derive(Debug, Args)]
pub struct PointSource {
    /// CSV file of points.
    pub points: Option<PathBuf>,
    /// Generate this many seeded points instead of reading a file (32 when no count is given).
    #[arg(long, conflicts_with = "points", num_args = 0..=1, default_missing_value = "32")]
    pub random: Option<usize>,
    /// Dimension of generated points.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// Base metric: euclidean, squared_euclidean or normalized_euclidean.
    #[arg(long)]
    pub metric: Option<String>,
    /// Transform applied to the base metric: power, bounded or exp_complement.
    #[arg(long)]
    pub transform: Option<String>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Kernel kind: fbm, exp_of_metric, cauchy_of_metric, normalized_euclidean_similarity, sphere_similarity.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Exponent a (fbm, sphere similarity, power transform).
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Scale t (exp and Cauchy kernels).
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Use the halved fBm kernel.
    #[arg(long)]
    pub halved: bool,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// JSON spec file; inline flags win when both are given.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GramArgs {
    #[command(flatten)]
    pub source: PointSource,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Exit 1 when the Gram matrix is not PSD.
    #[arg(long)]
    pub require_psd: bool,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub source: PointSource,
    /// Exponent for the power transform.
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// JSON metric spec file; inline flags win when both are given.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Built-in sample instead of points: paper-functions (x1..x5 under the sup metric).
    #[arg(long, conflicts_with_all = ["points", "random"])]
    pub fixture: Option<String>,
    #[arg(long)]
    pub metric_axioms: bool,
    #[arg(long)]
    pub normalized: bool,
    /// Similarity conditions for s = 1 - d.
    #[arg(long)]
    pub similarity: bool,
    #[arg(long)]
    pub cnd: bool,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    /// Scale at which the minimum eigenvalue of e^(-tΔ) is reported.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// CSV edge list, two node labels per row.
    pub edges: PathBuf,
    /// Append the spectral negative-type report.
    #[arg(long)]
    pub negative_type: bool,
}

#[derive(Debug, Args)]
pub struct Theorem5Args {
    /// JSON array of piecewise functions.
    pub functions: Option<PathBuf>,
    /// Generate this many seeded random piecewise-linear functions.
    #[arg(long, conflicts_with_all = ["functions", "ramps"])]
    pub random: Option<usize>,
    /// Generate this many seeded tent functions.
    #[arg(long, conflicts_with = "functions")]
    pub ramps: Option<usize>,
    /// Exponent b in (0, 1].
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub b: f64,
    /// gaussian, gaussian:<scale>, indicator:<lo>:<hi>, or a JSON weight file.
    #[arg(long, default_value = "gaussian")]
    pub weight: String,
    /// Scale t in the similarity e^(-t d).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,
    /// Accept piecewise-constant functions.
    #[arg(long)]
    pub allow_discontinuous: bool,
}

struct Ctx<'a> {
    cli: &'a Cli,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn warn(&mut self, msg: &str) {
        let _ = writeln!(self.stderr, "warning: {msg}");
    }

    fn axiom_tol(&self) -> f64 {
        self.cli.tol.unwrap_or(AXIOM_TOL)
    }

    fn definite_tol(&self) -> f64 {
        self.cli.tol.unwrap_or(DEFAULT_TOL)
    }

    /// Main output: `--out` file if given, otherwise standard output.
    fn emit(&mut self, text: &str) -> Result<()> {
        match &self.cli.out {
            Some(path) => std::fs::write(path, text)?,
            None => self.stdout.write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

/// Runs the program on `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_PASS
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let mut ctx = Ctx {
        cli: &cli,
        stdout,
        stderr,
    };
    let result = match &cli.command {
        Command::Gram(a) => cmd_gram(&mut ctx, a),
        Command::Audit(a) => cmd_audit(&mut ctx, a),
        Command::Counterexample(a) => cmd_counterexample(&mut ctx, a),
        Command::Graph(a) => cmd_graph(&mut ctx, a),
        Command::Theorem5(a) => cmd_theorem5(&mut ctx, a),
    };
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(ctx.stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn check_tol(tol: Option<f64>) -> Result<()> {
    match tol {
        Some(t) if !(t.is_finite() && t >= 0.0) => Err(Error::InvalidParameter {
            name: "tol",
            value: t,
            reason: "must be finite and nonnegative",
        }),
        _ => Ok(()),
    }
}

fn load_points(ctx: &Ctx, src: &PointSource) -> Result<Sample<Point>> {
    match (&src.points, src.random) {
        (Some(path), _) => {
            let pts = io::read_points(path, ctx.cli.complex)?;
            Ok(Sample::new(pts, None, path.display().to_string()))
        }
        (None, Some(n)) => {
            if n == 0 || src.dim == 0 {
                return Err(Error::Parse("--random and --dim must be positive".into()));
            }
            Ok(sample_points(
                ctx.cli.seed,
                n,
                src.dim,
                ctx.cli.complex,
                HALF_WIDTH,
            ))
        }
        (None, None) => Err(Error::Parse("give a points file or --random <n>".into())),
    }
}

fn leaf(kind: &str) -> SpecJson {
    SpecJson {
        kind: kind.to_string(),
        params: BTreeMap::new(),
        children: Vec::new(),
    }
}

fn inline_metric(m: &MetricArgs, a: Option<f64>) -> SpecJson {
    let base = leaf(m.metric.as_deref().unwrap_or("euclidean"));
    match m.transform.as_deref() {
        None | Some("none") => base,
        Some(kind) => {
            let mut node = leaf(kind);
            if let Some(a) = a {
                node.params.insert("a".into(), Value::from(a));
            }
            node.children.push(base);
            node
        }
    }
}

fn resolve_kernel(ctx: &mut Ctx, k: &KernelArgs) -> Result<KernelSpec> {
    let inline = k.kernel.is_some();
    if inline && k.spec.is_some() {
        ctx.warn("both --spec and --kernel given; using the inline flags");
    }
    if !inline {
        let Some(path) = &k.spec else {
            return Err(Error::Parse("give --kernel <kind> or --spec <file>".into()));
        };
        return io::read_kernel_spec(path);
    }
    let kind = k.kernel.as_deref().unwrap();
    let mut spec = leaf(kind);
    match kind {
        "fbm" | "sphere_similarity" => {
            if let Some(a) = k.a {
                spec.params.insert("a".into(), Value::from(a));
            }
            if k.halved {
                spec.params.insert("halved".into(), Value::from(true));
            }
        }
        "exp_of_metric" | "cauchy_of_metric" => {
            if let Some(t) = k.t {
                spec.params.insert("t".into(), Value::from(t));
            }
            spec.children.push(inline_metric(&k.metric, k.a));
        }
        _ => {}
    }
    KernelSpec::try_from(spec)
}

fn resolve_metric(ctx: &mut Ctx, a: &AuditArgs) -> Result<MetricSpec> {
    let inline = a.metric.metric.is_some() || a.metric.transform.is_some();
    if inline && a.spec.is_some() {
        ctx.warn("both --spec and inline metric flags given; using the inline flags");
    }
    match (&a.spec, inline) {
        (Some(path), false) => io::read_metric_spec(path),
        _ => MetricSpec::try_from(inline_metric(&a.metric, a.a)),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct GramSummary<'a> {
    command: &'static str,
    kernel: String,
    spec: &'a KernelSpec,
    n: usize,
    seed: u64,
    tol: f64,
    min_eigenvalue: f64,
    threshold: f64,
    psd: bool,
}

fn cmd_gram(ctx: &mut Ctx, args: &GramArgs) -> Result<bool> {
    check_tol(ctx.cli.tol)?;
    let sample = load_points(ctx, &args.source)?;
    let kernel = resolve_kernel(ctx, &args.kernel)?;
    let g = gram(&sample.elements, &kernel)?;
    let tol = ctx.definite_tol();
    let verdict = is_psd(&g, tol)?;
    let csv = io::matrix_to_csv(&g);
    let summary = GramSummary {
        command: "gram",
        kernel: kernel.to_string(),
        spec: &kernel,
        n: g.n(),
        seed: ctx.cli.seed,
        tol,
        min_eigenvalue: verdict.min_eigenvalue,
        threshold: verdict.threshold,
        psd: verdict.psd,
    };
    let text = if ctx.cli.json {
        to_json(&summary)?
    } else {
        format!(
            "kernel: {}\nn: {}\nmin eigenvalue: {:.12e}\nthreshold: {:.3e}\nPSD: {}\n",
            summary.kernel, summary.n, summary.min_eigenvalue, summary.threshold, summary.psd
        )
    };
    // the CSV is the primary output; the verdict always goes to standard output
    ctx.emit(&csv)?;
    ctx.stdout.write_all(text.as_bytes())?;
    Ok(verdict.psd || !args.require_psd)
}

#[derive(Serialize)]
struct ReportSet<'a> {
    command: &'static str,
    seed: u64,
    tol: Option<f64>,
    passed: bool,
    reports: &'a [ValidationReport],
}

fn render_reports(reports: &[ValidationReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let seed = r.seed.map_or("-".to_string(), |s| s.to_string());
        let _ = writeln!(
            out,
            "{} (n = {}, domain: {}, seed: {seed}, tol: {:e})",
            r.subject, r.n, r.domain, r.tol
        );
        let width = r.axioms.iter().map(|a| a.name.len()).max().unwrap_or(0);
        for a in &r.axioms {
            let v = match a.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::ConsistentWith => "consistent",
            };
            let _ = write!(out, "  {:width$}  {v:10}  margin {:.6e}", a.name, a.margin);
            if let Some(w) = &a.witness {
                let _ = write!(
                    out,
                    "  witness indices {:?} values {:?}",
                    w.indices, w.values
                );
                if let Some(c) = &w.vector {
                    let _ = write!(out, " vector {c:?}");
                }
            }
            out.push('\n');
        }
        if let Some(s) = &r.spectral {
            let _ = write!(out, "  min eigenvalue {:.12e}", s.min_eig);
            if let Some(p) = s.pos_count {
                let _ = write!(out, ", positive eigenvalues {p}");
            }
            out.push('\n');
        }
        if let Some(c) = &r.cross_check {
            let _ = writeln!(
                out,
                "  cross-check {}: {}",
                c.name,
                if c.passed { "pass" } else { "fail" }
            );
        }
        let _ = writeln!(
            out,
            "  result: {}",
            if r.passed() { "pass" } else { "FAIL" }
        );
    }
    out
}

fn emit_reports(
    ctx: &mut Ctx,
    command: &'static str,
    reports: &[ValidationReport],
    prefix: &str,
) -> Result<bool> {
    let passed = reports.iter().all(ValidationReport::passed);
    let text = if ctx.cli.json {
        to_json(&ReportSet {
            command,
            seed: ctx.cli.seed,
            tol: ctx.cli.tol,
            passed,
            reports,
        })?
    } else {
        format!("{prefix}{}", render_reports(reports))
    };
    ctx.emit(&text)?;
    Ok(passed)
}

struct Selection {
    metric: bool,
    normalized: bool,
    similarity: bool,
    cnd: bool,
}

fn audit_sample<T: PartialEq>(
    ctx: &Ctx,
    sel: &Selection,
    sample: &Sample<T>,
    subject: &str,
    d: impl Fn(&T, &T) -> Result<f64> + Copy,
) -> Result<Vec<ValidationReport>> {
    let (at, dt) = (ctx.axiom_tol(), ctx.definite_tol());
    let mut reports = Vec::new();
    if sel.metric {
        reports.push(check_metric(sample, subject, d, at)?);
    }
    if sel.normalized {
        reports.push(check_normalized(sample, subject, d, at)?);
    }
    if sel.similarity {
        let s = move |x: &T, y: &T| Ok(1.0 - d(x, y)?);
        reports.push(check_similarity_normalized(
            sample,
            &format!("1 - {subject}"),
            s,
            at,
        )?);
    }
    if sel.cnd {
        reports.push(check_cnd(sample, subject, d, dt)?);
    }
    Ok(reports)
}

fn cmd_audit(ctx: &mut Ctx, args: &AuditArgs) -> Result<bool> {
    check_tol(ctx.cli.tol)?;
    let any = args.metric_axioms || args.normalized || args.similarity || args.cnd;
    let sel = Selection {
        metric: args.metric_axioms || !any,
        normalized: args.normalized || !any,
        similarity: args.similarity || !any,
        cnd: args.cnd || !any,
    };
    let reports = match args.fixture.as_deref() {
        Some("paper-functions") => {
            if args.metric.metric.is_some()
                || args.metric.transform.is_some()
                || args.spec.is_some()
            {
                ctx.warn(
                    "the paper-functions fixture uses the sup metric; metric flags are ignored",
                );
            }
            let sample = Sample::new(paper_functions().to_vec(), None, "x1..x5");
            let d = |f: &PiecewiseFunction, g: &PiecewiseFunction| Ok(sup_metric(f, g));
            audit_sample(ctx, &sel, &sample, "sup", d)?
        }
        Some(other) => {
            return Err(Error::Parse(format!(
                "unknown fixture {other:?}; expected paper-functions"
            )))
        }
        None => {
            let metric = resolve_metric(ctx, args)?;
            let sample = load_points(ctx, &args.source)?;
            let subject = metric.to_string();
            audit_sample(ctx, &sel, &sample, &subject, |x: &Point, y: &Point| {
                metric.eval(x, y)
            })?
        }
    };
    emit_reports(ctx, "audit", &reports, "")
}

fn cmd_counterexample(ctx: &mut Ctx, args: &CounterexampleArgs) -> Result<bool> {
    if !(args.t.is_finite() && args.t > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: args.t,
            reason: "must be positive",
        });
    }
    let report = run_counterexample(args.t);
    let text = if ctx.cli.json {
        to_json(&report)?
    } else {
        report.to_string()
    };
    ctx.emit(&text)?;
    Ok(report.passed)
}

fn cmd_graph(ctx: &mut Ctx, args: &GraphArgs) -> Result<bool> {
    check_tol(ctx.cli.tol)?;
    let g = io::read_edges(&args.edges)?;
    let tol = ctx.definite_tol();
    let report = graph_negative_type_report(&g, tol)?;
    let passed = !args.negative_type || (report.necessary_condition && report.cnd.cnd);
    let text = if ctx.cli.json {
        #[derive(Serialize)]
        struct Out<'a> {
            command: &'static str,
            seed: u64,
            tol: f64,
            labels: &'a [String],
            distances: &'a [Vec<usize>],
            #[serde(skip_serializing_if = "Option::is_none")]
            negative_type: Option<&'a crate::graph::GraphSpectralReport>,
            passed: bool,
        }
        to_json(&Out {
            command: "graph",
            seed: ctx.cli.seed,
            tol,
            labels: &report.labels,
            distances: &report.distances,
            negative_type: args.negative_type.then_some(&report),
            passed,
        })?
    } else {
        let rows: Vec<Vec<f64>> = report
            .distances
            .iter()
            .map(|r| r.iter().map(|&d| d as f64).collect())
            .collect();
        let mut out = format_matrix(&report.labels, &rows);
        if args.negative_type {
            let eig: Vec<String> = report
                .eigenvalues
                .iter()
                .map(|v| format!("{v:.9}"))
                .collect();
            let _ = writeln!(out, "eigenvalues: [{}]", eig.join(", "));
            let _ = writeln!(
                out,
                "positive eigenvalues: {} (exactly one is necessary for negative type: {})",
                report.positive_eigenvalues,
                if report.necessary_condition {
                    "pass"
                } else {
                    "FAIL"
                }
            );
            let _ = write!(
                out,
                "conditionally negative definite: {} (max form {:.6e})",
                if report.cnd.cnd { "pass" } else { "FAIL" },
                report.cnd.max_form
            );
            if let Some(c) = &report.cnd.witness {
                let _ = write!(out, " witness {c:?}");
            }
            out.push('\n');
        }
        out
    };
    ctx.emit(&text)?;
    Ok(passed)
}

fn load_functions(ctx: &Ctx, args: &Theorem5Args) -> Result<Sample<PiecewiseFunction>> {
    match (&args.functions, args.random, args.ramps) {
        (Some(path), _, _) => Ok(Sample::new(
            io::read_functions(path)?,
            None,
            path.display().to_string(),
        )),
        (None, Some(n), _) if n > 0 => {
            Ok(random_linear_functions(ctx.cli.seed, n, ctx.cli.complex))
        }
        (None, None, Some(n)) if n > 0 => Ok(ramp_functions(ctx.cli.seed, n)),
        (None, None, None) => Err(Error::Parse(
            "give a functions file, --random <n> or --ramps <n>".into(),
        )),
        _ => Err(Error::Parse("--random and --ramps must be positive".into())),
    }
}

fn cmd_theorem5(ctx: &mut Ctx, args: &Theorem5Args) -> Result<bool> {
    check_tol(ctx.cli.tol)?;
    if !(args.t.is_finite() && args.t > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: args.t,
            reason: "must be positive",
        });
    }
    let weight = io::parse_weight(&args.weight)?;
    let mut lb = WeightedLb::new(args.b, weight)?;
    lb.allow_discontinuous = args.allow_discontinuous;
    let functions = load_functions(ctx, args)?;
    let d = lb.distance_matrix(&functions.elements)?;
    let n = d.n();
    let sim = d.map(|v| (-args.t * v).exp());

    // checks run on indices into the precomputed matrices
    let idx = Sample::new(
        (0..n).collect::<Vec<usize>>(),
        functions.seed,
        functions.domain.clone(),
    );
    let tol = ctx.definite_tol();
    let subject = format!("weighted L^{} ({} weight)", args.b, args.weight);
    let reports = vec![
        check_metric(
            &idx,
            &subject,
            |&i: &usize, &j: &usize| Ok(d.get(i, j)),
            tol,
        )?,
        check_pd(
            &idx,
            &format!("exp(-{} * {subject})", args.t),
            |&i: &usize, &j: &usize| Ok(sim.get(i, j)),
            tol,
        )?,
    ];
    emit_reports(ctx, "theorem5", &reports, "")
}

/// Runs with captured output; returns (exit code, stdout, stderr).
pub fn run_captured(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("simkernel").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}
