//! `sphq`: point generation, quadrature construction and verification,
//! kernel profiles, approximation and the numerical experiments.
//!
//! Exit codes: 0 success, 2 usage or parameter error, 3 construction
//! failure, 4 I/O or parse error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sphere_quad::experiments::{self, BenchmarkFn, Experiment, ExperimentConfig};
use sphere_quad::geometry::{dyadic_triangulation, random_points};
use sphere_quad::io::{self, RuleMetadata};
use sphere_quad::kernel::{kernel_diagnostics, Kernel, KernelSpec};
use sphere_quad::operators::{sample, sigma_eval, EvalPath, OperatorSpec};
use sphere_quad::quadrature::{
    gram_spectrum, lsq_weights, mz_check, rec_weights, reference_rule, verify_exactness, GramMode, LadderRule, MzNorm,
    RecOptions, SolverOptions,
};
use sphere_quad::{Error, Filter, PointSet, UnitPoint};

/// Environment variable naming the default output directory.
const OUT_DIR_VAR: &str = "SPHQ_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "sphq",
    version,
    about = "Quadrature and localized approximation on the sphere"
)]
struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a node file.
    Pointgen(PointgenArgs),
    /// Least-squares quadrature weights on a node file.
    WeightsLsq(LsqArgs),
    /// Quadrature weights from the orthogonal-polynomial recurrence.
    WeightsRec(RecArgs),
    /// Exactness and weight statistics of a rule.
    Verify(VerifyArgs),
    /// Ratios of discrete to continuous norms of random polynomials.
    MzCheck(MzArgs),
    /// Samples and diagnostics of the localized kernel.
    KernelProfile(KernelArgs),
    /// Evaluate the summability operator on data at a rule's nodes.
    Approx(ApproxArgs),
    /// Run one of the numerical experiments.
    Experiment(ExperimentArgs),
    /// Convert a `lon_deg,lat_deg,value` file to a node file and values.
    Ingest(IngestArgs),
}

#[derive(Args)]
struct PointgenArgs {
    /// Uniform random points (requires --count).
    #[arg(long, conflicts_with = "dyadic")]
    random: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    count: Option<usize>,
    /// Centers of the dyadic triangles of this level, with their areas.
    #[arg(long)]
    dyadic: Option<u32>,
    /// Also write the node measure as column `v`.
    #[arg(long)]
    with_measure: bool,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    MatrixFree,
    ExplicitGram,
}

#[derive(Args)]
struct LsqArgs {
    #[arg(long)]
    points: PathBuf,
    /// Exactness degree.
    #[arg(long)]
    degree: usize,
    #[arg(long, value_enum, default_value = "matrix-free")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1e-14)]
    tol: f64,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LadderArg {
    Aligned,
    MinimalIndex,
}

#[derive(Args)]
struct RecArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    degree: usize,
    #[arg(long, value_enum, default_value = "aligned")]
    ladder: LadderArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    rule: PathBuf,
    /// Degree to check; defaults to the rule's recorded exactness degree.
    #[arg(long)]
    degree: Option<usize>,
    /// Also estimate the Gram spectrum of this node file at `degree`.
    #[arg(long)]
    spectrum_points: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MzArgs {
    #[arg(long)]
    rule: PathBuf,
    #[arg(long)]
    degree: usize,
    /// 1, 2 or inf.
    #[arg(long, default_value = "2")]
    norm: String,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    degree: usize,
    /// Filter order; 1 is the sharp cutoff.
    #[arg(long, default_value_t = 5)]
    filter: u32,
    #[arg(long, default_value_t = 2)]
    q: u32,
    /// Number of angles in `[0, pi]`.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Auto,
    Kernel,
    Coeff,
}

#[derive(Args)]
struct ApproxArgs {
    #[arg(long)]
    rule: PathBuf,
    /// Single-column CSV `value` with one row per rule node.
    #[arg(long, conflicts_with = "function")]
    data: Option<PathBuf>,
    /// Sample a benchmark function (g1..g5) at the nodes instead.
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    degree: usize,
    #[arg(long, default_value_t = 5)]
    filter: u32,
    /// Evaluation points (node file); random points when absent.
    #[arg(long)]
    at: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    test_points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    path: PathArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// lsq-stats, rec-stats, localization, percentiles or noise.
    name: String,
    /// JSON object overriding the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Original problem sizes instead of the quick ones.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    test_points: Option<usize>,
    /// Comma-separated degrees.
    #[arg(long, value_delimiter = ',')]
    degrees: Option<Vec<usize>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    /// Node file to write.
    #[arg(long)]
    points: PathBuf,
    /// Single-column value file to write.
    #[arg(long)]
    values: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConstructionFailure { .. } | Error::NonConvergence { .. } => 3,
        Error::Io(_) | Error::Parse(_) => 4,
        Error::InvalidParameter(_) | Error::Domain(_) | Error::ResourceLimit(_) | Error::DimensionMismatch { .. } => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(2);
        }
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_VAR).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

/// `explicit`, else `name` inside the default output directory.
fn out_path(explicit: Option<PathBuf>, name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| out_dir().join(name))
}

fn emit_json(value: &Value, out: Option<&Path>) -> sphere_quad::Result<()> {
    match out {
        Some(p) => io::write_json(p, value),
        None => {
            let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
            to_stdout(&format!("{text}\n"))
        }
    }
}

/// A closed reader (e.g. `| head`) ends the output quietly.
fn to_stdout(text: &str) -> sphere_quad::Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io(e)),
        _ => Ok(()),
    }
}

fn run(cmd: Command) -> sphere_quad::Result<()> {
    match cmd {
        Command::Pointgen(a) => pointgen(a),
        Command::WeightsLsq(a) => weights_lsq(a),
        Command::WeightsRec(a) => weights_rec(a),
        Command::Verify(a) => verify(a),
        Command::MzCheck(a) => mz(a),
        Command::KernelProfile(a) => kernel_profile(a),
        Command::Approx(a) => approx(a),
        Command::Experiment(a) => experiment(a),
        Command::Ingest(a) => ingest(a),
    }
}

fn pointgen(a: PointgenArgs) -> sphere_quad::Result<()> {
    let (set, with_measure) = match (a.random, a.dyadic) {
        (true, None) => {
            let count = a
                .count
                .ok_or_else(|| Error::InvalidParameter("--random requires --count".into()))?;
            (random_points(a.seed, count)?, a.with_measure)
        }
        (false, Some(level)) => (dyadic_triangulation(level)?.to_point_set(), true),
        _ => {
            return Err(Error::InvalidParameter(
                "choose exactly one of --random or --dyadic".into(),
            ))
        }
    };
    match a.out {
        Some(p) => io::write_points(&p, &set, with_measure),
        None => {
            to_stdout(&io::points_csv(&set, with_measure)?)?;
            Ok(())
        }
    }
}

fn report_written(rule_path: &Path, meta: &RuleMetadata) {
    eprintln!(
        "wrote {} (exactness degree {})",
        rule_path.display(),
        meta.exactness_degree
    );
}

fn weights_lsq(a: LsqArgs) -> sphere_quad::Result<()> {
    let set = io::read_points(&a.points)?;
    let opts = SolverOptions {
        rel_tol: a.tol,
        max_iter: a.max_iter,
        mode: match a.mode {
            ModeArg::MatrixFree => GramMode::MatrixFree,
            ModeArg::ExplicitGram => GramMode::ExplicitGram,
        },
    };
    let res = lsq_weights(&set, a.degree, &opts)?;
    let meta = RuleMetadata {
        exactness_degree: a.degree,
        construction: "lsq".into(),
        seed: None,
        solver: Some(res.stats),
    };
    let path = out_path(a.out, "rule_lsq.csv");
    io::write_rule(&path, &res.rule, &meta)?;
    report_written(&path, &meta);
    Ok(())
}

fn weights_rec(a: RecArgs) -> sphere_quad::Result<()> {
    let set = io::read_points(&a.points)?;
    let opts = RecOptions {
        ladder: match a.ladder {
            LadderArg::Aligned => LadderRule::Aligned,
            LadderArg::MinimalIndex => LadderRule::MinimalIndex,
        },
        ..RecOptions::default()
    };
    let seed = reference_rule(a.degree)?;
    let res = rec_weights(&set, a.degree, &seed, &opts)?;
    if res.breakdown {
        eprintln!("recurrence stopped after {} terms", res.terms);
    }
    let meta = RuleMetadata {
        exactness_degree: res.rule.exactness_degree(),
        construction: "rec".into(),
        seed: None,
        solver: None,
    };
    let path = out_path(a.out, "rule_rec.csv");
    io::write_rule(&path, &res.rule, &meta)?;
    report_written(&path, &meta);
    Ok(())
}

fn verify(a: VerifyArgs) -> sphere_quad::Result<()> {
    let (rule, _) = io::read_rule(&a.rule)?;
    let degree = a.degree.unwrap_or(rule.exactness_degree());
    let mut report = verify_exactness(&rule, degree);
    if let Some(p) = &a.spectrum_points {
        let set: PointSet = io::read_points(p)?;
        report = report.with_spectrum(&gram_spectrum(&set, degree)?);
    }
    let value = serde_json::to_value(&report).map_err(|e| Error::Parse(e.to_string()))?;
    emit_json(&value, a.out.as_deref())
}

fn mz(a: MzArgs) -> sphere_quad::Result<()> {
    let norm: MzNorm = a.norm.parse()?;
    let (rule, _) = io::read_rule(&a.rule)?;
    let stats = mz_check(rule.nodes(), rule.weights(), a.degree, norm, a.trials, a.seed)?;
    let v = json!({
        "degree": a.degree,
        "norm": a.norm,
        "trials": a.trials,
        "seed": a.seed,
        "min_ratio": stats.min_ratio,
        "max_ratio": stats.max_ratio,
        "mean_ratio": stats.mean_ratio,
    });
    emit_json(&v, a.out.as_deref())
}

fn kernel_profile(a: KernelArgs) -> sphere_quad::Result<()> {
    if a.samples < 2 {
        return Err(Error::InvalidParameter("--samples must be >= 2".into()));
    }
    let spec = KernelSpec::new(a.q, a.degree, Filter::new(a.filter)?)?;
    let kernel = Kernel::new(&spec);
    let rows: Vec<Vec<f64>> = (0..a.samples)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / (a.samples - 1) as f64;
            vec![t, kernel.value(t.cos())]
        })
        .collect();
    let path = out_path(a.out, "kernel_profile.csv");
    io::write_table(&path, &["theta", "value"], &rows)?;
    io::write_json(&io::sidecar_path(&path), &kernel_diagnostics(&spec))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn approx(a: ApproxArgs) -> sphere_quad::Result<()> {
    let (rule, _) = io::read_rule(&a.rule)?;
    let func: Option<BenchmarkFn> = a.function.as_deref().map(str::parse).transpose()?;
    let z = match (&a.data, func) {
        (Some(p), None) => {
            let t = io::read_table(p)?;
            if t.header != ["value"] {
                return Err(Error::Parse(format!(
                    "{}: expected a single 'value' column",
                    p.display()
                )));
            }
            t.rows.into_iter().map(|r| r[0]).collect()
        }
        (None, Some(g)) => sample(&|x: &UnitPoint| g.eval(x), rule.nodes()),
        _ => {
            return Err(Error::InvalidParameter(
                "give exactly one of --data or --function".into(),
            ))
        }
    };
    let x: Vec<UnitPoint> = match &a.at {
        Some(p) => io::read_points(p)?.into_parts().0,
        None => random_points(a.seed, a.test_points)?.into_parts().0,
    };
    let path = match a.path {
        PathArg::Auto => EvalPath::Auto,
        PathArg::Kernel => EvalPath::KernelSum,
        PathArg::Coeff => EvalPath::Coefficient,
    };
    let spec = OperatorSpec::new(rule, Filter::new(a.filter)?, a.degree)?;
    let values = sigma_eval(&spec, &z, &x, path)?;
    let out = out_path(a.out, "approx.csv");
    match func {
        Some(g) => {
            let rows: Vec<Vec<f64>> = x
                .iter()
                .zip(&values)
                .map(|(p, v)| vec![p.x(), p.y(), p.z(), *v, (v - g.eval(p)).abs()])
                .collect();
            let sup = rows.iter().map(|r| r[4]).fold(0.0, f64::max);
            io::write_table(&out, &["x", "y", "z", "value", "error"], &rows)?;
            eprintln!("wrote {} (max error {sup:e})", out.display());
        }
        None => {
            let rows: Vec<Vec<f64>> = x
                .iter()
                .zip(&values)
                .map(|(p, v)| vec![p.x(), p.y(), p.z(), *v])
                .collect();
            io::write_table(&out, &["x", "y", "z", "value"], &rows)?;
            eprintln!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> sphere_quad::Result<()> {
    let which: Experiment = a.name.parse()?;
    let file = a.config.as_deref().map(io::read_json::<Value>).transpose()?;
    let mut flags = serde_json::Map::new();
    if let Some(s) = a.seed {
        flags.insert("seed".into(), json!(s));
    }
    if let Some(r) = a.repetitions {
        flags.insert("repetitions".into(), json!(r));
    }
    if let Some(t) = a.test_points {
        flags.insert("test_points".into(), json!(t));
    }
    if let Some(d) = &a.degrees {
        flags.insert("degrees".into(), json!(d));
    }
    if let Some(o) = &a.out {
        flags.insert("output".into(), json!(o));
    }
    let cfg = ExperimentConfig::layered(which, a.full, file, Value::Object(flags))?;
    let dir = cfg.output.clone().unwrap_or_else(out_dir);
    for p in experiments::run_to_dir(which, &cfg, a.full, &dir)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn ingest(a: IngestArgs) -> sphere_quad::Result<()> {
    let (set, values) = io::ingest_lonlat(&a.input)?;
    io::write_points(&a.points, &set, false)?;
    let rows: Vec<Vec<f64>> = values.into_iter().map(|v| vec![v]).collect();
    io::write_table(&a.values, &["value"], &rows)?;
    eprintln!("ingested {} nodes", set.len());
    Ok(())
}
