use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::Serialize;

use ftspan::construct::ReservePolicy;
use ftspan::gen;
use ftspan::io::{read_edges, write_edges};
use ftspan::metric::{load_points, InputMode};
use ftspan::pipeline::{build, BuildConfig, BuildError, Mode};
use ftspan::verify::{
    default_hop_cap, fault_suite, greedy_ft_oracle, measure_hop_diameter, structural_audit, FaultStrategy, Hints,
    Report,
};
use ftspan::Metric;

const EXIT_CONFIG: u8 = 2;
const EXIT_CONSTRUCT: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

/// Hop diameters are measured from every point up to this size, from a
/// deterministic sample of sources above it.
const ALL_SOURCES_MAX_N: usize = 2000;

#[derive(Parser)]
#[command(name = "ftspan", version, about = "Fault-tolerant spanners for doubling metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a spanner and write its edge list and stats.
    Build(BuildArgs),
    /// Check a stored edge list against fault sets and quality ceilings.
    Verify(VerifyArgs),
    /// Build and run the structural audit of the surrogate sets.
    Audit(BuildArgs),
    /// Scaling benchmark over random planar instances.
    Bench(BenchArgs),
    /// Greedy fault-tolerant spanner for comparison.
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Point file, one point per line.
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    input: Option<PathBuf>,
    /// Distance matrix file: n, then n rows of n reals.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

impl InputArgs {
    fn load(&self) -> Result<Metric, Failure> {
        let (path, mode) = match (&self.input, &self.matrix) {
            (Some(p), _) => (p, InputMode::Euclidean),
            (None, Some(p)) => (p, InputMode::Matrix),
            (None, None) => return Err(Failure::config("no input given")),
        };
        let m = load_points(path, mode).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        info!("loaded {} points from {}", m.len(), path.display());
        Ok(m.normalize())
    }
}

#[derive(Args, Clone)]
struct BuildArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Cross-edge constant; defaults to max(395, ceil(600/eps)).
    #[arg(long)]
    gamma: Option<f64>,
    /// clique-only, matching or full.
    #[arg(long, default_value = "full")]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge list output (JSON lines).
    #[arg(long, default_value = "edges.jsonl")]
    out: PathBuf,
    /// Stats output (JSON).
    #[arg(long, default_value = "stats.json")]
    stats: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Edge list to verify.
    #[arg(long)]
    edges: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// exhaustive, random:N or targeted.
    #[arg(long, default_value = "targeted")]
    faults: FaultStrategy,
    /// Seed for the random fault strategy.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report output (JSON).
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    max_lightness: Option<f64>,
    /// Largest allowed hop diameter; defaults to 4*ceil(log2 n)+8.
    #[arg(long)]
    max_hops: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated point counts.
    #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
    sizes: Vec<usize>,
    /// Comma-separated fault budgets.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    ks: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value = "full")]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV file; rows are appended. Standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value = "oracle.jsonl")]
    out: PathBuf,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            err: anyhow::anyhow!(msg.into()),
        }
    }

    fn violation(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VIOLATION,
            err: anyhow::anyhow!(msg.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Failure { code: 1, err }
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        let code = match e {
            BuildError::Config(_) => EXIT_CONFIG,
            _ => EXIT_CONSTRUCT,
        };
        Failure {
            code,
            err: e.into(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FTSPAN_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => run_build(&a, false),
        Command::Audit(a) => run_build(&a, true),
        Command::Verify(a) => run_verify(&a),
        Command::Bench(a) => run_bench(&a),
        Command::Oracle(a) => run_oracle(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn run_build(a: &BuildArgs, audit_only: bool) -> Result<(), Failure> {
    let m = a.input.load()?;
    let mut cfg = BuildConfig::new(a.eps, a.k).mode(a.mode).reserve(ReservePolicy::Truncated);
    if let Some(g) = a.gamma {
        cfg = cfg.gamma(g);
    }
    let start = Instant::now();
    let out = build(&m, &cfg)?;
    let build_time = start.elapsed().as_secs_f64();
    let findings = structural_audit(&out.tree, &m, &out.table);
    for f in &findings {
        warn!("{f}");
    }
    if audit_only {
        println!("{}", serde_json::to_string_pretty(&findings).context("serializing findings")?);
    } else {
        let file = File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
        let mut w = BufWriter::new(file);
        write_edges(&mut w, &out.spanner, m.scale()).context("writing edges")?;
        w.flush().context("writing edges")?;
        let mut report = Report::measure(&out.spanner, &m, a.k, a.eps);
        report.audit_findings = findings.clone();
        report.timings.insert("build_seconds".into(), build_time);
        write_json(&a.stats, &report)?;
        info!(
            "{} edges, max degree {}, lightness {:.3}",
            report.edge_count, report.max_degree, report.lightness
        );
    }
    if findings.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_CONSTRUCT,
            err: anyhow::anyhow!("structural audit reported {} findings", findings.len()),
        })
    }
}

/// Every `step`-th point, enough to reach `target` sources.
fn sample_sources(n: usize, target: usize) -> Vec<usize> {
    let step = n.div_ceil(target.max(1)).max(1);
    (0..n).step_by(step).collect()
}

fn hop_sources(n: usize) -> Option<Vec<usize>> {
    (n > ALL_SOURCES_MAX_N).then(|| sample_sources(n, 50))
}

fn run_verify(a: &VerifyArgs) -> Result<(), Failure> {
    let m = a.input.load()?;
    if !(a.eps > 0.0) {
        return Err(Failure::config(format!("eps must be positive, got {}", a.eps)));
    }
    if m.len() >= 2 && a.k > m.len() - 2 {
        return Err(Failure::config(format!("k must be ≤ n−2 (k = {}, n = {})", a.k, m.len())));
    }
    let file = File::open(&a.edges).map_err(|e| Failure::config(format!("{}: {e}", a.edges.display())))?;
    let sp = read_edges(BufReader::new(file), &m).map_err(|e| Failure::config(format!("{}: {e}", a.edges.display())))?;

    let mut report = Report::measure(&sp, &m, a.k, a.eps);
    let strategy = match a.faults {
        FaultStrategy::Random { trials, .. } => FaultStrategy::Random { trials, seed: a.seed },
        ref s => s.clone(),
    };
    let start = Instant::now();
    let suite = fault_suite(&sp, &m, a.eps, a.k, &strategy, &Hints::default()).map_err(Failure::config)?;
    report.timings.insert("faults_seconds".into(), start.elapsed().as_secs_f64());
    let cap = a.max_hops.unwrap_or_else(|| default_hop_cap(m.len()));
    let start = Instant::now();
    let sources = hop_sources(m.len());
    let hops = measure_hop_diameter(&sp, &m, a.eps, cap, sources.as_deref());
    report.timings.insert("hops_seconds".into(), start.elapsed().as_secs_f64());
    info!("{} fault sets tested, hop diameter {}", suite.tested, hops.diameter);

    let mut problems = Vec::new();
    if !suite.passed {
        let w = suite.worst.as_ref().unwrap();
        problems.push(format!(
            "stretch {} between {} and {} under faults {:?}",
            w.stretch, w.u, w.v, w.faults
        ));
    }
    if !hops.exceeded.is_empty() {
        problems.push(format!("{} pairs need more than {cap} hops", hops.exceeded.len()));
    }
    if let Some(d) = a.max_degree {
        if report.max_degree > d {
            problems.push(format!("max degree {} exceeds {d}", report.max_degree));
        }
    }
    if let Some(l) = a.max_lightness {
        if report.lightness > l {
            problems.push(format!("lightness {} exceeds {l}", report.lightness));
        }
    }
    println!("tested {} fault sets", suite.tested);
    report.faults = Some(suite);
    report.hops = Some(hops);
    write_json(&a.out, &report)?;
    if problems.is_empty() {
        println!("ok");
        Ok(())
    } else {
        Err(Failure::violation(problems.join("; ")))
    }
}

#[derive(Serialize)]
struct BenchRow {
    n: usize,
    k: usize,
    max_degree: usize,
    edges: usize,
    lightness: f64,
    hop_diameter: usize,
    build_time: f64,
}

fn run_bench(a: &BenchArgs) -> Result<(), Failure> {
    let sink: Box<dyn Write> = match &a.out {
        Some(path) => {
            let fresh = fs::metadata(path).map_or(true, |md| md.len() == 0);
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .with_context(|| format!("opening {}", path.display()))?;
            if !fresh {
                return bench_rows(a, csv::WriterBuilder::new().has_headers(false).from_writer(Box::new(file)));
            }
            Box::new(file)
        }
        None => Box::new(io::stdout()),
    };
    bench_rows(a, csv::Writer::from_writer(sink))
}

fn bench_rows(a: &BenchArgs, mut w: csv::Writer<Box<dyn Write>>) -> Result<(), Failure> {
    for &n in &a.sizes {
        let m = gen::uniform_plane(n, a.seed).normalize();
        for &k in &a.ks {
            let cfg = BuildConfig::new(a.eps, k).mode(a.mode);
            let start = Instant::now();
            let out = build(&m, &cfg)?;
            let build_time = start.elapsed().as_secs_f64();
            let report = Report::measure(&out.spanner, &m, k, a.eps);
            let sources = hop_sources(n);
            let hops = measure_hop_diameter(&out.spanner, &m, a.eps, default_hop_cap(n), sources.as_deref());
            info!("n = {n}, k = {k}: {build_time:.2}s");
            w.serialize(BenchRow {
                n,
                k,
                max_degree: report.max_degree,
                edges: report.edge_count,
                lightness: report.lightness,
                hop_diameter: hops.diameter,
                build_time,
            })
            .context("writing CSV row")?;
        }
    }
    w.flush().context("writing CSV")?;
    Ok(())
}

fn run_oracle(a: &OracleArgs) -> Result<(), Failure> {
    let m = a.input.load()?;
    if m.len() > ftspan::verify::oracle::ORACLE_MAX_N {
        return Err(Failure::config(format!(
            "oracle handles at most {} points, got {}",
            ftspan::verify::oracle::ORACLE_MAX_N,
            m.len()
        )));
    }
    let sp = greedy_ft_oracle(&m, 1.0 + a.eps, a.k);
    let mut w = BufWriter::new(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    write_edges(&mut w, &sp, m.scale()).context("writing edges")?;
    w.flush().context("writing edges")?;
    println!("{} edges, max degree {}", sp.len(), sp.max_degree());
    Ok(())
}
