//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 infeasible instance
//! (an MS whose file no BS can provide).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::coloring::{Coloring, ColoringError, ColoringMethod, GreedyOrder};
use crate::dof::downlink_dof;
use crate::experiments::{
    monte_carlo, region_boundary, sweep_ncmp, BoundaryPoint, ExperimentError, RegionSearch, SimOptions,
};
use crate::hypergraph::{build_hypergraph, Hypergraph};
use crate::model::{Availability, InstanceFile, RequestProfile, SystemConfig};
use crate::policies::{cache_hc, gd_allocate_traced, BackhaulPolicy, CachePolicy, PolicyError};
use crate::scalar::{parse_rational, ratio_to_f64};
use crate::{Rational, SweepRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

/// Environment variable supplying the default `--seed`.
pub const SEED_ENV: &str = "HYPERDOF_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "hyperdof",
    version,
    about = "Per-MS DoF of clustered cooperative beamforming via hypergraph coloring",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hyperedges, coloring and DoF of one JSON instance
    Analyze(AnalyzeArgs),
    /// Mean DoF of one caching policy under Greedy Download
    Simulate(SimulateArgs),
    /// Hybrid-caching sweep over the number of shared files
    #[command(name = "sweep-ncmp")]
    SweepNcmp(SweepArgs),
    /// Backhaul DoF at which CMP overtakes CD, per cache size
    Region(RegionArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CacheKind {
    Cmp,
    Cd,
    Hc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderKind {
    Index,
    Degree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    let r: Rational = parse_rational(s).map_err(|e| e.to_string())?;
    if r < Rational::from_integer(0) {
        return Err("must be non-negative".into());
    }
    Ok(r)
}

fn gamma_arg(s: &str) -> Result<f64, String> {
    let g: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if !g.is_finite() || g < 0.0 {
        return Err("gamma must be a finite non-negative number".into());
    }
    Ok(g)
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Instance JSON file
    pub instance: PathBuf,
    /// Use the exact chromatic number instead of greedy coloring
    #[arg(long)]
    pub exact: bool,
    /// Greedy vertex order
    #[arg(long, value_enum, default_value = "index")]
    pub order: OrderKind,
    /// Generate caches from N with this policy when the file has no availability
    #[arg(long, value_enum)]
    pub cache: Option<CacheKind>,
    #[arg(long)]
    pub ncmp: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// Number of BSs
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    /// Number of MSs
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Library size
    #[arg(long, default_value_t = 60)]
    pub f: usize,
    #[arg(long, default_value = "1", value_parser = rational_arg)]
    pub c: Rational,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, env = SEED_ENV, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "gd")]
    pub backhaul: BackhaulPolicy,
    /// Exact chromatic number inside Greedy Download and for the slot
    #[arg(long)]
    pub exact: bool,
    /// Worker threads (default: all cores); output does not depend on it
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write output here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    fn options(&self) -> SimOptions {
        SimOptions {
            backhaul: self.backhaul,
            coloring: if self.exact { ColoringMethod::Exact } else { ColoringMethod::default() },
        }
    }

    fn config(&self, n: usize, gamma: f64) -> SystemConfig<i128> {
        SystemConfig {
            num_bs: self.m,
            num_ms: self.k,
            library_size: self.f,
            cache_size: n,
            backhaul_dof: self.c,
            zipf_exponent: gamma,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "cmp")]
    pub cache: CacheKind,
    /// Cache size N
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    /// Shared files for --cache hc
    #[arg(long)]
    pub ncmp: Option<usize>,
    #[arg(long, default_value = "1", value_parser = gamma_arg)]
    pub gamma: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    /// Shared-file counts to evaluate (default 0..=N)
    #[arg(long, value_delimiter = ',')]
    pub ncmp: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1", value_parser = gamma_arg)]
    pub gamma: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Cache sizes to evaluate
    #[arg(long, value_delimiter = ',', default_value = "6,9,12")]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1", value_parser = gamma_arg)]
    pub gamma: Vec<f64>,
    /// Bisection stops once the C bracket is this narrow
    #[arg(long, default_value = "0.05", value_parser = rational_arg)]
    pub tol: Rational,
    #[arg(long, default_value = "0", value_parser = rational_arg)]
    pub c_min: Rational,
    /// Upper end of the C search (default K)
    #[arg(long, value_parser = rational_arg)]
    pub c_max: Option<Rational>,
}

/// Error carrying the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let code = match e {
            ExperimentError::Coloring(ColoringError::SingletonEdge(_))
            | ExperimentError::Policy(PolicyError::Coloring(ColoringError::SingletonEdge(_))) => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<PolicyError> for Failure {
    fn from(e: PolicyError) -> Self {
        ExperimentError::from(e).into()
    }
}

fn cache_policy(kind: CacheKind, ncmp: Option<usize>) -> Result<CachePolicy, Failure> {
    match (kind, ncmp) {
        (CacheKind::Cmp, _) => Ok(CachePolicy::Cmp),
        (CacheKind::Cd, _) => Ok(CachePolicy::Cd),
        (CacheKind::Hc, Some(ncmp)) => Ok(CachePolicy::Hybrid { ncmp }),
        (CacheKind::Hc, None) => Err(Failure::usage("--cache hc requires --ncmp")),
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn coloring_json(coloring: &Coloring) -> Value {
    json!({
        "colors": coloring.colors(),
        "classes": coloring.classes(),
        "num_colors": coloring.num_colors(),
    })
}

fn analyze(args: &AnalyzeArgs) -> Result<String, Failure> {
    let text = fs::read_to_string(&args.instance)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", args.instance.display())))?;
    let mut doc = InstanceFile::from_json(&text).map_err(|e| Failure::usage(format!("invalid instance JSON: {e}")))?;
    if doc.availability.is_none() {
        let Some(kind) = args.cache else {
            return Err(Failure::usage("instance has no availability; pass --cache to generate caches"));
        };
        let n = doc.cache_size.ok_or_else(|| Failure::usage("generating caches needs N"))?;
        let policy = cache_policy(kind, args.ncmp)?;
        let caches = match policy {
            CachePolicy::Hybrid { ncmp } => cache_hc(n, ncmp, doc.library_size, doc.num_bs)?,
            other => other.allocate(n, doc.library_size, doc.num_bs)?,
        };
        doc.availability = Some(caches.per_bs().iter().map(|s| s.iter().copied().collect()).collect());
    }
    let instance = doc.instance::<i128>().map_err(|e| Failure::usage(e.to_string()))?;
    let backhaul = doc.backhaul::<i128>().map_err(|e| Failure::usage(e.to_string()))?;
    let method = if args.exact {
        ColoringMethod::Exact
    } else {
        ColoringMethod::Greedy(match args.order {
            OrderKind::Index => GreedyOrder::Index,
            OrderKind::Degree => GreedyOrder::DegreeDescending,
        })
    };

    let mut report = serde_json::Map::new();
    report.insert("M".into(), json!(instance.config.num_bs));
    report.insert("K".into(), json!(instance.config.num_ms));
    report.insert("F".into(), json!(instance.config.library_size));
    report.insert("method".into(), json!(if args.exact { "exact" } else { "greedy" }));

    let (availability, f_max): (Availability, usize) = match &backhaul {
        Some(c) => {
            let out = gd_allocate_traced(&instance.availability, &instance.requests, c, method)?;
            let steps: Vec<Value> = out
                .steps
                .iter()
                .map(|s| {
                    json!({
                        "file": s.file,
                        "bs": one_based(&s.chosen().bs),
                        "candidate_dof": s.chosen().dof.to_string(),
                    })
                })
                .collect();
            report.insert(
                "backhaul".into(),
                json!({
                    "C": c.to_string(),
                    "downloads": out.plan.per_bs(),
                    "f_max": out.plan.f_max(),
                    "steps": steps,
                }),
            );
            let f_max = out.plan.f_max();
            (out.availability, f_max)
        }
        None => (instance.availability.clone(), 0),
    };

    let h = hypergraph_for(&availability, &instance.requests)?;
    report.insert("hyperedges".into(), json!(h.edge_lists()));
    let coloring = method.color(&h).map_err(|e| match e {
        ColoringError::SingletonEdge(v) => Failure {
            code: EXIT_INFEASIBLE,
            message: format!(
                "infeasible: MS {} requests file {} which no BS holds",
                v + 1,
                instance.requests.file_of(v)
            ),
        },
        other => Failure::usage(other.to_string()),
    })?;
    let chromatic = coloring.num_colors();
    let downlink: Rational = downlink_dof(chromatic).map_err(|e| Failure::usage(e.to_string()))?;
    report.insert("coloring".into(), coloring_json(&coloring));
    report.insert("chromatic".into(), json!(chromatic));
    report.insert("dof".into(), json!(downlink.to_string()));
    report.insert("dof_decimal".into(), json!(ratio_to_f64(&downlink)));
    if let Some(c) = &backhaul {
        let slot: Rational = crate::dof::slot_dof(c, f_max, chromatic).map_err(|e| Failure::usage(e.to_string()))?;
        report.insert("slot_dof".into(), json!(slot.to_string()));
        report.insert("slot_dof_decimal".into(), json!(ratio_to_f64(&slot)));
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(report)).expect("report serializes");
    text.push('\n');
    Ok(text)
}

fn hypergraph_for(availability: &Availability, requests: &RequestProfile) -> Result<Hypergraph, Failure> {
    build_hypergraph(availability, requests).map_err(|e| Failure::usage(e.to_string()))
}

fn render_rows(rows: &[SweepRow], format: Format, extra: Option<Value>) -> String {
    match format {
        Format::Csv => {
            let mut out = String::new();
            writeln!(out, "{}", SweepRow::CSV_HEADER).unwrap();
            for row in rows {
                writeln!(out, "{}", row.csv_record()).unwrap();
            }
            out
        }
        Format::Json => {
            let mut doc = json!({ "rows": rows.iter().map(SweepRow::to_json).collect::<Vec<_>>() });
            if let Some(Value::Object(extra)) = extra {
                doc.as_object_mut().unwrap().extend(extra);
            }
            let mut s = serde_json::to_string_pretty(&doc).unwrap();
            s.push('\n');
            s
        }
    }
}

fn simulate(args: &SimulateArgs) -> Result<String, Failure> {
    let policy = cache_policy(args.cache, args.ncmp)?;
    let cfg = args.common.config(args.n, args.gamma);
    let row = monte_carlo(&cfg, policy, args.common.trials, args.common.seed, args.common.options())?;
    Ok(render_rows(&[row], args.common.format, None))
}

fn sweep(args: &SweepArgs) -> Result<String, Failure> {
    let ncmp: Vec<usize> = if args.ncmp.is_empty() { (0..=args.n).collect() } else { args.ncmp.clone() };
    let cfg = args.common.config(args.n, args.gamma[0]);
    let sweep = sweep_ncmp(&cfg, &ncmp, &args.gamma, args.common.trials, args.common.seed, args.common.options())?;
    let optima: Vec<Value> = sweep
        .optima
        .iter()
        .map(|o| json!({ "gamma": o.gamma, "N_cmp": o.ncmp, "mean_dof_rational": o.mean.to_string() }))
        .collect();
    if args.common.format == Format::Csv {
        for o in &sweep.optima {
            eprintln!("# optimum gamma={} N_cmp={} mean_dof={}", o.gamma, o.ncmp, o.mean);
        }
    }
    Ok(render_rows(&sweep.rows, args.common.format, Some(json!({ "optima": optima }))))
}

fn region(args: &RegionArgs) -> Result<String, Failure> {
    let common = &args.common;
    let search = RegionSearch {
        c_min: args.c_min,
        c_max: args.c_max.unwrap_or_else(|| Rational::from_integer(common.k as i128)),
        tolerance: args.tol,
    };
    let cfg = common.config(0, args.gamma[0]);
    let points = region_boundary(&cfg, &args.n, &args.gamma, &search, common.trials, common.seed, common.options())?;
    Ok(match common.format {
        Format::Csv => {
            let mut out = String::new();
            writeln!(out, "{}", BoundaryPoint::<i128>::CSV_HEADER).unwrap();
            for p in &points {
                writeln!(out, "{}", p.csv_record()).unwrap();
            }
            out
        }
        Format::Json => {
            let doc = json!({ "points": points.iter().map(BoundaryPoint::to_json).collect::<Vec<_>>() });
            let mut s = serde_json::to_string_pretty(&doc).unwrap();
            s.push('\n');
            s
        }
    })
}

/// Writes through a sibling temp file and a rename.
fn write_atomically(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            write_atomically(path, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::usage(format!("cannot write output: {e}")))
        }
    }
}

fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, Failure> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Failure::usage("--workers must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Failure::usage(e.to_string())),
    }
}

/// Runs a parsed command, returning the text it produces.
pub fn execute(command: &Command) -> Result<String, Failure> {
    match command {
        Command::Analyze(args) => analyze(args),
        Command::Simulate(args) => with_workers(args.common.workers, || simulate(args))?,
        Command::SweepNcmp(args) => with_workers(args.common.workers, || sweep(args))?,
        Command::Region(args) => with_workers(args.common.workers, || region(args))?,
    }
}

fn out_path(command: &Command) -> Option<&Path> {
    match command {
        Command::Analyze(_) => None,
        Command::Simulate(a) => a.common.out.as_deref(),
        Command::SweepNcmp(a) => a.common.out.as_deref(),
        Command::Region(a) => a.common.out.as_deref(),
    }
}

/// Entry point: parses `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command).and_then(|text| emit(&text, out_path(&cli.command))) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
