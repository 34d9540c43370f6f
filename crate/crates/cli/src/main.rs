//! `cfree`: seeded verification suites and moment tables for c-free
//! operator models.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use cfree_core::analytic::trace_csv;
use cfree_core::embeddings::{embed_cfree, embed_free, OperatorPair};
use cfree_core::numkernel::CMatrix;
use cfree_core::report::{write_jsonl, CheckReport, Summary, REPORT_SCHEMA};
use cfree_core::series::cfree_r_transform;
use cfree_core::spaces::{build_product_basis, BasisSide, FourSpaces, Index};
use cfree_core::states::{moment_data, MomentData};
use cfree_core::suites::{run_suite, Suite, SuiteConfig, SuiteRun};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info, LevelFilter};
use serde::Serialize;
use serde_json::json;

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "cfree", version, about = "Verification harness for conditionally free products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and report every check.
    Verify(VerifyArgs),
    /// Moment tables and c-free R-transform coefficients of a, b and a + b.
    Moments(MomentsArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Dimensions H_alpha,K_alpha,H_beta,K_beta.
    #[arg(long, default_value = "3,3,3,3", value_parser = parse_dims)]
    dims: [usize; 4],
    /// Truncation depth (K-letters kept).
    #[arg(long, default_value_t = 8)]
    depth: usize,
    /// Series order for the series suites.
    #[arg(long, default_value_t = 8)]
    order: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Tolerance of the relative factorization and lemma checks.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Report file; without it only the summary is printed.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// CSV file for the analytic linearization trace.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct MomentsArgs {
    /// JSON matrix files: rows of [re, im] pairs.
    #[arg(long)]
    t_alpha: PathBuf,
    #[arg(long)]
    s_alpha: PathBuf,
    #[arg(long)]
    t_beta: PathBuf,
    #[arg(long)]
    s_beta: PathBuf,
    /// Number of moments per element.
    #[arg(long, default_value_t = 8)]
    order: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn parse_dims(s: &str) -> Result<[usize; 4], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("'{p}': {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<usize>| format!("expected four dimensions, got {}", v.len()))
}

/// Outcome of a command that ran to completion.
enum Verdict {
    Pass,
    Fail,
}

fn init_logging() -> anyhow::Result<()> {
    let level = match std::env::var("CFREE_LOG").as_deref() {
        Err(_) | Ok("quiet") => LevelFilter::Off,
        Ok("info") => LevelFilter::Info,
        Ok("debug") => LevelFilter::Debug,
        Ok(other) => return Err(anyhow!("CFREE_LOG must be quiet, info or debug, not '{other}'")),
    };
    env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).init();
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_logging().and_then(|()| match cli.command {
        Command::Verify(args) => verify(&args),
        Command::Moments(args) => moments(&args),
    });
    match result {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(EXIT_FAILED_CHECK),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn verify(args: &VerifyArgs) -> anyhow::Result<Verdict> {
    let suite: Suite = args.suite.parse()?;
    let cfg = SuiteConfig {
        dims: args.dims,
        depth: args.depth,
        order: args.order,
        seed: args.seed,
        trials: args.trials,
        tol: args.tol,
    };
    info!("running {suite} with {cfg:?}");
    let runs = run_suite(suite, &cfg)?;
    for run in &runs {
        debug!("{}: {} reports", run.suite, run.reports.len());
    }
    if let Some(path) = &args.out {
        let bytes = match args.format {
            Format::Json => reports_jsonl(&runs)?,
            Format::Csv => reports_csv(&runs)?,
        };
        write_file(path, &bytes)?;
    }
    if let Some(path) = &args.trace {
        let rows: Vec<_> = runs.iter().flat_map(|r| r.trace.iter().cloned()).collect();
        write_file(path, trace_csv(&rows).as_bytes())?;
    }
    print_summary(&runs)?;
    let pass = runs.iter().all(|r| Summary::of(&r.reports).pass());
    Ok(if pass { Verdict::Pass } else { Verdict::Fail })
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn reports_jsonl(runs: &[SuiteRun]) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    for run in runs {
        write_jsonl(&mut buf, run.suite.name(), &run.reports)?;
    }
    Ok(buf)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    suite: &'a str,
    check: &'a str,
    abs_err: f64,
    rel_err: f64,
    tol: f64,
    pass: bool,
}

fn reports_csv(runs: &[SuiteRun]) -> anyhow::Result<Vec<u8>> {
    // The header is written by hand so an empty run still carries it.
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(["suite", "check", "abs_err", "rel_err", "tol", "pass"])?;
    for run in runs {
        for r in &run.reports {
            w.serialize(csv_row(run.suite.name(), r))?;
        }
    }
    Ok(w.into_inner()?)
}

fn csv_row<'a>(suite: &'a str, r: &'a CheckReport) -> CsvRow<'a> {
    CsvRow {
        suite,
        check: &r.name,
        abs_err: r.abs_err,
        rel_err: r.rel_err,
        tol: r.tolerance,
        pass: r.pass,
    }
}

fn print_summary(runs: &[SuiteRun]) -> io::Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{:<24} {:>8} {:>12}  result", "suite", "checks", "max_abs_err")?;
    for run in runs {
        let s = Summary::of(&run.reports);
        let result = match &run.skipped {
            Some(reason) => format!("skipped ({reason})"),
            None if s.pass() => "pass".to_string(),
            None => format!("FAIL ({} failed)", s.failures),
        };
        writeln!(out, "{:<24} {:>8} {:>12.3e}  {}", run.suite.name(), s.checks, s.max_abs_err, result)?;
    }
    Ok(())
}

fn read_matrix(path: &Path) -> anyhow::Result<CMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    CMatrix::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Serialize)]
struct ElementTable {
    element: &'static str,
    moments: MomentData,
    #[serde(with = "cfree_core::numkernel::json::complex_vec")]
    r_coeffs: Vec<cfree_core::Complex64>,
}

/// Moments of `a = Λ(T_α,S_α)`, `b = Λ(T_β,S_β)` and `a + b` in the operator
/// model at depth `order`, with R-transform coefficients of `z^0 … z^{order-1}`.
fn element_tables(args: &MomentsArgs) -> anyhow::Result<Vec<ElementTable>> {
    if args.order < 1 {
        return Err(anyhow!("order must be at least 1"));
    }
    let pa = OperatorPair::new(Index::Alpha, read_matrix(&args.t_alpha)?, read_matrix(&args.s_alpha)?)?;
    let pb = OperatorPair::new(Index::Beta, read_matrix(&args.t_beta)?, read_matrix(&args.s_beta)?)?;
    let spaces = FourSpaces::from_dims([pa.t.rows(), pa.s.rows(), pb.t.rows(), pb.s.rows()])?;
    let h = Arc::new(build_product_basis(spaces, args.order, BasisSide::H));
    let k = Arc::new(build_product_basis(spaces, args.order, BasisSide::K));
    let (la, lb) = (embed_cfree(&pa, &h)?, embed_cfree(&pb, &h)?);
    let (fa, fb) = (embed_free(&pa.s, Index::Alpha, &k)?, embed_free(&pb.s, Index::Beta, &k)?);
    let (ls, fs) = (la.add(&lb)?, fa.add(&fb)?);
    [("a", &la, &fa), ("b", &lb, &fb), ("a+b", &ls, &fs)]
        .into_iter()
        .map(|(element, op, companion)| {
            let moments = moment_data(op, companion, args.order)?;
            let r = cfree_r_transform(&moments).with_context(|| format!("R-transform of {element}"))?;
            Ok(ElementTable {
                element,
                moments,
                r_coeffs: r.coeffs().to_vec(),
            })
        })
        .collect()
}

#[derive(Serialize)]
struct MomentCsvRow {
    element: &'static str,
    n: usize,
    re_phi: f64,
    im_phi: f64,
    re_psi: f64,
    im_psi: f64,
    r_power: usize,
    re_r: f64,
    im_r: f64,
}

fn moments(args: &MomentsArgs) -> anyhow::Result<Verdict> {
    let tables = element_tables(args)?;
    let bytes = match args.format {
        Format::Json => {
            let mut text = serde_json::to_string(&json!({
                "schema": REPORT_SCHEMA,
                "order": args.order,
                "elements": tables,
            }))?;
            text.push('\n');
            text.into_bytes()
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for t in &tables {
                for i in 0..t.moments.order {
                    let (p, q, r) = (t.moments.phi_moments[i], t.moments.psi_moments[i], t.r_coeffs[i]);
                    w.serialize(MomentCsvRow {
                        element: t.element,
                        n: i + 1,
                        re_phi: p.re,
                        im_phi: p.im,
                        re_psi: q.re,
                        im_psi: q.im,
                        r_power: i,
                        re_r: r.re,
                        im_r: r.im,
                    })?;
                }
            }
            w.into_inner()?
        }
    };
    match &args.out {
        Some(path) => write_file(path, &bytes)?,
        None => io::stdout().lock().write_all(&bytes)?,
    }
    Ok(Verdict::Pass)
}
