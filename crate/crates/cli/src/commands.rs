use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use altproj::alternating::{IterationRecord, IterationTrace, SolveOptions, Status};
use altproj::diagnostics::{self, AngleReport, RateComparison, RateReport};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bench::{self, BenchArgs};
use crate::problem::{ProblemFile, Scheme};
use crate::trace_io;

pub const SEED_VAR: &str = "ALTPROJ_SEED";
pub const DEFAULT_SEED: u64 = 42;

pub mod exit {
    pub const CONVERGED: i32 = 0;
    pub const INPUT_ERROR: i32 = 1;
    pub const NOT_CONVERGED: i32 = 2;
    pub const BREAKDOWN: i32 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "altproj", version, about = "Alternating-projection feasibility solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a solver on a problem file.
    Solve(SolveArgs),
    /// Angle and rate diagnostics for a trace CSV.
    Diagnose(DiagnoseArgs),
    /// Run the bundled problems and print a rate table.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, value_enum)]
    pub scheme: Option<Scheme>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Inexactness of the corrupting projector.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Trace CSV output path.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Summary JSON output path; stdout when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Problem file used to recompute partner points for angles.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scheme: Option<Scheme>,
    /// Angle estimate, radians, for the predicted-rate comparison.
    #[arg(long)]
    pub predict_alpha: Option<f64>,
    /// Report JSON output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn seed_from_env() -> Result<u64> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .with_context(|| format!("{SEED_VAR} must be an unsigned integer, got {s:?}")),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SEED),
        Err(e) => Err(e).context(SEED_VAR),
    }
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Converged => exit::CONVERGED,
        Status::MaxIters | Status::Diverged => exit::NOT_CONVERGED,
        Status::LinearizationInfeasible | Status::RankDeficient | Status::LeftChart => {
            exit::BREAKDOWN
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub status: Status,
    pub iterations: usize,
    pub final_gap: Option<f64>,
    pub rate: Option<f64>,
}

impl Summary {
    pub fn of(trace: &IterationTrace) -> Self {
        Summary {
            status: trace.status,
            iterations: trace.iterations(),
            final_gap: trace.records.last().map(|r| r.gap),
            rate: diagnostics::fit_rate(trace).ok().map(|r| r.rate),
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn solve_options(file: &ProblemFile, args: &SolveArgs) -> Result<SolveOptions> {
    let mut opts = file.options;
    if let Some(tol) = args.tol {
        opts.gap_tol = tol;
    }
    if let Some(n) = args.max_iters {
        opts.max_iters = n;
    }
    if let Some(eps) = args.eps {
        opts.epsilon = eps;
    }
    opts.validate()?;
    Ok(opts)
}

/// Returns the process exit code.
pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let file = ProblemFile::load(&args.problem)?;
    let scheme = args.scheme.unwrap_or_else(|| file.scheme());
    file.check_scheme(scheme)?;
    let opts = solve_options(&file, args)?;
    let seed = seed_from_env()?;
    let trace = file.run(scheme, &opts, seed)?;
    if let Some(path) = &args.trace {
        let out = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        trace_io::write_trace(&trace, file.payload.iterate_dim(), BufWriter::new(out))?;
    }
    write_json(&Summary::of(&trace), args.summary.as_deref())?;
    Ok(exit_code(trace.status))
}

#[derive(Debug, Serialize)]
pub struct DiagnoseReport {
    pub rows: usize,
    pub angles: Option<AngleReport>,
    pub rate: Option<RateReport>,
    pub comparison: Option<RateComparison>,
    /// Why a section is missing.
    pub notes: Vec<String>,
}

pub fn cmd_diagnose(args: &DiagnoseArgs) -> Result<i32> {
    let input = File::open(&args.trace)
        .with_context(|| format!("cannot read trace {}", args.trace.display()))?;
    let rows = trace_io::read_trace(input)?;
    let mut notes = Vec::new();

    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let rate = match diagnostics::fit_rate_from_gaps(&gaps) {
        Ok(r) => Some(r),
        Err(e) => {
            notes.push(format!("rate: {e}"));
            None
        }
    };

    let angles = match &args.problem {
        None => {
            notes.push("angles: no problem file given".into());
            None
        }
        Some(path) => {
            let file = ProblemFile::load(path)?;
            let scheme = args.scheme.unwrap_or_else(|| file.scheme());
            file.check_scheme(scheme)?;
            let mut records = Vec::with_capacity(rows.len());
            for r in &rows {
                if r.z.len() != file.payload.iterate_dim() {
                    bail!(
                        "trace has {} coordinates, problem iterates have {}",
                        r.z.len(),
                        file.payload.iterate_dim()
                    );
                }
                records.push(IterationRecord {
                    k: r.k,
                    partner: file.partner(scheme, &r.z)?,
                    z: r.z.clone(),
                    gap: r.gap,
                    dist_q: r.dist_q,
                    dist_m: r.dist_m,
                    coords: None,
                });
            }
            let trace = IterationTrace {
                records,
                status: Status::MaxIters,
                start: None,
            };
            match diagnostics::angles_from_trace(&trace) {
                Ok(a) => Some(a),
                Err(e) => {
                    notes.push(format!("angles: {e}"));
                    None
                }
            }
        }
    };

    let comparison = match (args.predict_alpha, &rate) {
        (Some(alpha), Some(r)) => Some(diagnostics::compare_predicted(r, alpha)?),
        (Some(_), None) => {
            notes.push("comparison: no rate available".into());
            None
        }
        _ => None,
    };

    if angles.is_none() && rate.is_none() {
        bail!("insufficient data: {}", notes.join("; "));
    }
    let report = DiagnoseReport {
        rows: rows.len(),
        angles,
        rate,
        comparison,
        notes,
    };
    write_json(&report, args.out.as_deref())?;
    Ok(exit::CONVERGED)
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Bench(a) => bench::cmd_bench(a),
    }
}
