use altproj::alternating::Status;
use altproj::diagnostics;
use anyhow::Result;
use clap::Args;
use serde::Serialize;

use crate::commands::{exit, seed_from_env};
use crate::problem::{bundled, BenchCase, ProblemFile, Scheme};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Keep rows whose problem or scheme name contains this string.
    #[arg(long)]
    pub filter: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub problem: String,
    pub scheme: Scheme,
    pub eps: Option<f64>,
    pub status: Status,
    pub iters: usize,
    pub rate: Option<f64>,
    pub predicted: Option<f64>,
    pub tolerance: Option<f64>,
    pub rate_max: Option<f64>,
    pub pass: bool,
}

pub fn run_case(file: &ProblemFile, case: &BenchCase, seed: u64) -> Result<BenchRow> {
    let mut opts = file.options;
    opts.epsilon = case.eps.unwrap_or(0.0);
    let trace = file.run(case.scheme, &opts, seed)?;
    let rate = diagnostics::fit_rate(&trace).ok().map(|r| r.rate);
    let rate_ok = match (case.rate, case.tolerance, rate) {
        (Some(p), Some(tol), Some(r)) => (r - p).abs() <= tol,
        (Some(_), Some(_), None) => false,
        _ => true,
    };
    let max_ok = match (case.rate_max, rate) {
        (Some(m), Some(r)) => r <= m,
        (Some(_), None) => false,
        _ => true,
    };
    Ok(BenchRow {
        problem: file.display_name().to_string(),
        scheme: case.scheme,
        eps: case.eps,
        status: trace.status,
        iters: trace.iterations(),
        rate,
        predicted: case.rate,
        tolerance: case.tolerance,
        rate_max: case.rate_max,
        pass: trace.status == case.status && rate_ok && max_ok,
    })
}

pub fn bench_rows(filter: Option<&str>, seed: u64) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for file in bundled()? {
        for case in &file.bench {
            let keep = filter.is_none_or(|f| {
                file.display_name().contains(f) || case.scheme.as_str().contains(f)
            });
            if keep {
                rows.push(run_case(&file, case, seed)?);
            }
        }
    }
    Ok(rows)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.to_string())
}

pub fn render_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<24} {:<12} {:<6} {:<24} {:>6} {:<22} {:<10} {}\n",
        "problem", "scheme", "eps", "status", "iters", "rate", "predicted", "check"
    );
    for r in rows {
        let predicted = match (r.predicted, r.rate_max) {
            (Some(p), _) => p.to_string(),
            (None, Some(m)) => format!("<={m}"),
            (None, None) => "-".to_string(),
        };
        out.push_str(&format!(
            "{:<24} {:<12} {:<6} {:<24} {:>6} {:<22} {:<10} {}\n",
            r.problem,
            r.scheme.as_str(),
            opt(r.eps),
            r.status.as_str(),
            r.iters,
            opt(r.rate),
            predicted,
            if r.pass { "ok" } else { "FAIL" }
        ));
    }
    out
}

pub fn cmd_bench(args: &BenchArgs) -> Result<i32> {
    let rows = bench_rows(args.filter.as_deref(), seed_from_env()?)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        print!("{}", render_table(&rows));
    }
    Ok(if rows.iter().all(|r| r.pass) {
        exit::CONVERGED
    } else {
        exit::NOT_CONVERGED
    })
}
