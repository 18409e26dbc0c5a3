//! Trace CSV: `k, gap, dist_Q, dist_M, z_0, …, z_{d−1}`.
//!
//! Floats use 17 significant digits; an unavailable `dist_M` is `NaN`.

use std::io::{Read, Write};

use altproj::alternating::IterationTrace;
use altproj::Vector;
use anyhow::{bail, Context, Result};

const FIXED: [&str; 4] = ["k", "gap", "dist_Q", "dist_M"];

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_trace<W: Write>(trace: &IterationTrace, dim: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
    header.extend((0..dim).map(|i| format!("z_{i}")));
    w.write_record(&header)?;
    for r in &trace.records {
        let mut row = vec![
            r.k.to_string(),
            format_float(r.gap),
            format_float(r.dist_q),
            format_float(r.dist_m.unwrap_or(f64::NAN)),
        ];
        row.extend(r.z.iter().map(|&v| format_float(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub gap: f64,
    pub dist_q: f64,
    pub dist_m: Option<f64>,
    pub z: Vector,
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().context("trace has no header row")?.clone();
    if header.len() < FIXED.len() || header.iter().zip(FIXED).any(|(h, f)| h != f) {
        bail!("trace header must start with k,gap,dist_Q,dist_M");
    }
    let dim = header.len() - FIXED.len();
    for (i, h) in header.iter().skip(FIXED.len()).enumerate() {
        if h != format!("z_{i}") {
            bail!("unexpected trace column {h:?}, expected z_{i}");
        }
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("trace row {}", line + 2))?;
        let field = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .with_context(|| format!("trace row {}, column {}", line + 2, &header[i]))
        };
        let k: usize = rec[0]
            .parse()
            .with_context(|| format!("trace row {}, column k", line + 2))?;
        let dist_m = field(3)?;
        let z = (0..dim)
            .map(|i| field(FIXED.len() + i))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(TraceRow {
            k,
            gap: field(1)?,
            dist_q: field(2)?,
            dist_m: (!dist_m.is_nan()).then_some(dist_m),
            z: Vector::new(z).with_context(|| format!("trace row {}", line + 2))?,
        });
    }
    Ok(rows)
}
