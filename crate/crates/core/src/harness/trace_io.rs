//! Per-run trace files: CSV with header `n,evals,dist,log_dist,sigma`, reals
//! written with 17 significant digits so every `f64` reads back exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::rng::SeedSpec;
use crate::strategy::{IterationRecord, RunStatus, RunTrace, StrategyConfig};

pub const TRACE_HEADER: [&str; 5] = ["n", "evals", "dist", "log_dist", "sigma"];

/// Scientific notation with 17 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trace_to_string(records: &[IterationRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 80 + 32);
    out.push_str(&TRACE_HEADER.join(","));
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            r.evals,
            format_real(r.dist),
            format_real(r.log_dist),
            format_real(r.sigma)
        ));
    }
    out
}

pub fn write_trace(path: &Path, records: &[IterationRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::output(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(trace_to_string(records).as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::output(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<IterationRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::corrupt(path, e))?;
    let header = reader.headers().map_err(|e| Error::corrupt(path, e))?;
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::corrupt(
            path,
            format!(
                "unexpected header `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut records = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::corrupt(path, e))?;
        let bad = |what: &str| Error::corrupt(path, format!("row {}: bad {what}", line + 1));
        let field = |i: usize| row.get(i).ok_or_else(|| bad(TRACE_HEADER[i]));
        let n: u64 = field(0)?.parse().map_err(|_| bad("n"))?;
        let evals: u64 = field(1)?.parse().map_err(|_| bad("evals"))?;
        let dist: f64 = field(2)?.parse().map_err(|_| bad("dist"))?;
        let log_dist: f64 = field(3)?.parse().map_err(|_| bad("log_dist"))?;
        let sigma: f64 = field(4)?.parse().map_err(|_| bad("sigma"))?;
        if n != line as u64 + 1 {
            return Err(bad("iteration index (not contiguous)"));
        }
        records.push(IterationRecord {
            n,
            evals,
            dist,
            log_dist,
            sigma,
        });
    }
    if records.is_empty() {
        return Err(Error::corrupt(path, "trace has no records"));
    }
    Ok(records)
}

/// Reads a trace and reattaches its configuration. The status is recovered
/// from the last record.
pub fn read_trace(
    path: &Path,
    config: &StrategyConfig,
    problem: &ProblemSpec,
    seed: SeedSpec,
) -> Result<RunTrace> {
    let records = read_records(path)?;
    let per = config.evals_per_iteration();
    if let Some(r) = records.iter().find(|r| r.evals != r.n * per) {
        return Err(Error::corrupt(
            path,
            format!(
                "row {}: evals {} does not match {} per iteration",
                r.n, r.evals, per
            ),
        ));
    }
    let last = records.last().expect("nonempty");
    let status = RunStatus::terminal(last).unwrap_or(RunStatus::Completed);
    Ok(RunTrace {
        config: config.clone(),
        problem: problem.clone(),
        seed,
        records,
        status,
    })
}
