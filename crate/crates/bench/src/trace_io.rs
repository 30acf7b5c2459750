//! Trace CSV files: header `k,gap,grad_norm,s,t,L_est,energy`, one row per
//! kept record, empty fields for unknown values.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use adaagm::{TraceRecord, Vector};

pub const TRACE_HEADER: &str = "k,gap,grad_norm,s,t,L_est,energy";

/// 17 significant digits, enough to round-trip any f64.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn trace_csv(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.k,
            opt(r.gap),
            num(r.grad_norm),
            num(r.s),
            num(r.t),
            opt(r.l_est),
            opt(r.energy)
        );
    }
    out
}

/// Parse a trace file back into records. Columns not stored in the file
/// (value, norms) come back as NaN; `weighted_grad_sum` is rebuilt as the
/// running sum over the rows present, so on a thinned trace it is a lower
/// bound of the true sum.
pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRecord>, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        Some((_, h)) => {
            return Err(format!(
                "line 1: expected header '{TRACE_HEADER}', found '{h}'"
            ))
        }
        None => return Err("empty file".into()),
    }
    let mut records = Vec::new();
    let mut sum = 0.0;
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| format!("line {}: {what}", i + 1);
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(bad(&format!("expected 7 fields, found {}", fields.len())));
        }
        let real = |j: usize| -> Result<Option<f64>, String> {
            let f = fields[j].trim();
            if f.is_empty() {
                Ok(None)
            } else {
                f.parse()
                    .map(Some)
                    .map_err(|e| bad(&format!("field {}: {e}", j + 1)))
            }
        };
        let need = |j: usize| real(j)?.ok_or_else(|| bad(&format!("field {} is empty", j + 1)));
        let k = fields[0]
            .trim()
            .parse::<usize>()
            .map_err(|e| bad(&format!("field 1: {e}")))?;
        let (grad_norm, s, t) = (need(2)?, need(3)?, need(4)?);
        sum += t * t * s * s * grad_norm * grad_norm;
        records.push(TraceRecord {
            k,
            value: f64::NAN,
            gap: real(1)?,
            grad_norm,
            s,
            t,
            l_est: real(5)?,
            energy: real(6)?,
            x_norm: f64::NAN,
            y_norm: f64::NAN,
            xy_dist: f64::NAN,
            weighted_grad_sum: sum,
        });
    }
    Ok(records)
}

/// Starting points are stored next to the trace as one comma-separated line.
pub fn x0_path(trace: &Path) -> PathBuf {
    trace.with_extension("x0.csv")
}

pub fn x0_csv(x0: &Vector) -> String {
    let fields: Vec<String> = x0.iter().map(|&v| num(v)).collect();
    format!("{}\n", fields.join(","))
}
