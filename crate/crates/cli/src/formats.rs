//! Text formats read and written by the `asi` commands.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so every
//! value parses back to the identical `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use asi_core::asi::PredictionRecord;

use crate::error::{CliError, CliResult};

/// Formats a float so it parses back exactly (`-inf` for negative infinity).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Rows of a records table. `log_q0` is present only in relative mode.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordTable {
    pub records: Vec<PredictionRecord>,
    pub log_q0: Option<Vec<f64>>,
}

fn delimiter_for(header_line: &str) -> u8 {
    if header_line.contains('\t') {
        b'\t'
    } else {
        b','
    }
}

/// Reads a comma- or tab-separated table with a header. Required columns:
/// `log_q` and `log_p`, or `log_q` and `log_q0` for relative values. An
/// optional `id` column labels the rows.
pub fn read_records(path: &Path) -> CliResult<RecordTable> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let first = text.lines().next().unwrap_or("");
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter_for(first))
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let parse_err = |line: u64, column: Option<&str>, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        column: column.map(str::to_owned),
        message,
    };
    let headers = reader.headers().map_err(|e| parse_err(1, None, e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let log_q = find("log_q").ok_or_else(|| parse_err(1, Some("log_q"), "missing column".into()))?;
    let log_q0 = find("log_q0");
    let log_p = find("log_p");
    if log_q0.is_none() && log_p.is_none() {
        return Err(parse_err(1, Some("log_p"), "missing column (or log_q0 for relative mode)".into()));
    }
    let id = find("id");

    let mut records = Vec::new();
    let mut q0s = log_q0.map(|_| Vec::new());
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, None, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let cell = |i: usize, name: &str| -> CliResult<f64> {
            let raw = row.get(i).ok_or_else(|| parse_err(line, Some(name), "missing cell".into()))?;
            raw.parse::<f64>().map_err(|_| parse_err(line, Some(name), format!("not a number: {raw:?}")))
        };
        let q = cell(log_q, "log_q")?;
        // In relative mode log_p is not needed; the reference is log_q0.
        let p = match (log_q0, log_p) {
            (Some(i), _) => {
                let v = cell(i, "log_q0")?;
                q0s.as_mut().expect("relative mode").push(v);
                v
            }
            (None, Some(i)) => cell(i, "log_p")?,
            (None, None) => unreachable!(),
        };
        let id = id.and_then(|i| row.get(i)).map_or_else(|| format!("row{}", records.len() + 1), str::to_owned);
        records.push(PredictionRecord { log_q: q, log_p: p, id });
    }
    Ok(RecordTable { records, log_q0: q0s })
}

/// Reads a `j` file: one value per line, an optional `j` header, blank lines
/// and `#` comments ignored. `-inf` is accepted; NaN and `+inf` are not.
pub fn read_j_file(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || (out.is_empty() && line == "j") {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| CliError::Parse {
            path: path.to_path_buf(),
            line: i as u64 + 1,
            column: Some("j".into()),
            message: format!("not a number: {line:?}"),
        })?;
        if v.is_nan() || v == f64::INFINITY {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line: i as u64 + 1,
                column: Some("j".into()),
                message: format!("{line} is not a usable j value"),
            });
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError::Input(format!("{}: no j values", path.display())));
    }
    Ok(out)
}

/// `j` file text: header, one value per line, then a `#` summary line.
pub fn j_file_text(js: &[f64], point_estimate: f64, n_neg_inf: usize) -> String {
    let mut s = String::from("j\n");
    for &j in js {
        s.push_str(&fmt_f64(j));
        s.push('\n');
    }
    let _ = writeln!(s, "# n={} point_estimate={} neg_inf={}", js.len(), fmt_f64(point_estimate), n_neg_inf);
    s
}

/// Empirical CDF of the retained draws: `(value, i / n)` at each sorted draw.
pub fn cdf_text(sorted: &[f64]) -> String {
    let n = sorted.len() as f64;
    let mut s = String::from("j,cumulative_probability\n");
    for (i, &v) in sorted.iter().enumerate() {
        let _ = writeln!(s, "{},{}", fmt_f64(v), fmt_f64((i + 1) as f64 / n));
    }
    s
}

/// Equal-width histogram over the range of `values`. A degenerate range is
/// widened to one unit around the value.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let left = lo + k as f64 * width;
            let right = if k + 1 == bins { hi } else { lo + (k + 1) as f64 * width };
            (left, right, c)
        })
        .collect()
}

pub fn histogram_text(rows: &[(f64, f64, usize)]) -> String {
    let mut s = String::from("bin_left,bin_right,count\n");
    for &(l, r, c) in rows {
        let _ = writeln!(s, "{},{},{c}", fmt_f64(l), fmt_f64(r));
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(CliError::io(path))
}
