//! Signal, weight and cost files, plus the synthetic generators.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{check_finite, checked_log2, Error, Result};
use crate::norm::Weights;
use crate::wavelet::CoefficientVector;

/// Where the daily Dow Jones closing series can be downloaded.
pub const DJIA_SOURCE: &str = "http://lib.stat.cmu.edu/datasets/djdc0093";

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Parses one value per line, or field `column` (0-based) of a comma-separated
/// file. Blank lines and `#` comments are skipped, as is a non-numeric first
/// record (a header).
pub fn parse_signal(text: &str, column: Option<usize>, path: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let body: String = text
        .lines()
        .map(|l| if l.trim_start().starts_with('#') { "" } else { l })
        .collect::<Vec<_>>()
        .join("\n");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let mut first = true;
    for rec in reader.records() {
        let rec = rec.map_err(|e| parse_err(path, e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let k = column.unwrap_or(0);
        if column.is_none() && rec.len() != 1 {
            return Err(parse_err(path, line, "expected one value per line (use a column for CSV input)"));
        }
        let field = rec
            .get(k)
            .ok_or_else(|| parse_err(path, line, format!("no column {k}")))?;
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => return Err(parse_err(path, line, format!("non-finite value '{field}'"))),
            Err(_) if first && column.is_some() => {}
            Err(_) => return Err(parse_err(path, line, format!("not a number: '{field}'"))),
        }
        first = false;
    }
    Ok(out)
}

pub fn read_signal(path: &Path, column: Option<usize>) -> Result<Vec<f64>> {
    parse_signal(&std::fs::read_to_string(path)?, column, path)
}

/// One value per line, shortest round-trip formatting.
pub fn signal_to_text(f: &[f64]) -> String {
    let mut s = String::with_capacity(f.len() * 8);
    for v in f {
        writeln!(s, "{v}").unwrap();
    }
    s
}

pub fn write_signal(path: &Path, f: &[f64]) -> Result<()> {
    std::fs::write(path, signal_to_text(f))?;
    Ok(())
}

/// Zero-pads to the next power of two.
pub fn pad_to_pow2(f: &[f64]) -> Vec<f64> {
    let mut out = f.to_vec();
    out.resize(f.len().max(1).next_power_of_two(), 0.0);
    out
}

/// `f[i] = i mod period`: a ramp repeated `n / period` times.
pub fn saw(n: usize, period: usize) -> Result<Vec<f64>> {
    if period == 0 || n % period != 0 {
        return Err(Error::InvalidArgument(format!("period {period} must divide n = {n}")));
    }
    Ok((0..n).map(|i| (i % period) as f64).collect())
}

/// Reads a closing-price series: the last field of each record, with
/// negative values (data-entry errors in the public file) dropped.
pub fn read_djia(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::InvalidArgument(format!(
                "dataset {} not found; download the daily DJIA closes from {DJIA_SOURCE} and pass the file path",
                path.display()
            ))
        } else {
            e.into()
        }
    })?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let last = line
            .rsplit(|c: char| c == ',' || c.is_whitespace())
            .find(|t| !t.is_empty())
            .unwrap_or("");
        match last.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => out.push(v),
            Ok(v) if v.is_finite() => {}
            Ok(_) => return Err(parse_err(path, no + 1, "non-finite value")),
            Err(_) if out.is_empty() => {}
            Err(_) => return Err(parse_err(path, no + 1, format!("not a number: '{last}'"))),
        }
    }
    Ok(out)
}

/// Workload weights: one positive value per line, rescaled to sum to one.
pub fn read_weights(path: &Path, n: usize) -> Result<Weights> {
    let raw = read_signal(path, None)?;
    if raw.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: raw.len(),
        });
    }
    Weights::from_unnormalized(&raw)
}

/// Per-index costs from CSV lines `flat_index,bits`, covering every index once.
pub fn parse_costs(text: &str, n: usize, path: &Path) -> Result<Vec<u64>> {
    let mut costs = vec![0u64; n];
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut first = true;
    for rec in reader.records() {
        let rec = rec.map_err(|e| parse_err(path, e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 2 {
            return Err(parse_err(path, line, "expected `flat_index,bits`"));
        }
        let (Ok(flat), Ok(bits)) = (rec[0].parse::<usize>(), rec[1].parse::<u64>()) else {
            if first {
                first = false;
                continue;
            }
            return Err(parse_err(path, line, "expected `flat_index,bits`"));
        };
        first = false;
        if flat == 0 || flat > n {
            return Err(parse_err(path, line, format!("flat index {flat} outside 1..={n}")));
        }
        if bits == 0 {
            return Err(parse_err(path, line, "costs must be at least one bit"));
        }
        if costs[flat - 1] != 0 {
            return Err(parse_err(path, line, format!("flat index {flat} listed twice")));
        }
        costs[flat - 1] = bits;
    }
    if let Some(missing) = costs.iter().position(|&c| c == 0) {
        return Err(parse_err(path, 0, format!("no cost for flat index {}", missing + 1)));
    }
    Ok(costs)
}

pub fn read_costs(path: &Path, n: usize) -> Result<Vec<u64>> {
    parse_costs(&std::fs::read_to_string(path)?, n, path)
}

/// CSV `flat_index,level,shift,value`.
pub fn coefficients_to_csv(c: &CoefficientVector) -> String {
    let mut s = String::from("flat_index,level,shift,value\n");
    for (pos, (idx, v)) in c.iter().enumerate() {
        writeln!(s, "{},{},{},{}", pos + 1, idx.level, idx.shift, v).unwrap();
    }
    s
}

/// Checks length and finiteness, optionally zero-padding first.
pub fn prepare(f: Vec<f64>, pad: bool) -> Result<Vec<f64>> {
    let f = if pad { pad_to_pow2(&f) } else { f };
    checked_log2(f.len())?;
    check_finite(&f)?;
    Ok(f)
}
