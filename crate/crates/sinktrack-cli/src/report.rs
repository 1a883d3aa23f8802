//! Result CSV emission and parsing.
//!
//! The column set is fixed; floats are printed with six significant digits
//! (trailing zeros trimmed) so identical runs emit identical bytes.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use sinktrack::Method;

use crate::config::{CliError, Result, ResultRow};

pub const CSV_HEADER: &str =
    "sim_id,method,n,m,sigma2,lambda,seed,performance_index,iterations,converged,runtime_ms";

/// Six-significant-digit decimal form, `%.6g` style.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&exp) {
        let formatted = format!("{:.5e}", x);
        let (mantissa, exponent) = formatted.split_once('e').unwrap();
        format!("{}e{}", trim_zeros(mantissa), exponent)
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            row.sim_id,
            row.method.name(),
            row.n,
            format_sig6(row.m),
            format_sig6(row.sigma2),
            format_sig6(row.lambda),
            row.seed,
            format_sig6(row.performance_index),
            row.iterations,
            row.converged,
            format_sig6(row.runtime_ms),
        ));
    }
    out
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    writer
        .write_all(csv_string(rows).as_bytes())
        .and_then(|_| writer.flush())
        .map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
}

pub fn parse_csv(text: &str, label: &str) -> Result<Vec<ResultRow>> {
    let err = |line: usize, message: String| CliError::Parse {
        path: label.to_string(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    if header.trim_end() != CSV_HEADER {
        return Err(err(1, format!("expected header `{CSV_HEADER}`")));
    }

    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(err(lineno, format!("expected 11 fields, got {}", fields.len())));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| err(lineno, format!("bad {what} `{s}`")))
        };
        let int = |s: &str, what: &str| -> Result<u64> {
            s.trim()
                .parse::<u64>()
                .map_err(|_| err(lineno, format!("bad {what} `{s}`")))
        };
        let method = Method::parse(fields[1])
            .ok_or_else(|| err(lineno, format!("unknown method `{}`", fields[1])))?;
        let converged = match fields[9].trim() {
            "true" => true,
            "false" => false,
            other => return Err(err(lineno, format!("bad converged flag `{other}`"))),
        };
        rows.push(ResultRow {
            sim_id: int(fields[0], "sim_id")? as u8,
            method,
            n: int(fields[2], "n")? as usize,
            m: num(fields[3], "m")?,
            sigma2: num(fields[4], "sigma2")?,
            lambda: num(fields[5], "lambda")?,
            seed: int(fields[6], "seed")?,
            performance_index: num(fields[7], "performance_index")?,
            iterations: int(fields[8], "iterations")? as usize,
            converged,
            runtime_ms: num(fields[10], "runtime_ms")?,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    parse_csv(&text, &path.display().to_string())
}
