//! CSV persistence for diagnostic series. Floats are written in shortest
//! round-trip decimal, so write-read cycles are bit-exact.

use std::fs;
use std::path::Path;

use csmlab_core::integrate::{DiagnosticRecord, PairRecord};

use crate::error::{LabError, Result};

pub const SERIES_HEADER: &str =
    "t,l2_sq,hs_sq,grad_hs_sq,forcing_hs_sq,cum_grad_hs,cum_forcing_hs,divergence_residual";
pub const PAIR_HEADER: &str =
    "t,phi_l2_sq,grad_phi_l2_sq,cum_nu_grad_phi,forcing_hs_sq,cum_forcing_hs";

pub fn write_series(path: &Path, records: &[DiagnosticRecord]) -> Result<()> {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.t,
            r.l2_sq,
            r.hs_sq,
            r.grad_hs_sq,
            r.forcing_hs_sq,
            r.cum_grad_hs,
            r.cum_forcing_hs,
            r.divergence_residual
        ));
    }
    fs::write(path, out).map_err(|e| LabError::io(path, e))
}

pub fn write_pair_series(path: &Path, records: &[PairRecord]) -> Result<()> {
    let mut out = String::with_capacity(48 * (records.len() + 1));
    out.push_str(PAIR_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.t, r.phi_l2_sq, r.grad_phi_l2_sq, r.cum_nu_grad_phi, r.forcing_hs_sq, r.cum_forcing_hs
        ));
    }
    fs::write(path, out).map_err(|e| LabError::io(path, e))
}

fn parse_row(path: &Path, line_no: usize, line: &str, want: usize) -> Result<Vec<f64>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != want {
        return Err(LabError::Validation(format!(
            "{}: line {line_no}: expected {want} fields, got {} (last good line {})",
            path.display(),
            fields.len(),
            line_no - 1
        )));
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>().map_err(|_| {
                LabError::Validation(format!(
                    "{}: line {line_no}: `{f}` is not a number (last good line {})",
                    path.display(),
                    line_no - 1
                ))
            })
        })
        .collect()
}

fn read_rows(path: &Path, header: &str) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let mut lines = text.lines();
    let got = lines.next().unwrap_or("");
    if got != header {
        return Err(LabError::Validation(format!(
            "{}: line 1: header mismatch (expected `{header}`, got `{got}`)",
            path.display()
        )));
    }
    let want = header.split(',').count();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        rows.push(parse_row(path, i + 2, line, want)?);
    }
    Ok(rows)
}

pub fn read_series(path: &Path) -> Result<Vec<DiagnosticRecord>> {
    Ok(read_rows(path, SERIES_HEADER)?
        .into_iter()
        .map(|f| DiagnosticRecord {
            t: f[0],
            l2_sq: f[1],
            hs_sq: f[2],
            grad_hs_sq: f[3],
            forcing_hs_sq: f[4],
            cum_grad_hs: f[5],
            cum_forcing_hs: f[6],
            divergence_residual: f[7],
        })
        .collect())
}

pub fn read_pair_series(path: &Path) -> Result<Vec<PairRecord>> {
    Ok(read_rows(path, PAIR_HEADER)?
        .into_iter()
        .map(|f| PairRecord {
            t: f[0],
            phi_l2_sq: f[1],
            grad_phi_l2_sq: f[2],
            cum_nu_grad_phi: f[3],
            forcing_hs_sq: f[4],
            cum_forcing_hs: f[5],
        })
        .collect())
}

/// Generic numeric table for plotting: any header, all-numeric rows.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(|s| s.to_string())
        .collect();
    if header.is_empty() || header[0].is_empty() {
        return Err(LabError::Validation(format!("{}: empty header", path.display())));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        rows.push(parse_row(path, i + 2, line, header.len())?);
    }
    Ok((header, rows))
}
