//! Cost-matrix CSV format and its metadata sidecar.
//!
//! Layout: header `t,node_1,…,node_N`, one row per step, values printed with
//! 17 significant digits so a written matrix reloads bit-identically. The
//! sidecar `<file>.meta.json` carries the truncation level and the
//! normalization applied by the producer.

use crate::error::LabError;
use mnb_core::adversary::CostMatrix;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostMeta {
    pub n_nodes: usize,
    pub horizon: usize,
    pub truncation: u32,
    /// Divisor applied to raw attack costs (1.0 when produced pre-normalized).
    pub normalization: f64,
    /// True when the producer saw an all-zero raw matrix.
    pub all_zero: bool,
    /// Free-form provenance note.
    pub source: String,
}

/// `foo.csv` → `foo.csv.meta.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn write_cost_matrix(path: &Path, matrix: &CostMatrix) -> Result<(), LabError> {
    let mut out = String::new();
    out.push('t');
    for i in 1..=matrix.n_nodes() {
        out.push_str(&format!(",node_{i}"));
    }
    out.push('\n');
    for t in 0..matrix.horizon() {
        out.push_str(&format!("{}", t + 1));
        for &c in matrix.step(t) {
            out.push_str(&format!(",{c:.16e}"));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn write_cost_meta(csv_path: &Path, meta: &CostMeta) -> Result<(), LabError> {
    let path = sidecar_path(csv_path);
    let body = serde_json::to_string_pretty(meta)
        .map_err(|e| LabError::Validation(format!("metadata serialization failed: {e}")))?;
    write_atomic(&path, body.as_bytes())
}

pub fn read_cost_meta(csv_path: &Path) -> Result<Option<CostMeta>, LabError> {
    let path = sidecar_path(csv_path);
    if !path.exists() {
        return Ok(None);
    }
    let body = fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
    let meta = serde_json::from_str(&body)
        .map_err(|e| LabError::format(&path, e.line(), e.to_string()))?;
    Ok(Some(meta))
}

/// Reads a cost CSV. The truncation level comes from the explicit argument
/// or, failing that, the sidecar.
pub fn read_cost_matrix(
    path: &Path,
    truncation: Option<u32>,
) -> Result<(CostMatrix, Option<CostMeta>), LabError> {
    let meta = read_cost_meta(path)?;
    let m = truncation
        .or_else(|| meta.as_ref().map(|m| m.truncation))
        .ok_or_else(|| {
            LabError::Validation(format!(
                "no truncation level: pass --truncation or provide {}",
                sidecar_path(path).display()
            ))
        })?;
    let body = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let mut lines = body.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| LabError::format(path, 1, "empty file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"t") {
        return Err(LabError::format(path, 1, "header must start with column 't'"));
    }
    let n_nodes = cols.len() - 1;
    for (i, col) in cols.iter().enumerate().skip(1) {
        let expected = format!("node_{i}");
        if *col != expected {
            return Err(LabError::format(path, 1, format!("expected column '{expected}', found '{col}'")));
        }
    }
    if n_nodes == 0 {
        return Err(LabError::format(path, 1, "no node columns"));
    }
    let mut data = Vec::new();
    let mut expected_t = 1usize;
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n_nodes + 1 {
            return Err(LabError::format(
                path,
                line_no,
                format!("expected {} fields, found {}", n_nodes + 1, fields.len()),
            ));
        }
        let t: usize = fields[0]
            .parse()
            .map_err(|_| LabError::format(path, line_no, format!("bad step index '{}'", fields[0])))?;
        if t != expected_t {
            return Err(LabError::format(
                path,
                line_no,
                format!("steps must be contiguous, expected {expected_t}, found {t}"),
            ));
        }
        expected_t += 1;
        for field in &fields[1..] {
            let value: f64 = field
                .parse()
                .map_err(|_| LabError::format(path, line_no, format!("bad cost value '{field}'")))?;
            data.push(value);
        }
    }
    let horizon = expected_t - 1;
    let matrix = CostMatrix::new(n_nodes, horizon, m, data)?;
    Ok((matrix, meta))
}

/// Writes through a temp file then renames, so partial output never lands
/// under the final name.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), LabError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| LabError::io(parent, e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut file = fs::File::create(&tmp).map_err(|e| LabError::io(&tmp, e))?;
        file.write_all(bytes).map_err(|e| LabError::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| LabError::io(path, e))
}
