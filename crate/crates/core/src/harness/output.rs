//! CSV and manifest persistence.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::run::{Diagnostics, InvariantSeries, RunResult, Snapshot};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("output directory {0} is not empty")]
    NotEmpty(PathBuf),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_table(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_num(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn invariants_csv(series: &InvariantSeries) -> String {
    csv_table(&["t", "H1", "H2", "mean_u"], series.rows.iter().map(|r| vec![r.t, r.h1, r.h2, r.mean_u]))
}

pub fn diagnostics_csv(diag: &Diagnostics) -> String {
    csv_table(&diag.columns, diag.rows.iter().cloned())
}

pub fn profile_csv(snap: &Snapshot) -> String {
    let header: Vec<&str> = snap.columns.iter().map(|(name, _)| *name).collect();
    let len = snap.columns.first().map_or(0, |(_, v)| v.len());
    csv_table(&header, (0..len).map(|i| snap.columns.iter().map(|(_, v)| v[i]).collect()))
}

pub fn profile_file_name(snap: &Snapshot) -> String {
    format!("profile_t{:.6}.csv", snap.t)
}

/// Create `dir` if needed and require it to be empty, so that runs never
/// share an output directory.
pub fn prepare_dir(dir: &Path) -> Result<(), OutputError> {
    fs::create_dir_all(dir)?;
    if fs::read_dir(dir)?.next().is_some() {
        return Err(OutputError::NotEmpty(dir.to_path_buf()));
    }
    Ok(())
}

/// Write `invariants.csv`, `diagnostics.csv`, one `profile_t<t>.csv` per
/// snapshot and `manifest.txt` into the empty directory `dir`.
pub fn write_outputs(result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    prepare_dir(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<(), OutputError> {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    put("invariants.csv".into(), invariants_csv(&result.invariants))?;
    put("diagnostics.csv".into(), diagnostics_csv(&result.diagnostics))?;
    for snap in &result.snapshots {
        put(profile_file_name(snap), profile_csv(snap))?;
    }
    put("manifest.txt".into(), result.config.to_manifest())?;
    Ok(written)
}

/// CSV from named columns of equal length.
pub fn columns_csv(columns: &[(&str, &[f64])]) -> String {
    let header: Vec<&str> = columns.iter().map(|(n, _)| *n).collect();
    let len = columns.first().map_or(0, |(_, v)| v.len());
    csv_table(&header, (0..len).map(|i| columns.iter().map(|(_, v)| v[i]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_has_17_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(0.0), "0.0000000000000000e0");
        assert_eq!(fmt_num(-2.5), "-2.5000000000000000e0");
    }

    #[test]
    fn csv_uses_lf() {
        let s = columns_csv(&[("x", &[1.0, 2.0]), ("u", &[3.0, 4.0])]);
        assert!(!s.contains('\r'));
        assert_eq!(s.lines().count(), 3);
        assert!(s.starts_with("x,u\n"));
    }
}
