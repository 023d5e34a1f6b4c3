//! CSV and JSON writers. Every float goes out with 17 significant digits so
//! that reading a file back reproduces the in-memory value exactly.

use std::fs;
use std::path::Path;

use serde::Serialize;
use tbopt::{Model, Trajectory};

use crate::error::{CliError, CliResult};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn write_rows(
    path: &Path,
    header: &[String],
    rows: impl Iterator<Item = Vec<String>>,
) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(CliError::csv(path))?;
    w.write_record(header).map_err(CliError::csv(path))?;
    for row in rows {
        w.write_record(&row).map_err(CliError::csv(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

/// `t`, state labels, control labels, `N`, then `lambda_<label>` columns
/// when the trajectory carries an adjoint.
pub fn write_trajectory(path: &Path, model: &Model, traj: &Trajectory) -> CliResult<()> {
    let def = model.definition();
    let mut header = vec!["t".to_string()];
    header.extend(def.state_labels.iter().map(|s| s.to_string()));
    header.extend(def.control_labels.iter().map(|s| s.to_string()));
    header.push("N".into());
    if traj.adjoint.is_some() {
        header.extend(def.state_labels.iter().map(|s| format!("lambda_{s}")));
    }
    let rows = (0..traj.grid.len()).map(|i| {
        let x = traj.state.row(i);
        let mut row = vec![fmt_f64(traj.grid.node(i))];
        row.extend(x.iter().copied().map(fmt_f64));
        row.extend(traj.control.row(i).iter().copied().map(fmt_f64));
        row.push(fmt_f64(x.iter().sum()));
        if let Some(lam) = &traj.adjoint {
            row.extend(lam.row(i).iter().copied().map(fmt_f64));
        }
        row
    });
    write_rows(path, &header, rows)
}

/// `t` and one column per control.
pub fn write_control(path: &Path, model: &Model, traj: &Trajectory) -> CliResult<()> {
    let mut header = vec!["t".to_string()];
    header.extend(
        model
            .definition()
            .control_labels
            .iter()
            .map(|s| s.to_string()),
    );
    let rows = (0..traj.grid.len()).map(|i| {
        let mut row = vec![fmt_f64(traj.grid.node(i))];
        row.extend(traj.control.row(i).iter().copied().map(fmt_f64));
        row
    });
    write_rows(path, &header, rows)
}

pub fn write_table(path: &Path, header: &[String], rows: Vec<Vec<String>>) -> CliResult<()> {
    write_rows(path, header, rows.into_iter())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report types serialise");
    fs::write(path, text + "\n").map_err(CliError::io(path))
}

/// Reads a control file with a `t` column followed by one column per
/// control. Rows must match the solver grid.
pub fn read_control(path: &Path, control_dim: usize) -> CliResult<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(CliError::csv(path))?;
    let width = r.headers().map_err(CliError::csv(path))?.len();
    if width != control_dim + 1 {
        return Err(CliError::Invalid(format!(
            "{}: expected {} columns (t and {control_dim} controls), found {width}",
            path.display(),
            control_dim + 1
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(CliError::csv(path))?;
        let row = rec
            .iter()
            .skip(1)
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| {
                    CliError::Invalid(format!("{}: row {}: `{f}`: {e}", path.display(), line + 1))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
