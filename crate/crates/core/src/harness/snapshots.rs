use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::solver::MarginalResult;

use super::HarnessError;

/// Six equally spaced times from 0 to `horizon`.
pub fn default_snapshot_times(horizon: f64) -> Vec<f64> {
    (0..6).map(|i| horizon * i as f64 / 5.0).collect()
}

/// Writes one CSV per requested time (nearest grid level) and a gnuplot
/// script that plots the densities. Returns the CSV paths.
///
/// Columns: `x,density,cdf,state_cdf_1,…,state_cdf_S`, every value with 17
/// significant digits.
pub fn emit_snapshots(marg: &MarginalResult, times: &[f64], out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let horizon = marg.time(marg.last_level());
    let half_step = 0.5 * marg.mesh.dy;
    if let Some(t) = times.iter().find(|&&t| !(t >= 0.0 && t <= horizon + half_step)) {
        return Err(HarnessError::Config(format!("snapshot time {t} outside [0, {horizon}]")));
    }
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;

    let nodes = marg.nodes();
    let mut header = String::from("x,density,cdf");
    for s in 1..=marg.num_states {
        write!(header, ",state_cdf_{s}").unwrap();
    }
    let mut paths = Vec::with_capacity(times.len());
    let mut plots = Vec::with_capacity(times.len());
    for (idx, &t) in times.iter().enumerate() {
        let n = marg.mesh.nearest_step(t).min(marg.last_level());
        let mut body = header.clone();
        body.push('\n');
        let (density, total) = (marg.density(n), marg.total_cdf(n));
        for k in 0..nodes.len() {
            write!(body, "{:.16e},{:.16e},{:.16e}", nodes[k], density[k], total[k]).unwrap();
            for s in 0..marg.num_states {
                write!(body, ",{:.16e}", marg.state_cdf(s, k, n)).unwrap();
            }
            body.push('\n');
        }
        let name = format!("snapshot_{idx:02}.csv");
        let path = out_dir.join(&name);
        fs::write(&path, body).map_err(|e| HarnessError::io(&path, e))?;
        plots.push(format!("'{name}' using 1:2 with lines title 't = {:.4}'", marg.time(n)));
        paths.push(path);
    }

    let script = format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'x'\nset ylabel 'density'\nplot {}\n",
        plots.join(", \\\n     ")
    );
    let script_path = out_dir.join("snapshots.gp");
    fs::write(&script_path, script).map_err(|e| HarnessError::io(&script_path, e))?;
    Ok(paths)
}

/// A parsed snapshot CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotTable {
    pub header: Vec<String>,
    /// `columns[c][row]`.
    pub columns: Vec<Vec<f64>>,
}

impl SnapshotTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header.iter().position(|h| h == name).map(|i| self.columns[i].as_slice())
    }
}

pub fn read_snapshot(path: &Path) -> Result<SnapshotTable, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap_or_default().split(',').map(str::to_owned).collect();
    let mut columns = vec![Vec::new(); header.len()];
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(HarnessError::Config(format!("{}: row {row} has {} fields", path.display(), fields.len())));
        }
        for (col, f) in columns.iter_mut().zip(fields) {
            col.push(f.parse().map_err(|_| HarnessError::Config(format!("{}: bad number `{f}`", path.display())))?);
        }
    }
    Ok(SnapshotTable { header, columns })
}
