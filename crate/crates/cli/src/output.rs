//! CSV, report and gnuplot emission. Floats are written with 17 significant
//! digits so identical runs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use priceflow_core::{Method, PricePoint, PriceTrajectory};
use serde::Deserialize;

use crate::error::CliError;

pub const TRAJECTORY_HEADER: &str = "t,p,lambda,method";

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_csv(traj: &PriceTrajectory) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for pt in &traj.points {
        let _ = writeln!(out, "{},{},{},{}", num(pt.t), num(pt.p), num(pt.lambda), traj.method.tag());
    }
    out
}

/// `x,<column>` rows.
pub fn profile_csv(column: &str, rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut out = format!("x,{column}\n");
    for (x, v) in rows {
        let _ = writeln!(out, "{},{}", num(x), num(v));
    }
    out
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(CliError::io(path))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

#[derive(Deserialize)]
struct Row {
    t: f64,
    p: f64,
    lambda: f64,
    method: String,
}

/// Reads a file written by [`trajectory_csv`].
pub fn read_trajectory(path: &Path) -> Result<PriceTrajectory, CliError> {
    let bad = |message: String| CliError::Input { path: path.to_path_buf(), message };
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    if text.lines().next() != Some(TRAJECTORY_HEADER) {
        return Err(bad(format!("expected header `{TRAJECTORY_HEADER}`")));
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut method = None;
    let mut points = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let m = match row.method.as_str() {
            "heat-transform" => Method::HeatTransform,
            "fd-reference" => Method::FdReference,
            other => return Err(bad(format!("unknown method tag `{other}`"))),
        };
        if method.is_some_and(|prev| prev != m) {
            return Err(bad("mixed method tags".into()));
        }
        method = Some(m);
        points.push(PricePoint { t: row.t, p: row.p, lambda: row.lambda, bracket: (row.p, row.p) });
    }
    let method = method.ok_or_else(|| bad("no rows".into()))?;
    // the datum is not recorded in the file
    Ok(PriceTrajectory { points, method, fingerprint: 0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub shared: usize,
    pub max: f64,
    pub rms: f64,
    pub worst_t: f64,
}

/// Deviation `|p_heat - p_fd|` over the times present in both trajectories
/// (matched exactly, as both are sampled from the same list).
pub fn compare(heat: &PriceTrajectory, fd: &PriceTrajectory) -> Comparison {
    let mut out = Comparison { shared: 0, max: 0.0, rms: 0.0, worst_t: f64::NAN };
    let mut sum = 0.0;
    for a in &heat.points {
        if let Some(b) = fd.points.iter().find(|b| b.t == a.t) {
            let d = (a.p - b.p).abs();
            if out.shared == 0 || d > out.max || d.is_nan() {
                out.max = d;
                out.worst_t = a.t;
            }
            sum += d * d;
            out.shared += 1;
        }
    }
    if out.shared > 0 {
        out.rms = (sum / out.shared as f64).sqrt();
    }
    out
}

pub fn report(cmp: &Comparison, gate: f64) -> String {
    format!(
        "shared_times {}\nmax_abs_dp {}\nrms_abs_dp {}\nworst_t {}\ngate {}\nverdict {}\n",
        cmp.shared,
        num(cmp.max),
        num(cmp.rms),
        num(cmp.worst_t),
        num(gate),
        if passes(cmp, gate) { "PASS" } else { "FAIL" }
    )
}

pub fn passes(cmp: &Comparison, gate: f64) -> bool {
    cmp.shared > 0 && cmp.max <= gate
}

/// Gnuplot script plotting `p(t)` from each CSV on a log time axis.
pub fn gnuplot_script(csvs: &[PathBuf]) -> String {
    let mut out = String::from(
        "set datafile separator ','\nset key autotitle columnhead\nset logscale x\nset xlabel 't'\nset ylabel 'p(t)'\n",
    );
    let series: Vec<String> = csvs
        .iter()
        .map(|p| {
            let name = p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
            format!("'{name}' using 1:2 with linespoints title '{name}'")
        })
        .collect();
    let _ = writeln!(out, "plot {}", series.join(", \\\n     "));
    out
}
