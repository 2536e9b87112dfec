//! Drivers behind each subcommand.

use std::path::{Path, PathBuf};

use priceflow_core::{
    find_price, fit_sqrt_coefficient, AsymptoticLaw, FdRun, FdSolver, HeatField, Method, PriceTrajectory,
    SearchOptions, TransformedField,
};
use rayon::prelude::*;

use crate::config::{ConfigError, RunConfig};
use crate::error::CliError;
use crate::output;

pub const THREADS_VAR: &str = "PRICEFLOW_THREADS";

/// Runs `f` on a pool capped by `PRICEFLOW_THREADS` when it is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(f());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError::Validation(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ConfigError::Validation(format!("cannot start {threads} threads: {e}")))?;
    Ok(pool.install(f))
}

fn heat_field(cfg: &RunConfig) -> Result<HeatField, CliError> {
    Ok(HeatField::new(TransformedField::new(cfg.datum.clone()), cfg.tail_tolerance)?)
}

/// Heat-method trajectory. Every time point is an independent cold solve,
/// so the result does not depend on the thread count.
pub fn heat_trajectory(cfg: &RunConfig) -> Result<PriceTrajectory, CliError> {
    let hf = heat_field(cfg)?;
    let opts = SearchOptions { xtol: cfg.xtol, ..SearchOptions::default() };
    let points = cfg.times.par_iter().map(|&t| find_price(&hf, t, &opts)).collect::<Result<Vec<_>, _>>()?;
    Ok(PriceTrajectory { points, method: Method::HeatTransform, fingerprint: cfg.datum.fingerprint() })
}

pub fn fd_run(cfg: &RunConfig) -> Result<FdRun, CliError> {
    let horizon = *cfg.times.last().expect("validated times are nonempty");
    Ok(FdSolver::new(cfg.grid).solve(&cfg.datum, horizon, &cfg.times, cfg.snapshots)?)
}

/// Files a command wrote, in order.
#[derive(Debug, Default)]
pub struct Written {
    pub files: Vec<PathBuf>,
}

impl Written {
    fn put(&mut self, path: PathBuf, contents: &str) -> Result<(), CliError> {
        output::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

fn write_fd(run: &FdRun, out: &Path, written: &mut Written) -> Result<PathBuf, CliError> {
    let csv = out.join("fd.csv");
    written.put(csv.clone(), &output::trajectory_csv(&run.trajectory))?;
    if !run.snapshots.is_empty() {
        let dir = out.join("snapshots");
        output::ensure_dir(&dir)?;
        let mut index = String::from("index,t,file\n");
        for (i, snap) in run.snapshots.iter().enumerate() {
            let name = format!("fd_{i:04}.csv");
            let state = &snap.state;
            let rows = (0..state.values().len()).map(|k| (state.node(k), state.values()[k]));
            written.put(dir.join(&name), &output::profile_csv("f", rows))?;
            index.push_str(&format!("{i},{},{name}\n", output::num(snap.t)));
        }
        written.put(dir.join("index.csv"), &index)?;
    }
    Ok(csv)
}

fn write_comparison(
    heat: &PriceTrajectory,
    fd: &PriceTrajectory,
    gate: f64,
    out: &Path,
    written: &mut Written,
) -> Result<(), CliError> {
    let cmp = output::compare(heat, fd);
    written.put(out.join("report.txt"), &output::report(&cmp, gate))?;
    if output::passes(&cmp, gate) {
        Ok(())
    } else {
        Err(CliError::GateExceeded { max: cmp.max, gate })
    }
}

/// `simulate`: the configured method(s), trajectory CSVs, a gnuplot script
/// and, for both methods, the comparison report.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Written, CliError> {
    output::ensure_dir(out)?;
    let method = cfg.method;
    let (heat, fd) = with_thread_cap(|| {
        rayon::join(
            || method.runs_heat().then(|| heat_trajectory(cfg)).transpose(),
            || method.runs_fd().then(|| fd_run(cfg)).transpose(),
        )
    })?;
    let (heat, fd) = (heat?, fd?);

    let mut written = Written::default();
    let mut csvs = Vec::new();
    if let Some(traj) = &heat {
        let path = out.join("heat.csv");
        written.put(path.clone(), &output::trajectory_csv(traj))?;
        csvs.push(path);
    }
    if let Some(run) = &fd {
        csvs.push(write_fd(run, out, &mut written)?);
    }
    written.put(out.join("plot.gp"), &output::gnuplot_script(&csvs))?;
    if let (Some(heat), Some(fd)) = (&heat, &fd) {
        write_comparison(heat, &fd.trajectory, cfg.gate, out, &mut written)?;
    }
    Ok(written)
}

/// `fd`: the reference solver alone, whatever `method` says.
pub fn fd(cfg: &RunConfig, out: &Path) -> Result<Written, CliError> {
    output::ensure_dir(out)?;
    let run = fd_run(cfg)?;
    let mut written = Written::default();
    let csv = write_fd(&run, out, &mut written)?;
    written.put(out.join("plot.gp"), &output::gnuplot_script(&[csv]))?;
    Ok(written)
}

/// `compare`: both methods, or two existing trajectory files.
pub fn compare(cfg: &RunConfig, files: Option<(&Path, &Path)>, out: &Path) -> Result<Written, CliError> {
    output::ensure_dir(out)?;
    let mut written = Written::default();
    let (heat, fd) = match files {
        Some((heat, fd)) => (output::read_trajectory(heat)?, output::read_trajectory(fd)?),
        None => {
            let (heat, fd) = with_thread_cap(|| rayon::join(|| heat_trajectory(cfg), || fd_run(cfg)))?;
            let (heat, fd) = (heat?, fd?.trajectory);
            let paths = [out.join("heat.csv"), out.join("fd.csv")];
            written.put(paths[0].clone(), &output::trajectory_csv(&heat))?;
            written.put(paths[1].clone(), &output::trajectory_csv(&fd))?;
            written.put(out.join("plot.gp"), &output::gnuplot_script(&paths))?;
            (heat, fd)
        }
    };
    write_comparison(&heat, &fd, cfg.gate, out, &mut written)?;
    Ok(written)
}

/// `field`: `(x, t, F, F_x)` over the configured window and `field_times`.
pub fn field(cfg: &RunConfig, out: &Path) -> Result<Written, CliError> {
    output::ensure_dir(out)?;
    let hf = heat_field(cfg)?;
    let xs = cfg.window.points();
    let blocks = with_thread_cap(|| {
        cfg.field_times
            .par_iter()
            .map(|&t| {
                let mut block = String::new();
                for &x in &xs {
                    let (v, s) = (hf.value(x, t)?, hf.slope(x, t)?);
                    block.push_str(&format!("{},{},{},{}\n", output::num(x), output::num(t), output::num(v), output::num(s)));
                }
                Ok(block)
            })
            .collect::<Result<Vec<String>, CliError>>()
    })??;
    let mut text = String::from("x,t,F,F_x\n");
    blocks.iter().for_each(|b| text.push_str(b));
    let mut written = Written::default();
    written.put(out.join("field.csv"), &text)?;
    Ok(written)
}

/// `dump-transform`: `(x, F_I)` over the configured window.
pub fn dump_transform(cfg: &RunConfig, out: &Path) -> Result<Written, CliError> {
    output::ensure_dir(out)?;
    let tf = TransformedField::new(cfg.datum.clone());
    let rows = cfg.window.points().into_iter().map(|x| (x, tf.value(x)));
    let mut written = Written::default();
    written.put(out.join("transform.csv"), &output::profile_csv("F_I", rows))?;
    Ok(written)
}

/// Window for the empirical fit in `asympt`.
#[derive(Debug, Clone)]
pub struct FitRequest {
    pub trajectory: PathBuf,
    pub t_min: f64,
    pub t_max: f64,
}

/// `asympt`: the predicted long-time law as `key value` lines, plus the
/// empirical `√t` fit of a trajectory file when one is given.
pub fn asympt(cfg: &RunConfig, fit: Option<&FitRequest>) -> Result<String, CliError> {
    let m = cfg.datum.masses();
    let mut text = format!("mass_plus {}\nmass_minus {}\n", output::num(m.plus), output::num(m.minus));
    match AsymptoticLaw::for_datum(&cfg.datum)? {
        AsymptoticLaw::SqrtDrift { coefficient } => {
            text.push_str(&format!("kind sqrt-drift\nq_inf {}\n", output::num(coefficient)));
        }
        AsymptoticLaw::BoundedLimit { price } => {
            text.push_str(&format!("kind bounded-limit\np_inf {}\n", output::num(price)));
        }
    }
    if let Some(req) = fit {
        let mut traj = output::read_trajectory(&req.trajectory)?;
        // fit p - p0 so the law is comparable for any initial price
        let p0 = cfg.datum.p0();
        traj.points.iter_mut().for_each(|pt| pt.p -= p0);
        let fit = fit_sqrt_coefficient(&traj, req.t_min, req.t_max)?;
        text.push_str(&format!(
            "fit_q {}\nfit_residual {}\nfit_points {}\n",
            output::num(fit.coefficient),
            output::num(fit.residual),
            fit.points
        ));
    }
    Ok(text)
}
