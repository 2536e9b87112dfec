use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use priceflow::run::{self, FitRequest};
use priceflow::{parse_config, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "priceflow", version, about = "Price formation free boundary solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Price trajectory by the configured method(s).
    Simulate(Common),
    /// Finite-difference reference run, with snapshots if enabled.
    Fd(Common),
    /// Heat field and slope on the configured (x, t) window.
    Field(Common),
    /// Transformed datum on the configured x window.
    DumpTransform(Common),
    /// Long-time law of the datum, optionally with a fit of a trajectory file.
    Asympt {
        #[command(flatten)]
        common: Common,
        /// Trajectory CSV to fit `p - p0 = q √t` to.
        #[arg(long, value_name = "CSV")]
        fit: Option<PathBuf>,
        #[arg(long, default_value_t = 1e2, requires = "fit")]
        fit_t_min: f64,
        #[arg(long, default_value_t = f64::INFINITY, requires = "fit")]
        fit_t_max: f64,
    },
    /// Heat vs FD deviation report, checked against `gate`.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Existing heat trajectory CSV; needs `--fd-csv` too.
        #[arg(long, value_name = "CSV", requires = "fd_csv")]
        heat_csv: Option<PathBuf>,
        #[arg(long, value_name = "CSV", requires = "heat_csv")]
        fd_csv: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let text = std::fs::read_to_string(&common.config).map_err(|source| CliError::Io {
        path: common.config.clone(),
        source,
    })?;
    let cfg = parse_config(&text)?;
    let out = common.out.clone().unwrap_or_else(|| cfg.out.clone());
    Ok((cfg, out))
}

fn report(written: run::Written) {
    for path in written.files {
        println!("wrote {}", path.display());
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(c) => {
            let (cfg, out) = load(&c)?;
            report(run::simulate(&cfg, &out)?);
        }
        Command::Fd(c) => {
            let (cfg, out) = load(&c)?;
            report(run::fd(&cfg, &out)?);
        }
        Command::Field(c) => {
            let (cfg, out) = load(&c)?;
            report(run::field(&cfg, &out)?);
        }
        Command::DumpTransform(c) => {
            let (cfg, out) = load(&c)?;
            report(run::dump_transform(&cfg, &out)?);
        }
        Command::Asympt { common, fit, fit_t_min, fit_t_max } => {
            let (cfg, _) = load(&common)?;
            let req = fit.map(|trajectory| FitRequest { trajectory, t_min: fit_t_min, t_max: fit_t_max });
            print!("{}", run::asympt(&cfg, req.as_ref())?);
        }
        Command::Compare { common, heat_csv, fd_csv } => {
            let (cfg, out) = load(&common)?;
            let files = heat_csv.as_deref().zip(fd_csv.as_deref());
            report(run::compare(&cfg, files, &out)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.exit_code())
        }
    }
}
