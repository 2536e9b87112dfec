//! Command-line front end for `priceflow-core`: TOML run configs, solver
//! drivers, CSV and gnuplot output, and heat-vs-FD comparison reports.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, ConfigError, MethodChoice, RunConfig};
pub use error::CliError;
