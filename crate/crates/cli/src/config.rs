//! Run configuration: flat TOML, documented keys only.
//!
//! ```toml
//! datum = "skew"          # tent | skew | zero-mass-asym | custom
//! # knots = [...]         # custom only, with values and optionally p0
//! # values = [...]
//! # p0 = 0.0
//! a = 1.0                 # transaction cost, any datum
//! method = "both"         # heat | fd | both
//! times = [0.5, 1.0]      # or t_min / t_max / count (log-spaced)
//! xtol = 1e-8
//! tail_tolerance = 1e-10
//! L = 30.0                # FD half width
//! n = 15000               # FD cells
//! # dt = 2e-3             # FD step; default 0.4 h² explicit, h/2 implicit
//! scheme = "implicit"     # implicit | explicit
//! out = "priceflow-out"
//! gate = 5e-2             # max |p_heat - p_fd| accepted by compare
//! snapshots = false       # write FD profiles at every sample time
//! x_min = -5.0            # window for field and dump-transform
//! x_max = 5.0
//! x_count = 201
//! field_times = [0.1, 1.0]
//! ```

use std::path::PathBuf;

use priceflow_core::{Datum, DatumError, FdError, FdGrid, Preset, Scheme};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown key `{key}` at line {line}")]
    UnknownKey { key: String, line: usize },
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("invalid datum: {0}")]
    Datum(#[from] DatumError),
    #[error("invalid grid: {0}")]
    Grid(FdError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Heat,
    Fd,
    Both,
}

impl MethodChoice {
    pub fn runs_heat(self) -> bool {
        matches!(self, MethodChoice::Heat | MethodChoice::Both)
    }

    pub fn runs_fd(self) -> bool {
        matches!(self, MethodChoice::Fd | MethodChoice::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub count: usize,
}

impl Window {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.x_min];
        }
        let step = (self.x_max - self.x_min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.x_min + step * i as f64).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub datum: Datum,
    pub datum_name: String,
    pub method: MethodChoice,
    pub times: Vec<f64>,
    pub xtol: f64,
    pub tail_tolerance: f64,
    pub grid: FdGrid,
    pub out: PathBuf,
    pub gate: f64,
    pub snapshots: bool,
    pub window: Window,
    pub field_times: Vec<f64>,
}

pub const DEFAULT_XTOL: f64 = 1e-8;
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_HALF_WIDTH: f64 = 30.0;
pub const DEFAULT_CELLS: usize = 15_000;
pub const DEFAULT_GATE: f64 = 5e-2;
pub const POINTS_PER_DECADE: f64 = 20.0;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    datum: String,
    knots: Option<Vec<f64>>,
    values: Option<Vec<f64>>,
    p0: Option<f64>,
    a: Option<f64>,
    method: Option<String>,
    times: Option<Vec<f64>>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    count: Option<usize>,
    xtol: Option<f64>,
    tail_tolerance: Option<f64>,
    #[serde(rename = "L")]
    half_width: Option<f64>,
    n: Option<usize>,
    dt: Option<f64>,
    scheme: Option<String>,
    out: Option<PathBuf>,
    gate: Option<f64>,
    snapshots: Option<bool>,
    x_min: Option<f64>,
    x_max: Option<f64>,
    x_count: Option<usize>,
    field_times: Option<Vec<f64>>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Validation(msg.into())
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| line_of(text, s.start));
        let message = e.message().to_string();
        match message.strip_prefix("unknown field `").and_then(|rest| rest.split('`').next()) {
            Some(key) => ConfigError::UnknownKey { key: key.to_string(), line },
            None => ConfigError::Parse { line, message },
        }
    })?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let cost = raw.a.unwrap_or(1.0);
    let datum = match raw.datum.as_str() {
        "custom" => {
            let knots = raw.knots.ok_or_else(|| invalid("datum = \"custom\" requires `knots`"))?;
            let values = raw.values.ok_or_else(|| invalid("datum = \"custom\" requires `values`"))?;
            Datum::new(knots, values, raw.p0.unwrap_or(0.0), cost)?
        }
        name => {
            let preset = Preset::from_name(name).ok_or_else(|| {
                invalid(format!("unknown datum `{name}`; expected tent, skew, zero-mass-asym or custom"))
            })?;
            if raw.knots.is_some() || raw.values.is_some() || raw.p0.is_some() {
                return Err(invalid("knots, values and p0 apply only to datum = \"custom\""));
            }
            Datum::preset(preset).with_cost(cost)?
        }
    };

    let method = match raw.method.as_deref().unwrap_or("heat") {
        "heat" => MethodChoice::Heat,
        "fd" => MethodChoice::Fd,
        "both" => MethodChoice::Both,
        other => return Err(invalid(format!("unknown method `{other}`; expected heat, fd or both"))),
    };

    let times = match (raw.times, raw.t_min, raw.t_max) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(invalid("give either `times` or `t_min`/`t_max`, not both"))
        }
        (Some(times), None, None) => {
            if times.is_empty() {
                return Err(invalid("`times` is empty"));
            }
            if times[0] <= 0.0 || times.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("`times` must be positive and strictly increasing"));
            }
            times
        }
        (None, lo, hi) => {
            let (lo, hi) = (lo.unwrap_or(0.01), hi.unwrap_or(100.0));
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(invalid("need 0 < t_min < t_max"));
            }
            let count = raw.count.unwrap_or_else(|| (POINTS_PER_DECADE * (hi / lo).log10()).ceil() as usize + 1);
            log_spaced(lo, hi, count)?
        }
    };

    let xtol = positive(raw.xtol.unwrap_or(DEFAULT_XTOL), "xtol")?;
    let tail_tolerance = positive(raw.tail_tolerance.unwrap_or(DEFAULT_TAIL_TOLERANCE), "tail_tolerance")?;

    let scheme = match raw.scheme.as_deref().unwrap_or("implicit") {
        "implicit" => Scheme::Implicit,
        "explicit" => Scheme::Explicit,
        other => return Err(invalid(format!("unknown scheme `{other}`; expected implicit or explicit"))),
    };
    let half_width = raw.half_width.unwrap_or(DEFAULT_HALF_WIDTH);
    let cells = raw.n.unwrap_or(DEFAULT_CELLS);
    let grid = match raw.dt {
        Some(dt) => FdGrid::new(half_width, cells, dt, scheme),
        None => FdGrid::with_default_step(half_width, cells, scheme),
    }
    .map_err(ConfigError::Grid)?;

    let window = Window {
        x_min: raw.x_min.unwrap_or(-5.0),
        x_max: raw.x_max.unwrap_or(5.0),
        count: raw.x_count.unwrap_or(201),
    };
    if window.x_max.partial_cmp(&window.x_min) != Some(std::cmp::Ordering::Greater) || window.count == 0 {
        return Err(invalid("need x_min < x_max and x_count >= 1"));
    }
    let field_times = raw.field_times.unwrap_or_else(|| vec![0.1, 1.0, 10.0]);
    if field_times.is_empty() || field_times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(invalid("`field_times` must be positive"));
    }

    Ok(RunConfig {
        datum,
        datum_name: raw.datum,
        method,
        times,
        xtol,
        tail_tolerance,
        grid,
        out: raw.out.unwrap_or_else(|| PathBuf::from("priceflow-out")),
        gate: positive(raw.gate.unwrap_or(DEFAULT_GATE), "gate")?,
        snapshots: raw.snapshots.unwrap_or(false),
        window,
        field_times,
    })
}

fn positive(v: f64, key: &str) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("`{key}` must be positive, got {v}")))
    }
}

/// `count` points from `lo` to `hi`, equally spaced in `log t`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>, ConfigError> {
    if count < 2 {
        return Err(invalid("`count` must be at least 2"));
    }
    let ratio = (hi / lo).ln();
    let mut out: Vec<f64> =
        (0..count).map(|i| lo * (ratio * i as f64 / (count - 1) as f64).exp()).collect();
    out[count - 1] = hi;
    Ok(out)
}
