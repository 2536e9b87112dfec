//! Free boundary tracking: the price `p(t)` is the unique zero of `F(·, t)`.

use alloc::vec::Vec;
use core::fmt;

use crate::heatflow::{HeatError, HeatField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriceError {
    /// No sign change of `F(·, t)` within the expansion cap.
    BracketFailure { t: f64, radius: f64 },
    /// Sample times must be strictly increasing and positive.
    UnorderedTimes,
    Heat(HeatError),
}

impl fmt::Display for PriceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriceError::BracketFailure { t, radius } => {
                write!(f, "no sign change of F(., {t}) within radius {radius}")
            }
            PriceError::UnorderedTimes => write!(f, "sample times must be positive and strictly increasing"),
            PriceError::Heat(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for PriceError {}

impl From<HeatError> for PriceError {
    fn from(e: HeatError) -> Self {
        PriceError::Heat(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    HeatTransform,
    FdReference,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::HeatTransform => "heat-transform",
            Method::FdReference => "fd-reference",
        }
    }
}

/// Price and transaction rate at one time. `bracket = (lo, hi)` with
/// `F(lo, t) > 0 > F(hi, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricePoint {
    pub t: f64,
    pub p: f64,
    pub lambda: f64,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceTrajectory {
    pub points: Vec<PricePoint>,
    pub method: Method,
    pub fingerprint: u64,
}

impl PriceTrajectory {
    pub fn new(method: Method, fingerprint: u64) -> Self {
        Self { points: Vec::new(), method, fingerprint }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Root-finding controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Final bracket width.
    pub xtol: f64,
    /// The bracket may grow to `cap_scale · (1 + √t)` around its center.
    pub cap_scale: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { xtol: 1e-8, cap_scale: 50.0 }
    }
}

/// Locates `p(t)` by doubling a bracket around `p0` until the sign change is
/// certified, then bisecting.
pub fn find_price(hf: &HeatField, t: f64, opts: &SearchOptions) -> Result<PricePoint, PriceError> {
    find_price_near(hf, t, hf.transformed().datum().p0(), opts)
}

/// Same as [`find_price`] with the initial bracket centered at `guess`.
pub fn find_price_near(
    hf: &HeatField,
    t: f64,
    guess: f64,
    opts: &SearchOptions,
) -> Result<PricePoint, PriceError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(HeatError::NonpositiveTime(t).into());
    }
    let cap = opts.cap_scale * (1.0 + libm::sqrt(t));
    let mut radius = 1.0;
    let (mut lo, mut hi) = loop {
        let (lo, hi) = (guess - radius, guess + radius);
        if hf.value(lo, t)? > 0.0 && hf.value(hi, t)? < 0.0 {
            break (lo, hi);
        }
        radius *= 2.0;
        if radius > cap {
            return Err(PriceError::BracketFailure { t, radius: cap });
        }
    };

    while hi - lo > opts.xtol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = hf.value(mid, t)?;
        if v > 0.0 {
            lo = mid;
        } else if v < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let lambda = (-hf.slope(p, t)?).max(0.0);
    Ok(PricePoint { t, p, lambda, bracket: (lo, hi) })
}

/// Transaction rate `λ(t) = -F_x(p(t), t)`, clamped at zero.
///
/// Near `p` both shifted terms of the density reconstruction vanish, so the
/// density slope there equals `F_x`.
pub fn lambda_at(hf: &HeatField, point: &PricePoint) -> Result<f64, PriceError> {
    Ok((-hf.slope(point.p, point.t)?).max(0.0))
}

/// Checks the single-crossing property on 16 points per side outside the
/// final bracket, spread over `4√t + 2a`.
pub fn certify_single_crossing(hf: &HeatField, point: &PricePoint) -> Result<bool, PriceError> {
    let a = hf.transformed().datum().cost();
    let span = 4.0 * libm::sqrt(point.t) + 2.0 * a;
    for k in 1..=16 {
        let offset = span * k as f64 / 16.0;
        if !(hf.value(point.bracket.0 - offset, point.t)? > 0.0) {
            return Ok(false);
        }
        if !(hf.value(point.bracket.1 + offset, point.t)? < 0.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_times(times: &[f64]) -> Result<(), PriceError> {
    let ordered = times.windows(2).all(|w| w[0] < w[1]);
    let positive = times.first().is_none_or(|&t| t > 0.0);
    if ordered && positive {
        Ok(())
    } else {
        Err(PriceError::UnorderedTimes)
    }
}

/// Prices at each of `times`, warm-starting every bracket from the previous
/// price.
pub fn trajectory(hf: &HeatField, times: &[f64], opts: &SearchOptions) -> Result<PriceTrajectory, PriceError> {
    check_times(times)?;
    let datum = hf.transformed().datum();
    let mut out = PriceTrajectory::new(Method::HeatTransform, datum.fingerprint());
    let mut guess = datum.p0();
    for &t in times {
        let point = find_price_near(hf, t, guess, opts)?;
        guess = point.p;
        out.points.push(point);
    }
    Ok(out)
}

/// Prices at each of `times`, every search started from `p0`.
pub fn trajectory_cold(
    hf: &HeatField,
    times: &[f64],
    opts: &SearchOptions,
) -> Result<PriceTrajectory, PriceError> {
    check_times(times)?;
    let datum = hf.transformed().datum();
    let points = times
        .iter()
        .map(|&t| find_price(hf, t, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PriceTrajectory { points, method: Method::HeatTransform, fingerprint: datum.fingerprint() })
}
