//! Heat evolution of the transformed datum.
//!
//! `F(x, t) = ∫ G(t, x - z) F_I(z) dz` is evaluated piece by piece: every
//! linear piece of every translate inside the window `[x - R, x + R]` is
//! convolved with the Gaussian in closed form (complementary error function
//! plus a Gaussian difference). Pieces outside the window are dropped; the
//! radius `R` is chosen so the dropped mass times `sup|F_I|` stays below the
//! tail tolerance.

use core::f64::consts::PI;
use core::fmt;

use crate::transform::TransformedField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeatError {
    NonpositiveTime(f64),
    BadTolerance(f64),
}

impl fmt::Display for HeatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeatError::NonpositiveTime(t) => write!(f, "time must be positive, got {t}"),
            HeatError::BadTolerance(tol) => write!(f, "tail tolerance must be positive, got {tol}"),
        }
    }
}

impl core::error::Error for HeatError {}

fn check_time(t: f64) -> Result<(), HeatError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(HeatError::NonpositiveTime(t))
    }
}

#[inline]
fn kernel(t: f64, x: f64) -> f64 {
    libm::exp(-x * x / (4.0 * t)) / libm::sqrt(4.0 * PI * t)
}

/// `∫_{u0}^{u1} G(t, u) du`, arranged so the erfc arguments are nonnegative
/// wherever cancellation would otherwise occur.
fn kernel_mass(t: f64, u0: f64, u1: f64) -> f64 {
    let s = libm::sqrt(4.0 * t);
    if u0 >= 0.0 {
        0.5 * (libm::erfc(u0 / s) - libm::erfc(u1 / s))
    } else if u1 <= 0.0 {
        0.5 * (libm::erfc(-u1 / s) - libm::erfc(-u0 / s))
    } else {
        1.0 - 0.5 * (libm::erfc(u1 / s) + libm::erfc(-u0 / s))
    }
}

/// One-dimensional heat kernel `(4πt)^{-1/2} exp(-x²/(4t))`.
pub fn heat_kernel(t: f64, x: f64) -> Result<f64, HeatError> {
    check_time(t)?;
    Ok(kernel(t, x))
}

/// `(∫_{z0}^{z1} G(t, x-z) dz, ∫_{z0}^{z1} z G(t, x-z) dz)`. Infinite bounds
/// are allowed.
pub fn segment_integrals(t: f64, x: f64, z0: f64, z1: f64) -> Result<(f64, f64), HeatError> {
    check_time(t)?;
    let (u0, u1) = (z0 - x, z1 - x);
    let i0 = kernel_mass(t, u0, u1);
    // ∫ u G(t,u) du = -2t [G]
    let centered = 2.0 * t * (kernel(t, u0) - kernel(t, u1));
    Ok((i0, x * i0 + centered))
}

/// Evaluator of `F(x, t)` and `F_x(x, t)`.
#[derive(Debug, Clone)]
pub struct HeatField {
    field: TransformedField,
    tail_tolerance: f64,
}

impl HeatField {
    pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

    pub fn new(field: TransformedField, tail_tolerance: f64) -> Result<Self, HeatError> {
        if !(tail_tolerance > 0.0 && tail_tolerance.is_finite()) {
            return Err(HeatError::BadTolerance(tail_tolerance));
        }
        Ok(Self { field, tail_tolerance })
    }

    pub fn transformed(&self) -> &TransformedField {
        &self.field
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    /// `√(4t · ln(sup|F_I| / tol)) + a`. Beyond this radius the kernel mass
    /// is at most `tol / sup|F_I|`.
    pub fn truncation_radius(&self, t: f64) -> f64 {
        let ratio = self.field.sup_bound() / self.tail_tolerance;
        self.radius_for(t, ratio)
    }

    /// Radius for the derivative: the dropped part is bounded by
    /// `2 sup|F_I| G(t, R)`.
    fn slope_radius(&self, t: f64) -> f64 {
        let ratio = 2.0 * self.field.sup_bound() / (self.tail_tolerance * libm::sqrt(4.0 * PI * t));
        self.radius_for(t, ratio).max(self.truncation_radius(t))
    }

    fn radius_for(&self, t: f64, ratio: f64) -> f64 {
        let core = if ratio > 1.0 { libm::sqrt(4.0 * t * libm::log(ratio)) } else { 0.0 };
        core + self.field.datum().cost()
    }

    /// `F(x, t)`; at `t = 0` this is `F_I(x)`.
    pub fn value(&self, x: f64, t: f64) -> Result<f64, HeatError> {
        if t == 0.0 {
            return Ok(self.field.value(x));
        }
        check_time(t)?;
        let r = self.truncation_radius(t);
        let mut sum = 0.0;
        self.field.visit_pieces(x - r, x + r, |p| {
            let (u0, u1) = (p.z0 - x, p.z1 - x);
            let slope = (p.v1 - p.v0) / (p.z1 - p.z0);
            let mass = kernel_mass(t, u0, u1);
            let first = 2.0 * t * (kernel(t, u0) - kernel(t, u1));
            // g(z) = v0 + slope (u - u0) in the shifted variable u = z - x
            sum += (p.v0 - slope * u0) * mass + slope * first;
        });
        Ok(sum)
    }

    /// `F_x(x, t)` in closed form; requires `t > 0`.
    pub fn slope(&self, x: f64, t: f64) -> Result<f64, HeatError> {
        check_time(t)?;
        let r = self.slope_radius(t);
        let mut sum = 0.0;
        self.field.visit_pieces(x - r, x + r, |p| {
            let (u0, u1) = (p.z0 - x, p.z1 - x);
            let slope = (p.v1 - p.v0) / (p.z1 - p.z0);
            sum += kernel(t, u0) * p.v0 - kernel(t, u1) * p.v1 + slope * kernel_mass(t, u0, u1);
        });
        Ok(sum)
    }
}
