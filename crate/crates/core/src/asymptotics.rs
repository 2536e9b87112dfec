//! Long-time behaviour of the price.
//!
//! With unequal side masses the price drifts like `p(t) ≈ p0 + q √t`, where
//! `q` solves `kernel_tail(q) = M- / (M+ + M-)`. With equal masses the price
//! settles at the mass-weighted center `∫ z |f_I| / (M+ + M-)`.

use core::fmt;

use crate::datum::{Datum, DatumError, MassPair};
use crate::pricepath::PriceTrajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticError {
    /// One side carries no mass, so the price escapes to infinity.
    DegenerateMasses(MassPair),
    /// The zero-mass limit was requested for unequal masses.
    NotZeroMass(MassPair),
    ZeroDatum,
    InsufficientPoints { found: usize },
}

impl fmt::Display for AsymptoticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AsymptoticError::DegenerateMasses(m) => {
                write!(f, "side masses ({}, {}) must both be positive", m.plus, m.minus)
            }
            AsymptoticError::NotZeroMass(m) => {
                write!(f, "side masses ({}, {}) differ; no bounded limit", m.plus, m.minus)
            }
            AsymptoticError::ZeroDatum => write!(f, "datum carries no mass"),
            AsymptoticError::InsufficientPoints { found } => {
                write!(f, "need at least 3 trajectory points in the fit window, found {found}")
            }
        }
    }
}

impl core::error::Error for AsymptoticError {}

/// `(4π)^{-1/2} ∫_u^∞ exp(-x²/4) dx`, the mass of the unit-time heat kernel
/// beyond `u`. Equals `erfc(u/2) / 2`.
pub fn kernel_tail(u: f64) -> f64 {
    0.5 * libm::erfc(0.5 * u)
}

/// Coefficient `q` of the `√t` drift for unequal masses.
///
/// Solves `kernel_tail(q) = M- / (M+ + M-)` by bisection; `M+ > M-` gives
/// `q > 0`; masses balanced within [`crate::MASS_BALANCE_TOLERANCE`] give
/// exactly zero.
pub fn sqrt_drift_coefficient(m: MassPair) -> Result<f64, AsymptoticError> {
    if !(m.plus > 0.0 && m.minus > 0.0) {
        return Err(AsymptoticError::DegenerateMasses(m));
    }
    if m.is_balanced() {
        return Ok(0.0);
    }
    // solve for |q| on the side where the target is at most 1/2
    let (small, sign) = if m.minus <= m.plus { (m.minus, 1.0) } else { (m.plus, -1.0) };
    let target = small / (m.plus + m.minus);
    let (mut lo, mut hi) = (0.0_f64, 80.0_f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if kernel_tail(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(sign * 0.5 * (lo + hi))
}

/// Bounded long-time price for equal side masses (the weighted center).
pub fn zero_mass_limit(d: &Datum) -> Result<f64, AsymptoticError> {
    let m = d.masses();
    if m.total() <= 0.0 {
        return Err(AsymptoticError::ZeroDatum);
    }
    if !m.is_balanced() {
        return Err(AsymptoticError::NotZeroMass(m));
    }
    d.weighted_center().map_err(|e| match e {
        DatumError::ZeroMassPair => AsymptoticError::ZeroDatum,
        _ => unreachable!("weighted_center only fails on zero mass"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticLaw {
    /// `p(t) ≈ p0 + coefficient · √t`.
    SqrtDrift { coefficient: f64 },
    /// `p(t) → price`.
    BoundedLimit { price: f64 },
}

impl AsymptoticLaw {
    /// Selects the branch from the side masses.
    ///
    /// The problem is invariant under `x -> (x - p0)/a`, `t -> t/a²`, so the
    /// law is computed for the normalized datum (`p0 = 0`, `a = 1`) and mapped
    /// back.
    pub fn for_datum(d: &Datum) -> Result<Self, AsymptoticError> {
        let (p0, a) = (d.p0(), d.cost());
        let normalized = Datum::new(
            d.knots().iter().map(|x| (x - p0) / a).collect(),
            d.values().to_vec(),
            0.0,
            1.0,
        )
        .expect("normalization preserves validity");
        let m = normalized.masses();
        if m.is_balanced() {
            let center = zero_mass_limit(&normalized)?;
            Ok(AsymptoticLaw::BoundedLimit { price: p0 + a * center })
        } else {
            // p = p0 + a q √(t/a²) = p0 + q √t
            Ok(AsymptoticLaw::SqrtDrift { coefficient: sqrt_drift_coefficient(m)? })
        }
    }

    /// Leading-order price at time `t` for a datum with initial price `p0`.
    pub fn predicted_price(&self, p0: f64, t: f64) -> f64 {
        match *self {
            AsymptoticLaw::SqrtDrift { coefficient } => p0 + coefficient * libm::sqrt(t),
            AsymptoticLaw::BoundedLimit { price } => price,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtFit {
    pub coefficient: f64,
    /// RMS of `p/√t - coefficient` over the window.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares fit of `p(t) = q √t` over the points with `t` in
/// `[t_lo, t_hi]`.
pub fn fit_sqrt_coefficient(traj: &PriceTrajectory, t_lo: f64, t_hi: f64) -> Result<SqrtFit, AsymptoticError> {
    let window = || traj.points.iter().filter(|pt| pt.t > 0.0 && pt.t >= t_lo && pt.t <= t_hi);
    let count = window().count();
    if count < 3 {
        return Err(AsymptoticError::InsufficientPoints { found: count });
    }
    let (num, den) = window().fold((0.0, 0.0), |(n, d), pt| (n + pt.p * libm::sqrt(pt.t), d + pt.t));
    let q = num / den;
    let sq = window().map(|pt| {
        let r = pt.p / libm::sqrt(pt.t) - q;
        r * r
    });
    let residual = libm::sqrt(sq.sum::<f64>() / count as f64);
    Ok(SqrtFit { coefficient: q, residual, points: count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::Preset;
    use crate::pricepath::{Method, PricePoint};

    #[test]
    fn tail_basics() {
        assert_eq!(kernel_tail(0.0), 0.5);
        for u in [0.3, 1.0, 2.7] {
            assert!((kernel_tail(u) + kernel_tail(-u) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn equal_masses_give_zero_drift() {
        assert_eq!(sqrt_drift_coefficient(MassPair::new(0.5, 0.5)).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_masses() {
        assert!(matches!(
            sqrt_drift_coefficient(MassPair::new(1.0, 0.0)),
            Err(AsymptoticError::DegenerateMasses(_))
        ));
        assert!(matches!(
            sqrt_drift_coefficient(MassPair::new(0.0, 2.0)),
            Err(AsymptoticError::DegenerateMasses(_))
        ));
    }

    #[test]
    fn excess_buyers_push_price_up() {
        let q = sqrt_drift_coefficient(MassPair::new(1.0, 0.5)).unwrap();
        assert!(q > 0.0);
        assert!((kernel_tail(q) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_mass_branch() {
        assert_eq!(zero_mass_limit(&Datum::preset(Preset::Tent)).unwrap(), 0.0);
        assert!(matches!(
            zero_mass_limit(&Datum::preset(Preset::Skew)),
            Err(AsymptoticError::NotZeroMass(_))
        ));
    }

    #[test]
    fn law_selection() {
        let skew = AsymptoticLaw::for_datum(&Datum::preset(Preset::Skew)).unwrap();
        assert!(matches!(skew, AsymptoticLaw::SqrtDrift { coefficient } if coefficient > 0.6));
        let zm = AsymptoticLaw::for_datum(&Datum::preset(Preset::ZeroMassAsym)).unwrap();
        match zm {
            AsymptoticLaw::BoundedLimit { price } => assert!((price - 1.0 / 6.0).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn law_is_scale_covariant() {
        // shift by p0 = 2 and stretch by a = 0.5
        let base = Datum::preset(Preset::ZeroMassAsym);
        let moved = Datum::new(
            base.knots().iter().map(|x| 2.0 + 0.5 * x).collect(),
            base.values().to_vec(),
            2.0,
            0.5,
        )
        .unwrap();
        let AsymptoticLaw::BoundedLimit { price } = AsymptoticLaw::for_datum(&moved).unwrap() else {
            panic!("expected bounded limit");
        };
        assert!((price - (2.0 + 0.5 / 6.0)).abs() < 1e-14);
        assert!((price - moved.weighted_center().unwrap()).abs() < 1e-14);
    }

    #[test]
    fn exact_sqrt_fit() {
        let mut traj = PriceTrajectory::new(Method::HeatTransform, 0);
        for t in [1.0, 2.0, 4.0, 8.0] {
            traj.points.push(PricePoint { t, p: 2.0 * libm::sqrt(t), lambda: 0.0, bracket: (0.0, 0.0) });
        }
        let fit = fit_sqrt_coefficient(&traj, 0.5, 10.0).unwrap();
        assert!((fit.coefficient - 2.0).abs() < 1e-15);
        assert!(fit.residual < 1e-15);
        assert_eq!(
            fit_sqrt_coefficient(&traj, 3.0, 10.0),
            Err(AsymptoticError::InsufficientPoints { found: 2 })
        );
    }
}
