//! Initial buyer/vendor densities.
//!
//! A [`Datum`] is a compactly supported piecewise-linear density `f_I` together
//! with the price `p0` where it changes sign and the transaction cost `a`.
//! Buyers (`f_I > 0`) sit strictly left of `p0`, vendors (`f_I < 0`) strictly
//! right of it.

use alloc::vec::Vec;
use core::fmt;

/// Relative tolerance used to decide whether both sides carry the same mass.
pub const MASS_BALANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum DatumError {
    /// Knots are not strictly increasing, fewer than two, non-finite, or the
    /// value list has a different length.
    BadGrid(&'static str),
    /// Transaction cost is not a positive finite number.
    BadCost(f64),
    /// `p0` lies outside `[knots.first, knots.last]`.
    PriceOutsideSupport { p0: f64 },
    /// A knot value has the wrong sign for its side of `p0`.
    SignViolation { x: f64, value: f64 },
    /// The interpolant does not vanish at `p0`.
    MissingZero { p0: f64, value: f64 },
    /// Both side masses vanish.
    ZeroMassPair,
}

impl fmt::Display for DatumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatumError::BadGrid(why) => write!(f, "bad knot grid: {why}"),
            DatumError::BadCost(a) => write!(f, "transaction cost must be positive and finite, got {a}"),
            DatumError::PriceOutsideSupport { p0 } => {
                write!(f, "initial price {p0} lies outside the knot range")
            }
            DatumError::SignViolation { x, value } => {
                write!(f, "value {value} at knot {x} has the wrong sign for its side of p0")
            }
            DatumError::MissingZero { p0, value } => {
                write!(f, "density does not vanish at p0 = {p0} (value {value})")
            }
            DatumError::ZeroMassPair => write!(f, "datum carries no mass on either side"),
        }
    }
}

impl core::error::Error for DatumError {}

/// Compactly supported piecewise-linear function, zero outside the closed knot
/// range.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PiecewiseLinear {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub(crate) fn new(knots: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(knots.len(), values.len());
        Self { knots, values }
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.knots.len() < 2
    }

    pub(crate) fn support(&self) -> Option<(f64, f64)> {
        if self.is_empty() {
            None
        } else {
            Some((self.knots[0], self.knots[self.knots.len() - 1]))
        }
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        let Some((lo, hi)) = self.support() else {
            return 0.0;
        };
        if !(lo..=hi).contains(&x) {
            return 0.0;
        }
        // first knot strictly greater than x
        let j = self.knots.partition_point(|&k| k <= x);
        if j == self.knots.len() {
            return self.values[j - 1];
        }
        let (x0, x1) = (self.knots[j - 1], self.knots[j]);
        let (v0, v1) = (self.values[j - 1], self.values[j]);
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// `(x0, x1, v0, v1)` for every linear piece.
    pub(crate) fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| (k[0], k[1], v[0], v[1]))
    }

    pub(crate) fn integral(&self) -> f64 {
        self.segments().map(|(x0, x1, v0, v1)| 0.5 * (x1 - x0) * (v0 + v1)).sum()
    }

    /// `∫ z g(z) dz`, exact for linear pieces.
    pub(crate) fn first_moment(&self) -> f64 {
        self.segments()
            .map(|(x0, x1, v0, v1)| (x1 - x0) / 6.0 * (x0 * (2.0 * v0 + v1) + x1 * (v0 + 2.0 * v1)))
            .sum()
    }

    pub(crate) fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Side masses `M+ = ∫_{x<p0} f_I^+` and `M- = ∫_{x>p0} f_I^-`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassPair {
    pub plus: f64,
    pub minus: f64,
}

impl MassPair {
    pub fn new(plus: f64, minus: f64) -> Self {
        Self { plus, minus }
    }

    pub fn total(&self) -> f64 {
        self.plus + self.minus
    }

    /// True when `|M+ - M-| <= MASS_BALANCE_TOLERANCE * (M+ + M-)`.
    pub fn is_balanced(&self) -> bool {
        (self.plus - self.minus).abs() <= MASS_BALANCE_TOLERANCE * self.total()
    }
}

/// Named initial data shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `f_I(x) = -x` on `[-1, 1]`, antisymmetric about `p0 = 0`.
    Tent,
    /// Buyer triangle of mass 1 on `[-2, 0]`, vendor triangle of mass 1/2 on `[0, 1]`.
    Skew,
    /// Unequal triangle shapes with equal side masses 1; weighted center 1/6.
    ZeroMassAsym,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Tent, Preset::Skew, Preset::ZeroMassAsym];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Tent => "tent",
            Preset::Skew => "skew",
            Preset::ZeroMassAsym => "zero-mass-asym",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    fn raw(self) -> (&'static [f64], &'static [f64]) {
        match self {
            Preset::Tent => (&[-1.0, 0.0, 1.0], &[1.0, 0.0, -1.0]),
            Preset::Skew => (&[-2.0, -1.0, 0.0, 0.5, 1.0], &[0.0, 1.0, 0.0, -1.0, 0.0]),
            Preset::ZeroMassAsym => (&[-2.0, -1.5, 0.0, 0.5, 4.0], &[0.0, 1.0, 0.0, -0.5, 0.0]),
        }
    }
}

/// Validated initial density.
#[derive(Debug, Clone, PartialEq)]
pub struct Datum {
    density: PiecewiseLinear,
    buyers: PiecewiseLinear,
    sellers: PiecewiseLinear,
    p0: f64,
    cost: f64,
}

impl Datum {
    /// Validates the sign condition and builds the datum. If `p0` falls inside
    /// a linear piece it is inserted as an explicit knot.
    pub fn new(knots: Vec<f64>, values: Vec<f64>, p0: f64, cost: f64) -> Result<Self, DatumError> {
        if knots.len() != values.len() {
            return Err(DatumError::BadGrid("knots and values differ in length"));
        }
        if knots.len() < 2 {
            return Err(DatumError::BadGrid("need at least two knots"));
        }
        if knots.iter().chain(values.iter()).any(|v| !v.is_finite()) || !p0.is_finite() {
            return Err(DatumError::BadGrid("non-finite entry"));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DatumError::BadGrid("knots must be strictly increasing"));
        }
        if !(cost > 0.0 && cost.is_finite()) {
            return Err(DatumError::BadCost(cost));
        }
        let last = knots.len() - 1;
        if p0 < knots[0] || p0 > knots[last] {
            return Err(DatumError::PriceOutsideSupport { p0 });
        }

        for (i, (&x, &v)) in knots.iter().zip(values.iter()).enumerate() {
            let endpoint = i == 0 || i == last;
            if x == p0 {
                if v != 0.0 {
                    return Err(DatumError::MissingZero { p0, value: v });
                }
            } else if x < p0 {
                if v < 0.0 || (v == 0.0 && !endpoint) {
                    return Err(DatumError::SignViolation { x, value: v });
                }
            } else if v > 0.0 || (v == 0.0 && !endpoint) {
                return Err(DatumError::SignViolation { x, value: v });
            }
        }

        let (mut knots, mut values) = (knots, values);
        let j = knots.partition_point(|&k| k < p0);
        if knots[j] != p0 {
            // p0 sits strictly inside the piece [knots[j-1], knots[j]]
            let (x0, x1, v0, v1) = (knots[j - 1], knots[j], values[j - 1], values[j]);
            let at_p0 = v0 + (v1 - v0) * (p0 - x0) / (x1 - x0);
            if at_p0.abs() > 8.0 * f64::EPSILON * v0.abs().max(v1.abs()) {
                return Err(DatumError::MissingZero { p0, value: at_p0 });
            }
            knots.insert(j, p0);
            values.insert(j, 0.0);
        }

        let split = knots.partition_point(|&k| k < p0);
        let buyers = PiecewiseLinear::new(knots[..=split].to_vec(), values[..=split].to_vec());
        let sellers = PiecewiseLinear::new(
            knots[split..].to_vec(),
            values[split..].iter().map(|v| -v).collect(),
        );
        Ok(Self { density: PiecewiseLinear::new(knots, values), buyers, sellers, p0, cost })
    }

    pub fn preset(preset: Preset) -> Self {
        let (k, v) = preset.raw();
        Self::new(k.to_vec(), v.to_vec(), 0.0, 1.0).expect("presets are valid")
    }

    /// Same shape with a different transaction cost.
    pub fn with_cost(&self, cost: f64) -> Result<Self, DatumError> {
        Self::new(self.knots().to_vec(), self.values().to_vec(), self.p0, cost)
    }

    /// Density multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self, DatumError> {
        let values = self.values().iter().map(|v| v * factor).collect();
        Self::new(self.knots().to_vec(), values, self.p0, self.cost)
    }

    /// Mirror image `x -> 2 p0 - x`, `f -> -f`; swaps buyers and vendors.
    pub fn reflected(&self) -> Self {
        let knots = self.knots().iter().rev().map(|x| 2.0 * self.p0 - x).collect();
        let values = self.values().iter().rev().map(|v| -v).collect();
        Self::new(knots, values, self.p0, self.cost).expect("reflection preserves validity")
    }

    pub fn value(&self, x: f64) -> f64 {
        self.density.eval(x)
    }

    pub fn knots(&self) -> &[f64] {
        &self.density.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.density.values
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Closed knot range `[x_min, x_max]`.
    pub fn support(&self) -> (f64, f64) {
        self.density.support().expect("at least two knots")
    }

    pub fn sup_abs(&self) -> f64 {
        self.density.sup_abs()
    }

    pub fn masses(&self) -> MassPair {
        MassPair::new(self.buyers.integral(), self.sellers.integral())
    }

    /// `∫ z |f_I(z)| dz / (M+ + M-)`.
    pub fn weighted_center(&self) -> Result<f64, DatumError> {
        let total = self.masses().total();
        if total <= 0.0 {
            return Err(DatumError::ZeroMassPair);
        }
        Ok((self.buyers.first_moment() + self.sellers.first_moment()) / total)
    }

    /// FNV-1a hash over the bit patterns of knots, values, `p0` and `a`.
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0100_0000_01b3;
        let words = self.knots().iter().chain(self.values()).copied().chain([self.p0, self.cost]);
        let mut hash = OFFSET;
        for w in words {
            for byte in w.to_bits().to_le_bytes() {
                hash ^= u64::from(byte);
                hash = hash.wrapping_mul(PRIME);
            }
        }
        hash
    }

    /// Positive part `f_I^+`, supported on `[x_min, p0]`.
    pub(crate) fn buyers(&self) -> &PiecewiseLinear {
        &self.buyers
    }

    /// Negative part `f_I^-` (as nonnegative values), supported on `[p0, x_max]`.
    pub(crate) fn sellers(&self) -> &PiecewiseLinear {
        &self.sellers
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn tent_is_valid() {
        let d = Datum::new(vec![-1.0, 0.0, 1.0], vec![1.0, 0.0, -1.0], 0.0, 1.0).unwrap();
        assert_eq!(d.value(-0.5), 0.5);
        assert_eq!(d.value(0.0), 0.0);
        assert_eq!(d.value(1.5), 0.0);
    }

    #[test]
    fn flipped_tent_rejected() {
        let err = Datum::new(vec![-1.0, 0.0, 1.0], vec![-1.0, 0.0, 1.0], 0.0, 1.0).unwrap_err();
        assert!(matches!(err, DatumError::SignViolation { .. }));
    }

    #[test]
    fn skew_masses() {
        let d = Datum::new(
            vec![-2.0, -1.0, 0.0, 0.5, 1.0],
            vec![0.0, 1.0, 0.0, -1.0, 0.0],
            0.0,
            1.0,
        )
        .unwrap();
        let m = d.masses();
        assert!(close(m.plus, 1.0, 1e-15) && close(m.minus, 0.5, 1e-15));
        assert_eq!(d, Datum::preset(Preset::Skew));
    }

    #[test]
    fn tent_masses_and_scaling() {
        let d = Datum::preset(Preset::Tent);
        assert_eq!(d.masses(), MassPair::new(0.5, 0.5));
        let m3 = d.scaled(3.0).unwrap().masses();
        assert!(close(m3.plus, 1.5, 1e-15) && close(m3.minus, 1.5, 1e-15));
    }

    #[test]
    fn bad_grids() {
        assert!(matches!(
            Datum::new(vec![0.0, 0.0], vec![0.0, 0.0], 0.0, 1.0),
            Err(DatumError::BadGrid(_))
        ));
        assert!(matches!(
            Datum::new(vec![-1.0, 1.0], vec![1.0], 0.0, 1.0),
            Err(DatumError::BadGrid(_))
        ));
        assert!(matches!(
            Datum::new(vec![-1.0], vec![1.0], 0.0, 1.0),
            Err(DatumError::BadGrid(_))
        ));
        assert!(matches!(
            Datum::new(vec![-1.0, 1.0], vec![1.0, -1.0], 0.0, 0.0),
            Err(DatumError::BadCost(_))
        ));
        assert!(matches!(
            Datum::new(vec![-1.0, 1.0], vec![1.0, -1.0], 3.0, 1.0),
            Err(DatumError::PriceOutsideSupport { .. })
        ));
    }

    #[test]
    fn zero_crossing_between_knots() {
        // crossing at 0 lies inside [-1, 1]
        let d = Datum::new(vec![-2.0, -1.0, 1.0, 2.0], vec![0.0, 1.0, -1.0, 0.0], 0.0, 1.0).unwrap();
        assert_eq!(d.knots(), &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(d.value(0.0), 0.0);
        // crossing at 0 but p0 claims 0.25
        let err = Datum::new(vec![-2.0, -1.0, 1.0, 2.0], vec![0.0, 1.0, -1.0, 0.0], 0.25, 1.0).unwrap_err();
        assert!(matches!(err, DatumError::MissingZero { .. }));
    }

    #[test]
    fn nonzero_at_p0_knot() {
        let err = Datum::new(vec![-1.0, 0.0, 1.0], vec![1.0, 0.5, -1.0], 0.0, 1.0).unwrap_err();
        assert!(matches!(err, DatumError::MissingZero { .. }));
    }

    #[test]
    fn interior_zero_rejected() {
        let err = Datum::new(vec![-2.0, -1.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, -1.0], 0.0, 1.0).unwrap_err();
        assert!(matches!(err, DatumError::SignViolation { .. }));
    }

    #[test]
    fn centers() {
        assert_eq!(Datum::preset(Preset::Tent).weighted_center().unwrap(), 0.0);
        let c = Datum::preset(Preset::ZeroMassAsym).weighted_center().unwrap();
        assert!(close(c, 1.0 / 6.0, 1e-15));
        assert!(Datum::preset(Preset::ZeroMassAsym).masses().is_balanced());
        assert!(!Datum::preset(Preset::Skew).masses().is_balanced());
    }

    #[test]
    fn narrow_triangles_center_between_them() {
        let (b1, b2, w) = (3.0, 1.0, 1e-3);
        let d = Datum::new(
            vec![-b1 - w, -b1, -b1 + w, 0.0, b2 - w, b2, b2 + w],
            vec![0.0, 1.0 / w, 1e-12, 0.0, -1e-12, -1.0 / w, 0.0],
            0.0,
            1.0,
        )
        .unwrap();
        let c = d.weighted_center().unwrap();
        assert!(close(c, (b2 - b1) / 2.0, 1e-6), "{c}");
    }

    #[test]
    fn reflection_swaps_masses() {
        let d = Datum::preset(Preset::Skew);
        let r = d.reflected();
        assert_eq!(r.masses(), MassPair::new(0.5, 1.0));
        assert_eq!(r.value(-0.75), -d.value(0.75));
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()), Some(p));
        }
        assert_eq!(Preset::from_name("custom"), None);
    }
}
