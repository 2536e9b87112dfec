//! Shifted-sum transform between the free boundary problem and the heat
//! equation.
//!
//! The transformed datum is
//!
//! ```text
//! F_I(x) =  Σ_{n≥0} f_I^+(x + n a)   for x < p0
//! F_I(x) = -Σ_{n≥0} f_I^-(x - n a)   for x > p0
//! ```
//!
//! Because `f_I` has compact support, only finitely many translates are
//! nonzero at any point and the series is evaluated exactly. Far from the
//! support `F_I` is exactly `a`-periodic.

use alloc::vec::Vec;

use crate::datum::Datum;

/// One linear piece of a single translate of `f_I^±`, already carrying the
/// sign it has inside `F_I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Piece {
    pub z0: f64,
    pub z1: f64,
    pub v0: f64,
    pub v1: f64,
}

/// Lazy evaluator of the transformed initial datum `F_I`.
#[derive(Debug, Clone)]
pub struct TransformedField {
    datum: Datum,
    sup_bound: f64,
}

impl TransformedField {
    pub fn new(datum: Datum) -> Self {
        let (x_min, x_max) = datum.support();
        let overlaps = libm::ceil((x_max - x_min) / datum.cost()) + 1.0;
        let sup_bound = overlaps * datum.sup_abs();
        Self { datum, sup_bound }
    }

    pub fn datum(&self) -> &Datum {
        &self.datum
    }

    /// Support `[x_min, x_max]` of the underlying `f_I`.
    pub fn support(&self) -> (f64, f64) {
        self.datum.support()
    }

    /// Upper bound `(⌈(x_max - x_min)/a⌉ + 1) · sup|f_I|` on `sup|F_I|`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn value(&self, x: f64) -> f64 {
        let d = &self.datum;
        let (a, p0) = (d.cost(), d.p0());
        let (x_min, x_max) = d.support();
        let mut sum = 0.0;
        if x < p0 {
            let first = libm::ceil((x_min - x) / a).max(0.0) as u64;
            let last = libm::floor((p0 - x) / a) as u64;
            for n in first..=last {
                sum += d.buyers().eval(x + n as f64 * a);
            }
        } else if x > p0 {
            let first = libm::ceil((x - x_max) / a).max(0.0) as u64;
            let last = libm::floor((x - p0) / a) as u64;
            for n in first..=last {
                sum -= d.sellers().eval(x - n as f64 * a);
            }
        }
        sum
    }

    /// Far-field period averages `(M+/a, M-/a)` of the left and right tails.
    pub fn mean_levels(&self) -> (f64, f64) {
        let m = self.datum.masses();
        let a = self.datum.cost();
        (m.plus / a, m.minus / a)
    }

    /// Sorted, deduplicated breakpoints of `F_I` inside `[lo, hi]`.
    pub fn breakpoints_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit_pieces(lo, hi, |piece| {
            for z in [piece.z0, piece.z1] {
                if z > lo && z < hi {
                    out.push(z);
                }
            }
        });
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Calls `visit` for every linear piece of every translate that meets
    /// `[lo, hi]`, clipped to that window. Summing the pieces reproduces
    /// `F_I` on the window.
    pub(crate) fn visit_pieces(&self, lo: f64, hi: f64, mut visit: impl FnMut(Piece)) {
        let d = &self.datum;
        let (a, p0) = (d.cost(), d.p0());
        let (x_min, x_max) = d.support();

        let mut emit = |x0: f64, x1: f64, v0: f64, v1: f64, sign: f64| {
            let z0 = x0.max(lo);
            let z1 = x1.min(hi);
            if z1 <= z0 {
                return;
            }
            let slope = (v1 - v0) / (x1 - x0);
            let g0 = if z0 == x0 { v0 } else { v0 + slope * (z0 - x0) };
            let g1 = if z1 == x1 { v1 } else { v0 + slope * (z1 - x0) };
            visit(Piece { z0, z1, v0: sign * g0, v1: sign * g1 });
        };

        // translate n of f^+ lives on [x_min - n a, p0 - n a]
        if !d.buyers().is_empty() {
            let first = libm::ceil((x_min - hi) / a).max(0.0);
            let last = libm::floor((p0 - lo) / a);
            let mut n = first;
            while n <= last {
                let shift = n * a;
                for (x0, x1, v0, v1) in d.buyers().segments() {
                    emit(x0 - shift, x1 - shift, v0, v1, 1.0);
                }
                n += 1.0;
            }
        }
        // translate n of f^- lives on [p0 + n a, x_max + n a]
        if !d.sellers().is_empty() {
            let first = libm::ceil((lo - x_max) / a).max(0.0);
            let last = libm::floor((hi - p0) / a);
            let mut n = first;
            while n <= last {
                let shift = n * a;
                for (x0, x1, v0, v1) in d.sellers().segments() {
                    emit(x0 + shift, x1 + shift, v0, v1, -1.0);
                }
                n += 1.0;
            }
        }
    }
}

/// Recovers the density from a transformed field at a fixed time:
///
/// ```text
/// f(x) =  F^+(x) - F^+(x + a)   for x < p
/// f(x) = -F^-(x) + F^-(x - a)   for x > p
/// ```
///
/// `p` must be the zero of `field`.
pub fn reconstruct_density(field: impl Fn(f64) -> f64, p: f64, a: f64, x: f64) -> f64 {
    let pos = |v: f64| v.max(0.0);
    let neg = |v: f64| (-v).max(0.0);
    if x < p {
        pos(field(x)) - pos(field(x + a))
    } else if x > p {
        -neg(field(x)) + neg(field(x - a))
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::Preset;

    #[test]
    fn tent_values() {
        let tf = TransformedField::new(Datum::preset(Preset::Tent));
        assert_eq!(tf.value(-0.5), 0.5);
        assert_eq!(tf.value(-1.5), 0.5);
        assert_eq!(tf.value(0.5), -0.5);
        assert_eq!(tf.value(0.0), 0.0);
    }

    #[test]
    fn tent_reconstruction_at_zero_time() {
        let tf = TransformedField::new(Datum::preset(Preset::Tent));
        let f = |x| tf.value(x);
        assert_eq!(reconstruct_density(f, 0.0, 1.0, -0.5), 0.5);
        assert_eq!(reconstruct_density(f, 0.0, 1.0, -1.5), 0.0);
        assert_eq!(reconstruct_density(f, 0.0, 1.0, 0.0), 0.0);
    }

    #[test]
    fn mean_levels_match_masses() {
        let tent = TransformedField::new(Datum::preset(Preset::Tent));
        assert_eq!(tent.mean_levels(), (0.5, 0.5));
        let skew = TransformedField::new(Datum::preset(Preset::Skew));
        assert_eq!(skew.mean_levels(), (1.0, 0.5));
        let half = TransformedField::new(Datum::preset(Preset::Tent).with_cost(0.5).unwrap());
        assert_eq!(half.mean_levels(), (1.0, 1.0));
    }

    #[test]
    fn pieces_sum_to_value() {
        for preset in Preset::ALL {
            let tf = TransformedField::new(Datum::preset(preset));
            for i in 0..200 {
                let x = -9.0 + 18.0 * (i as f64 + 0.37) / 200.0;
                let mut sum = 0.0;
                tf.visit_pieces(x - 0.01, x + 0.01, |p| {
                    if p.z0 <= x && x <= p.z1 {
                        sum += p.v0 + (p.v1 - p.v0) * (x - p.z0) / (p.z1 - p.z0);
                    }
                });
                assert!((sum - tf.value(x)).abs() < 1e-13, "{preset:?} x={x}");
            }
        }
    }

    #[test]
    fn breakpoints_are_shifted_knots() {
        let tf = TransformedField::new(Datum::preset(Preset::Skew));
        let bps = tf.breakpoints_in(-4.0, 3.0);
        // buyer knots -2,-1,0 shifted left by n, vendor knots 0,0.5,1 shifted right
        let expected = [-3.0, -2.0, -1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5];
        assert_eq!(bps, expected);
    }
}
