//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls into the library's evaluation code: the density is
//! re-interpolated from the raw knots, the shifted sums are brute-forced,
//! and integrals go through adaptive Simpson quadrature with `std` math.

#![allow(dead_code)]

use priceflow_core::Datum;
use std::f64::consts::PI;

/// Linear interpolation of the raw knot table, zero outside.
pub fn density(d: &Datum, x: f64) -> f64 {
    let (k, v) = (d.knots(), d.values());
    if x < k[0] || x > k[k.len() - 1] {
        return 0.0;
    }
    for i in 0..k.len() - 1 {
        if x <= k[i + 1] {
            let w = (x - k[i]) / (k[i + 1] - k[i]);
            return v[i] + w * (v[i + 1] - v[i]);
        }
    }
    0.0
}

/// The shifted sum, with terms added until the shift leaves the support.
pub fn shifted_sum(d: &Datum, x: f64) -> f64 {
    let (lo, hi) = (d.knots()[0], *d.knots().last().unwrap());
    let a = d.cost();
    let mut total = 0.0;
    let mut n = 0.0;
    while x + n * a <= hi {
        total += density(d, x + n * a).max(0.0);
        n += 1.0;
    }
    n = 0.0;
    while x - n * a >= lo {
        total += density(d, x - n * a).min(0.0);
        n += 1.0;
    }
    total
}

/// Sorted points where the shifted sum can have a kink inside `[lo, hi]`.
pub fn kinks(d: &Datum, lo: f64, hi: f64) -> Vec<f64> {
    let a = d.cost();
    let mut out = vec![lo, hi];
    for &k in d.knots() {
        let mut n = ((lo - k) / a).floor();
        while k + n * a <= hi {
            let x = k + n * a;
            if x > lo && x < hi {
                out.push(x);
            }
            n += 1.0;
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    out
}

pub fn gaussian(t: f64, x: f64) -> f64 {
    (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Half-width beyond which the kernel mass times `bound` is below `1e-15`.
fn window(t: f64, bound: f64) -> f64 {
    2.0 * (t * (bound.max(1.0) * 1e15).ln()).sqrt() + 1.0
}

fn sum_bound(d: &Datum) -> f64 {
    let (lo, hi) = (d.knots()[0], *d.knots().last().unwrap());
    let copies = ((hi - lo) / d.cost()).ceil() + 1.0;
    copies * d.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `∫ G(t, x - z) F_I(z) dz`, piecewise between kinks.
pub fn heat_value(d: &Datum, x: f64, t: f64) -> f64 {
    let r = window(t, sum_bound(d));
    let nodes = kinks(d, x - r, x + r);
    let f = |z: f64| gaussian(t, x - z) * shifted_sum(d, z);
    nodes.windows(2).map(|w| simpson(&f, w[0], w[1], 1e-14)).sum()
}

/// `∂_x ∫ G(t, x - z) F_I(z) dz`, differentiating under the integral.
pub fn heat_slope(d: &Datum, x: f64, t: f64) -> f64 {
    let r = window(t, sum_bound(d)) + 2.0 * t.sqrt();
    let nodes = kinks(d, x - r, x + r);
    let f = |z: f64| -(x - z) / (2.0 * t) * gaussian(t, x - z) * shifted_sum(d, z);
    nodes.windows(2).map(|w| simpson(&f, w[0], w[1], 1e-14)).sum()
}

/// `(4π)^{-1/2} ∫_u^∞ exp(-x²/4) dx` by quadrature on a finite range.
pub fn tail_quadrature(u: f64) -> f64 {
    let g = |x: f64| (-x * x / 4.0).exp() / (4.0 * PI).sqrt();
    if u >= 0.0 {
        simpson(&g, u, u.max(0.0) + 20.0, 1e-16)
    } else {
        1.0 - simpson(&g, -u, -u + 20.0, 1e-16)
    }
}

/// Root of `tail_quadrature(q) = target` by bisection.
pub fn tail_root(target: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if tail_quadrature(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn log_spaced(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round() as usize;
    (0..=n).map(|i| lo * 10f64.powf(decades * i as f64 / n as f64)).collect()
}
