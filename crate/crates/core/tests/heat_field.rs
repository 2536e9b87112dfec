mod common;

use common::{gaussian, heat_slope, heat_value, simpson};
use priceflow_core::{heat_kernel, segment_integrals, Datum, HeatError, HeatField, Preset, TransformedField};

fn field(preset: Preset) -> HeatField {
    HeatField::new(TransformedField::new(Datum::preset(preset)), HeatField::DEFAULT_TAIL_TOLERANCE).unwrap()
}

fn lattice() -> Vec<(f64, f64)> {
    let xs = (0..10).map(|i| -3.0 + 6.0 * i as f64 / 9.0 + 0.0137);
    let ts = [0.01, 0.03, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0, 7.0, 10.0];
    xs.flat_map(|x| ts.iter().map(move |&t| (x, t))).collect()
}

#[test]
fn kernel_mass_and_symmetry() {
    assert!((heat_kernel(1.0, 0.0).unwrap() - 0.282_094_791_773_878_1).abs() < 1e-15);
    assert_eq!(heat_kernel(0.7, 1.3).unwrap(), heat_kernel(0.7, -1.3).unwrap());
    let mass = simpson(&|x| heat_kernel(1.0, x).unwrap(), -40.0, 40.0, 1e-13);
    assert!((mass - 1.0).abs() < 1e-10);
    assert_eq!(heat_kernel(0.0, 1.0), Err(HeatError::NonpositiveTime(0.0)));
}

#[test]
fn segment_integrals_against_quadrature() {
    let inf = f64::INFINITY;
    let (i0, i1) = segment_integrals(1.0, 0.0, -inf, inf).unwrap();
    assert!((i0 - 1.0).abs() < 1e-15 && i1.abs() < 1e-15);
    assert!((segment_integrals(1.0, 0.0, 0.0, inf).unwrap().0 - 0.5).abs() < 1e-15);
    for (t, x, z0, z1) in [(0.3, 0.2, -1.0, 0.5), (2.0, -1.0, 0.5, 3.0), (0.01, 0.0, -0.05, 0.02)] {
        let (i0, i1) = segment_integrals(t, x, z0, z1).unwrap();
        let q0 = simpson(&|z| gaussian(t, x - z), z0, z1, 1e-15);
        let q1 = simpson(&|z| z * gaussian(t, x - z), z0, z1, 1e-15);
        assert!((i0 - q0).abs() < 1e-13, "{i0} vs {q0}");
        assert!((i1 - q1).abs() < 1e-13, "{i1} vs {q1}");
    }
}

#[test]
fn value_matches_quadrature_on_lattice() {
    for preset in [Preset::Skew, Preset::ZeroMassAsym] {
        let hf = field(preset);
        let d = Datum::preset(preset);
        for (x, t) in lattice() {
            let got = hf.value(x, t).unwrap();
            let want = heat_value(&d, x, t);
            assert!((got - want).abs() <= 1e-8, "{} x={x} t={t}: {got} vs {want}", preset.name());
        }
    }
}

#[test]
fn skew_value_at_half_one() {
    let hf = field(Preset::Skew);
    let want = heat_value(&Datum::preset(Preset::Skew), 0.5, 1.0);
    assert!((hf.value(0.5, 1.0).unwrap() - want).abs() <= 1e-8);
}

#[test]
fn slope_matches_quadrature_on_lattice() {
    let hf = field(Preset::Skew);
    let d = Datum::preset(Preset::Skew);
    for (x, t) in lattice() {
        let got = hf.slope(x, t).unwrap();
        let want = heat_slope(&d, x, t);
        assert!((got - want).abs() <= 1e-7, "x={x} t={t}: {got} vs {want}");
    }
}

#[test]
fn slope_matches_central_difference() {
    let step = 1e-5;
    for preset in Preset::ALL {
        let hf = field(preset);
        for (x, t) in lattice() {
            let fd = (hf.value(x + step, t).unwrap() - hf.value(x - step, t).unwrap()) / (2.0 * step);
            let slope = hf.slope(x, t).unwrap();
            assert!((fd - slope).abs() < 1e-6, "{} x={x} t={t}: {fd} vs {slope}", preset.name());
        }
    }
}

#[test]
fn odd_datum_stays_odd() {
    let hf = field(Preset::Tent);
    for t in [1e-4, 0.1, 1.0, 30.0, 1e3] {
        assert!(hf.value(0.0, t).unwrap().abs() <= hf.tail_tolerance());
        for x in [0.3, 1.7, 5.2] {
            let (l, r) = (hf.value(-x, t).unwrap(), hf.value(x, t).unwrap());
            assert!((l + r).abs() <= 2.0 * hf.tail_tolerance());
        }
    }
}

#[test]
fn short_time_recovers_datum() {
    let hf = field(Preset::Tent);
    assert!((hf.value(-0.5, 1e-9).unwrap() - 0.5).abs() < 1e-6);
    assert!((hf.slope(0.0, 1e-10).unwrap() + 1.0).abs() < 1e-6);
    assert_eq!(hf.value(-0.5, 0.0).unwrap(), 0.5);
}

#[test]
fn bounded_by_initial_sup() {
    for preset in Preset::ALL {
        let hf = field(preset);
        let tf = TransformedField::new(Datum::preset(preset));
        let sup = (0..4001).map(|i| tf.value(-20.0 + 0.01 * i as f64).abs()).fold(0.0, f64::max);
        for t in [0.01, 0.5, 5.0] {
            for i in 0..201 {
                let x = -10.0 + 0.1 * i as f64;
                assert!(hf.value(x, t).unwrap().abs() <= sup + hf.tail_tolerance());
            }
        }
    }
}

#[test]
fn skew_slope_negative_at_price() {
    let hf = field(Preset::Skew);
    let pt = priceflow_core::find_price(&hf, 1.0, &Default::default()).unwrap();
    assert!(hf.slope(pt.p, 1.0).unwrap() < 0.0);
}

/// Evolve to `t1`, resample on a fine grid, evolve the piecewise-linear
/// resample by `t2` with quadrature, and compare against `t1 + t2`.
#[test]
fn semigroup_through_resampling() {
    let hf = field(Preset::Skew);
    let (t1, t2) = (0.5, 0.3);
    let step = 0.01;
    let resampled = |z: f64| {
        let j = (z / step).floor();
        let (z0, z1) = (j * step, (j + 1.0) * step);
        let (v0, v1) = (hf.value(z0, t1).unwrap(), hf.value(z1, t1).unwrap());
        v0 + (z - z0) / step * (v1 - v0)
    };
    for x in [-2.0, -0.4, 0.0, 0.7, 2.5] {
        let nodes: Vec<f64> = (-800..=800).map(|k| x + k as f64 * step).collect();
        let evolved: f64 = nodes
            .windows(2)
            .map(|w| simpson(&|z| gaussian(t2, x - z) * resampled(z), w[0], w[1], 1e-12))
            .sum();
        let direct = hf.value(x, t1 + t2).unwrap();
        assert!((evolved - direct).abs() < 1e-4, "x={x}: {evolved} vs {direct}");
    }
}
