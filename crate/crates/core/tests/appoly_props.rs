use num_complex::Complex64;
use perron_ap::appoly::*;
use proptest::prelude::*;

fn modes(max: usize) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-4.0..4.0f64, -1.0..1.0f64, -1.0..1.0f64), 0..max)
}

fn poly(m: &[(f64, f64, f64)]) -> TrigPoly {
    TrigPoly::from_modes(m.iter().map(|&(f, re, im)| (f, Complex64::new(re, im))))
}

/// Real-valued polynomial `sum a cos(f t) + b sin(f t)`.
fn real_poly(m: &[(f64, f64, f64)]) -> TrigPoly {
    m.iter().fold(TrigPoly::zero(), |acc, &(f, a, b)| {
        tp_add(&acc, &tp_add(&TrigPoly::cos(f, a), &TrigPoly::sin(f, b)))
    })
}

/// Frequencies on a quarter-integer lattice so sums are exact.
fn rational_modes() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-12i32..12, -1.0..1.0f64, -1.0..1.0f64), 1..6)
        .prop_map(|v| v.into_iter().map(|(k, re, im)| (k as f64 / 4.0, re, im)).collect())
}

fn policy() -> TruncationPolicy {
    TruncationPolicy {
        eps_drop: 0.0,
        k_max: 10_000,
    }
}

proptest! {
    #[test]
    fn lower_bound_is_below_upper(a in modes(8), b in modes(8)) {
        let (a, b) = (poly(&a), poly(&b));
        let lo = tp_supnorm_lower(&tp_add(&a, &b), 20.0, 2001);
        prop_assert!(lo <= tp_supnorm_upper(&a) + tp_supnorm_upper(&b) + 1e-12);
        prop_assert!(tp_supnorm_lower(&a, 20.0, 2001) <= tp_supnorm_upper(&a) + 1e-12);
    }

    #[test]
    fn derivative_of_antiderivative(a in modes(8)) {
        let a = poly(&a);
        let (mean, osc) = tp_antiderivative(&a);
        let back = tp_diff(&osc);
        let want = tp_sub(&a, &TrigPoly::constant(mean));
        prop_assert!(back.coeff_distance(&want) < 1e-14);
    }

    #[test]
    fn product_commutes_and_associates(a in rational_modes(), b in rational_modes(), c in rational_modes()) {
        let (a, b, c) = (poly(&a), poly(&b), poly(&c));
        let p = policy();
        let ab = tp_mul(&a, &b, &p).unwrap().poly;
        let ba = tp_mul(&b, &a, &p).unwrap().poly;
        prop_assert!(ab.coeff_distance(&ba) < 1e-12);
        let left = tp_mul(&ab, &c, &p).unwrap().poly;
        let right = tp_mul(&a, &tp_mul(&b, &c, &p).unwrap().poly, &p).unwrap().poly;
        prop_assert!(left.coeff_distance(&right) < 1e-12);
    }

    #[test]
    fn product_matches_pointwise(a in modes(6), b in modes(6)) {
        let (a, b) = (poly(&a), poly(&b));
        let ab = tp_mul(&a, &b, &policy()).unwrap().poly;
        for k in 0..1000 {
            let t = -30.0 + 0.06 * k as f64;
            prop_assert!((ab.eval(t) - a.eval(t) * b.eval(t)).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference(a in modes(6), t in -50.0..50.0f64) {
        let a = poly(&a);
        let h = 1e-6;
        let fd = (a.eval(t + h) - a.eval(t - h)) / (2.0 * h);
        prop_assert!((tp_diff(&a).eval(t) - fd).norm() < 1e-6);
    }

    #[test]
    fn real_valued_is_preserved(a in modes(5), b in modes(5)) {
        let (a, b) = (real_poly(&a), real_poly(&b));
        prop_assert!(a.is_real_valued() && b.is_real_valued());
        prop_assert!(tp_add(&a, &b).is_real_valued());
        prop_assert!(tp_mul(&a, &b, &policy()).unwrap().poly.is_real_valued());
        prop_assert!(tp_diff(&a).is_real_valued());
        prop_assert!(tp_antiderivative(&a).1.is_real_valued());
        prop_assert!(tp_truncate(&a, 0.3, 3).poly.is_real_valued());
    }
}

#[test]
fn antiderivative_matches_quadrature() {
    let a = tp_add(
        &tp_add(&TrigPoly::real_constant(0.7), &TrigPoly::cos(1.3, 0.4)),
        &TrigPoly::sin(2f64.sqrt(), -1.1),
    );
    let (mean, osc) = tp_antiderivative(&a);
    let formula = mean * 5.0 + osc.eval(5.0) - osc.eval(0.0);
    // composite Simpson on [0, 5]
    let n = 2000;
    let h = 5.0 / n as f64;
    let mut s = a.eval(0.0) + a.eval(5.0);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * a.eval(k as f64 * h);
    }
    let quad = s * h / 3.0;
    assert!((formula - quad).norm() < 1e-10);
}

#[test]
fn lower_bounds_of_simple_cases() {
    assert!(tp_supnorm_lower(&TrigPoly::cos(1.0, 1.0), 10.0, 10_000) >= 0.9999);
    assert_eq!(tp_supnorm_lower(&TrigPoly::real_constant(3.0), 1.0, 5), 3.0);
}

#[test]
fn grid_derivative_is_fourth_order() {
    let err = |h: f64| {
        let len = (20.0 / h).round() as usize + 1;
        let g = GridFunction::from_fn(-10.0, h, len, |t| Complex64::new(t.sin(), 0.0), TailModel::zero())
            .unwrap();
        let d = gf_diff(&g);
        (0..len)
            .map(|k| (d.samples()[k].re - g.time(k).cos()).abs())
            .fold(0.0, f64::max)
    };
    let hs = [0.2, 0.1, 0.05, 0.025];
    let errs: Vec<f64> = hs.iter().map(|&h| err(h)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 3.7, "observed order {order}, errors {errs:?}");
    }
}

#[test]
fn grid_arithmetic_rejects_mismatch() {
    let a = GridFunction::from_fn(0.0, 0.1, 11, |_| Complex64::new(1.0, 0.0), TailModel::zero()).unwrap();
    let b = GridFunction::from_fn(0.0, 0.2, 11, |_| Complex64::new(1.0, 0.0), TailModel::zero()).unwrap();
    assert!(gf_add(&a, &b).is_err());
    let zero = a.zeros_like();
    assert!(gf_mul(&a, &zero).unwrap().samples().iter().all(|v| v.norm() == 0.0));
    assert_eq!(gf_eval(&a, 0.3), a.samples()[3]);
}
