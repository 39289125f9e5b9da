use num_complex::Complex64;
use perron_ap::algebra::{Scalar, TrigAlgebra};
use perron_ap::appoly::{tp_diff, TrigPoly, TruncationPolicy};
use perron_ap::bell::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tuple(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
        .collect()
}

#[test]
fn binomial_type_relation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let x = random_tuple(&mut rng, 6, 1.0);
        let y = random_tuple(&mut rng, 6, 1.0);
        let xy: Vec<Complex64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let (bx, _) = bell_sequence(&Scalar, &x, 6).unwrap();
        let (by, _) = bell_sequence(&Scalar, &y, 6).unwrap();
        let (bxy, _) = bell_sequence(&Scalar, &xy, 6).unwrap();
        for i in 0..=6 {
            let conv: Complex64 = (0..=i)
                .map(|j| binomial(i, j) as f64 * bx[i - j] * by[j])
                .sum();
            assert!((conv - bxy[i]).norm() < 1e-10 * (1.0 + bxy[i].norm()));
        }
    }
}

#[test]
fn b2_over_trig_polynomials() {
    let z = TrigPoly::cos(1.0, 1.0);
    let alg = TrigAlgebra::new(TruncationPolicy::default());
    let b2 = bell_eval(&alg, bell_table(), 2, &[z.clone(), tp_diff(&z)]).unwrap();
    for k in 0..50 {
        let t = -5.0 + 0.2 * k as f64;
        let want = t.cos().powi(2) - t.sin();
        assert!((b2.eval(t) - want).norm() < 1e-14);
    }
}

#[test]
fn b4_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_tuple(&mut rng, 4, 1.0);
    let b4 = bell_eval(&Scalar, bell_table(), 4, &x).unwrap();
    let want = x[0].powu(4) + 6.0 * x[0] * x[0] * x[1] + 4.0 * x[0] * x[2] + 3.0 * x[1] * x[1] + x[3];
    assert!((b4 - want).norm() < 1e-13);
}

#[test]
fn modulus_is_monotone_and_unbounded() {
    for n in 2..=10 {
        let mut prev = 0.0;
        for k in 1..200 {
            let d = 0.05 * k as f64;
            let m = lipschitz_modulus(n, d);
            assert!(m > prev, "n = {n}, delta = {d}");
            prev = m;
        }
        assert!(lipschitz_modulus(n, 1e3) > 1e3);
    }
}

/// `|f_i(X) - f_i(Y)| <= m(delta) |X - Y|_1` on the `delta` ball, and the bound
/// is not vacuous.
#[test]
fn modulus_bounds_sampled_lipschitz_ratios() {
    let n = 4;
    let delta = 0.1;
    let m = lipschitz_modulus(n, delta);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ball = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        let raw = random_tuple(rng, n - 1, 1.0);
        let norm: f64 = raw.iter().map(|v| v.norm()).sum();
        let r = delta * rng.gen_range(0.0..1.0f64).powf(0.25);
        raw.iter().map(|v| v * (r / norm)).collect()
    };
    let mut worst: f64 = 0.0;
    for _ in 0..200_000 {
        let x = ball(&mut rng);
        let y = ball(&mut rng);
        let (_, fx) = bell_sequence(&Scalar, &x, n - 1).unwrap();
        let (_, fy) = bell_sequence(&Scalar, &y, n - 1).unwrap();
        let dist: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).norm()).sum();
        for i in 1..n {
            worst = worst.max((fx[i] - fy[i]).norm() / dist);
        }
    }
    assert!(worst <= m, "sampled {worst} above m = {m}");
    assert!(worst * 10.0 >= m, "sampled {worst} far below m = {m}");
}
