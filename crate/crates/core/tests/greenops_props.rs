use num_complex::Complex64;
use perron_ap::appoly::{tp_supnorm_upper, TrigPoly};
use perron_ap::greenops::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_poly(rng: &mut ChaCha8Rng) -> TrigPoly {
    let k = rng.gen_range(1..5);
    TrigPoly::from_modes((0..k).map(|_| {
        (
            rng.gen_range(-3.0..3.0),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        )
    }))
}

/// `sup_t int_{-inf}^t e^{-(t-s)} |cos s| ds`, by Simpson's rule over one period.
fn cos_majorant_oracle() -> f64 {
    let value = |t: f64| {
        let n = 40_000;
        let len = 40.0;
        let h = len / n as f64;
        let f = |s: f64| (-(t - s)).exp() * s.cos().abs();
        let mut acc = f(t - len) + f(t);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(t - len + k as f64 * h);
        }
        acc * h / 3.0
    };
    (0..=300)
        .map(|k| value(std::f64::consts::PI * k as f64 / 300.0))
        .fold(0.0, f64::max)
}

#[test]
fn sharp_bound_for_cosine() {
    let f = TrigPoly::cos(1.0, 1.0);
    assert_eq!(ibound_supnorm(1.0, FnRef::Trig(&f), BoundMode::Conservative), 1.0);
    let sharp = ibound_supnorm(1.0, FnRef::Trig(&f), BoundMode::Sharp);
    let oracle = cos_majorant_oracle();
    assert!(sharp >= oracle, "sharp {sharp} below oracle {oracle}");
    assert!(sharp <= oracle + 0.05, "sharp {sharp} far above oracle {oracle}");
    assert!(sharp < 1.0);
}

#[test]
fn ibound_examples() {
    let one = TrigPoly::real_constant(1.0);
    assert_eq!(ibound_supnorm(-2.0, FnRef::Trig(&one), BoundMode::Conservative), 0.5);
    assert_eq!(ibound_supnorm(3.0, FnRef::Trig(&TrigPoly::zero()), BoundMode::Sharp), 0.0);
}

#[test]
fn sharp_majorant_is_monotone_in_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let f = random_poly(&mut rng);
        let alpha: f64 = rng.gen_range(0.5..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let beta = rng.gen_range(0.1..0.95) * alpha.abs();
        let strong = ibound_supnorm(alpha, FnRef::Trig(&f), BoundMode::Sharp);
        let weak = ibound_supnorm(beta * alpha.signum(), FnRef::Trig(&f), BoundMode::Sharp);
        assert!(strong <= weak + 1e-12, "alpha {alpha}, beta {beta}: {strong} > {weak}");
    }
}

#[test]
fn green_action_is_dominated_by_majorant() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..30 {
        let f = random_poly(&mut rng);
        let omega = Complex64::new(
            rng.gen_range(0.2..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
            rng.gen_range(-2.0..2.0),
        );
        let g = green_apply_tp(&GreenKernel::new(omega).unwrap(), &f);
        let bound = ibound_supnorm(omega.re, FnRef::Trig(&f), BoundMode::Conservative);
        assert!(tp_supnorm_upper(&f) / omega.re.abs() == bound);
        for k in 0..400 {
            let t = -40.0 + 0.2 * k as f64;
            assert!(g.eval(t).norm() <= bound * (1.0 + 1e-12));
        }
    }
}

#[test]
fn kernel_rejects_imaginary_rate() {
    assert!(GreenKernel::new(Complex64::new(1e-13, 1.0)).is_err());
}

#[test]
fn residue_identities_for_random_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 2..=10 {
        for _ in 0..5 {
            let gammas: Vec<Complex64> = (0..n - 1)
                .map(|k| Complex64::new((k as f64 + 0.5) * if k % 2 == 0 { 1.0 } else { -1.0 }, rng.gen_range(-1.0..1.0)))
                .collect();
            let g = composite_build(&gammas).unwrap();
            for (i, s) in g.residue_sums().iter().enumerate() {
                let want = if i + 2 == n { 1.0 } else { 0.0 };
                assert!((s - want).norm() < 1e-10, "n = {n}, i = {i}: {s}");
            }
        }
    }
}
