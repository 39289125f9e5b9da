use num_complex::Complex64;
use perron_ap::algebra::{Scalar, TrigAlgebra};
use perron_ap::appoly::{tp_add, TrigPoly, TruncationPolicy};
use perron_ap::bell::{bell_sequence, binomial};
use perron_ap::riccati::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn small_poly(rng: &mut ChaCha8Rng, scale: f64) -> TrigPoly {
    let k = rng.gen_range(1..4);
    TrigPoly::from_modes((0..k).map(|_| {
        (
            rng.gen_range(-2.0..2.0),
            Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)),
        )
    }))
}

fn distinct_roots(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    while out.len() < n {
        let r = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-1.5..1.5));
        if out.iter().all(|o| (o.re - r.re).abs() > 0.2) {
            out.push(r);
        }
    }
    out
}

#[test]
fn factorable_quadratic() {
    let roots = char_roots(&[c(2.0), c(-3.0)]).unwrap();
    assert!((roots[0] - c(1.0)).norm() < 1e-14);
    assert!((roots[1] - c(2.0)).norm() < 1e-14);
}

#[test]
fn roots_reconstruct_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let truth = distinct_roots(&mut rng, 6);
        let a = poly_from_roots(&truth)[..6].to_vec();
        let found = char_roots(&a).unwrap();
        let back = poly_from_roots(&found);
        for (x, y) in back.iter().zip(&a) {
            assert!((x - y).norm() < 1e-9);
        }
        assert!(found.windows(2).all(|w| w[0].re < w[1].re));
    }
}

#[test]
fn root_data_at_second_root_and_order_two() {
    let rd = build_root_data(&[c(0.0), c(1.0), c(-1.0)], 1).unwrap();
    assert_eq!(rd.gammas, vec![c(-1.0), c(-2.0)]);
    assert_eq!(rd.big_gammas, vec![c(1.0), c(-1.0)]);
    let rd2 = build_root_data(&[c(1.0), c(-2.0)], 0).unwrap();
    assert_eq!(rd2.big_gammas, vec![c(1.0)]);
}

#[test]
fn p_r_lambda_generic_cubic() {
    let r: Vec<Perturbation> = (0..3)
        .map(|k| Perturbation::ap(TrigPoly::cos(1.0 + k as f64, 1.0)))
        .collect();
    let spec = ProblemSpec {
        n: 3,
        a: vec![c(0.0), c(-1.0), c(0.0)],
        r,
        class: ClassTag::Ap,
    };
    let lam = Complex64::new(0.3, -0.2);
    let (ap, dec) = p_r_lambda(&spec, lam);
    assert!(dec.is_none());
    for t in [0.0, 0.7, -2.1] {
        let want = lam * lam * spec.r[2].eval(t) + lam * spec.r[1].eval(t) + spec.r[0].eval(t);
        assert!((ap.eval(t) - want).norm() < 1e-14);
    }
}

#[test]
fn d_on_cosine() {
    let spec = ProblemSpec::unperturbed(vec![c(0.0), c(-1.0), c(0.0)]);
    let out = d_apply(&spec, c(0.0), &TrigPoly::cos(1.0, 1.0));
    assert!(out.coeff_distance(&TrigPoly::cos(1.0, -2.0)) < 1e-15);
    assert!(d_apply(&spec, c(0.0), &TrigPoly::zero()).is_empty());
}

/// `y^(n)/y + sum (a_i + r_i) y^(i)/y = D z + P(r; lambda) + L(., z) + F(., Z)`
/// for `y = exp(int (lambda + z))` and arbitrary `z`.
#[test]
fn riccati_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let alg = TrigAlgebra::new(TruncationPolicy::default());
    for n in 2..=4 {
        for _ in 0..5 {
            let roots = distinct_roots(&mut rng, n);
            let a = poly_from_roots(&roots)[..n].to_vec();
            let r: Vec<Perturbation> = (0..n)
                .map(|_| Perturbation::ap(small_poly(&mut rng, 0.05)))
                .collect();
            let spec = ProblemSpec {
                n,
                a: a.clone(),
                r,
                class: ClassTag::Ap,
            };
            let lambda = roots[rng.gen_range(0..n)];
            let z = small_poly(&mut rng, 0.1);
            let zd = derivatives(&z, n);
            let coeffs = ap_coeffs(&alg, &spec, lambda);
            let rhs = tp_add(&coeffs.rhs(&alg, &zd[..n - 1]).unwrap(), &d_apply(&spec, lambda, &z));
            for k in 0..40 {
                let t = -20.0 + k as f64;
                let x: Vec<Complex64> = zd.iter().map(|p| p.eval(t)).collect();
                let (b, _) = bell_sequence(&Scalar, &x, n).unwrap();
                let ratio = |i: usize| -> Complex64 {
                    (0..=i)
                        .map(|j| binomial(i, j) as f64 * lambda.powu((i - j) as u32) * b[j])
                        .sum()
                };
                let mut lhs = ratio(n);
                for (i, (ai, ri)) in a.iter().zip(&spec.r).enumerate() {
                    lhs += (ai + ri.eval(t)) * ratio(i);
                }
                assert!((lhs - rhs.eval(t)).norm() < 1e-8, "n = {n}, t = {t}");
            }
        }
    }
}
