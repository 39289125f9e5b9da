use num_complex::Complex64;
use perron_ap::appoly::{tp_supnorm_lower, GridFunction, TailModel, TrigPoly};
use perron_ap::example_n3 as ex;
use perron_ap::riccati::*;
use perron_ap::solver::*;
use perron_ap::verify::{linspace, residual_sup};
use perron_ap::ApError;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn rd(k: usize) -> RootData {
    build_root_data(&ex::roots(), k).unwrap()
}

fn shifted(p: &TrigPoly, s: f64) -> TrigPoly {
    TrigPoly::from_modes(
        p.modes()
            .map(|(f, a)| (f, a * Complex64::from_polar(1.0, f * s))),
    )
}

#[test]
fn steps_contract_at_the_certified_rate() {
    let b = picard_solve(&ex::spec(ex::ETA1, None), &rd(0), &SolveOptions::default()).unwrap();
    for w in b.step_norms.windows(2) {
        if w[0] > 1e-13 {
            assert!(w[1] / w[0] <= b.eps0 + 0.05, "{:?}, eps0 = {}", b.step_norms, b.eps0);
        }
    }
}

#[test]
fn effective_exponent_is_shift_invariant() {
    let rd = rd(0);
    let base = ex::spec(ex::ETA1, None);
    let b = picard_solve(&base, &rd, &SolveOptions::default()).unwrap();
    let lam = reconstruct(&b, &base, &rd).unwrap().lambda_eff;
    for s in [0.5, -3.0, 11.0] {
        let mut spec = base.clone();
        spec.r[0].mu = shifted(&base.r[0].mu, s);
        let bs = picard_solve(&spec, &rd, &SolveOptions::default()).unwrap();
        let lam_s = reconstruct(&bs, &spec, &rd).unwrap().lambda_eff;
        assert!((lam - lam_s).norm() < 1e-12, "shift {s}: {lam} vs {lam_s}");
    }
}

#[test]
fn deviation_scales_linearly() {
    let sup = |eta: f64| {
        let b = picard_solve(&ex::spec(eta, None), &rd(0), &SolveOptions::default()).unwrap();
        tp_supnorm_lower(&b.z, 60.0, 20_001)
    };
    let ratio = sup(0.004) / sup(0.002);
    assert!((ratio - 2.0).abs() <= 0.5, "ratio {ratio}");
}

#[test]
fn residual_is_within_defect_budget() {
    let spec = ex::spec(ex::ETA1, None);
    let opts = SolveOptions::default();
    let b = picard_solve(&spec, &rd(0), &opts).unwrap();
    let r = residual_sup(&spec, &b, &linspace(-50.0, 50.0, 2001));
    assert!(r <= 10.0 * (opts.tol + b.truncation_budget), "residual {r}");
}

#[test]
fn unperturbed_system_has_vandermonde_wronskian() {
    let spec = ProblemSpec::unperturbed(ex::coefficients());
    let fs = fundamental_system(&spec, &ex::roots(), &SolveOptions::default()).unwrap();
    assert!((fs.wronskian_min_abs - 2.0).abs() < 1e-14);
    for (rep, root) in fs.representations.iter().zip(ex::roots()) {
        assert_eq!(rep.lambda_eff, root);
    }
}

#[test]
fn forced_fundamental_system_for_the_example() {
    let opts = SolveOptions {
        force: true,
        ..SolveOptions::default()
    };
    let fs = fundamental_system(&ex::spec(ex::ETA1, None), &ex::roots(), &opts).unwrap();
    for (rep, root) in fs.representations.iter().zip(ex::roots()) {
        assert!((rep.lambda_eff - root).norm() < 0.05, "{} vs {root}", rep.lambda_eff);
    }
    assert!(fs.wronskian_min_abs > 1.0);
    assert!(fs.criterion.criterion > 0.0 && fs.criterion.criterion.is_finite());
}

#[test]
fn unforced_fundamental_system_reports_failing_roots() {
    let err = fundamental_system(&ex::spec(ex::ETA1, None), &ex::roots(), &SolveOptions::default())
        .unwrap_err();
    assert!(matches!(err, ApError::PerRootFailure(ref v) if !v.is_empty()), "{err}");
}

#[test]
fn second_order_smoke() {
    let roots = vec![c(-2.0), c(1.0)];
    let spec = ProblemSpec {
        n: 2,
        a: vec![c(-2.0), c(1.0)],
        r: vec![Perturbation::ap(TrigPoly::cos(1.0, 0.01)), Perturbation::zero()],
        class: ClassTag::Ap,
    };
    let opts = SolveOptions {
        force: true,
        ..SolveOptions::default()
    };
    let fs = fundamental_system(&spec, &roots, &opts).unwrap();
    assert_eq!(fs.bundles.len(), 2);
    assert!(fs.bundles.iter().all(|b| b.last_step_norm <= 1e-12));
    assert!((fs.wronskian_min_abs - 3.0).abs() < 0.1);
}

#[test]
fn error_order_vanishes_without_perturbation() {
    let spec = ProblemSpec::unperturbed(ex::coefficients());
    let b = picard_solve(&spec, &rd(0), &SolveOptions::default()).unwrap();
    let rep = error_order_check(&b, &spec, 0.5, &[20.0, 40.0]).unwrap();
    assert_eq!(rep.c_star, vec![0.0, 0.0]);
    assert!(rep.stable);
    assert!(error_order_check(&b, &spec, 0.0, &[20.0]).is_err());
}

#[test]
fn zero_decaying_part_collapses_to_ap_solution() {
    let ap = ex::spec(ex::ETA1, None);
    let mut spec = ap.clone();
    spec.r[0].nu = Some(
        GridFunction::from_fn(-50.0, 0.01, 10_001, |_| c(0.0), TailModel::zero()).unwrap(),
    );
    spec.class = ClassTag::Aap0;
    let dec = solve(&spec, &rd(0), &SolveOptions::default()).unwrap();
    let plain = solve(&ap, &rd(0), &SolveOptions::default()).unwrap();
    assert!(dec.z.coeff_distance(&plain.z) < 1e-15);
    let psi = dec.psi.expect("decaying part");
    assert!(psi.derivs.iter().all(|g| g.samples().iter().all(|v| v.norm() < 1e-15)));
}

#[test]
fn stage_labels_on_failures() {
    let spec = ex::spec(10.0, Some(ex::ETA2));
    let err = solve(&spec, &rd(0), &SolveOptions::default()).unwrap_err();
    assert!(matches!(err, ApError::Stage { stage: "theta", .. }), "{err}");
    assert!(matches!(err.root_cause(), ApError::CertificateFailed(_)));
    let err = picard_solve(&ex::spec(ex::ETA1, Some(ex::ETA2)), &rd(0), &SolveOptions::default())
        .unwrap_err();
    assert!(matches!(err, ApError::InvalidInput(_)));
}

#[test]
fn thread_cap_follows_environment() {
    std::env::set_var("PERRON_AP_THREADS", "1");
    assert_eq!(thread_cap(), 1);
    let spec = ProblemSpec::unperturbed(ex::coefficients());
    let serial = fundamental_system(&spec, &ex::roots(), &SolveOptions::default()).unwrap();
    std::env::set_var("PERRON_AP_THREADS", "not a number");
    assert!(thread_cap() >= 1);
    std::env::remove_var("PERRON_AP_THREADS");
    let parallel = fundamental_system(&spec, &ex::roots(), &SolveOptions::default()).unwrap();
    assert_eq!(serial, parallel);
}
