//! The cubic example `y''' - y' + (mu_0(t) + nu_0(t)) y = 0` with
//! `mu_0 = eta_1 (2 + cos t + cos(sqrt 2 t))` and `nu_0 = eta_2 / (1 + t^2)`.

use num_complex::Complex64;

use crate::appoly::{tp_add, GridFunction, TailModel, TrigPoly};
use crate::conditions::{check_existence, ConditionReport};
use crate::error::Result;
use crate::greenops::BoundMode;
use crate::riccati::{build_root_data, ClassTag, Perturbation, ProblemSpec};

pub const ETA1: f64 = 0.01;
pub const ETA2: f64 = 0.002;
pub const NU_HALF_WIDTH: f64 = 50.0;
pub const NU_STEP: f64 = 0.01;

/// Roots in the order `lambda_1 = 0`, `lambda_2 = 1`, `lambda_3 = -1`.
pub fn roots() -> Vec<Complex64> {
    [0.0, 1.0, -1.0].iter().map(|&r| Complex64::new(r, 0.0)).collect()
}

pub fn coefficients() -> Vec<Complex64> {
    vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 0.0),
    ]
}

pub fn mu0(eta1: f64) -> TrigPoly {
    tp_add(
        &tp_add(&TrigPoly::real_constant(2.0 * eta1), &TrigPoly::cos(1.0, eta1)),
        &TrigPoly::cos(2f64.sqrt(), eta1),
    )
}

/// `eta_2 / (1 + t^2)` on `[-50, 50]` with a power-2 tail.
pub fn nu0(eta2: f64) -> GridFunction {
    let len = (2.0 * NU_HALF_WIDTH / NU_STEP).round() as usize + 1;
    GridFunction::from_fn(
        -NU_HALF_WIDTH,
        NU_STEP,
        len,
        |t| Complex64::new(eta2 / (1.0 + t * t), 0.0),
        TailModel::power(eta2, 2.0),
    )
    .expect("valid grid")
}

/// The AP problem for `eta_2 = None`, otherwise the AAP_0 problem.
pub fn spec(eta1: f64, eta2: Option<f64>) -> ProblemSpec {
    let r0 = Perturbation {
        mu: mu0(eta1),
        nu: eta2.map(nu0),
    };
    ProblemSpec {
        n: 3,
        a: coefficients(),
        r: vec![r0, Perturbation::zero(), Perturbation::zero()],
        class: if eta2.is_some() {
            ClassTag::Aap0
        } else {
            ClassTag::Ap
        },
    }
}

/// Printed closed form of `M` at `lambda_2`.
pub fn published_m_lambda2() -> f64 {
    (105f64.sqrt() - 10.0) / 30.0
}

/// Bound on `eta_2` for the decomposition: `2 eta_2 <= this`.
pub fn eta2_bound() -> f64 {
    let s6 = 6f64.sqrt();
    (s6 - 1.0) * ((6.0 + 2.0 * s6).sqrt() - 3.0) / 81.0
}

/// Note on the `M` value at the nonzero roots, where the printed closed form
/// corresponds to `Q_0 = 20` rather than the computed `Q_0`.
pub fn discrepancy_note(report: &ConditionReport) -> Option<String> {
    if report.lambda.norm() < 0.5 {
        return None;
    }
    Some(format!(
        "implemented M = {:.6} from Q0 = {:.6}; the published closed form (sqrt(105)-10)/30 = {:.6} corresponds to Q0 = 20",
        report.m,
        report.q0,
        published_m_lambda2()
    ))
}

/// Existence reports for the three roots with the discrepancy notes attached.
pub fn condition_reports(spec: &ProblemSpec, beta: f64, mode: BoundMode) -> Result<Vec<ConditionReport>> {
    let r = roots();
    (0..r.len())
        .map(|k| {
            let mut rep = check_existence(&build_root_data(&r, k)?, spec, beta, mode)?;
            rep.notes.extend(discrepancy_note(&rep));
            Ok(rep)
        })
        .collect()
}
