//! Browser bindings for the cubic example `y''' - y' + mu_0(t) y = 0`,
//! `mu_0 = eta (2 + cos t + cos(sqrt 2 t))`.

use perron_ap::conditions::{find_m, fundamental_criterion, g_value};
use perron_ap::example_n3 as ex;
use perron_ap::greenops::BoundMode;
use perron_ap::riccati::build_root_data;
use perron_ap::solver::{picard_solve, reconstruct, SolveOptions};
use perron_ap::verify::{linspace, residual_at};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn bound_mode(sharp: bool) -> BoundMode {
    if sharp {
        BoundMode::Sharp
    } else {
        BoundMode::Conservative
    }
}

/// Per-root existence reports and the independence criterion, as JSON.
pub fn certificate_json(eta: f64, sharp: bool) -> Result<String, String> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(format!("eta = {eta} must be a non-negative number"));
    }
    let spec = ex::spec(eta, None);
    let mode = bound_mode(sharp);
    let reports = ex::condition_reports(&spec, 0.0, mode).map_err(|e| e.to_string())?;
    let crit = fundamental_criterion(&spec, &ex::roots(), 0.0, mode).map_err(|e| e.to_string())?;
    let out = json!({
        "eta": eta,
        "roots": reports.iter().map(|r| json!({
            "lambda": r.lambda.re,
            "H": r.h,
            "L0": r.l0,
            "Q0": r.q0,
            "M": r.m,
            "gM": r.g_m,
            "eps0": r.eps0,
            "pass": r.existence_pass,
            "notes": r.notes,
        })).collect::<Vec<_>>(),
        "criterion": crit.criterion,
        "independent": crit.independent,
    });
    Ok(out.to_string())
}

/// Solves at root `root` (0 for `lambda = 0`, 1 for `1`, 2 for `-1`) and samples
/// `points` times on `[-half_width, half_width]`.
///
/// Returns rows `t, Re z, Im z, Re log y, residual` flattened.
pub fn solve_samples(
    eta: f64,
    root: usize,
    half_width: f64,
    points: usize,
    force: bool,
) -> Result<Vec<f64>, String> {
    if !half_width.is_finite() || half_width <= 0.0 || !(2..=100_000).contains(&points) {
        return Err("need half_width > 0 and 2 <= points <= 100000".into());
    }
    let spec = ex::spec(eta, None);
    let rd = build_root_data(&ex::roots(), root).map_err(|e| e.to_string())?;
    let opts = SolveOptions {
        force,
        ..SolveOptions::default()
    };
    let b = picard_solve(&spec, &rd, &opts).map_err(|e| e.to_string())?;
    let rep = reconstruct(&b, &spec, &rd).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(points * 5);
    for t in linspace(-half_width, half_width, points) {
        let z = b.z.eval(t);
        out.extend([t, z.re, z.im, rep.log_y(t).re, residual_at(&spec, &b, t)]);
    }
    Ok(out)
}

/// `g(delta) = (1 - L0 - m(delta) Q0) delta` on `[0, delta_lambda]`, followed by
/// the maximiser `M` and `g(M)`.
pub fn g_samples(n: usize, l0: f64, q0: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(2..=10).contains(&n) || !(2..=100_000).contains(&points) {
        return Err("need 2 <= n <= 10 and 2 <= points <= 100000".into());
    }
    let ball = find_m(l0, q0, n).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * points + 2);
    for d in linspace(0.0, ball.delta_lambda, points) {
        out.extend([d, g_value(l0, q0, n, d)]);
    }
    out.extend([ball.m, ball.g_m]);
    Ok(out)
}

#[wasm_bindgen]
pub fn certificate(eta: f64, sharp: bool) -> Result<String, JsValue> {
    certificate_json(eta, sharp).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn solve_curve(
    eta: f64,
    root: usize,
    half_width: f64,
    points: usize,
    force: bool,
) -> Result<Vec<f64>, JsValue> {
    solve_samples(eta, root, half_width, points, force).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn g_curve(n: usize, l0: f64, q0: f64, points: usize) -> Result<Vec<f64>, JsValue> {
    g_samples(n, l0, q0, points).map_err(|e| JsValue::from_str(&e))
}
