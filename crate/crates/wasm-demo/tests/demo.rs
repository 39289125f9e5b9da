use perron_ap_wasm::{certificate_json, g_samples, solve_samples};
use serde_json::Value;

#[test]
fn certificate_for_small_eta() {
    let v: Value = serde_json::from_str(&certificate_json(0.002, false).unwrap()).unwrap();
    let roots = v["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 3);
    assert!(roots.iter().all(|r| r["pass"] == Value::Bool(true)));
    assert_eq!(v["independent"], Value::Bool(true));
    assert!((roots[0]["Q0"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!(certificate_json(-1.0, false).is_err());
}

#[test]
fn certificate_fails_for_large_eta() {
    let v: Value = serde_json::from_str(&certificate_json(0.5, true).unwrap()).unwrap();
    assert!(v["roots"].as_array().unwrap().iter().all(|r| r["pass"] == Value::Bool(false)));
}

#[test]
fn curve_rows() {
    let rows = solve_samples(0.01, 0, 20.0, 101, false).unwrap();
    assert_eq!(rows.len(), 505);
    assert_eq!(rows[0], -20.0);
    assert_eq!(rows[5 * 50 + 3], 0.0);
    assert!(rows.chunks(5).all(|r| r[4] < 1e-9));
    assert!(solve_samples(0.01, 1, 20.0, 101, false).is_err());
    assert!(solve_samples(0.01, 1, 20.0, 101, true).is_ok());
}

#[test]
fn g_curve_peaks_at_m() {
    let v = g_samples(3, 0.0, 2.0, 401).unwrap();
    let (m, gm) = (v[v.len() - 2], v[v.len() - 1]);
    let s6 = 6f64.sqrt();
    assert!((m - (s6 - 2.0) / 6.0).abs() < 1e-12);
    assert!(v[..v.len() - 2].chunks(2).all(|p| p[1] <= gm + 1e-15));
    assert!(g_samples(3, 1.5, 2.0, 10).is_err());
}
