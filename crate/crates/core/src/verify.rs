//! Independent checks of a computed solution: the ODE residual, a DOPRI5
//! reference integration, a grid collocation oracle and the Wronskian.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, GridAlgebra};
use crate::appoly::{gf_eval, GridFunction, TailModel};
use crate::conditions::determinant;
use crate::error::{ApError, Result};
use crate::greenops::composite_build;
use crate::riccati::{sample_decaying, GridSpec, ProblemSpec, RiccatiCoeffs, RootData};
use crate::solver::{log_derivatives, SolutionBundle, SolutionRepresentation};

/// `|sum_{i<=n} (a_i + r_i(t)) y^(i)(t) / y(t)|` at `t`, with `a_n = 1`.
pub fn residual_at(spec: &ProblemSpec, bundle: &SolutionBundle, t: f64) -> f64 {
    let d = log_derivatives(bundle, t);
    let mut acc = d[spec.n];
    for (i, (a, r)) in spec.a.iter().zip(&spec.r).enumerate() {
        acc += (a + r.eval(t)) * d[i];
    }
    acc.norm()
}

pub fn residual_sup(spec: &ProblemSpec, bundle: &SolutionBundle, ts: &[f64]) -> f64 {
    ts.iter()
        .map(|&t| residual_at(spec, bundle, t))
        .fold(0.0, f64::max)
}

/// `count` equispaced points on `[a, b]`.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![a];
    }
    (0..count)
        .map(|k| a + (b - a) * k as f64 / (count - 1) as f64)
        .collect()
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Dopri5Options {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-3,
            max_steps: 2_000_000,
        }
    }
}

fn axpy(y: &[Complex64], h: f64, ks: &[Vec<Complex64>], w: &[f64]) -> Vec<Complex64> {
    let mut out = y.to_vec();
    for (k, &c) in ks.iter().zip(w) {
        if c != 0.0 {
            for (o, v) in out.iter_mut().zip(k) {
                *o += h * c * v;
            }
        }
    }
    out
}

/// Dormand-Prince 5(4) with dense output; returns the state at each of the
/// ascending `outputs` in `[t0, t_end]`.
pub fn dopri5<F>(
    f: F,
    t0: f64,
    y0: &[Complex64],
    t_end: f64,
    outputs: &[f64],
    opts: &Dopri5Options,
) -> Result<Vec<Vec<Complex64>>>
where
    F: Fn(f64, &[Complex64]) -> Vec<Complex64>,
{
    if !(t_end > t0) || outputs.iter().any(|&t| t < t0 || t > t_end) {
        return Err(ApError::InvalidInput(format!(
            "integration interval [{t0}, {t_end}] must be increasing and contain all outputs"
        )));
    }
    let mut out = Vec::with_capacity(outputs.len());
    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] <= t0 {
        out.push(y0.to_vec());
        next_out += 1;
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f(t, &y);
    let mut h = opts.h_init.min(t_end - t0);
    let mut steps = 0;
    while t < t_end {
        steps += 1;
        if steps > opts.max_steps {
            return Err(ApError::NoConvergence {
                iterations: steps,
                last_step: h,
            });
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(ApError::StepUnderflow(t));
        }
        let h_step = h.min(t_end - t);
        let mut ks = vec![k1.clone()];
        for s in 1..7 {
            let ys = axpy(&y, h_step, &ks, &A[s][..s]);
            ks.push(f(t + C[s] * h_step, &ys));
        }
        let y_new = axpy(&y, h_step, &ks[..6], &A[6]);
        let mut err = 0.0;
        for (i, (yo, yn)) in y.iter().zip(&y_new).enumerate() {
            let e: Complex64 = ks.iter().zip(&E).map(|(k, c)| h_step * c * k[i]).sum();
            let sc_re = opts.atol + opts.rtol * yo.re.abs().max(yn.re.abs());
            let sc_im = opts.atol + opts.rtol * yo.im.abs().max(yn.im.abs());
            err += (e.re / sc_re).powi(2) + (e.im / sc_im).powi(2);
        }
        let err = (err / (2 * y.len()) as f64).sqrt();
        let fac = (0.9 / err.powf(0.2)).clamp(0.2, 10.0);
        if err <= 1.0 {
            let t_new = t + h_step;
            if next_out < outputs.len() && outputs[next_out] <= t_new {
                let r2: Vec<Complex64> = y_new.iter().zip(&y).map(|(a, b)| a - b).collect();
                let r3: Vec<Complex64> = ks[0].iter().zip(&r2).map(|(k, d)| h_step * k - d).collect();
                let r4: Vec<Complex64> = r2
                    .iter()
                    .zip(&ks[6])
                    .zip(&r3)
                    .map(|((d, k), c)| d - h_step * k - c)
                    .collect();
                let r5 = axpy(&vec![Complex64::default(); y.len()], h_step, &ks, &D);
                while next_out < outputs.len() && outputs[next_out] <= t_new {
                    let th = (outputs[next_out] - t) / h_step;
                    let th1 = 1.0 - th;
                    out.push(
                        (0..y.len())
                            .map(|i| y[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i]))))
                            .collect(),
                    );
                    next_out += 1;
                }
            }
            t = t_new;
            y = y_new;
            k1 = ks.swap_remove(6);
        }
        h = h_step * fac;
    }
    Ok(out)
}

/// Integrate `y^(n) = -sum (a_i + r_i(t)) y^(i)` from `t0` with the state
/// `(y, y', ..., y^(n-1))`; returns the states at `outputs`.
pub fn reference_integrate(
    spec: &ProblemSpec,
    initial: &[Complex64],
    t0: f64,
    t_end: f64,
    outputs: &[f64],
    opts: &Dopri5Options,
) -> Result<Vec<Vec<Complex64>>> {
    let n = spec.n;
    if initial.len() != n {
        return Err(ApError::InvalidInput(format!(
            "initial state needs {n} entries, got {}",
            initial.len()
        )));
    }
    let rhs = |t: f64, y: &[Complex64]| {
        let mut d = Vec::with_capacity(n);
        d.extend_from_slice(&y[1..]);
        let mut top = Complex64::default();
        for (i, (a, r)) in spec.a.iter().zip(&spec.r).enumerate() {
            top -= (a + r.eval(t)) * y[i];
        }
        d.push(top);
        d
    };
    dopri5(rhs, t0, initial, t_end, outputs, opts)
}

/// Maximum relative error of the representation against the reference
/// integration on `[0, t_end]`, started from `y(0) = 1`, `y^(i)(0) = (y^(i)/y)(0)`.
pub fn reference_rel_error(
    spec: &ProblemSpec,
    bundle: &SolutionBundle,
    rep: &SolutionRepresentation,
    t_end: f64,
    samples: usize,
    opts: &Dopri5Options,
) -> Result<f64> {
    let init: Vec<Complex64> = log_derivatives(bundle, 0.0)[..spec.n].to_vec();
    let ts = linspace(0.0, t_end, samples);
    let states = reference_integrate(spec, &init, 0.0, t_end, &ts, opts)?;
    Ok(ts
        .iter()
        .zip(&states)
        .map(|(&t, s)| {
            let y = rep.y(t);
            (s[0] - y).norm() / y.norm()
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub half_width: f64,
    pub h: f64,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            half_width: 90.0,
            h: 0.01,
            damping: 0.8,
            tol: 1e-13,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub grid: GridSpec,
    /// `z, z', ..., z^(n-2)` on the grid.
    pub z: Vec<GridFunction>,
    pub iterations: usize,
    pub last_step: f64,
}

/// Damped fixed-point iteration of the full equation on a finite window with
/// zero continuation, without the AP/decaying split.
pub fn collocation_oracle(
    spec: &ProblemSpec,
    rd: &RootData,
    opts: &OracleOptions,
) -> Result<OracleSolution> {
    let n = spec.n;
    let grid = GridSpec::symmetric(opts.half_width, opts.h);
    let alg = GridAlgebra { len: grid.len };
    let dec = sample_decaying(spec, &grid);
    let r: Vec<Vec<Complex64>> = spec
        .r
        .iter()
        .zip(dec)
        .map(|(p, d)| {
            let mut s = p.mu.sample(grid.t0, grid.h, grid.len);
            if let Some(d) = d {
                for (a, b) in s.iter_mut().zip(d) {
                    *a += b;
                }
            }
            s
        })
        .collect();
    let coeffs = RiccatiCoeffs::assemble(&alg, rd.lambda, &spec.a_full(), &r);
    let green = composite_build(&rd.gammas)?;
    let mut z: Vec<Vec<Complex64>> = vec![alg.zero(); n - 1];
    let mut last = f64::INFINITY;
    for k in 1..=opts.max_iter {
        let w = coeffs.rhs(&alg, &z)?;
        let wf = GridFunction::new(grid.t0, grid.h, w, TailModel::zero())?;
        let parts = green.parts_grid(&wf)?;
        last = 0.0;
        for (i, zi) in z.iter_mut().enumerate() {
            let next = green.combine(&parts, &wf, i)?;
            let mut step: f64 = 0.0;
            for (a, b) in zi.iter_mut().zip(next.samples()) {
                let upd = opts.damping * (-b - *a);
                step = step.max(upd.norm());
                *a += upd;
            }
            last += step;
        }
        if last <= opts.tol {
            let z = z
                .into_iter()
                .map(|s| GridFunction::new(grid.t0, grid.h, s, TailModel::zero()))
                .collect::<Result<_>>()?;
            return Ok(OracleSolution {
                grid,
                z,
                iterations: k,
                last_step: last,
            });
        }
    }
    Err(ApError::NoConvergence {
        iterations: opts.max_iter,
        last_step: last,
    })
}

/// `max |z_oracle(t) - z(t)|` over grid points with `|t| <= half_width`.
pub fn oracle_distance(bundle: &SolutionBundle, oracle: &OracleSolution, half_width: f64) -> f64 {
    let g = &oracle.z[0];
    (0..g.len())
        .filter(|&k| g.time(k).abs() <= half_width + 1e-9)
        .map(|k| (g.samples()[k] - bundle.z_deriv(g.time(k), 0)).norm())
        .fold(0.0, f64::max)
}

/// `min_t |det [y_k^(i) / y_k](t)|` over the sample times.
pub fn wronskian_sample(bundles: &[SolutionBundle], ts: &[f64]) -> f64 {
    let n = bundles.len();
    ts.iter()
        .map(|&t| {
            let cols: Vec<Vec<Complex64>> = bundles.iter().map(|b| log_derivatives(b, t)).collect();
            let m: Vec<Vec<Complex64>> = (0..n)
                .map(|i| (0..n).map(|k| cols[k][i]).collect())
                .collect();
            determinant(&m).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub root_index: usize,
    pub residual_sup: f64,
    pub residual_window: [f64; 2],
    pub residual_points: usize,
    pub reference_rel_error: Option<f64>,
    pub reference_window: [f64; 2],
    pub oracle_distance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub residual_half_width: f64,
    pub residual_points: usize,
    pub reference_t_end: f64,
    pub reference: Option<Dopri5Options>,
    pub oracle: Option<OracleOptions>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            residual_half_width: 50.0,
            residual_points: 10_001,
            reference_t_end: 10.0,
            reference: Some(Dopri5Options::default()),
            oracle: None,
        }
    }
}

pub fn verify_bundle(
    spec: &ProblemSpec,
    rd: &RootData,
    bundle: &SolutionBundle,
    rep: &SolutionRepresentation,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let w = opts.residual_half_width;
    let ts = linspace(-w, w, opts.residual_points);
    let reference_rel_error = match &opts.reference {
        Some(o) => Some(reference_rel_error(spec, bundle, rep, opts.reference_t_end, 201, o)?),
        None => None,
    };
    let oracle_distance = match &opts.oracle {
        Some(o) => Some(oracle_distance(bundle, &collocation_oracle(spec, rd, o)?, w)),
        None => None,
    };
    Ok(VerificationReport {
        root_index: bundle.root_index,
        residual_sup: residual_sup(spec, bundle, &ts),
        residual_window: [-w, w],
        residual_points: ts.len(),
        reference_rel_error,
        reference_window: [0.0, opts.reference_t_end],
        oracle_distance,
    })
}

/// Evaluate a grid function at arbitrary times.
pub fn sample_at(g: &GridFunction, ts: &[f64]) -> Vec<Complex64> {
    ts.iter().map(|&t| gf_eval(g, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dopri5_exponential_and_oscillator() {
        let i = Complex64::i();
        let out = dopri5(
            |_, y| vec![i * y[0]],
            0.0,
            &[Complex64::new(1.0, 0.0)],
            10.0,
            &[0.0, 1.234, 5.0, 10.0],
            &Dopri5Options {
                rtol: 1e-12,
                atol: 1e-14,
                ..Dopri5Options::default()
            },
        )
        .unwrap();
        for (t, y) in [0.0, 1.234, 5.0, 10.0].iter().zip(&out) {
            assert!((y[0] - (i * *t).exp()).norm() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn dopri5_rejects_bad_interval() {
        let r = dopri5(|_, y| y.to_vec(), 1.0, &[Complex64::new(1.0, 0.0)], 0.0, &[], &Dopri5Options::default());
        assert!(r.is_err());
    }

    #[test]
    fn dopri5_reports_underflow() {
        // finite-time blow-up of y' = y^2
        let r = dopri5(
            |_, y| vec![y[0] * y[0]],
            0.0,
            &[Complex64::new(1.0, 0.0)],
            2.0,
            &[2.0],
            &Dopri5Options::default(),
        );
        assert!(matches!(r, Err(ApError::StepUnderflow(_)) | Err(ApError::NoConvergence { .. })));
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(-1.0, 1.0, 5);
        assert_eq!(v, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
