//! Picard iteration for `z = -G[P(r; lambda) + L(., z) + F(., Z)]`, the split
//! `z = theta + psi` into AP and decaying parts, and reconstruction of `y`.

use std::thread;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, GridAlgebra, MixedAlgebra, Scalar, TrigAlgebra};
use crate::appoly::{
    gf_eval, tp_antiderivative, tp_scale, tp_sub, tp_supnorm_upper, GridFunction, TrigPoly,
    TruncationPolicy,
};
use crate::bell::{bell_sequence, binomial};
use crate::conditions::{
    check_existence, check_fundamental_system, compute_theta_conditions, decaying_function,
    fundamental_criterion, ConditionReport, FundamentalReport, ThetaReport,
};
use crate::error::{ApError, Result};
use crate::greenops::{
    composite_apply_tp, composite_build, green_apply_tp, majorant_samples, BoundMode,
    CompositeGreen, GreenKernel,
};
use crate::riccati::{
    ap_coeffs, build_root_data, decomposed_coeffs, derivatives, p_r_lambda, ClassTag, GridSpec,
    ProblemSpec, RiccatiCoeffs, RootData,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub beta: f64,
    pub policy: TruncationPolicy,
    pub force: bool,
    pub bound_mode: BoundMode,
    /// Half width of the grid window for the decaying part.
    pub window: Option<f64>,
    pub step: Option<f64>,
    #[serde(skip)]
    pub initial: Option<TrigPoly>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-12,
            max_iter: 60,
            beta: 0.0,
            policy: TruncationPolicy::default(),
            force: false,
            bound_mode: BoundMode::Conservative,
            window: None,
            step: None,
            initial: None,
        }
    }
}

/// Grid solution of the equation for the decaying part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayingPart {
    /// `psi, psi', ..., psi^(n-1)`.
    pub derivs: Vec<GridFunction>,
    /// Right-hand side `w_psi` with `psi = -G[w_psi]`.
    pub source: GridFunction,
    pub iterations: usize,
    pub step_norms: Vec<f64>,
    pub ball_norm: f64,
    pub tail_consistent: bool,
    pub pnorm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionBundle {
    pub root_index: usize,
    pub lambda: Complex64,
    pub n: usize,
    /// AP part of `z` (all of it when there is no decaying part).
    pub z: TrigPoly,
    pub psi: Option<DecayingPart>,
    pub iterations: usize,
    pub step_norms: Vec<f64>,
    pub last_step_norm: f64,
    /// Certified `sum_{i <= n-2} sup |z^(i)|`.
    pub ball_norm: f64,
    pub ball_radius: f64,
    pub ball_ok: bool,
    pub eps0: f64,
    pub truncation_budget: f64,
    /// `eps0 / (1 - eps0)` times the last step plus the truncation budget.
    pub defect_bound: f64,
    pub forced: bool,
    pub conditions: ConditionReport,
    pub theta_conditions: Option<ThetaReport>,
}

impl SolutionBundle {
    /// `z^(k)(t)` including the decaying part.
    pub fn z_deriv(&self, t: f64, k: usize) -> Complex64 {
        let mut v = self.z.eval_deriv(t, k as u32);
        if let Some(p) = &self.psi {
            if let Some(g) = p.derivs.get(k) {
                v += gf_eval(g, t);
            }
        }
        v
    }
}

/// `T Z = -(G[w], G[w]', ..., G[w]^(n-2))` with `w = rhs(Z)`.
pub struct PicardMap {
    pub coeffs: RiccatiCoeffs<TrigPoly>,
    pub green: CompositeGreen,
    pub alg: TrigAlgebra,
}

impl PicardMap {
    pub fn new(spec: &ProblemSpec, rd: &RootData, policy: TruncationPolicy) -> Result<Self> {
        let alg = TrigAlgebra::new(policy);
        Ok(PicardMap {
            coeffs: ap_coeffs(&alg, spec, rd.lambda),
            green: composite_build(&rd.gammas)?,
            alg,
        })
    }

    pub fn rhs(&self, z: &[TrigPoly]) -> Result<TrigPoly> {
        self.coeffs.rhs(&self.alg, z)
    }

    pub fn apply(&self, z: &[TrigPoly]) -> Result<Vec<TrigPoly>> {
        let w = self.rhs(z)?;
        Ok((0..self.coeffs.n - 1)
            .map(|i| tp_scale(&composite_apply_tp(&self.green, &w, i), Complex64::new(-1.0, 0.0)))
            .collect())
    }
}

fn tuple_norm(z: &[TrigPoly]) -> f64 {
    z.iter().map(tp_supnorm_upper).sum()
}

fn stop_threshold(tol: f64, eps: f64) -> f64 {
    if eps > 0.0 && eps < 1.0 {
        tol * (1.0 - eps) / eps
    } else {
        tol
    }
}

fn defect(eps: f64, step: f64) -> f64 {
    if eps < 1.0 {
        eps / (1.0 - eps) * step
    } else {
        step
    }
}

/// Spectral Picard iteration for a problem with AP perturbations only.
pub fn picard_solve(spec: &ProblemSpec, rd: &RootData, opts: &SolveOptions) -> Result<SolutionBundle> {
    spec.check()?;
    if spec.has_decaying_part() {
        return Err(ApError::InvalidInput(
            "problem has decaying parts; use solve_decomposed".into(),
        ));
    }
    let conditions = check_existence(rd, spec, opts.beta, opts.bound_mode)?;
    if !conditions.existence_pass && !opts.force {
        return Err(ApError::CertificateFailed(format!(
            "root {}: H = {:.6e}, g(M) = {:.6e}, L0 = {:.6e}",
            rd.index, conditions.h, conditions.g_m, conditions.l0
        )));
    }
    let map = PicardMap::new(spec, rd, opts.policy)?;
    let n = spec.n;
    let radius = conditions.m;
    let eps = conditions.eps0;
    let check_ball = conditions.existence_pass;
    let mut z = derivatives(&opts.initial.clone().unwrap_or_else(TrigPoly::zero), n - 1);
    let mut steps = Vec::new();
    let threshold = stop_threshold(opts.tol, eps);
    for k in 1..=opts.max_iter {
        let next = map.apply(&z)?;
        let step: f64 = next
            .iter()
            .zip(&z)
            .map(|(a, b)| tp_supnorm_upper(&tp_sub(a, b)))
            .sum();
        let norm = tuple_norm(&next);
        steps.push(step);
        z = next;
        if check_ball && norm > radius {
            return Err(ApError::BallEscape {
                iteration: k,
                norm,
                radius,
            });
        }
        if step <= threshold {
            let budget = map.alg.discarded();
            return Ok(SolutionBundle {
                root_index: rd.index,
                lambda: rd.lambda,
                n,
                z: z[0].clone(),
                psi: None,
                iterations: k,
                last_step_norm: step,
                step_norms: steps,
                ball_norm: norm,
                ball_radius: radius,
                ball_ok: !check_ball || norm <= radius,
                eps0: eps,
                truncation_budget: budget,
                defect_bound: defect(eps, step) + budget,
                forced: opts.force && !conditions.existence_pass,
                conditions,
                theta_conditions: None,
            });
        }
    }
    Err(ApError::NoConvergence {
        iterations: opts.max_iter,
        last_step: steps.last().copied().unwrap_or(f64::NAN),
    })
}

/// Default grid for the decaying part: `[-T, T]`, `T = max(50, 10 / min|alpha|)`,
/// `h = min(0.01, 1 / max|gamma|)`.
pub fn default_grid(rd: &RootData, opts: &SolveOptions) -> GridSpec {
    let t = opts
        .window
        .unwrap_or_else(|| 50f64.max(10.0 / rd.min_abs_alpha()));
    let h = opts
        .step
        .unwrap_or_else(|| 0.01f64.min(1.0 / rd.max_abs_gamma()));
    GridSpec::symmetric(t, h)
}

/// Solve with `z = theta + psi`: `theta` from the AP problem, `psi` on a grid.
pub fn solve_decomposed(
    spec: &ProblemSpec,
    rd: &RootData,
    opts: &SolveOptions,
) -> Result<SolutionBundle> {
    spec.check()?;
    let ap = spec.ap_part();
    let mut bundle = picard_solve(&ap, rd, opts).map_err(|e| e.in_stage("theta"))?;
    if !spec.has_decaying_part() {
        return Ok(bundle);
    }
    let grid = default_grid(rd, opts);
    let theta_rep = compute_theta_conditions(
        rd,
        spec,
        &bundle.z,
        &grid,
        opts.beta,
        opts.bound_mode,
        opts.policy,
    )
    .map_err(|e| e.in_stage("psi"))?;
    if !theta_rep.pass && !opts.force {
        return Err(ApError::CertificateFailed(format!(
            "root {}: H_theta = {:.6e} exceeds g_theta = {:.6e}",
            rd.index, theta_rep.h, theta_rep.g_m
        ))
        .in_stage("psi"));
    }
    let psi = psi_iteration(spec, rd, &bundle.z, &grid, &theta_rep, opts)
        .map_err(|e| e.in_stage("psi"))?;
    bundle.forced |= opts.force && !theta_rep.pass;
    bundle.theta_conditions = Some(theta_rep);
    bundle.psi = Some(psi);
    Ok(bundle)
}

fn psi_iteration(
    spec: &ProblemSpec,
    rd: &RootData,
    theta: &TrigPoly,
    grid: &GridSpec,
    rep: &ThetaReport,
    opts: &SolveOptions,
) -> Result<DecayingPart> {
    let n = spec.n;
    let mixed = MixedAlgebra::new(opts.policy, grid.t0, grid.h, grid.len);
    let coeffs = decomposed_coeffs(&mixed, spec, rd.lambda, &derivatives(theta, n - 1))?
        .map(|m| m.sample(grid.t0, grid.h, grid.len));
    let galg = GridAlgebra { len: grid.len };
    let green = composite_build(&rd.gammas)?;
    let threshold = stop_threshold(opts.tol, rep.eps);
    let check_ball = rep.pass;
    let mut psi: Vec<Vec<Complex64>> = vec![galg.zero(); n - 1];
    let mut steps = Vec::new();
    for k in 1..=opts.max_iter {
        let w = coeffs.rhs(&galg, &psi)?;
        let wf = decaying_function(spec, grid, w)?;
        let parts = green.parts_grid(&wf)?;
        let mut next = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            next.push(green.combine(&parts, &wf, i)?);
        }
        let next_samples: Vec<Vec<Complex64>> = next
            .iter()
            .map(|g| g.samples().iter().map(|v| -v).collect())
            .collect();
        let step: f64 = next_samples
            .iter()
            .zip(&psi)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
            .sum();
        steps.push(step);
        psi = next_samples;
        let norm: f64 = next.iter().map(crate::appoly::gf_supnorm).sum();
        if check_ball && norm > rep.m {
            return Err(ApError::BallEscape {
                iteration: k,
                norm,
                radius: rep.m,
            });
        }
        if step <= threshold {
            let w = coeffs.rhs(&galg, &psi)?;
            let source = decaying_function(spec, grid, w)?;
            let parts = green.parts_grid(&source)?;
            let derivs: Vec<GridFunction> = (0..n)
                .map(|i| {
                    green
                        .combine(&parts, &source, i)
                        .map(|g| crate::appoly::gf_scale(&g, Complex64::new(-1.0, 0.0)))
                })
                .collect::<Result<_>>()?;
            let tail_consistent = derivs[0].check_tail();
            let pnorm = match spec.class {
                ClassTag::Pap { p } | ClassTag::Pap0 { p } => Some(derivs[0].pnorm(p)),
                _ => None,
            };
            return Ok(DecayingPart {
                derivs,
                source,
                iterations: k,
                step_norms: steps,
                ball_norm: norm,
                tail_consistent,
                pnorm,
            });
        }
    }
    Err(ApError::NoConvergence {
        iterations: opts.max_iter,
        last_step: steps.last().copied().unwrap_or(f64::NAN),
    })
}

/// Dispatches on whether the problem has decaying parts.
pub fn solve(spec: &ProblemSpec, rd: &RootData, opts: &SolveOptions) -> Result<SolutionBundle> {
    if spec.has_decaying_part() {
        solve_decomposed(spec, rd, opts)
    } else {
        picard_solve(spec, rd, opts)
    }
}

/// `G_{gamma_j}[w]` weighted by `-1 / (Gamma_j gamma_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenTerm {
    pub gamma: Complex64,
    pub weight: Complex64,
    pub values: TrigPoly,
}

/// `log y(t) = lambda_eff t + osc(t) + sum_j weight_j G_j(t) + normalization
/// + decaying(t)`, normalized so that `y(0) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRepresentation {
    pub lambda: Complex64,
    pub lambda_eff: Complex64,
    pub kappa: Complex64,
    pub mean_w: Complex64,
    pub oscillatory_exponent: TrigPoly,
    pub green_terms: Vec<GreenTerm>,
    pub normalization: Complex64,
    pub decaying: Option<GridFunction>,
}

impl SolutionRepresentation {
    pub fn log_y(&self, t: f64) -> Complex64 {
        let mut v = self.lambda_eff * t + self.oscillatory_exponent.eval(t) + self.normalization;
        for g in &self.green_terms {
            v += g.weight * g.values.eval(t);
        }
        if let Some(d) = &self.decaying {
            v += gf_eval(d, t);
        }
        v
    }

    pub fn y(&self, t: f64) -> Complex64 {
        self.log_y(t).exp()
    }
}

pub fn reconstruct(
    bundle: &SolutionBundle,
    spec: &ProblemSpec,
    rd: &RootData,
) -> Result<SolutionRepresentation> {
    let n = spec.n;
    let map = PicardMap::new(&spec.ap_part(), rd, TruncationPolicy::default())?;
    let w = map.rhs(&derivatives(&bundle.z, n - 1))?;
    let kappa = rd.kappa();
    let (mean_w, osc) = tp_antiderivative(&w);
    let oscillatory_exponent = tp_scale(&osc, kappa);
    let mut green_terms = Vec::with_capacity(n - 1);
    for (g, bg) in rd.gammas.iter().zip(&rd.big_gammas) {
        let k = GreenKernel::new(*g)?;
        green_terms.push(GreenTerm {
            gamma: *g,
            weight: -1.0 / (bg * g),
            values: green_apply_tp(&k, &w),
        });
    }
    let mut at_zero = oscillatory_exponent.eval(0.0);
    for g in &green_terms {
        at_zero += g.weight * g.values.eval(0.0);
    }
    let decaying = match &bundle.psi {
        Some(p) => Some(decaying_exponent(p, rd, kappa)?),
        None => None,
    };
    Ok(SolutionRepresentation {
        lambda: rd.lambda,
        lambda_eff: rd.lambda + kappa * mean_w,
        kappa,
        mean_w,
        oscillatory_exponent,
        green_terms,
        normalization: -at_zero,
        decaying,
    })
}

/// `kappa int_0^t w_psi - sum_j (G_j[w_psi](t) - G_j[w_psi](0)) / (Gamma_j gamma_j)`.
fn decaying_exponent(p: &DecayingPart, rd: &RootData, kappa: Complex64) -> Result<GridFunction> {
    let src = &p.source;
    let len = src.len();
    let h = src.h();
    let mut cum = vec![Complex64::default(); len];
    for k in 1..len {
        cum[k] = cum[k - 1] + 0.5 * h * (src.samples()[k] + src.samples()[k - 1]);
    }
    let cum_grid = src.with_samples(cum, *src.decay());
    let c0 = gf_eval(&cum_grid, 0.0);
    let mut out: Vec<Complex64> = cum_grid.samples().iter().map(|v| kappa * (v - c0)).collect();
    for (g, bg) in rd.gammas.iter().zip(&rd.big_gammas) {
        let part = crate::greenops::green_apply_grid(&GreenKernel::new(*g)?, src)?;
        let at0 = gf_eval(&part, 0.0);
        let weight = -1.0 / (bg * g);
        for (o, v) in out.iter_mut().zip(part.samples()) {
            *o += weight * (v - at0);
        }
    }
    let edge = out[0].norm().max(out[len - 1].norm());
    // the exponent tends to a constant; continue it flat
    let tail = crate::appoly::TailModel::exp(edge, f64::MIN_POSITIVE);
    Ok(src.with_samples(out, tail))
}

/// `y^(i) / y` at `t` for `i = 0..=n`.
pub fn log_derivatives(bundle: &SolutionBundle, t: f64) -> Vec<Complex64> {
    let n = bundle.n;
    let zs: Vec<Complex64> = (0..n).map(|k| bundle.z_deriv(t, k)).collect();
    let (b, _) = bell_sequence(&Scalar, &zs, n).unwrap_or_default();
    let lam = bundle.lambda;
    (0..=n)
        .map(|i| {
            (0..=i)
                .map(|j| binomial(i, j) as f64 * lam.powu((i - j) as u32) * b[j])
                .sum()
        })
        .collect()
}

/// `y^(i) / y = sum_j C(i, j) lambda^{i-j} B_j(z, ..., z^(j-1))`.
pub fn log_derivative(bundle: &SolutionBundle, i: usize, t: f64) -> Complex64 {
    let zs: Vec<Complex64> = (0..i).map(|k| bundle.z_deriv(t, k)).collect();
    let Ok((b, _)) = bell_sequence(&Scalar, &zs, i) else {
        return Complex64::default();
    };
    let lam = bundle.lambda;
    (0..=i)
        .map(|j| binomial(i, j) as f64 * lam.powu((i - j) as u32) * b[j])
        .sum()
}

/// One solution per characteristic root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalSolution {
    pub criterion: FundamentalReport,
    pub bundles: Vec<SolutionBundle>,
    pub representations: Vec<SolutionRepresentation>,
    pub wronskian_min_abs: f64,
}

/// Worker count for per-root solves: `PERRON_AP_THREADS` or the number of CPUs.
pub fn thread_cap() -> usize {
    std::env::var("PERRON_AP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn fundamental_system(
    spec: &ProblemSpec,
    roots: &[Complex64],
    opts: &SolveOptions,
) -> Result<FundamentalSolution> {
    let criterion = if opts.force {
        fundamental_criterion(spec, roots, opts.beta, opts.bound_mode)?
    } else {
        check_fundamental_system(spec, roots, opts.beta, opts.bound_mode)?
    };
    let n = roots.len();
    let cap = thread_cap().min(n).max(1);
    let mut results: Vec<Option<Result<(SolutionBundle, SolutionRepresentation)>>> =
        (0..n).map(|_| None).collect();
    let solve_one = |k: usize| -> Result<(SolutionBundle, SolutionRepresentation)> {
        let rd = build_root_data(roots, k)?;
        let b = solve(spec, &rd, opts)?;
        let r = reconstruct(&b, spec, &rd)?;
        Ok((b, r))
    };
    for chunk in (0..n).collect::<Vec<_>>().chunks(cap) {
        thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&k| (k, s.spawn(move || solve_one(k))))
                .collect();
            for (k, h) in handles {
                results[k] = Some(h.join().unwrap_or_else(|_| {
                    Err(ApError::InvalidInput(format!("worker for root {k} panicked")))
                }));
            }
        });
    }
    let mut bundles = Vec::with_capacity(n);
    let mut representations = Vec::with_capacity(n);
    for r in results {
        let (b, rep) = r
            .expect("every root is scheduled")
            .map_err(|e| e.in_stage("fundamental"))?;
        bundles.push(b);
        representations.push(rep);
    }
    let ts: Vec<f64> = (0..=40).map(|k| -10.0 + 0.5 * k as f64).collect();
    let wronskian_min_abs = crate::verify::wronskian_sample(&bundles, &ts);
    Ok(FundamentalSolution {
        criterion,
        bundles,
        representations,
        wronskian_min_abs,
    })
}

/// Window stability of `C* = max_t sum_i |z^(i)(t)| / (I_beta + I_-beta)[|P|](t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorOrderReport {
    pub beta: f64,
    pub windows: Vec<f64>,
    pub c_star: Vec<f64>,
    pub ratio: f64,
    pub stable: bool,
}

pub fn error_order_check(
    bundle: &SolutionBundle,
    spec: &ProblemSpec,
    beta: f64,
    windows: &[f64],
) -> Result<ErrorOrderReport> {
    if !(beta > 0.0) {
        return Err(ApError::InvalidInput(format!("beta = {beta} must be positive")));
    }
    let (ap, dec) = p_r_lambda(spec, bundle.lambda);
    let h = 0.01;
    let pad = 36.0 / beta;
    let mut c_star = Vec::with_capacity(windows.len());
    for &w in windows {
        let grid = GridSpec::symmetric(w + pad, h);
        let p_abs: Vec<f64> = (0..grid.len)
            .map(|k| {
                let t = grid.time(k);
                (ap.eval(t) + dec.as_ref().map_or(Complex64::default(), |d| gf_eval(d, t))).norm()
            })
            .collect();
        if p_abs.iter().all(|v| *v == 0.0) {
            c_star.push(0.0);
            continue;
        }
        let fwd = majorant_samples(-beta, &p_abs, grid.h);
        let bwd = majorant_samples(beta, &p_abs, grid.h);
        let mut best: f64 = 0.0;
        for k in 0..grid.len {
            let t = grid.time(k);
            if t.abs() > w {
                continue;
            }
            let zsum: f64 = (0..spec.n - 1).map(|i| bundle.z_deriv(t, i).norm()).sum();
            let env = fwd[k] + bwd[k];
            if env > 0.0 {
                best = best.max(zsum / env);
            }
        }
        c_star.push(best);
    }
    let ratio = match (c_star.first(), c_star.last()) {
        (Some(a), Some(b)) if *a > 0.0 => b / a,
        _ => 1.0,
    };
    Ok(ErrorOrderReport {
        beta,
        windows: windows.to_vec(),
        stable: c_star.iter().all(|c| c.is_finite()) && (0.5..=2.0).contains(&ratio),
        c_star,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::appoly::tp_add;
    use crate::riccati::{Perturbation, ProblemSpec};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn example(eta: f64) -> ProblemSpec {
        let mu = tp_add(
            &tp_add(&TrigPoly::real_constant(2.0 * eta), &TrigPoly::cos(1.0, eta)),
            &TrigPoly::cos(2f64.sqrt(), eta),
        );
        ProblemSpec {
            n: 3,
            a: vec![c(0.0), c(-1.0), c(0.0)],
            r: vec![Perturbation::ap(mu), Perturbation::zero(), Perturbation::zero()],
            class: ClassTag::Ap,
        }
    }

    fn rd0() -> RootData {
        build_root_data(&[c(0.0), c(1.0), c(-1.0)], 0).unwrap()
    }

    #[test]
    fn unperturbed_gives_zero() {
        let spec = ProblemSpec::unperturbed(vec![c(0.0), c(-1.0), c(0.0)]);
        let b = picard_solve(&spec, &rd0(), &SolveOptions::default()).unwrap();
        assert!(b.z.is_empty());
        assert_eq!(b.iterations, 1);
        let rep = reconstruct(&b, &spec, &rd0()).unwrap();
        assert_eq!(rep.lambda_eff, c(0.0));
        assert!(rep.y(3.0) == c(1.0));
    }

    #[test]
    fn first_iterate_closed_form() {
        let eta = 0.01;
        let map = PicardMap::new(&example(eta), &rd0(), TruncationPolicy::default()).unwrap();
        let zero = vec![TrigPoly::zero(); 2];
        let z1 = map.apply(&zero).unwrap();
        let expect = tp_add(
            &tp_add(&TrigPoly::real_constant(2.0 * eta), &TrigPoly::cos(1.0, eta / 2.0)),
            &TrigPoly::cos(2f64.sqrt(), eta / 3.0),
        );
        assert!(z1[0].coeff_distance(&expect) < 1e-15);
    }

    #[test]
    fn converges_and_is_a_fixed_point() {
        let spec = example(0.01);
        let b = picard_solve(&spec, &rd0(), &SolveOptions::default()).unwrap();
        assert!(b.iterations <= 30, "{} iterations", b.iterations);
        assert!(b.ball_ok && b.ball_norm <= b.ball_radius);
        let map = PicardMap::new(&spec, &rd0(), TruncationPolicy::default()).unwrap();
        let tz = map.apply(&derivatives(&b.z, 2)).unwrap();
        assert!(tp_supnorm_upper(&tp_sub(&tz[0], &b.z)) <= 1e-12 + b.truncation_budget);
        // uniqueness in the ball from a different start
        let opts = SolveOptions {
            initial: Some(TrigPoly::sin(0.7, 0.01)),
            ..SolveOptions::default()
        };
        let b2 = picard_solve(&spec, &rd0(), &opts).unwrap();
        assert!(tp_supnorm_upper(&tp_sub(&b2.z, &b.z)) < 1e-8);
    }

    #[test]
    fn representation_matches_direct_integral() {
        let spec = example(0.01);
        let rd = rd0();
        let b = picard_solve(&spec, &rd, &SolveOptions::default()).unwrap();
        let rep = reconstruct(&b, &spec, &rd).unwrap();
        assert!((rep.lambda_eff - (rd.lambda + b.z.mean())).norm() < 1e-12);
        let (m, osc) = tp_antiderivative(&b.z);
        for t in [-3.0, 0.0, 1.5, 7.0] {
            let direct = rd.lambda * t + m * t + osc.eval(t) - osc.eval(0.0);
            assert!((rep.log_y(t) - direct).norm() < 1e-11);
        }
        let d = log_derivative(&b, 1, 0.0);
        assert!((d - (rd.lambda + b.z.eval(0.0))).norm() < 1e-15);
        assert_eq!(log_derivative(&b, 0, 2.0), c(1.0));
    }

    #[test]
    fn certificate_failure_is_reported() {
        let err = picard_solve(&example(10.0), &rd0(), &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, ApError::CertificateFailed(_)));
    }
}
