//! Certified sufficient conditions: `L_beta`, `Q_beta`, `H`, `delta_lambda`,
//! `M`, `eps0`, the fundamental-system criterion, and their analogues for the
//! equation of the decaying part once the AP part is known.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Mixed, MixedAlgebra, TrigAlgebra};
use crate::appoly::{gf_supnorm, tp_supnorm_upper, GridFunction, TailModel, TrigPoly, TruncationPolicy};
use crate::bell::{bell_sequence, binomial, lipschitz_modulus};
use crate::error::{ApError, Result};
use crate::greenops::{
    composite_apply_tp, composite_build, ibound_supnorm, BoundMode, CompositeGreen, FnRef,
};
use crate::riccati::{
    build_root_data, decomposed_coeffs, derivatives, p_r_lambda, perturbation_taylor, GridSpec,
    ProblemSpec, RootData,
};

fn shifted_alphas(rd: &RootData, beta: f64) -> Result<Vec<f64>> {
    let limit = rd.min_abs_alpha();
    if !(beta >= 0.0 && beta < limit) {
        return Err(ApError::BetaTooLarge { beta, limit });
    }
    Ok(rd.alphas.iter().map(|a| a - a.signum() * beta).collect())
}

fn weights(rd: &RootData) -> Vec<f64> {
    rd.alpha_tildes
        .iter()
        .zip(&rd.big_gammas)
        .map(|(at, bg)| at / bg.norm())
        .collect()
}

fn ibound_split(alpha: f64, ap: &TrigPoly, dec: Option<&GridFunction>, mode: BoundMode) -> f64 {
    ibound_supnorm(alpha, FnRef::Trig(ap), mode)
        + dec.map_or(0.0, |g| ibound_supnorm(alpha, FnRef::Grid(g), mode))
}

fn sup_split(ap: &TrigPoly, dec: Option<&GridFunction>) -> f64 {
    tp_supnorm_upper(ap) + dec.map_or(0.0, gf_supnorm)
}

/// `L_beta = sum_j sum_k |alpha~_j / Gamma_j| ||I[(1/k!) d^k P(r; .)]||`.
pub fn compute_l(rd: &RootData, spec: &ProblemSpec, beta: f64, mode: BoundMode) -> Result<f64> {
    let alphas = shifted_alphas(rd, beta)?;
    let w = weights(rd);
    let coeffs: Vec<_> = (1..spec.n)
        .map(|k| perturbation_taylor(spec, rd.lambda, k))
        .collect();
    let mut acc = 0.0;
    for (a, wj) in alphas.iter().zip(&w) {
        for (ap, dec) in &coeffs {
            acc += wj * ibound_split(*a, ap, dec.as_ref(), mode);
        }
    }
    Ok(acc)
}

/// `Q_beta = sum_j sum_{i=2}^n sum_{k=0}^{i-2} (alpha~_j/|Gamma_j|) C(i,k) |lambda|^k
/// (|a_i| / |alpha_j'| + ||I[|r_i|]||)`.
pub fn compute_q(rd: &RootData, spec: &ProblemSpec, beta: f64, mode: BoundMode) -> Result<f64> {
    let alphas = shifted_alphas(rd, beta)?;
    let w = weights(rd);
    let a_full = spec.a_full();
    let n = spec.n;
    let lam = rd.lambda.norm();
    let mut acc = 0.0;
    for (a, wj) in alphas.iter().zip(&w) {
        for i in 2..=n {
            let r_term = if i < n {
                let p = &spec.r[i];
                ibound_split(*a, &p.mu, p.nu.as_ref(), mode)
            } else {
                0.0
            };
            let inner = a_full[i].norm() / a.abs() + r_term;
            for k in 0..=i - 2 {
                acc += wj * binomial(i, k) as f64 * lam.powi(k as i32) * inner;
            }
        }
    }
    Ok(acc)
}

/// Upper bound on `H = || sum_{i <= n-2} |G[P(r; lambda)]^(i)| ||`.
pub fn compute_h(rd: &RootData, spec: &ProblemSpec, mode: BoundMode) -> Result<f64> {
    let g = composite_build(&rd.gammas)?;
    let (ap, dec) = p_r_lambda(spec, rd.lambda);
    let parts = match &dec {
        Some(d) => Some(g.parts_grid(d)?),
        None => None,
    };
    let mut acc = 0.0;
    for i in 0..spec.n - 1 {
        let spectral = tp_supnorm_upper(&composite_apply_tp(&g, &ap, i));
        let grid = match (&dec, &parts) {
            (Some(d), Some(p)) => gf_supnorm(&g.combine(p, d, i)?),
            _ => 0.0,
        };
        let (s, gr) = match mode {
            BoundMode::Conservative => (spectral, grid),
            BoundMode::Sharp => {
                let kernel_sum = |f: FnRef<'_>| -> f64 {
                    g.gammas()
                        .iter()
                        .zip(g.big_gammas())
                        .map(|(gm, bg)| {
                            (gm.powu(i as u32) / bg).norm() * ibound_supnorm(gm.re, f, BoundMode::Sharp)
                        })
                        .sum()
                };
                let s = spectral.min(kernel_sum(FnRef::Trig(&ap)));
                let gr = match &dec {
                    Some(d) => grid.min(kernel_sum(FnRef::Grid(d))),
                    None => 0.0,
                };
                (s, gr)
            }
        };
        acc += s + gr;
    }
    Ok(acc)
}

/// Maximizer of `g(delta) = [1 - L0 - m(delta) Q0] delta` on `(0, delta_lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallChoice {
    pub delta_lambda: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "gM")]
    pub g_m: f64,
}

pub fn g_value(l0: f64, q0: f64, n: usize, delta: f64) -> f64 {
    (1.0 - l0 - lipschitz_modulus(n, delta) * q0) * delta
}

pub fn find_m(l0: f64, q0: f64, n: usize) -> Result<BallChoice> {
    if !(l0 < 1.0) {
        return Err(ApError::L0GreaterThanOne(l0));
    }
    if !(q0 > 0.0) {
        return Err(ApError::InvalidInput(format!("Q0 = {q0} must be positive")));
    }
    let c = (1.0 - l0) / q0;
    if n == 3 {
        // m(delta) = 3 delta^2 + 3 delta
        let delta_lambda = 0.5 * ((1.0 + 4.0 * c / 3.0).sqrt() - 1.0);
        let m = ((1.0 + c).sqrt() - 1.0) / 3.0;
        let g_m = m * (2.0 / 3.0 * (1.0 - l0) - q0 * m);
        return Ok(BallChoice { delta_lambda, m, g_m });
    }
    let mut hi = 1.0;
    while lipschitz_modulus(n, hi) < c {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lipschitz_modulus(n, mid) < c {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    let delta_lambda = 0.5 * (lo + hi);
    let g = |d: f64| g_value(l0, q0, n, d);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, delta_lambda);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    while b - a > 1e-12 * delta_lambda.max(1e-300) {
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + ratio * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - ratio * (b - a);
            g1 = g(x1);
        }
    }
    let m = 0.5 * (a + b);
    Ok(BallChoice {
        delta_lambda,
        m,
        g_m: g(m),
    })
}

/// Quantities of the existence theorem at one root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub root_index: usize,
    pub lambda: Complex64,
    pub bound_mode: BoundMode,
    pub beta: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "Lbeta")]
    pub lbeta: f64,
    #[serde(rename = "Q0")]
    pub q0: f64,
    #[serde(rename = "Qbeta")]
    pub qbeta: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub delta_lambda: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "gM")]
    pub g_m: f64,
    pub eps0: f64,
    pub existence_pass: bool,
    pub order_pass: bool,
    pub diagnostics: SharpDiagnostics,
    pub notes: Vec<String>,
}

/// Values of the other bound mode, to gauge slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpDiagnostics {
    pub mode: BoundMode,
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "Q0")]
    pub q0: f64,
    #[serde(rename = "H")]
    pub h: f64,
}

pub fn check_existence(
    rd: &RootData,
    spec: &ProblemSpec,
    beta: f64,
    mode: BoundMode,
) -> Result<ConditionReport> {
    let l0 = compute_l(rd, spec, 0.0, mode)?;
    let lbeta = compute_l(rd, spec, beta, mode)?;
    let q0 = compute_q(rd, spec, 0.0, mode)?;
    let qbeta = compute_q(rd, spec, beta, mode)?;
    let h = compute_h(rd, spec, mode)?;
    let other = match mode {
        BoundMode::Conservative => BoundMode::Sharp,
        BoundMode::Sharp => BoundMode::Conservative,
    };
    let diagnostics = SharpDiagnostics {
        mode: other,
        l0: compute_l(rd, spec, 0.0, other)?,
        q0: compute_q(rd, spec, 0.0, other)?,
        h: compute_h(rd, spec, other)?,
    };
    let mut notes = Vec::new();
    let (ball, existence_pass) = match find_m(l0, q0, spec.n) {
        Ok(b) => {
            let pass = h <= b.g_m;
            if !pass {
                notes.push(format!(
                    "H = {h:.6e} exceeds g(M) = {:.6e}; existence not certified",
                    b.g_m
                ));
            }
            (b, pass)
        }
        Err(e) => {
            notes.push(e.to_string());
            (
                BallChoice {
                    delta_lambda: 0.0,
                    m: 0.0,
                    g_m: 0.0,
                },
                false,
            )
        }
    };
    let eps0 = lipschitz_modulus(spec.n, ball.m) * q0 + l0;
    let order_pass = if beta > 0.0 { lbeta < 0.5 } else { l0 < 0.5 };
    Ok(ConditionReport {
        root_index: rd.index,
        lambda: rd.lambda,
        bound_mode: mode,
        beta,
        l0,
        lbeta,
        q0,
        qbeta,
        h,
        delta_lambda: ball.delta_lambda,
        m: ball.m,
        g_m: ball.g_m,
        eps0,
        existence_pass,
        order_pass,
        diagnostics,
        notes,
    })
}

/// Vandermonde matrix `V_{ik} = lambda_k^i`.
pub fn vandermonde(roots: &[Complex64]) -> Vec<Vec<Complex64>> {
    let n = roots.len();
    (0..n)
        .map(|i| roots.iter().map(|r| r.powu(i as u32)).collect())
        .collect()
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(m: &[Vec<Complex64>]) -> Option<Vec<Vec<Complex64>>> {
    let n = m.len();
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let mut inv: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))?;
        if a[piv][col].norm() == 0.0 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for row in 0..n {
            if row != col {
                let f = a[row][col];
                if f.norm() != 0.0 {
                    for j in 0..n {
                        let (ac, ic) = (a[col][j], inv[col][j]);
                        a[row][j] -= f * ac;
                        inv[row][j] -= f * ic;
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Determinant by LU with partial pivoting.
pub fn determinant(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
            .unwrap_or(col);
        if a[piv][col].norm() == 0.0 {
            return Complex64::default();
        }
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for j in col..n {
                let v = a[col][j];
                a[row][j] -= f * v;
            }
        }
    }
    det
}

pub fn norm_1(m: &[Vec<Complex64>]) -> f64 {
    let n = m.len();
    (0..n)
        .map(|j| m.iter().map(|row| row[j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn norm_inf(m: &[Vec<Complex64>]) -> f64 {
    m.iter()
        .map(|row| row.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Gautschi's bound `||V^{-1}||_inf <= max_k prod_{j != k} (1 + |l_j|) / |l_k - l_j|`.
pub fn gautschi_bound(roots: &[Complex64]) -> f64 {
    (0..roots.len())
        .map(|k| {
            roots
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, l)| (1.0 + l.norm()) / (roots[k] - l).norm())
                .product::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Independence criterion across all roots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalReport {
    pub roots: Vec<Complex64>,
    pub per_root: Vec<ConditionReport>,
    pub vinv_norm_exact: Option<f64>,
    pub vinv_norm_gautschi: f64,
    pub vinv_norm: f64,
    pub factors: Vec<f64>,
    pub sigma_factors: Vec<f64>,
    pub criterion: f64,
    pub min_delta_lambda: f64,
    pub delta_hypothesis: bool,
    pub failing_roots: Vec<usize>,
    pub independent: bool,
    pub notes: Vec<String>,
}

/// Evaluates the criterion without requiring the per-root certificates.
pub fn fundamental_criterion(
    spec: &ProblemSpec,
    roots: &[Complex64],
    beta: f64,
    mode: BoundMode,
) -> Result<FundamentalReport> {
    let n = roots.len();
    let mut per_root = Vec::with_capacity(n);
    for k in 0..n {
        let rd = build_root_data(roots, k)?;
        per_root.push(check_existence(&rd, spec, beta, mode)?);
    }
    let v = vandermonde(roots);
    let exact = if n <= 12 { invert(&v).map(|inv| norm_1(&inv)) } else { None };
    let gautschi = n as f64 * gautschi_bound(roots);
    let vinv_norm = exact.map_or(gautschi, |e| e.min(gautschi));
    let factors: Vec<f64> = per_root
        .iter()
        .map(|r| r.m * (lipschitz_modulus(n, r.m) + 1.0))
        .collect();
    let sigma_factors: Vec<f64> = roots
        .iter()
        .map(|l| {
            let a = l.norm();
            (2..=n)
                .map(|i| (a + 1.0).powi(i as i32 - 1) - a.powi(i as i32 - 1))
                .sum()
        })
        .collect();
    let criterion = factors
        .iter()
        .zip(&sigma_factors)
        .map(|(f, s)| f * s)
        .fold(0.0, f64::max)
        * vinv_norm;
    let min_delta_lambda = per_root
        .iter()
        .map(|r| r.delta_lambda)
        .fold(f64::INFINITY, f64::min);
    let delta_hypothesis = per_root.iter().all(|r| r.m < min_delta_lambda);
    let failing_roots: Vec<usize> = per_root
        .iter()
        .filter(|r| !r.existence_pass)
        .map(|r| r.root_index)
        .collect();
    let mut notes = Vec::new();
    if !delta_hypothesis {
        notes.push(format!(
            "largest M = {:.6e} is not below min delta_lambda = {min_delta_lambda:.6e}",
            per_root.iter().map(|r| r.m).fold(0.0, f64::max)
        ));
    }
    Ok(FundamentalReport {
        roots: roots.to_vec(),
        independent: failing_roots.is_empty() && criterion < 1.0,
        per_root,
        vinv_norm_exact: exact,
        vinv_norm_gautschi: gautschi,
        vinv_norm,
        factors,
        sigma_factors,
        criterion,
        min_delta_lambda,
        delta_hypothesis,
        failing_roots,
        notes,
    })
}

/// Criterion with every per-root certificate required.
pub fn check_fundamental_system(
    spec: &ProblemSpec,
    roots: &[Complex64],
    beta: f64,
    mode: BoundMode,
) -> Result<FundamentalReport> {
    let report = fundamental_criterion(spec, roots, beta, mode)?;
    if !report.failing_roots.is_empty() {
        return Err(ApError::PerRootFailure(report.failing_roots.clone()));
    }
    Ok(report)
}

/// Conditions for the equation of the decaying part `psi`, given the AP part
/// `theta` of the solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub beta: f64,
    #[serde(rename = "L0_theta")]
    pub l0: f64,
    #[serde(rename = "Lbeta_theta")]
    pub lbeta: f64,
    #[serde(rename = "Q0_theta")]
    pub q0: f64,
    #[serde(rename = "Qbeta_theta")]
    pub qbeta: f64,
    /// Certified bound `sum_i sum_j |gamma_j|^i / |Gamma_j| sup|S| / |alpha_j|`.
    #[serde(rename = "H_theta")]
    pub h: f64,
    /// `sum_i sup |G[S]^(i)|` from the grid computation.
    #[serde(rename = "H_theta_grid")]
    pub h_grid: f64,
    pub delta_lambda: f64,
    #[serde(rename = "M_theta")]
    pub m: f64,
    #[serde(rename = "g_theta")]
    pub g_m: f64,
    pub eps: f64,
    pub pass: bool,
    pub order_pass: bool,
}

/// `L_{beta,theta}` from the coefficients of the linear part in `psi`.
fn theta_l(
    rd: &RootData,
    spec: &ProblemSpec,
    ell: &[Mixed],
    grid: &GridSpec,
    beta: f64,
    mode: BoundMode,
) -> Result<f64> {
    let alphas = shifted_alphas(rd, beta)?;
    let w = weights(rd);
    let grids: Vec<Option<GridFunction>> = ell
        .iter()
        .map(|c| c.dec.clone().map(|d| decaying_function(spec, grid, d)).transpose())
        .collect::<Result<_>>()?;
    let mut acc = 0.0;
    for (a, wj) in alphas.iter().zip(&w) {
        for (c, g) in ell.iter().zip(&grids) {
            acc += wj * ibound_split(*a, &c.ap, g.as_ref(), mode);
        }
    }
    Ok(acc)
}

/// `Q_{beta,theta}`: the Lipschitz weight of the nonlinear part in `psi`,
/// termwise as `Q_beta` with the `B_{i-k}(Theta)` factors of the shifted
/// coefficients. Equals `Q_beta` at `theta = 0`.
fn theta_q(
    rd: &RootData,
    spec: &ProblemSpec,
    bells: &[TrigPoly],
    beta: f64,
    mode: BoundMode,
) -> Result<f64> {
    let alphas = shifted_alphas(rd, beta)?;
    let w = weights(rd);
    let a_full = spec.a_full();
    let n = spec.n;
    let lam = rd.lambda.norm();
    let r_sup: Vec<f64> = spec
        .r
        .iter()
        .map(|p| sup_split(&p.mu, p.nu.as_ref()))
        .collect();
    let mut acc = 0.0;
    for (a, wj) in alphas.iter().zip(&w) {
        let b_bound: Vec<f64> = bells
            .iter()
            .map(|b| ibound_supnorm(*a, FnRef::Trig(b), mode))
            .collect();
        for k in 2..=n {
            for i in k..=n {
                let cik = binomial(i, k) as f64;
                for jp in 0..=n - i {
                    let m = i + jp;
                    let weight = cik * binomial(m, jp) as f64 * lam.powi(jp as i32);
                    let a_term = a_full[m].norm() * b_bound[i - k];
                    let r_term = if m >= n {
                        0.0
                    } else if i == k {
                        let p = &spec.r[m];
                        ibound_split(*a, &p.mu, p.nu.as_ref(), mode)
                    } else {
                        r_sup[m] * b_bound[i - k]
                    };
                    acc += wj * weight * (a_term + r_term);
                }
            }
        }
    }
    Ok(acc)
}

pub fn compute_theta_conditions(
    rd: &RootData,
    spec: &ProblemSpec,
    theta: &TrigPoly,
    grid: &GridSpec,
    beta: f64,
    mode: BoundMode,
    policy: TruncationPolicy,
) -> Result<ThetaReport> {
    let n = spec.n;
    let theta_d = derivatives(theta, n - 1);
    let alg = MixedAlgebra::new(policy, grid.t0, grid.h, grid.len);
    let coeffs = decomposed_coeffs(&alg, spec, rd.lambda, &theta_d)?;
    let l0 = theta_l(rd, spec, &coeffs.ell, grid, 0.0, mode)?;
    let lbeta = theta_l(rd, spec, &coeffs.ell, grid, beta, mode)?;
    let trig = TrigAlgebra::new(policy);
    let (bells, _) = bell_sequence(&trig, &theta_d, n - 2)?;
    let q0 = theta_q(rd, spec, &bells, 0.0, mode)?;
    let qbeta = theta_q(rd, spec, &bells, beta, mode)?;
    if !(l0 < 1.0) {
        return Err(ApError::L0ThetaGreaterThanOne(l0));
    }
    let ball = find_m(l0, q0, n)?;
    let s_sup = coeffs.source.sup_bound();
    let h: f64 = (0..n - 1)
        .map(|i| {
            rd.gammas
                .iter()
                .zip(&rd.big_gammas)
                .zip(&rd.alphas)
                .map(|((g, bg), a)| g.norm().powi(i as i32) / bg.norm() * s_sup / a.abs())
                .sum::<f64>()
        })
        .sum();
    let h_grid = source_green_sup(rd, spec, &coeffs.source, grid)?;
    let eps = lipschitz_modulus(n, ball.m) * q0 + l0;
    Ok(ThetaReport {
        beta,
        l0,
        lbeta,
        q0,
        qbeta,
        h,
        h_grid,
        delta_lambda: ball.delta_lambda,
        m: ball.m,
        g_m: ball.g_m,
        eps,
        pass: h <= ball.g_m,
        order_pass: if beta > 0.0 { lbeta < 0.5 } else { l0 < 0.5 },
    })
}

fn source_green_sup(
    rd: &RootData,
    spec: &ProblemSpec,
    source: &Mixed,
    grid: &GridSpec,
) -> Result<f64> {
    let g: CompositeGreen = composite_build(&rd.gammas)?;
    let mut total = 0.0;
    for i in 0..spec.n - 1 {
        total += tp_supnorm_upper(&composite_apply_tp(&g, &source.ap, i));
    }
    if let Some(d) = &source.dec {
        let f = decaying_function(spec, grid, d.clone())?;
        let parts = g.parts_grid(&f)?;
        for i in 0..spec.n - 1 {
            total += gf_supnorm(&g.combine(&parts, &f, i)?);
        }
    }
    Ok(total)
}

/// Grid function on `grid` whose tail follows the decay profile of `spec`,
/// fitted through the edge samples.
pub fn decaying_function(
    spec: &ProblemSpec,
    grid: &GridSpec,
    samples: Vec<Complex64>,
) -> Result<GridFunction> {
    let (kind, q) = spec
        .decay_profile()
        .unwrap_or((crate::appoly::TailKind::Zero, 1.0));
    let edges = [
        (grid.t0, samples[0].norm()),
        (grid.t_end(), samples[samples.len() - 1].norm()),
    ];
    let tail = TailModel::fit(kind, q, edges);
    GridFunction::new(grid.t0, grid.h, samples, tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riccati::{ClassTag, Perturbation};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn example(eta: f64) -> ProblemSpec {
        let mu = TrigPoly::from_modes([
            (0.0, c(2.0 * eta)),
            (1.0, c(eta / 2.0)),
            (-1.0, c(eta / 2.0)),
            (2f64.sqrt(), c(eta / 2.0)),
            (-(2f64.sqrt()), c(eta / 2.0)),
        ]);
        ProblemSpec {
            n: 3,
            a: vec![c(0.0), c(-1.0), c(0.0)],
            r: vec![Perturbation::ap(mu), Perturbation::zero(), Perturbation::zero()],
            class: ClassTag::Ap,
        }
    }

    const ROOTS: [f64; 3] = [0.0, 1.0, -1.0];

    fn roots() -> Vec<Complex64> {
        ROOTS.iter().map(|r| c(*r)).collect()
    }

    #[test]
    fn chain_at_zero_root() {
        let spec = example(0.01);
        let rd = build_root_data(&roots(), 0).unwrap();
        for beta in [0.0, 0.3, 0.7] {
            assert_eq!(compute_l(&rd, &spec, beta, BoundMode::Conservative).unwrap(), 0.0);
            let q = compute_q(&rd, &spec, beta, BoundMode::Conservative).unwrap();
            assert!((q - 2.0 / (1.0 - beta)).abs() < 1e-14);
        }
        let b = find_m(0.0, 2.0, 3).unwrap();
        let s6 = 6f64.sqrt();
        assert!((b.m - (s6 - 2.0) / 6.0).abs() < 1e-15);
        assert!((b.g_m - (3.0 * s6 - 7.0) / 9.0).abs() < 1e-15);
        let md = lipschitz_modulus(3, b.delta_lambda);
        assert!((md - 0.5).abs() < 1e-12);
    }

    #[test]
    fn q_at_second_root() {
        let spec = example(0.01);
        let rd = build_root_data(&roots(), 1).unwrap();
        for beta in [0.0, 0.5] {
            let q = compute_q(&rd, &spec, beta, BoundMode::Conservative).unwrap();
            assert!((q - (8.0 / (1.0 - beta) + 12.0 / (2.0 - beta))).abs() < 1e-13);
        }
        assert!(matches!(
            compute_q(&rd, &spec, 1.0, BoundMode::Conservative),
            Err(ApError::BetaTooLarge { .. })
        ));
    }

    #[test]
    fn h_bound_at_zero_root() {
        let eta = 0.01;
        let spec = example(eta);
        let rd = build_root_data(&roots(), 0).unwrap();
        let h = compute_h(&rd, &spec, BoundMode::Conservative).unwrap();
        let expect = 17.0 / 6.0 * eta + eta * (0.5 + 2f64.sqrt() / 3.0);
        assert!((h - expect).abs() < 1e-15);
        let sharp = compute_h(&rd, &spec, BoundMode::Sharp).unwrap();
        assert!(sharp <= h);
        let rep = check_existence(&rd, &spec, 0.5, BoundMode::Conservative).unwrap();
        assert!(rep.existence_pass && rep.order_pass);
        let rep = check_existence(&rd, &example(10.0), 0.0, BoundMode::Conservative).unwrap();
        assert!(!rep.existence_pass);
    }

    #[test]
    fn golden_section_is_maximal() {
        let b = find_m(0.1, 5.0, 4).unwrap();
        let dense = (1..200_000)
            .map(|k| b.delta_lambda * k as f64 / 200_000.0)
            .map(|d| g_value(0.1, 5.0, 4, d))
            .fold(f64::MIN, f64::max);
        assert!(b.g_m >= dense - 1e-12);
        assert!((lipschitz_modulus(4, b.delta_lambda) - 0.9 / 5.0).abs() < 1e-9);
        assert!(find_m(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn vandermonde_norms() {
        let v = vandermonde(&roots());
        let inv = invert(&v).unwrap();
        assert!((norm_1(&inv) - 2.0).abs() < 1e-15);
        assert!((norm_inf(&inv) - 2.0).abs() < 1e-15);
        assert!(3.0 * gautschi_bound(&roots()) >= 2.0);
        assert!((determinant(&v).norm() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn fundamental_criterion_example() {
        let rep = check_fundamental_system(&example(0.002), &roots(), 0.0, BoundMode::Conservative)
            .unwrap();
        let s6 = 6f64.sqrt();
        assert!((rep.factors[0] - (3.0 * s6 - 4.0) / 36.0).abs() < 1e-15);
        assert_eq!(rep.sigma_factors, vec![2.0, 4.0, 4.0]);
        assert!(rep.independent);
        assert!((rep.criterion - 2.0 * 2.0 * (3.0 * s6 - 4.0) / 36.0).abs() < 1e-14);
        assert!(matches!(
            check_fundamental_system(&example(0.01), &roots(), 0.0, BoundMode::Conservative),
            Err(ApError::PerRootFailure(_))
        ));
    }
}
