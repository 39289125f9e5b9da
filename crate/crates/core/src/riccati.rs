//! Problem assembly: characteristic roots, the constant-coefficient operator
//! `D`, and the right-hand side `P(r; lambda) + L(t, z) + F(t, Z)` of the
//! Riccati-type equation for `z = y'/y - lambda`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Mixed, MixedAlgebra};
use crate::appoly::{
    gf_add, gf_eval, gf_scale, tp_add, tp_diff, tp_scale, GridFunction, TailKind, TrigPoly,
};
use crate::bell::{bell_sequence, binomial, MAX_ORDER};
use crate::error::{ApError, Result};

const ROOT_SEPARATION: f64 = 1e-9;

/// Function class of the perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassTag {
    Ap,
    Aap,
    Aap0,
    Pap { p: f64 },
    Pap0 { p: f64 },
}

/// `r_i = mu_i + nu_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub mu: TrigPoly,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<GridFunction>,
}

impl Perturbation {
    pub fn zero() -> Self {
        Perturbation {
            mu: TrigPoly::zero(),
            nu: None,
        }
    }

    pub fn ap(mu: TrigPoly) -> Self {
        Perturbation { mu, nu: None }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.mu.eval(t) + self.nu.as_ref().map_or(Complex64::default(), |g| gf_eval(g, t))
    }
}

/// `y^(n) + sum_{i<n} (a_i + r_i(t)) y^(i) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n: usize,
    pub a: Vec<Complex64>,
    pub r: Vec<Perturbation>,
    pub class: ClassTag,
}

impl ProblemSpec {
    /// Unperturbed problem.
    pub fn unperturbed(a: Vec<Complex64>) -> Self {
        let n = a.len();
        ProblemSpec {
            n,
            a,
            r: vec![Perturbation::zero(); n],
            class: ClassTag::Ap,
        }
    }

    /// Every violated invariant, as readable messages.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.n;
        if n < 2 {
            out.push(format!("order n = {n} must be at least 2"));
        }
        if n > MAX_ORDER {
            out.push(format!("order n = {n} exceeds the supported maximum {MAX_ORDER}"));
        }
        if self.a.len() != n {
            out.push(format!("expected {n} coefficients a_0..a_{{n-1}}, got {}", self.a.len()));
        }
        if self.r.len() != n {
            out.push(format!("expected {n} perturbations r_0..r_{{n-1}}, got {}", self.r.len()));
        }
        if self.a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            out.push("coefficients must be finite".into());
        }
        let grids: Vec<(usize, &GridFunction)> = self
            .r
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.nu.as_ref().map(|g| (i, g)))
            .collect();
        if let Some((_, first)) = grids.first() {
            for (i, g) in &grids[1..] {
                if !g.same_grid(first) {
                    out.push(format!("nu_{i} lives on a different grid than the other decaying parts"));
                }
            }
        }
        for (i, g) in &grids {
            if g.decay().validate().is_err() {
                out.push(format!("nu_{i} has an invalid tail model"));
            }
        }
        match self.class {
            ClassTag::Ap => {
                if let Some((i, _)) = grids.first() {
                    out.push(format!("class AP does not allow a decaying part, but nu_{i} is present"));
                }
            }
            ClassTag::Aap | ClassTag::Aap0 => {}
            ClassTag::Pap { p } | ClassTag::Pap0 { p } => {
                if !(p >= 1.0 && p.is_finite()) {
                    out.push(format!("class exponent p = {p} must be a finite number >= 1"));
                }
                for (i, g) in &grids {
                    if !g.pnorm(p).is_finite() {
                        out.push(format!("tail of nu_{i} is not {p}-integrable"));
                    }
                }
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        match self.diagnostics().into_iter().next() {
            None => Ok(()),
            Some(msg) => Err(ApError::InvalidInput(msg)),
        }
    }

    /// `a_0..a_n` with `a_n = 1`.
    pub fn a_full(&self) -> Vec<Complex64> {
        let mut a = self.a.clone();
        a.push(Complex64::new(1.0, 0.0));
        a
    }

    pub fn has_decaying_part(&self) -> bool {
        self.r.iter().any(|p| p.nu.is_some())
    }

    /// The same problem with every decaying part removed.
    pub fn ap_part(&self) -> ProblemSpec {
        ProblemSpec {
            n: self.n,
            a: self.a.clone(),
            r: self.r.iter().map(|p| Perturbation::ap(p.mu.clone())).collect(),
            class: ClassTag::Ap,
        }
    }

    /// Grid shared by the decaying parts.
    pub fn decaying_grid(&self) -> Option<&GridFunction> {
        self.r.iter().find_map(|p| p.nu.as_ref())
    }

    /// Decay kind and rate shared by the decaying parts (slowest wins).
    pub fn decay_profile(&self) -> Option<(TailKind, f64)> {
        let mut best: Option<(TailKind, f64)> = None;
        for g in self.r.iter().filter_map(|p| p.nu.as_ref()) {
            let d = g.decay();
            if d.kind == TailKind::Zero {
                continue;
            }
            best = Some(match best {
                None => (d.kind, d.q),
                Some((TailKind::PowerBound, q)) if d.kind == TailKind::PowerBound => (d.kind, q.min(d.q)),
                Some((TailKind::PowerBound, q)) => (TailKind::PowerBound, q),
                Some((_, _)) if d.kind == TailKind::PowerBound => (d.kind, d.q),
                Some((k, q)) => (k, q.min(d.q)),
            });
        }
        best
    }
}

fn horner(a_full: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::default();
    let mut dp = Complex64::default();
    for c in a_full.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Roots of `x^n + sum a_i x^i`, sorted by real part.
pub fn char_roots(a: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.len();
    if n == 0 {
        return Err(ApError::InvalidInput("empty coefficient list".into()));
    }
    let mut a_full = a.to_vec();
    a_full.push(Complex64::new(1.0, 0.0));
    let radius = 1.0 + a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    let max_iter = 500;
    let mut converged = false;
    let mut last = f64::INFINITY;
    for _ in 0..max_iter {
        let mut biggest: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = horner(&a_full, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| 1.0 / (z[k] - z[j]))
                .sum();
            let w = ratio / (1.0 - ratio * repulsion);
            z[k] -= w;
            biggest = biggest.max(w.norm() / (1.0 + z[k].norm()));
        }
        last = biggest;
        if biggest < 1e-15 {
            converged = true;
            break;
        }
    }
    let real_input = a.iter().all(|c| c.im == 0.0);
    for r in z.iter_mut() {
        let (p, dp) = horner(&a_full, *r);
        if dp.norm() > 0.0 {
            *r -= p / dp;
        }
        if real_input && r.im.abs() < 1e-12 {
            r.im = 0.0;
        }
        if r.norm() < 1e-14 {
            *r = Complex64::default();
        }
    }
    for r in &z {
        let (p, _) = horner(&a_full, *r);
        if !converged && p.norm() >= 1e-12 * (1.0 + r.norm().powi(n as i32)) {
            return Err(ApError::NoConvergence {
                iterations: max_iter,
                last_step: last,
            });
        }
    }
    z.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    for i in 0..n {
        for j in i + 1..n {
            if (z[i].re - z[j].re).abs() < ROOT_SEPARATION {
                return Err(ApError::RepeatedRealParts(i, j));
            }
        }
    }
    Ok(z)
}

/// Coefficients `a_0..a_{n-1}` of `prod (x - roots_i)`.
pub fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::default(); c.len() + 1];
        for (d, v) in c.iter().enumerate() {
            next[d + 1] += v;
            next[d] -= v * r;
        }
        c = next;
    }
    c.pop();
    c
}

/// Data attached to the distinguished root `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootData {
    pub index: usize,
    pub lambda: Complex64,
    pub others: Vec<Complex64>,
    pub gammas: Vec<Complex64>,
    pub big_gammas: Vec<Complex64>,
    pub alphas: Vec<f64>,
    pub alpha_tildes: Vec<f64>,
}

impl RootData {
    /// `(-1)^n prod gamma_j^{-1} = sum_j 1 / (Gamma_j gamma_j)`.
    pub fn kappa(&self) -> Complex64 {
        let n = self.gammas.len() + 1;
        let prod: Complex64 = self.gammas.iter().product();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sign / prod
    }

    pub fn min_abs_alpha(&self) -> f64 {
        self.alphas.iter().map(|a| a.abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_gamma(&self) -> f64 {
        self.gammas.iter().map(|g| g.norm()).fold(0.0, f64::max)
    }
}

pub fn build_root_data(roots: &[Complex64], pick: usize) -> Result<RootData> {
    let n = roots.len();
    if pick >= n || n < 2 {
        return Err(ApError::InvalidInput(format!(
            "cannot pick root {pick} of {n}"
        )));
    }
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i].re - roots[j].re).abs() < ROOT_SEPARATION {
                return Err(ApError::RepeatedRealParts(i, j));
            }
        }
    }
    let lambda = roots[pick];
    let others: Vec<Complex64> = roots
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != pick)
        .map(|(_, r)| *r)
        .collect();
    let gammas: Vec<Complex64> = others.iter().map(|r| r - lambda).collect();
    let big_gammas = gammas
        .iter()
        .enumerate()
        .map(|(j, g)| {
            gammas
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, h)| g - h)
                .product()
        })
        .collect();
    let alphas = gammas.iter().map(|g| g.re).collect();
    let alpha_tildes = gammas
        .iter()
        .map(|g| (0..n - 1).map(|i| g.norm().powi(i as i32)).sum())
        .collect();
    Ok(RootData {
        index: pick,
        lambda,
        others,
        gammas,
        big_gammas,
        alphas,
        alpha_tildes,
    })
}

/// `P(r; lambda) = sum_k lambda^k r_k`, split into AP and decaying parts.
pub fn p_r_lambda(spec: &ProblemSpec, lambda: Complex64) -> (TrigPoly, Option<GridFunction>) {
    perturbation_taylor(spec, lambda, 0)
}

/// `(1/k!) d^k/dx^k P(r; x)` at `lambda`, split into AP and decaying parts.
pub fn perturbation_taylor(
    spec: &ProblemSpec,
    lambda: Complex64,
    k: usize,
) -> (TrigPoly, Option<GridFunction>) {
    let mut ap = TrigPoly::zero();
    let mut dec: Option<GridFunction> = None;
    for (m, p) in spec.r.iter().enumerate().skip(k) {
        let w = binomial(m, k) as f64 * lambda.powu((m - k) as u32);
        ap = tp_add(&ap, &tp_scale(&p.mu, w));
        if let Some(g) = &p.nu {
            let scaled = gf_scale(g, w);
            dec = Some(match dec {
                None => scaled,
                Some(d) => gf_add(&d, &scaled).unwrap_or(d),
            });
        }
    }
    (ap, dec)
}

/// Uniform grid `t0 + k h`, `k < len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t0: f64,
    pub h: f64,
    pub len: usize,
}

impl GridSpec {
    /// `[-half_width, half_width]` with step close to `h`.
    pub fn symmetric(half_width: f64, h: f64) -> Self {
        let steps = (2.0 * half_width / h).round().max(1.0) as usize;
        GridSpec {
            t0: -half_width,
            h: 2.0 * half_width / steps as f64,
            len: steps + 1,
        }
    }

    pub fn of(g: &GridFunction) -> Self {
        GridSpec {
            t0: g.t0(),
            h: g.h(),
            len: g.len(),
        }
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.h
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len - 1)
    }
}

/// Decaying parts of `spec` resampled onto `grid`.
pub fn sample_decaying(spec: &ProblemSpec, grid: &GridSpec) -> Vec<Option<Vec<Complex64>>> {
    spec.r
        .iter()
        .map(|p| {
            p.nu.as_ref().map(|g| {
                if GridSpec::of(g) == *grid {
                    g.samples().to_vec()
                } else {
                    (0..grid.len).map(|k| gf_eval(g, grid.time(k))).collect()
                }
            })
        })
        .collect()
}

/// Coefficients of the equation for `psi` once `theta` (with derivatives
/// `theta[0..n-1]`) solves the AP-only problem: `z = theta + psi`.
pub fn decomposed_coeffs(
    alg: &MixedAlgebra,
    spec: &ProblemSpec,
    lambda: Complex64,
    theta: &[TrigPoly],
) -> Result<RiccatiCoeffs<Mixed>> {
    let grid = GridSpec {
        t0: alg.t0,
        h: alg.h,
        len: alg.len,
    };
    let dec = sample_decaying(spec, &grid);
    let full: Vec<Mixed> = spec
        .r
        .iter()
        .zip(&dec)
        .map(|(p, d)| Mixed {
            ap: p.mu.clone(),
            dec: d.clone(),
        })
        .collect();
    let nu_only: Vec<Mixed> = dec
        .iter()
        .map(|d| Mixed {
            ap: TrigPoly::zero(),
            dec: d.clone(),
        })
        .collect();
    let th: Vec<Mixed> = theta.iter().map(|t| Mixed::ap(t.clone())).collect();
    let shifted = RiccatiCoeffs::assemble(alg, lambda, &spec.a_full(), &full).shift(alg, &th)?;
    let zero_a = vec![Complex64::default(); spec.n + 1];
    let source = RiccatiCoeffs::assemble(alg, lambda, &zero_a, &nu_only).rhs(alg, &th)?;
    Ok(shifted.with_source(source))
}

/// `theta, theta', ..., theta^(count-1)`.
pub fn derivatives(theta: &TrigPoly, count: usize) -> Vec<TrigPoly> {
    let mut out = Vec::with_capacity(count);
    let mut d = theta.clone();
    for _ in 0..count {
        let next = tp_diff(&d);
        out.push(d);
        d = next;
    }
    out
}

/// `sum_{m >= k} C(m, k) lambda^{m-k} c_m`, the k-th Taylor coefficient of
/// `sum_m c_m x^m` at `lambda`.
pub fn taylor_coeff(c: &[Complex64], lambda: Complex64, k: usize) -> Complex64 {
    (k..c.len())
        .map(|m| binomial(m, k) as f64 * lambda.powu((m - k) as u32) * c[m])
        .sum()
}

/// Coefficients of `D z = sum_{j=1}^n d_j z^{(j-1)}`.
pub fn d_coeffs(a_full: &[Complex64], lambda: Complex64) -> Vec<Complex64> {
    (1..a_full.len()).map(|j| taylor_coeff(a_full, lambda, j)).collect()
}

/// `D z` computed spectrally.
pub fn d_apply(spec: &ProblemSpec, lambda: Complex64, z: &TrigPoly) -> TrigPoly {
    let mut acc = TrigPoly::zero();
    let mut deriv = z.clone();
    for d in d_coeffs(&spec.a_full(), lambda) {
        acc = tp_add(&acc, &tp_scale(&deriv, d));
        deriv = tp_diff(&deriv);
    }
    acc
}

/// Right-hand side `source + sum_k ell_k Z_{k-1} + sum_k rho_k f_{k-1}(Z)`,
/// with `ell` indexed by `k = 1..n-1` and `rho` by `k = 2..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiCoeffs<E> {
    pub n: usize,
    pub source: E,
    pub ell: Vec<E>,
    pub rho: Vec<E>,
}

impl<E: Clone> RiccatiCoeffs<E> {
    /// Coefficients of the undecomposed equation for coefficient values
    /// `a_0..a_n` and perturbations `r_0..r_{n-1}`.
    pub fn assemble<A: Algebra<Elem = E>>(
        alg: &A,
        lambda: Complex64,
        a_full: &[Complex64],
        r: &[E],
    ) -> Self {
        let n = a_full.len() - 1;
        let lam = |p: usize| lambda.powu(p as u32);
        let r_at = |m: usize| if m < n { Some(&r[m]) } else { None };
        let mut source = alg.zero();
        for (k, rk) in r.iter().enumerate() {
            source = alg.add(&source, &alg.scale(rk, lam(k)));
        }
        let ell = (1..n)
            .map(|k| {
                let mut acc = alg.zero();
                for m in k..n {
                    let w = binomial(m, k) as f64 * lam(m - k);
                    acc = alg.add(&acc, &alg.scale(&r[m], w));
                }
                acc
            })
            .collect();
        let rho = (2..=n)
            .map(|k| {
                let mut konst = Complex64::default();
                let mut acc = alg.zero();
                for j in 0..=n - k {
                    let w = binomial(k + j, j) as f64 * lam(j);
                    konst += w * a_full[k + j];
                    if let Some(rm) = r_at(k + j) {
                        acc = alg.add(&acc, &alg.scale(rm, w));
                    }
                }
                alg.add(&acc, &alg.constant(konst))
            })
            .collect();
        RiccatiCoeffs {
            n,
            source,
            ell,
            rho,
        }
    }

    /// `L(t, Z) = sum_k ell_k Z_{k-1}`.
    pub fn l_eval<A: Algebra<Elem = E>>(&self, alg: &A, z: &[E]) -> Result<E> {
        self.check_arity(z)?;
        let mut acc = alg.zero();
        for (k, c) in self.ell.iter().enumerate() {
            acc = alg.add(&acc, &alg.mul(c, &z[k])?);
        }
        Ok(acc)
    }

    /// `F(t, Z) = sum_k rho_k f_{k-1}(Z)`.
    pub fn f_eval<A: Algebra<Elem = E>>(&self, alg: &A, z: &[E]) -> Result<E> {
        self.check_arity(z)?;
        let (_, f) = bell_sequence(alg, z, self.n - 1)?;
        let mut acc = alg.zero();
        for (idx, c) in self.rho.iter().enumerate() {
            let k = idx + 2;
            acc = alg.add(&acc, &alg.mul(c, &f[k - 1])?);
        }
        Ok(acc)
    }

    pub fn rhs<A: Algebra<Elem = E>>(&self, alg: &A, z: &[E]) -> Result<E> {
        let l = self.l_eval(alg, z)?;
        let f = self.f_eval(alg, z)?;
        Ok(alg.add(&alg.add(&self.source, &l), &f))
    }

    /// Coefficients of the equation for `Psi` after substituting `Z = Theta + Psi`.
    pub fn shift<A: Algebra<Elem = E>>(&self, alg: &A, theta: &[E]) -> Result<Self> {
        self.check_arity(theta)?;
        let n = self.n;
        let (b, _) = bell_sequence(alg, theta, n - 1)?;
        let rho_at = |i: usize| &self.rho[i - 2];
        let mut ell = Vec::with_capacity(n - 1);
        for k in 1..n {
            let mut acc = self.ell[k - 1].clone();
            for i in (k + 1).max(2)..=n {
                let w = Complex64::new(binomial(i, k) as f64, 0.0);
                acc = alg.add(&acc, &alg.scale(&alg.mul(rho_at(i), &b[i - k])?, w));
            }
            ell.push(acc);
        }
        let mut rho = Vec::with_capacity(n - 1);
        for k in 2..=n {
            let mut acc = alg.zero();
            for i in k..=n {
                let w = Complex64::new(binomial(i, k) as f64, 0.0);
                acc = alg.add(&acc, &alg.scale(&alg.mul(rho_at(i), &b[i - k])?, w));
            }
            rho.push(acc);
        }
        Ok(RiccatiCoeffs {
            n,
            source: self.rhs(alg, theta)?,
            ell,
            rho,
        })
    }

    pub fn with_source(mut self, source: E) -> Self {
        self.source = source;
        self
    }

    pub fn map<F, T>(&self, f: F) -> RiccatiCoeffs<T>
    where
        F: Fn(&E) -> T,
    {
        RiccatiCoeffs {
            n: self.n,
            source: f(&self.source),
            ell: self.ell.iter().map(&f).collect(),
            rho: self.rho.iter().map(&f).collect(),
        }
    }

    fn check_arity(&self, z: &[E]) -> Result<()> {
        if z.len() + 1 < self.n {
            return Err(ApError::InvalidInput(format!(
                "expected {} derivatives, got {}",
                self.n - 1,
                z.len()
            )));
        }
        Ok(())
    }
}

/// Spectral coefficients of the AP part of `spec`.
pub fn ap_coeffs<A: Algebra<Elem = TrigPoly>>(
    alg: &A,
    spec: &ProblemSpec,
    lambda: Complex64,
) -> RiccatiCoeffs<TrigPoly> {
    let r: Vec<TrigPoly> = spec.r.iter().map(|p| p.mu.clone()).collect();
    RiccatiCoeffs::assemble(alg, lambda, &spec.a_full(), &r)
}

/// `L(t, Z)` for the AP part of `spec`.
pub fn l_apply<A: Algebra<Elem = TrigPoly>>(
    alg: &A,
    spec: &ProblemSpec,
    lambda: Complex64,
    z: &[TrigPoly],
) -> Result<TrigPoly> {
    ap_coeffs(alg, spec, lambda).l_eval(alg, z)
}

/// `F(t, Z)` for the AP part of `spec`.
pub fn f_apply<A: Algebra<Elem = TrigPoly>>(
    alg: &A,
    spec: &ProblemSpec,
    lambda: Complex64,
    z: &[TrigPoly],
) -> Result<TrigPoly> {
    ap_coeffs(alg, spec, lambda).f_eval(alg, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Scalar, TrigAlgebra};
    use crate::appoly::{tp_mul, tp_sub, TruncationPolicy};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn roots_of_cubic_example() {
        let roots = char_roots(&[c(0.0), c(-1.0), c(0.0)]).unwrap();
        assert_eq!(roots, vec![c(-1.0), c(0.0), c(1.0)]);
        let roots = char_roots(&[c(2.0), c(-3.0)]).unwrap();
        assert!((roots[0] - c(1.0)).norm() < 1e-14 && (roots[1] - c(2.0)).norm() < 1e-14);
    }

    #[test]
    fn repeated_real_parts_rejected() {
        // (x - (1+i))(x - (1-i)) = x^2 - 2x + 2
        assert_eq!(
            char_roots(&[c(2.0), c(-2.0)]),
            Err(ApError::RepeatedRealParts(0, 1))
        );
    }

    #[test]
    fn root_data_for_example_roots() {
        let roots = [c(0.0), c(1.0), c(-1.0)];
        let rd = build_root_data(&roots, 0).unwrap();
        assert_eq!(rd.gammas, vec![c(1.0), c(-1.0)]);
        assert_eq!(rd.big_gammas, vec![c(2.0), c(-2.0)]);
        assert_eq!(rd.alpha_tildes, vec![2.0, 2.0]);
        let rd = build_root_data(&roots, 1).unwrap();
        assert_eq!(rd.gammas, vec![c(-1.0), c(-2.0)]);
        assert_eq!(rd.big_gammas, vec![c(1.0), c(-1.0)]);
        let rd = build_root_data(&[c(1.0), c(-2.0)], 0).unwrap();
        assert_eq!(rd.big_gammas, vec![c(1.0)]);
        // kappa equals sum 1/(Gamma gamma)
        let rd = build_root_data(&[c(0.3), c(-1.2), c(2.0), c(0.9)], 2).unwrap();
        let s: Complex64 = rd
            .gammas
            .iter()
            .zip(&rd.big_gammas)
            .map(|(g, b)| 1.0 / (g * b))
            .sum();
        assert!((s - rd.kappa()).norm() < 1e-13);
    }

    #[test]
    fn cubic_specialization() {
        // generic L and F against the n = 3 closed forms
        let lambda = Complex64::new(0.7, -0.2);
        let a2 = Complex64::new(-0.4, 0.1);
        let r1 = TrigPoly::cos(1.0, 0.3);
        let r2 = TrigPoly::sin(2f64.sqrt(), 0.2);
        let spec = ProblemSpec {
            n: 3,
            a: vec![c(0.5), c(-1.0), a2],
            r: vec![
                Perturbation::ap(TrigPoly::real_constant(0.1)),
                Perturbation::ap(r1.clone()),
                Perturbation::ap(r2.clone()),
            ],
            class: ClassTag::Ap,
        };
        let alg = TrigAlgebra::new(TruncationPolicy::default());
        let pol = TruncationPolicy::default();
        let z = TrigPoly::cos(0.5, 0.1);
        let dz = tp_diff(&z);
        let zz = [z.clone(), dz.clone()];
        let l = l_apply(&alg, &spec, lambda, &zz).unwrap();
        let expect = tp_add(
            &tp_mul(&r2, &dz, &pol).unwrap().poly,
            &tp_mul(&tp_add(&tp_scale(&r2, 2.0 * lambda), &r1), &z, &pol).unwrap().poly,
        );
        assert!(tp_sub(&l, &expect).coeffs().iter().all(|x| x.norm() < 1e-14));

        let f = f_apply(&alg, &spec, lambda, &zz).unwrap();
        let z2 = tp_mul(&z, &z, &pol).unwrap().poly;
        let coeff = tp_add(&r2, &TrigPoly::constant(a2 + 3.0 * lambda));
        let expect = tp_add(
            &tp_add(
                &tp_mul(&coeff, &z2, &pol).unwrap().poly,
                &tp_scale(&tp_mul(&z, &dz, &pol).unwrap().poly, c(3.0)),
            ),
            &tp_mul(&z2, &z, &pol).unwrap().poly,
        );
        assert!(tp_sub(&f, &expect).coeffs().iter().all(|x| x.norm() < 1e-14));
    }

    #[test]
    fn d_has_shifted_characteristic_roots() {
        let a = poly_from_roots(&[c(-1.5), Complex64::new(0.2, 1.0), c(0.9), Complex64::new(2.1, -0.4)]);
        let roots = char_roots(&a).unwrap();
        let spec = ProblemSpec::unperturbed(a);
        for pick in 0..roots.len() {
            let rd = build_root_data(&roots, pick).unwrap();
            let d = d_coeffs(&spec.a_full(), rd.lambda);
            for g in &rd.gammas {
                let v: Complex64 = d.iter().enumerate().map(|(j, c)| c * g.powu(j as u32)).sum();
                assert!(v.norm() < 1e-10, "residual {v}");
            }
        }
        let spec = ProblemSpec::unperturbed(vec![c(0.0), c(-1.0), c(0.0)]);
        let out = d_apply(&spec, c(0.0), &TrigPoly::cos(1.0, 1.0));
        assert!(out.coeff_distance(&TrigPoly::cos(1.0, -2.0)) < 1e-15);
    }

    #[test]
    fn source_is_p_r_lambda() {
        let spec = ProblemSpec {
            n: 3,
            a: vec![c(0.0), c(-1.0), c(0.0)],
            r: vec![
                Perturbation::ap(TrigPoly::cos(1.0, 1.0)),
                Perturbation::ap(TrigPoly::real_constant(2.0)),
                Perturbation::ap(TrigPoly::real_constant(3.0)),
            ],
            class: ClassTag::Ap,
        };
        let (p, dec) = p_r_lambda(&spec, c(2.0));
        assert!(dec.is_none());
        let expect = tp_add(&TrigPoly::cos(1.0, 1.0), &TrigPoly::real_constant(16.0));
        assert!(p.coeff_distance(&expect) < 1e-14);
    }

    #[test]
    fn shift_reproduces_rhs() {
        // rhs(Theta + Psi) = shifted.rhs(Psi) for scalars, n = 4
        let a_full = [c(0.2), c(-0.5), c(0.1), Complex64::new(0.3, 0.2), c(1.0)];
        let r = [c(0.05), Complex64::new(0.02, -0.01), c(-0.03), c(0.04)];
        let lambda = Complex64::new(-0.4, 0.6);
        let coeffs = RiccatiCoeffs::assemble(&Scalar, lambda, &a_full, &r);
        let theta = [Complex64::new(0.1, 0.05), c(-0.2), c(0.07)];
        let psi = [c(0.03), Complex64::new(-0.01, 0.02), c(0.05)];
        let sum: Vec<Complex64> = theta.iter().zip(&psi).map(|(a, b)| a + b).collect();
        let direct = coeffs.rhs(&Scalar, &sum).unwrap();
        let shifted = coeffs.shift(&Scalar, &theta).unwrap();
        let via = shifted.rhs(&Scalar, &psi).unwrap();
        assert!((direct - via).norm() < 1e-15);
    }

    #[test]
    fn diagnostics_report_class_mismatch() {
        let g = GridFunction::from_fn(
            -1.0,
            0.5,
            5,
            |_| c(0.0),
            crate::appoly::TailModel::zero(),
        )
        .unwrap();
        let mut spec = ProblemSpec::unperturbed(vec![c(0.0), c(-1.0), c(0.0)]);
        assert!(spec.diagnostics().is_empty());
        spec.r[0].nu = Some(g);
        assert_eq!(spec.diagnostics().len(), 1);
        spec.class = ClassTag::Aap;
        assert!(spec.diagnostics().is_empty());
        spec.n = 1;
        assert!(spec.check().is_err());
    }
}
