//! Scalar dichotomy Green operators `G_omega`, their majorants `I_alpha`,
//! and the composite operator `G = sum_j G_{gamma_j} / Gamma_j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::appoly::{gf_supnorm, tp_supnorm_upper, GridFunction, TailKind, TailModel, TrigPoly};
use crate::error::{ApError, Result};

const MIN_REAL_PART: f64 = 1e-12;
const BURN_IN: f64 = 36.0;

/// Kernel of the unique bounded solution of `y' = omega y + f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenKernel {
    omega: Complex64,
}

impl GreenKernel {
    pub fn new(omega: Complex64) -> Result<Self> {
        if !(omega.re.abs() >= MIN_REAL_PART) || !omega.im.is_finite() {
            return Err(ApError::ZeroRealPart(omega.re));
        }
        Ok(GreenKernel { omega })
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }
}

/// Exact spectral action `c -> c / (i nu - omega)`.
pub fn green_apply_tp(k: &GreenKernel, f: &TrigPoly) -> TrigPoly {
    let w = k.omega;
    TrigPoly::from_modes(f.modes().map(|(nu, c)| (nu, c / (Complex64::new(0.0, nu) - w))))
}

/// `phi_1, phi_2, phi_3` at `z`.
fn phis(z: Complex64) -> [Complex64; 3] {
    if z.norm() < 0.5 {
        let mut out = [Complex64::default(); 3];
        for (k, o) in out.iter_mut().enumerate() {
            // sum_j z^j / (j + k + 1)!
            let mut term = Complex64::new(1.0, 0.0);
            for m in 1..=(k + 1) {
                term /= m as f64;
            }
            let mut acc = Complex64::default();
            for j in 0..30 {
                acc += term;
                term = term * z / (j + k + 2) as f64;
            }
            *o = acc;
        }
        out
    } else {
        let p1 = (z.exp() - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [p1, p2, p3]
    }
}

/// `h int_0^1 e^{z(1-u)} L_p(u) du` for the Lagrange basis on `nodes`.
fn quad_weights(z: Complex64, h: f64, nodes: &[f64]) -> Vec<Complex64> {
    let [p1, p2, p3] = phis(z);
    let j = [p1, p2, 2.0 * p3];
    nodes
        .iter()
        .enumerate()
        .map(|(a, &pa)| {
            let others: Vec<f64> = nodes
                .iter()
                .enumerate()
                .filter(|(b, _)| *b != a)
                .map(|(_, &p)| p)
                .collect();
            let denom: f64 = others.iter().map(|p| pa - p).product();
            // coefficients of prod (u - p) in increasing powers
            let mut poly = vec![1.0];
            for p in &others {
                let mut next = vec![0.0; poly.len() + 1];
                for (d, c) in poly.iter().enumerate() {
                    next[d + 1] += c;
                    next[d] -= c * p;
                }
                poly = next;
            }
            h * poly
                .iter()
                .zip(j.iter())
                .map(|(c, jj)| jj * (c / denom))
                .sum::<Complex64>()
        })
        .collect()
}

const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// `int_0^U e^{omega_in u} g(u) du` with `Re omega_in < 0`, composite 8-point Gauss.
fn upwind_integral<F: Fn(f64) -> Complex64>(omega_in: Complex64, g: F) -> Complex64 {
    let a = -omega_in.re;
    let span = BURN_IN / a * 1.2;
    let width = 0.5 / omega_in.norm().max(1.0);
    let panels = ((span / width).ceil() as usize).clamp(1, 400_000);
    let width = span / panels as f64;
    let mut acc = Complex64::default();
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        for (x, w) in GL_X.iter().zip(GL_W.iter()) {
            for s in [-1.0, 1.0] {
                let u = mid + s * x * half;
                acc += (omega_in * u).exp() * g(u) * (w * half);
            }
        }
    }
    acc
}

/// Recurrence for `G_omega` on raw samples with ENO-quadratic interpolation.
/// `y_init` is the value at the upwind edge.
pub(crate) fn green_samples(
    omega: Complex64,
    h: f64,
    f: &[Complex64],
    y_init: Complex64,
) -> Vec<Complex64> {
    let n = f.len();
    let mut y = vec![Complex64::default(); n];
    let z = omega * h;
    let forward = omega.re < 0.0;
    let (decay, z_eff) = if forward { (z.exp(), z) } else { ((-z).exp(), -z) };
    let (w_lin, w_left, w_right) = if forward {
        (
            quad_weights(z_eff, h, &[0.0, 1.0]),
            quad_weights(z_eff, h, &[-1.0, 0.0, 1.0]),
            quad_weights(z_eff, h, &[0.0, 1.0, 2.0]),
        )
    } else {
        (
            quad_weights(z_eff, h, &[1.0, 0.0]),
            quad_weights(z_eff, h, &[2.0, 1.0, 0.0]),
            quad_weights(z_eff, h, &[1.0, 0.0, -1.0]),
        )
    };
    // integral over [t_k, t_{k+1}] against the kernel, interval k
    let local = |k: usize| -> Complex64 {
        let left_ok = k >= 1 && n >= 3;
        let right_ok = k + 2 < n;
        let use_left = match (left_ok, right_ok) {
            (true, true) => {
                (f[k + 1] - 2.0 * f[k] + f[k - 1]).norm()
                    <= (f[k + 2] - 2.0 * f[k + 1] + f[k]).norm()
            }
            (l, _) => l,
        };
        if use_left {
            w_left[0] * f[k - 1] + w_left[1] * f[k] + w_left[2] * f[k + 1]
        } else if right_ok {
            w_right[0] * f[k] + w_right[1] * f[k + 1] + w_right[2] * f[k + 2]
        } else {
            w_lin[0] * f[k] + w_lin[1] * f[k + 1]
        }
    };
    if forward {
        y[0] = y_init;
        for k in 0..n - 1 {
            y[k + 1] = decay * y[k] + local(k);
        }
    } else {
        y[n - 1] = y_init;
        for k in (0..n - 1).rev() {
            y[k] = decay * y[k + 1] - local(k);
        }
    }
    y
}

/// `G_omega[f]` on the grid of `f`; the upwind edge value integrates the tail
/// continuation of `f`.
pub fn green_apply_grid(k: &GreenKernel, f: &GridFunction) -> Result<GridFunction> {
    f.decay().validate()?;
    let omega = k.omega;
    let a = omega.re.abs();
    let init = if f.decay().kind == TailKind::Zero || f.decay().c == 0.0 {
        Complex64::default()
    } else if omega.re < 0.0 {
        let t0 = f.t0();
        upwind_integral(omega, |u| f.continuation(t0 - u))
    } else {
        let te = f.t_end();
        -upwind_integral(-omega, |u| f.continuation(te + u))
    };
    let y = green_samples(omega, f.h(), f.samples(), init);
    let decay = output_tail(f, &y, a);
    Ok(f.with_samples(y, decay))
}

fn output_tail(f: &GridFunction, y: &[Complex64], a: f64) -> TailModel {
    let d = f.decay();
    let (kind, q, base) = match d.kind {
        TailKind::Zero => (TailKind::ExpBound, a, 0.0),
        TailKind::PowerBound => (TailKind::PowerBound, d.q, d.c / a),
        TailKind::ExpBound => (TailKind::ExpBound, d.q.min(a), d.c / a),
    };
    let fitted = TailModel::fit(
        kind,
        q,
        [(f.t0(), y[0].norm()), (f.t_end(), y[y.len() - 1].norm())],
    );
    TailModel {
        kind,
        c: fitted.c.max(base),
        q,
    }
}

/// How the majorant `I_alpha` is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    /// `sup|f| / |alpha|`.
    #[default]
    Conservative,
    /// Quadrature of `|f|` against the kernel with explicit slack terms.
    Sharp,
}

/// A function argument for the majorant bounds.
#[derive(Debug, Clone, Copy)]
pub enum FnRef<'a> {
    Trig(&'a TrigPoly),
    Grid(&'a GridFunction),
}

/// Upper bound on `sup_t I_alpha[|f|](t)`.
pub fn ibound_supnorm(alpha: f64, f: FnRef<'_>, mode: BoundMode) -> f64 {
    let a = alpha.abs();
    match f {
        FnRef::Trig(p) => {
            let default = tp_supnorm_upper(p) / a;
            match mode {
                BoundMode::Conservative => default,
                BoundMode::Sharp => sharp_trig(alpha, p).min(default),
            }
        }
        FnRef::Grid(g) => {
            let default = gf_supnorm(g) / a;
            match mode {
                BoundMode::Conservative => default,
                BoundMode::Sharp => sharp_grid(alpha, g).min(default),
            }
        }
    }
}

/// `I_alpha[g]` on the grid of the samples `g >= 0`, starting from zero at
/// the upwind edge.
pub fn majorant_samples(alpha: f64, g: &[f64], h: f64) -> Vec<f64> {
    let f: Vec<Complex64> = g.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    green_samples(Complex64::new(alpha, 0.0), h, &f, Complex64::default())
        .into_iter()
        .map(|v| v.norm())
        .collect()
}

fn sharp_trig(alpha: f64, p: &TrigPoly) -> f64 {
    if p.is_empty() {
        return 0.0;
    }
    let a = alpha.abs();
    let sup = tp_supnorm_upper(p);
    let lip: f64 = p.modes().map(|(f, c)| f.abs() * c.norm()).sum();
    let window = 100.0;
    let h = (0.05 / p.max_abs_freq().max(1.0)).min(0.005).min(0.05 / a);
    let pad = BURN_IN / a;
    let len = (2.0 * (window + pad) / h).ceil() as usize + 1;
    let t0 = -(window + pad);
    let g: Vec<Complex64> = (0..len)
        .map(|k| Complex64::new(p.eval(t0 + k as f64 * h).norm(), 0.0))
        .collect();
    let y = green_samples(Complex64::new(alpha, 0.0), h, &g, Complex64::default());
    let lo = ((pad) / h).floor() as usize;
    let hi = (len - 1).saturating_sub(lo);
    let peak = y[lo..=hi].iter().map(|v| v.norm()).fold(0.0, f64::max);
    peak + 2.0 * lip * h / a + sup * h + sup * (-BURN_IN).exp() / a
}

fn sharp_grid(alpha: f64, g: &GridFunction) -> f64 {
    let a = alpha.abs();
    let abs: Vec<Complex64> = g
        .samples()
        .iter()
        .map(|s| Complex64::new(s.norm(), 0.0))
        .collect();
    let lip = abs
        .windows(2)
        .map(|w| (w[1] - w[0]).norm() / g.h())
        .fold(0.0, f64::max);
    let sup = gf_supnorm(g);
    let absf = g.with_samples(abs, *g.decay());
    let Ok(k) = GreenKernel::new(Complex64::new(alpha, 0.0)) else {
        return f64::INFINITY;
    };
    let Ok(y) = green_apply_grid(&k, &absf) else {
        return f64::INFINITY;
    };
    let peak = y.samples().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let edge = g.decay().value(g.t0()).max(g.decay().value(g.t_end())) / a;
    peak.max(edge) + 2.0 * lip * g.h() / a + sup * g.h()
}

/// `G = sum_j G_{gamma_j} / Gamma_j` for `D = prod_j (d/dt - gamma_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeGreen {
    gammas: Vec<Complex64>,
    big_gammas: Vec<Complex64>,
}

pub fn composite_build(gammas: &[Complex64]) -> Result<CompositeGreen> {
    if gammas.is_empty() {
        return Err(ApError::InvalidInput("composite operator needs a root".into()));
    }
    for (i, g) in gammas.iter().enumerate() {
        GreenKernel::new(*g)?;
        for (j, h) in gammas.iter().enumerate().skip(i + 1) {
            if (g - h).norm() < 1e-10 {
                return Err(ApError::DegenerateRoots(i, j));
            }
        }
    }
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
    Ok(CompositeGreen {
        gammas: gammas.to_vec(),
        big_gammas,
    })
}

impl CompositeGreen {
    pub fn gammas(&self) -> &[Complex64] {
        &self.gammas
    }

    pub fn big_gammas(&self) -> &[Complex64] {
        &self.big_gammas
    }

    /// Order `n` of the original equation.
    pub fn order(&self) -> usize {
        self.gammas.len() + 1
    }

    /// `sum_j gamma_j^i / Gamma_j` for `i = 0..n-1`.
    pub fn residue_sums(&self) -> Vec<Complex64> {
        (0..self.gammas.len())
            .map(|i| {
                self.gammas
                    .iter()
                    .zip(&self.big_gammas)
                    .map(|(g, b)| g.powu(i as u32) / b)
                    .sum()
            })
            .collect()
    }

    /// Spectral multiplier of the i-th derivative of `G`: `x^i / prod (x - gamma_j)`.
    pub fn multiplier(&self, nu: f64, i: u32) -> Complex64 {
        let x = Complex64::new(0.0, nu);
        let den: Complex64 = self.gammas.iter().map(|g| x - g).product();
        x.powu(i) / den
    }

    /// `G_{gamma_j}[f]` for every j.
    pub fn parts_grid(&self, f: &GridFunction) -> Result<Vec<GridFunction>> {
        self.gammas
            .iter()
            .map(|g| green_apply_grid(&GreenKernel::new(*g)?, f))
            .collect()
    }

    /// i-th derivative of `G[f]` assembled from precomputed parts.
    pub fn combine(&self, parts: &[GridFunction], f: &GridFunction, i: usize) -> Result<GridFunction> {
        let n = self.order();
        if i > n - 1 {
            return Err(ApError::InvalidInput(format!(
                "derivative order {i} exceeds {}",
                n - 1
            )));
        }
        let len = f.len();
        let mut acc = vec![Complex64::default(); len];
        let mut tail = TailModel::zero();
        let edge = f.t0().abs().min(f.t_end().abs()).max(1.0);
        for ((g, b), part) in self.gammas.iter().zip(&self.big_gammas).zip(parts) {
            let w = g.powu(i as u32) / b;
            for (x, y) in acc.iter_mut().zip(part.samples()) {
                *x += w * y;
            }
            tail = tail.sum(&part.decay().scaled(w.norm()), edge);
        }
        if i == n - 1 {
            for (x, y) in acc.iter_mut().zip(f.samples()) {
                *x += y;
            }
            tail = tail.sum(f.decay(), edge);
        }
        Ok(f.with_samples(acc, tail))
    }
}

/// i-th derivative of `G[f]`, exact in frequency space.
pub fn composite_apply_tp(g: &CompositeGreen, f: &TrigPoly, i: usize) -> TrigPoly {
    TrigPoly::from_modes(f.modes().map(|(nu, c)| (nu, c * g.multiplier(nu, i as u32))))
}

/// i-th derivative of `G[f]` on the grid (`i <= n - 1`).
pub fn composite_apply_grid(g: &CompositeGreen, f: &GridFunction, i: usize) -> Result<GridFunction> {
    let parts = g.parts_grid(f)?;
    g.combine(&parts, f, i)
}
