//! Trigonometric polynomials (the almost periodic part) and windowed grid
//! functions with a tail model (the decaying part).

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ApError, Result};

/// Frequencies closer than this are treated as equal.
pub const EPS_FREQ: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-14;

/// One serialized mode `c e^{i freq t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub freq: f64,
    pub re: f64,
    pub im: f64,
}

/// Finite sum `sum_m c_m exp(i nu_m t)` with strictly increasing frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Mode>", try_from = "Vec<Mode>")]
pub struct TrigPoly {
    freqs: Vec<f64>,
    coeffs: Vec<Complex64>,
    real_valued: bool,
}

impl From<TrigPoly> for Vec<Mode> {
    fn from(p: TrigPoly) -> Self {
        p.modes()
            .map(|(freq, c)| Mode {
                freq,
                re: c.re,
                im: c.im,
            })
            .collect()
    }
}

impl TryFrom<Vec<Mode>> for TrigPoly {
    type Error = ApError;

    fn try_from(modes: Vec<Mode>) -> Result<Self> {
        for m in &modes {
            if !(m.freq.is_finite() && m.re.is_finite() && m.im.is_finite()) {
                return Err(ApError::InvalidInput(format!(
                    "non-finite mode at frequency {}",
                    m.freq
                )));
            }
        }
        Ok(TrigPoly::from_modes(
            modes.into_iter().map(|m| (m.freq, Complex64::new(m.re, m.im))),
        ))
    }
}

/// Truncation settings applied after every product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub eps_drop: f64,
    pub k_max: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            eps_drop: 1e-13,
            k_max: 2000,
        }
    }
}

/// A truncated polynomial together with the coefficient mass removed.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub poly: TrigPoly,
    pub discarded: f64,
}

fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Sort by frequency and merge runs that lie within `EPS_FREQ` of the run start.
fn merge_sorted(mut modes: Vec<(f64, Complex64)>) -> Vec<(f64, Complex64)> {
    modes.sort_by(|a, b| cmp_f64(&a.0, &b.0));
    let mut out: Vec<(f64, Complex64)> = Vec::with_capacity(modes.len());
    let mut start = f64::NAN;
    for (f, c) in modes {
        match out.last_mut() {
            Some(last) if f - start <= EPS_FREQ => {
                if f.abs() < last.0.abs() {
                    last.0 = f;
                }
                last.1 += c;
            }
            _ => {
                start = f;
                out.push((f, c));
            }
        }
    }
    out
}

fn snap(f: f64) -> f64 {
    if f.abs() < EPS_FREQ {
        0.0
    } else {
        f
    }
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly {
            freqs: Vec::new(),
            coeffs: Vec::new(),
            real_valued: true,
        }
    }

    pub fn constant(c: Complex64) -> Self {
        if c == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        TrigPoly {
            freqs: vec![0.0],
            coeffs: vec![c],
            real_valued: c.im == 0.0,
        }
    }

    pub fn real_constant(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    /// `amp cos(freq t)`.
    pub fn cos(freq: f64, amp: f64) -> Self {
        let half = Complex64::new(0.5 * amp, 0.0);
        Self::from_modes([(freq, half), (-freq, half)])
    }

    /// `amp sin(freq t)`.
    pub fn sin(freq: f64, amp: f64) -> Self {
        let c = Complex64::new(0.0, -0.5 * amp);
        Self::from_modes([(freq, c), (-freq, c.conj())])
    }

    /// `c exp(i freq t)`.
    pub fn exp_i(freq: f64, c: Complex64) -> Self {
        Self::from_modes([(freq, c)])
    }

    /// Build from arbitrary modes: merges near-equal frequencies, drops exact
    /// zeros and detects conjugate symmetry.
    pub fn from_modes<I: IntoIterator<Item = (f64, Complex64)>>(modes: I) -> Self {
        let merged = merge_sorted(modes.into_iter().map(|(f, c)| (snap(f), c)).collect());
        let kept: Vec<(f64, Complex64)> = merged
            .into_iter()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .collect();
        let scale = kept.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        let symmetric = is_symmetric(&kept, SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE));
        if symmetric {
            Self::from_real_modes(kept)
        } else {
            let (freqs, coeffs) = kept.into_iter().unzip();
            TrigPoly {
                freqs,
                coeffs,
                real_valued: false,
            }
        }
    }

    /// Build a conjugate-symmetric polynomial by folding onto nonnegative
    /// frequencies, averaging, and mirroring.
    fn from_real_modes(modes: Vec<(f64, Complex64)>) -> Self {
        let mut folded = Vec::with_capacity(modes.len() + 1);
        for (f, c) in modes {
            let f = snap(f);
            if f == 0.0 {
                folded.push((0.0, c));
                folded.push((0.0, c.conj()));
            } else if f > 0.0 {
                folded.push((f, c));
            } else {
                folded.push((-f, c.conj()));
            }
        }
        let half = merge_sorted(folded);
        let mut freqs = Vec::with_capacity(2 * half.len());
        let mut coeffs = Vec::with_capacity(2 * half.len());
        for &(f, c) in half.iter().rev() {
            let c = 0.5 * c;
            if f > 0.0 && (c.re != 0.0 || c.im != 0.0) {
                freqs.push(-f);
                coeffs.push(c.conj());
            }
        }
        for &(f, c) in &half {
            let c = 0.5 * c;
            if f == 0.0 {
                if c.re != 0.0 {
                    freqs.push(0.0);
                    coeffs.push(Complex64::new(c.re, 0.0));
                }
            } else if c.re != 0.0 || c.im != 0.0 {
                freqs.push(f);
                coeffs.push(c);
            }
        }
        TrigPoly {
            freqs,
            coeffs,
            real_valued: true,
        }
    }

    fn rebuild(modes: Vec<(f64, Complex64)>, real: bool) -> Self {
        if real {
            Self::from_real_modes(modes)
        } else {
            Self::from_modes(modes)
        }
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn modes(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.freqs.iter().copied().zip(self.coeffs.iter().copied())
    }

    /// Coefficient at `freq` (within `EPS_FREQ`), zero if absent.
    pub fn coeff_at(&self, freq: f64) -> Complex64 {
        self.modes()
            .find(|(f, _)| (f - freq).abs() <= EPS_FREQ)
            .map(|(_, c)| c)
            .unwrap_or_default()
    }

    pub fn mean(&self) -> Complex64 {
        self.coeff_at(0.0)
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.modes()
            .map(|(f, c)| c * Complex64::from_polar(1.0, f * t))
            .sum()
    }

    /// k-th derivative at t, evaluated spectrally.
    pub fn eval_deriv(&self, t: f64, k: u32) -> Complex64 {
        self.modes()
            .map(|(f, c)| c * Complex64::new(0.0, f).powu(k) * Complex64::from_polar(1.0, f * t))
            .sum()
    }

    /// Samples on `t0 + k h`, `k < len`.
    pub fn sample(&self, t0: f64, h: f64, len: usize) -> Vec<Complex64> {
        (0..len).map(|k| self.eval(t0 + k as f64 * h)).collect()
    }

    pub fn max_abs_freq(&self) -> f64 {
        self.freqs.iter().map(|f| f.abs()).fold(0.0, f64::max)
    }

    /// Largest coefficient-wise distance to `other` after aligning frequencies.
    pub fn coeff_distance(&self, other: &TrigPoly) -> f64 {
        tp_sub(self, other)
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

fn is_symmetric(modes: &[(f64, Complex64)], tol: f64) -> bool {
    let n = modes.len();
    (0..n).all(|i| {
        let (f, c) = modes[i];
        let (g, d) = modes[n - 1 - i];
        (f + g).abs() <= EPS_FREQ && (c - d.conj()).norm() <= tol
    })
}

pub fn tp_add(a: &TrigPoly, b: &TrigPoly) -> TrigPoly {
    let modes = a.modes().chain(b.modes()).collect();
    TrigPoly::rebuild(modes, a.real_valued && b.real_valued)
}

pub fn tp_sub(a: &TrigPoly, b: &TrigPoly) -> TrigPoly {
    let modes = a.modes().chain(b.modes().map(|(f, c)| (f, -c))).collect();
    TrigPoly::rebuild(modes, a.real_valued && b.real_valued)
}

pub fn tp_scale(a: &TrigPoly, s: Complex64) -> TrigPoly {
    if s == Complex64::new(0.0, 0.0) {
        return TrigPoly::zero();
    }
    TrigPoly {
        freqs: a.freqs.clone(),
        coeffs: a.coeffs.iter().map(|c| c * s).collect(),
        real_valued: a.real_valued && s.im == 0.0,
    }
}

/// Frequency-sum convolution followed by dropping coefficients below
/// `eps_drop`; more than `k_max` surviving modes is an error.
pub fn tp_mul(a: &TrigPoly, b: &TrigPoly, policy: &TruncationPolicy) -> Result<Truncation> {
    if a.is_empty() || b.is_empty() {
        return Ok(Truncation {
            poly: TrigPoly::zero(),
            discarded: 0.0,
        });
    }
    let mut modes = Vec::with_capacity(a.len() * b.len());
    for (f, c) in a.modes() {
        for (g, d) in b.modes() {
            modes.push((f + g, c * d));
        }
    }
    let product = TrigPoly::rebuild(modes, a.real_valued && b.real_valued);
    let cut = tp_truncate(&product, policy.eps_drop, usize::MAX);
    if cut.poly.len() > policy.k_max {
        return Err(ApError::ProductOverflow {
            count: cut.poly.len(),
            cap: policy.k_max,
        });
    }
    Ok(cut)
}

pub fn tp_diff(a: &TrigPoly) -> TrigPoly {
    let (freqs, coeffs) = a
        .modes()
        .filter(|(f, _)| *f != 0.0)
        .map(|(f, c)| (f, c * Complex64::new(0.0, f)))
        .unzip();
    TrigPoly {
        freqs,
        coeffs,
        real_valued: a.real_valued,
    }
}

/// Split `int_0^t a` into `mean * t + osc(t) - osc(0)`.
pub fn tp_antiderivative(a: &TrigPoly) -> (Complex64, TrigPoly) {
    let (freqs, coeffs) = a
        .modes()
        .filter(|(f, _)| *f != 0.0)
        .map(|(f, c)| (f, c / Complex64::new(0.0, f)))
        .unzip();
    (
        a.mean(),
        TrigPoly {
            freqs,
            coeffs,
            real_valued: a.real_valued,
        },
    )
}

/// Certified bound `sum |c_m|` on the sup-norm.
pub fn tp_supnorm_upper(a: &TrigPoly) -> f64 {
    a.coeffs.iter().map(|c| c.norm()).sum()
}

/// Max of |a| over an equispaced grid on `[-window, window]`.
pub fn tp_supnorm_lower(a: &TrigPoly, window: f64, samples: usize) -> f64 {
    let samples = samples.max(2);
    let h = 2.0 * window / (samples - 1) as f64;
    (0..samples)
        .map(|k| a.eval(-window + k as f64 * h).norm())
        .fold(0.0, f64::max)
}

/// Drop modes below `eps_drop`, then keep at most `k_max` of the largest.
/// Conjugate pairs are kept or dropped together for real-valued input.
pub fn tp_truncate(a: &TrigPoly, eps_drop: f64, k_max: usize) -> Truncation {
    let n = a.len();
    // units: groups of indices that must be kept together
    let mut units: Vec<(f64, Vec<usize>)> = Vec::new();
    if a.real_valued {
        for i in 0..n {
            let j = n - 1 - i;
            if i > j {
                break;
            }
            let idx = if i == j { vec![i] } else { vec![i, j] };
            units.push((a.coeffs[i].norm(), idx));
        }
    } else {
        units = (0..n).map(|i| (a.coeffs[i].norm(), vec![i])).collect();
    }
    let mut keep = vec![false; n];
    let mut survivors: Vec<&(f64, Vec<usize>)> =
        units.iter().filter(|(m, _)| *m >= eps_drop).collect();
    survivors.sort_by(|x, y| cmp_f64(&y.0, &x.0));
    let mut count = 0usize;
    for (_, idx) in survivors {
        if count + idx.len() > k_max {
            continue;
        }
        count += idx.len();
        for &i in idx {
            keep[i] = true;
        }
    }
    let mut discarded = 0.0;
    let mut freqs = Vec::with_capacity(count);
    let mut coeffs = Vec::with_capacity(count);
    for i in 0..n {
        if keep[i] {
            freqs.push(a.freqs[i]);
            coeffs.push(a.coeffs[i]);
        } else {
            discarded += a.coeffs[i].norm();
        }
    }
    Truncation {
        poly: TrigPoly {
            freqs,
            coeffs,
            real_valued: a.real_valued,
        },
        discarded,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailKind {
    ExpBound,
    PowerBound,
    Zero,
}

/// Decay bound `|f(t)| <= tail(t)` outside the sampled window:
/// `C e^{-q|t|}`, `C / (1 + |t|^q)`, or zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub kind: TailKind,
    #[serde(rename = "C")]
    pub c: f64,
    pub q: f64,
}

impl TailModel {
    pub fn zero() -> Self {
        TailModel {
            kind: TailKind::Zero,
            c: 0.0,
            q: 1.0,
        }
    }

    pub fn power(c: f64, q: f64) -> Self {
        TailModel {
            kind: TailKind::PowerBound,
            c,
            q,
        }
    }

    pub fn exp(c: f64, q: f64) -> Self {
        TailModel {
            kind: TailKind::ExpBound,
            c,
            q,
        }
    }

    /// Tail profile with unit constant.
    pub fn shape(&self, t: f64) -> f64 {
        match self.kind {
            TailKind::Zero => 0.0,
            TailKind::ExpBound => (-self.q * t.abs()).exp(),
            TailKind::PowerBound => 1.0 / (1.0 + t.abs().powf(self.q)),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        if self.kind == TailKind::Zero {
            0.0
        } else {
            self.c * self.shape(t)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(ApError::TailUnbounded(format!("constant {}", self.c)));
        }
        if self.kind != TailKind::Zero && !(self.q.is_finite() && self.q > 0.0) {
            return Err(ApError::TailUnbounded(format!("rate {}", self.q)));
        }
        Ok(())
    }

    /// Smallest constant of the given shape that covers both edge samples.
    pub fn fit(kind: TailKind, q: f64, edges: [(f64, f64); 2]) -> Self {
        let probe = TailModel { kind, c: 1.0, q };
        let c = match kind {
            TailKind::Zero => 0.0,
            _ => edges
                .iter()
                .map(|&(t, v)| v / probe.shape(t))
                .fold(0.0, f64::max),
        };
        TailModel { kind, c, q }
    }

    pub fn scaled(&self, s: f64) -> Self {
        TailModel {
            c: self.c * s.abs(),
            ..*self
        }
    }

    /// Bound for a sum, valid for `|t| >= 1`.
    pub fn sum(&self, other: &TailModel, edge: f64) -> Self {
        use TailKind::*;
        match (self.kind, other.kind) {
            (Zero, _) => *other,
            (_, Zero) => *self,
            (ExpBound, ExpBound) => TailModel::exp(self.c + other.c, self.q.min(other.q)),
            (PowerBound, PowerBound) => TailModel::power(self.c + other.c, self.q.min(other.q)),
            (PowerBound, ExpBound) => self.absorb_exp(other, edge),
            (ExpBound, PowerBound) => other.absorb_exp(self, edge),
        }
    }

    fn absorb_exp(&self, e: &TailModel, edge: f64) -> Self {
        // sup_{x >= edge} (1 + x^q) e^{-r x}
        let x_star = (self.q / e.q).max(edge.abs());
        let k = [edge.abs(), x_star]
            .iter()
            .map(|&x| (1.0 + x.powf(self.q)) * (-e.q * x).exp())
            .fold(0.0, f64::max);
        TailModel::power(self.c + e.c * k, self.q)
    }

    /// Bound for a product.
    pub fn product(&self, other: &TailModel) -> Self {
        use TailKind::*;
        match (self.kind, other.kind) {
            (Zero, _) | (_, Zero) => TailModel::zero(),
            (ExpBound, ExpBound) => TailModel::exp(self.c * other.c, self.q + other.q),
            (PowerBound, PowerBound) => TailModel::power(self.c * other.c, self.q + other.q),
            (ExpBound, PowerBound) => TailModel::exp(self.c * other.c, self.q),
            (PowerBound, ExpBound) => TailModel::exp(self.c * other.c, other.q),
        }
    }
}

/// Samples on `t0 + k h` plus a decay model outside the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GridRecord", try_from = "GridRecord")]
pub struct GridFunction {
    t0: f64,
    h: f64,
    samples: Vec<Complex64>,
    decay: TailModel,
}

#[derive(Serialize, Deserialize)]
struct GridRecord {
    t0: f64,
    h: f64,
    samples: Vec<[f64; 2]>,
    decay: TailModel,
}

impl From<GridFunction> for GridRecord {
    fn from(g: GridFunction) -> Self {
        GridRecord {
            t0: g.t0,
            h: g.h,
            samples: g.samples.iter().map(|c| [c.re, c.im]).collect(),
            decay: g.decay,
        }
    }
}

impl TryFrom<GridRecord> for GridFunction {
    type Error = ApError;

    fn try_from(r: GridRecord) -> Result<Self> {
        GridFunction::new(
            r.t0,
            r.h,
            r.samples.iter().map(|s| Complex64::new(s[0], s[1])).collect(),
            r.decay,
        )
    }
}

impl GridFunction {
    pub fn new(t0: f64, h: f64, samples: Vec<Complex64>, decay: TailModel) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) || !t0.is_finite() {
            return Err(ApError::InvalidInput(format!("bad grid t0 = {t0}, h = {h}")));
        }
        if samples.len() < 2 {
            return Err(ApError::InvalidInput("grid needs at least 2 samples".into()));
        }
        if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(ApError::InvalidInput("non-finite grid sample".into()));
        }
        decay.validate()?;
        Ok(GridFunction {
            t0,
            h,
            samples,
            decay,
        })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(
        t0: f64,
        h: f64,
        len: usize,
        f: F,
        decay: TailModel,
    ) -> Result<Self> {
        Self::new(t0, h, (0..len).map(|k| f(t0 + k as f64 * h)).collect(), decay)
    }

    pub fn zeros_like(&self) -> Self {
        GridFunction {
            samples: vec![Complex64::default(); self.len()],
            decay: TailModel::zero(),
            ..*self
        }
    }

    /// Replace samples (same grid) and tail.
    pub fn with_samples(&self, samples: Vec<Complex64>, decay: TailModel) -> Self {
        debug_assert_eq!(samples.len(), self.len());
        GridFunction {
            t0: self.t0,
            h: self.h,
            samples,
            decay,
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.h
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn decay(&self) -> &TailModel {
        &self.decay
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.len() == other.len()
            && (self.t0 - other.t0).abs() <= 1e-12 * (1.0 + self.t0.abs())
            && (self.h - other.h).abs() <= 1e-12 * self.h
    }

    /// Value continued outside the window along the tail shape from the
    /// nearest edge sample.
    pub fn continuation(&self, t: f64) -> Complex64 {
        let (te, se) = if t < self.t0 {
            (self.t0, self.samples[0])
        } else {
            (self.t_end(), self.samples[self.len() - 1])
        };
        let base = self.decay.shape(te);
        if base == 0.0 {
            return Complex64::default();
        }
        se * (self.decay.shape(t) / base)
    }

    /// Whether the tail model dominates both edge samples (10% slack).
    pub fn check_tail(&self) -> bool {
        let ok = |t: f64, s: Complex64| s.norm() <= 1.1 * self.decay.value(t) + 1e-300;
        ok(self.t0, self.samples[0]) && ok(self.t_end(), self.samples[self.len() - 1])
    }

    /// Window p-norm including the tail contribution.
    pub fn pnorm(&self, p: f64) -> f64 {
        let h = self.h;
        let n = self.len();
        let mut acc = 0.0;
        for k in 0..n {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            acc += w * h * self.samples[k].norm().powf(p);
        }
        acc += tail_integral_p(&self.decay, self.t0.abs(), p)
            + tail_integral_p(&self.decay, self.t_end().abs(), p);
        acc.powf(1.0 / p)
    }
}

/// `int_x^inf tail(s)^p ds` for `x >= 0`, infinite when the tail is not p-integrable.
fn tail_integral_p(tail: &TailModel, x: f64, p: f64) -> f64 {
    match tail.kind {
        TailKind::Zero => 0.0,
        TailKind::ExpBound => tail.c.powf(p) * (-p * tail.q * x).exp() / (p * tail.q),
        TailKind::PowerBound => {
            let e = p * tail.q;
            if e <= 1.0 {
                return f64::INFINITY;
            }
            // (1 + s^q)^{-p} <= s^{-qp}
            let x = x.max(1.0);
            tail.c.powf(p) * x.powf(1.0 - e) / (e - 1.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridOp {
    Add,
    Mul,
}

pub fn gf_arith(a: &GridFunction, b: &GridFunction, op: GridOp) -> Result<GridFunction> {
    if !a.same_grid(b) {
        return Err(ApError::GridMismatch);
    }
    let edge = a.t0.abs().min(a.t_end().abs()).max(1.0);
    let (samples, decay) = match op {
        GridOp::Add => (
            a.samples.iter().zip(&b.samples).map(|(x, y)| x + y).collect(),
            a.decay.sum(&b.decay, edge),
        ),
        GridOp::Mul => (
            a.samples.iter().zip(&b.samples).map(|(x, y)| x * y).collect(),
            a.decay.product(&b.decay),
        ),
    };
    Ok(a.with_samples(samples, decay))
}

pub fn gf_add(a: &GridFunction, b: &GridFunction) -> Result<GridFunction> {
    gf_arith(a, b, GridOp::Add)
}

pub fn gf_mul(a: &GridFunction, b: &GridFunction) -> Result<GridFunction> {
    gf_arith(a, b, GridOp::Mul)
}

pub fn gf_scale(a: &GridFunction, s: Complex64) -> GridFunction {
    a.with_samples(a.samples.iter().map(|x| x * s).collect(), a.decay.scaled(s.norm()))
}

/// Fourth-order differences: central inside, one-sided near the edges.
pub fn gf_diff(a: &GridFunction) -> GridFunction {
    let n = a.len();
    let s = &a.samples;
    let h12 = 12.0 * a.h;
    let d: Vec<Complex64> = if n < 5 {
        (0..n)
            .map(|k| {
                let (i, j) = if k == 0 { (0, 1) } else { (k - 1, k.min(n - 2) + 1) };
                (s[j] - s[i]) / ((j - i) as f64 * a.h)
            })
            .collect()
    } else {
        (0..n)
            .map(|k| {
                if k >= 2 && k + 2 < n {
                    (s[k - 2] - 8.0 * s[k - 1] + 8.0 * s[k + 1] - s[k + 2]) / h12
                } else if k == 0 {
                    (-25.0 * s[0] + 48.0 * s[1] - 36.0 * s[2] + 16.0 * s[3] - 3.0 * s[4]) / h12
                } else if k == 1 {
                    (-3.0 * s[0] - 10.0 * s[1] + 18.0 * s[2] - 6.0 * s[3] + s[4]) / h12
                } else if k == n - 2 {
                    -(-3.0 * s[n - 1] - 10.0 * s[n - 2] + 18.0 * s[n - 3] - 6.0 * s[n - 4]
                        + s[n - 5])
                        / h12
                } else {
                    -(-25.0 * s[n - 1] + 48.0 * s[n - 2] - 36.0 * s[n - 3] + 16.0 * s[n - 4]
                        - 3.0 * s[n - 5])
                        / h12
                }
            })
            .collect()
    };
    let decay = TailModel::fit(
        a.decay.kind,
        a.decay.q,
        [(a.t0, d[0].norm()), (a.t_end(), d[n - 1].norm())],
    );
    a.with_samples(d, decay)
}

/// Linear interpolation inside the window, tail continuation outside.
pub fn gf_eval(a: &GridFunction, t: f64) -> Complex64 {
    if t < a.t0 || t > a.t_end() {
        return a.continuation(t);
    }
    let x = (t - a.t0) / a.h;
    let k = (x.floor() as usize).min(a.len() - 2);
    let frac = x - k as f64;
    a.samples[k] * (1.0 - frac) + a.samples[k + 1] * frac
}

pub fn gf_supnorm(a: &GridFunction) -> f64 {
    a.samples
        .iter()
        .map(|s| s.norm())
        .fold(0.0, f64::max)
        .max(a.decay.value(a.t0))
        .max(a.decay.value(a.t_end()))
}
