//! Rings of function values used to evaluate Bell polynomials and the
//! Riccati right-hand side over different representations.

use std::cell::Cell;

use num_complex::Complex64;

use crate::appoly::{
    tp_add, tp_mul, tp_scale, tp_supnorm_upper, TrigPoly, TruncationPolicy,
};
use crate::error::{ApError, Result};

pub trait Algebra {
    type Elem: Clone;

    fn zero(&self) -> Self::Elem;
    fn constant(&self, c: Complex64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, s: Complex64) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.scale(b, Complex64::new(-1.0, 0.0)))
    }
}

/// Plain complex numbers, e.g. values at a fixed time.
#[derive(Debug, Clone, Copy, Default)]
pub struct Scalar;

impl Algebra for Scalar {
    type Elem = Complex64;

    fn zero(&self) -> Complex64 {
        Complex64::default()
    }
    fn constant(&self, c: Complex64) -> Complex64 {
        c
    }
    fn add(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a + b
    }
    fn scale(&self, a: &Complex64, s: Complex64) -> Complex64 {
        a * s
    }
    fn mul(&self, a: &Complex64, b: &Complex64) -> Result<Complex64> {
        Ok(a * b)
    }
}

/// Trigonometric polynomials with truncation after every product; the
/// dropped coefficient mass is accumulated.
#[derive(Debug, Default)]
pub struct TrigAlgebra {
    pub policy: TruncationPolicy,
    discarded: Cell<f64>,
}

impl TrigAlgebra {
    pub fn new(policy: TruncationPolicy) -> Self {
        TrigAlgebra {
            policy,
            discarded: Cell::new(0.0),
        }
    }

    pub fn discarded(&self) -> f64 {
        self.discarded.get()
    }

    pub fn reset_discarded(&self) -> f64 {
        self.discarded.replace(0.0)
    }
}

fn as_constant(p: &TrigPoly) -> Option<Complex64> {
    match p.freqs() {
        [] => Some(Complex64::default()),
        [f] if *f == 0.0 => Some(p.coeffs()[0]),
        _ => None,
    }
}

impl Algebra for TrigAlgebra {
    type Elem = TrigPoly;

    fn zero(&self) -> TrigPoly {
        TrigPoly::zero()
    }
    fn constant(&self, c: Complex64) -> TrigPoly {
        TrigPoly::constant(c)
    }
    fn add(&self, a: &TrigPoly, b: &TrigPoly) -> TrigPoly {
        tp_add(a, b)
    }
    fn scale(&self, a: &TrigPoly, s: Complex64) -> TrigPoly {
        tp_scale(a, s)
    }
    fn mul(&self, a: &TrigPoly, b: &TrigPoly) -> Result<TrigPoly> {
        if let Some(c) = as_constant(a) {
            return Ok(tp_scale(b, c));
        }
        if let Some(c) = as_constant(b) {
            return Ok(tp_scale(a, c));
        }
        let t = tp_mul(a, b, &self.policy)?;
        self.discarded.set(self.discarded.get() + t.discarded);
        Ok(t.poly)
    }
}

/// Pointwise arithmetic on samples of a fixed grid.
#[derive(Debug, Clone, Copy)]
pub struct GridAlgebra {
    pub len: usize,
}

fn check_len(a: &[Complex64], b: &[Complex64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(ApError::GridMismatch);
    }
    Ok(())
}

impl Algebra for GridAlgebra {
    type Elem = Vec<Complex64>;

    fn zero(&self) -> Vec<Complex64> {
        vec![Complex64::default(); self.len]
    }
    fn constant(&self, c: Complex64) -> Vec<Complex64> {
        vec![c; self.len]
    }
    fn add(&self, a: &Vec<Complex64>, b: &Vec<Complex64>) -> Vec<Complex64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }
    fn scale(&self, a: &Vec<Complex64>, s: Complex64) -> Vec<Complex64> {
        a.iter().map(|x| x * s).collect()
    }
    fn mul(&self, a: &Vec<Complex64>, b: &Vec<Complex64>) -> Result<Vec<Complex64>> {
        check_len(a, b)?;
        Ok(a.iter().zip(b).map(|(x, y)| x * y).collect())
    }
}

/// Sum of an almost periodic part and samples of a decaying part.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixed {
    pub ap: TrigPoly,
    pub dec: Option<Vec<Complex64>>,
}

impl Mixed {
    pub fn ap(ap: TrigPoly) -> Self {
        Mixed { ap, dec: None }
    }

    /// Certified sup bound of the AP part plus the window max of the rest.
    pub fn sup_bound(&self) -> f64 {
        tp_supnorm_upper(&self.ap)
            + self
                .dec
                .as_ref()
                .map(|d| d.iter().map(|x| x.norm()).fold(0.0, f64::max))
                .unwrap_or(0.0)
    }

    pub fn sample(&self, t0: f64, h: f64, len: usize) -> Vec<Complex64> {
        let mut s = self.ap.sample(t0, h, len);
        if let Some(d) = &self.dec {
            for (x, y) in s.iter_mut().zip(d) {
                *x += y;
            }
        }
        s
    }
}

/// Mixed functions on a fixed grid: AP-by-AP products stay spectral,
/// anything touching the decaying part is done on the grid.
#[derive(Debug)]
pub struct MixedAlgebra {
    pub trig: TrigAlgebra,
    pub t0: f64,
    pub h: f64,
    pub len: usize,
}

impl MixedAlgebra {
    pub fn new(policy: TruncationPolicy, t0: f64, h: f64, len: usize) -> Self {
        MixedAlgebra {
            trig: TrigAlgebra::new(policy),
            t0,
            h,
            len,
        }
    }

    fn sample(&self, p: &TrigPoly) -> Vec<Complex64> {
        match as_constant(p) {
            Some(c) => vec![c; self.len],
            None => p.sample(self.t0, self.h, self.len),
        }
    }
}

fn add_opt(a: Option<Vec<Complex64>>, b: Option<Vec<Complex64>>) -> Option<Vec<Complex64>> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.iter().zip(&y).map(|(p, q)| p + q).collect()),
    }
}

fn mul_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

impl Algebra for MixedAlgebra {
    type Elem = Mixed;

    fn zero(&self) -> Mixed {
        Mixed::ap(TrigPoly::zero())
    }
    fn constant(&self, c: Complex64) -> Mixed {
        Mixed::ap(TrigPoly::constant(c))
    }
    fn add(&self, a: &Mixed, b: &Mixed) -> Mixed {
        Mixed {
            ap: tp_add(&a.ap, &b.ap),
            dec: add_opt(a.dec.clone(), b.dec.clone()),
        }
    }
    fn scale(&self, a: &Mixed, s: Complex64) -> Mixed {
        Mixed {
            ap: tp_scale(&a.ap, s),
            dec: a.dec.as_ref().map(|d| d.iter().map(|x| x * s).collect()),
        }
    }
    fn mul(&self, a: &Mixed, b: &Mixed) -> Result<Mixed> {
        for d in [&a.dec, &b.dec].into_iter().flatten() {
            if d.len() != self.len {
                return Err(ApError::GridMismatch);
            }
        }
        let ap = self.trig.mul(&a.ap, &b.ap)?;
        let mut dec = None;
        if let Some(bd) = &b.dec {
            let mut acc = mul_vec(&self.sample(&a.ap), bd);
            if let Some(ad) = &a.dec {
                for (x, (p, q)) in acc.iter_mut().zip(ad.iter().zip(bd)) {
                    *x += p * q;
                }
            }
            dec = Some(acc);
        }
        if let Some(ad) = &a.dec {
            dec = add_opt(dec, Some(mul_vec(ad, &self.sample(&b.ap))));
        }
        Ok(Mixed { ap, dec })
    }
}
