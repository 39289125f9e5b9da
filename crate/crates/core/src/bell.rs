//! Complete Bell polynomials `B_i`, the shifted polynomials
//! `f_i = B_{i+1} - x_{i+1}`, and the Lipschitz majorant `m(delta)`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::algebra::Algebra;
use crate::error::{ApError, Result};
use num_complex::Complex64;

/// Largest order served from the shared cache.
pub const MAX_ORDER: usize = 16;

/// `coeff * prod_k x_k^{exps[k-1]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub exps: Vec<u32>,
    pub coeff: u64,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn weighted_degree(&self) -> u32 {
        self.exps
            .iter()
            .enumerate()
            .map(|(k, e)| (k as u32 + 1) * e)
            .sum()
    }

    fn is_linear_in(&self, var: usize) -> bool {
        self.degree() == 1 && self.exps.get(var).copied() == Some(1)
    }
}

#[derive(Debug, Clone)]
pub struct BellTable {
    order: usize,
    polys: Vec<Vec<Monomial>>,
}

impl BellTable {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn poly(&self, i: usize) -> &[Monomial] {
        &self.polys[i]
    }
}

/// Expand `B_0..B_n` symbolically via `B_{i+1} = sum_j C(i,j) B_{i-j} x_{j+1}`.
pub fn bell_build(n: usize) -> BellTable {
    let mut polys: Vec<BTreeMap<Vec<u32>, u64>> = Vec::with_capacity(n + 1);
    let mut b0 = BTreeMap::new();
    b0.insert(vec![0u32; n], 1u64);
    polys.push(b0);
    for i in 0..n {
        let mut next: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for j in 0..=i {
            let c = binomial(i, j);
            for (exps, coeff) in &polys[i - j] {
                let mut e = exps.clone();
                e[j] += 1;
                *next.entry(e).or_insert(0) += c * coeff;
            }
        }
        polys.push(next);
    }
    BellTable {
        order: n,
        polys: polys
            .into_iter()
            .map(|m| {
                m.into_iter()
                    .rev()
                    .map(|(exps, coeff)| Monomial { exps, coeff })
                    .collect()
            })
            .collect(),
    }
}

/// Shared table of order `MAX_ORDER`.
pub fn bell_table() -> &'static BellTable {
    static TABLE: OnceLock<BellTable> = OnceLock::new();
    TABLE.get_or_init(|| bell_build(MAX_ORDER))
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for j in 0..k {
        acc = acc * (n - j) as u64 / (j as u64 + 1);
    }
    acc
}

/// Monomials of `f_i = B_{i+1} - x_{i+1}`.
pub fn f_poly(i: usize, table: &BellTable) -> Vec<Monomial> {
    assert!(i < table.order, "f_{i} needs a table of order {}", i + 1);
    table.polys[i + 1]
        .iter()
        .filter(|m| !m.is_linear_in(i))
        .cloned()
        .collect()
}

fn eval_monomials<A: Algebra>(alg: &A, monos: &[Monomial], x: &[A::Elem]) -> Result<A::Elem> {
    let mut powers: BTreeMap<(usize, u32), A::Elem> = BTreeMap::new();
    let mut acc = alg.zero();
    for m in monos {
        let mut term: Option<A::Elem> = None;
        for (k, &e) in m.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let arg = x.get(k).ok_or_else(|| {
                ApError::InvalidInput(format!("Bell evaluation needs argument x_{}", k + 1))
            })?;
            if !powers.contains_key(&(k, e)) {
                let mut p = arg.clone();
                for _ in 1..e {
                    p = alg.mul(&p, arg)?;
                }
                powers.insert((k, e), p);
            }
            let p = &powers[&(k, e)];
            term = Some(match term {
                None => p.clone(),
                Some(t) => alg.mul(&t, p)?,
            });
        }
        let c = Complex64::new(m.coeff as f64, 0.0);
        acc = match term {
            None => alg.add(&acc, &alg.constant(c)),
            Some(t) => alg.add(&acc, &alg.scale(&t, c)),
        };
    }
    Ok(acc)
}

/// `B_i(x)` from the monomial expansion.
pub fn bell_eval<A: Algebra>(alg: &A, table: &BellTable, i: usize, x: &[A::Elem]) -> Result<A::Elem> {
    eval_monomials(alg, table.poly(i), x)
}

/// `f_i(x_1..x_i)` from the monomial expansion.
pub fn f_eval<A: Algebra>(alg: &A, table: &BellTable, i: usize, x: &[A::Elem]) -> Result<A::Elem> {
    eval_monomials(alg, &f_poly(i, table), x)
}

/// `B_0..B_m` and `f_0..f_m` by the recursion; uses `x_1..x_m`.
pub fn bell_sequence<A: Algebra>(
    alg: &A,
    x: &[A::Elem],
    m: usize,
) -> Result<(Vec<A::Elem>, Vec<A::Elem>)> {
    if x.len() < m {
        return Err(ApError::InvalidInput(format!(
            "Bell sequence of order {m} needs {m} arguments, got {}",
            x.len()
        )));
    }
    let mut b = vec![alg.constant(Complex64::new(1.0, 0.0))];
    let mut f = vec![alg.zero()];
    for i in 1..=m {
        b.push(alg.add(&f[i - 1], &x[i - 1]));
        // f_i = sum_{j<i} C(i,j) B_{i-j} x_{j+1}
        let mut fi = alg.zero();
        for j in 0..i {
            let prod = alg.mul(&b[i - j], &x[j])?;
            fi = alg.add(&fi, &alg.scale(&prod, Complex64::new(binomial(i, j) as f64, 0.0)));
        }
        f.push(fi);
    }
    Ok((b, f))
}

/// Derivative polynomials `d f_i / d x_k` evaluated on the diagonal with all
/// coefficients made absolute, as coefficients in `delta`.
fn majorant_gradients(n: usize) -> Vec<Vec<f64>> {
    let table = bell_table();
    let mut out = Vec::new();
    for i in 1..n {
        for k in 0..i {
            let mut poly = vec![0.0; i + 2];
            for m in f_poly(i, table) {
                let e = m.exps[k];
                if e > 0 {
                    poly[(m.degree() - 1) as usize] += (m.coeff * e as u64) as f64;
                }
            }
            out.push(poly);
        }
    }
    out
}

/// `m(delta) = max_{i,k} (d f^_i / d x_k)(delta, ..., delta)`; for `n = 3`
/// this is `3 delta^2 + 3 delta`.
pub fn lipschitz_modulus(n: usize, delta: f64) -> f64 {
    static CACHE: OnceLock<Vec<Vec<Vec<f64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| (0..=MAX_ORDER).map(majorant_gradients).collect());
    cache[n.min(MAX_ORDER)]
        .iter()
        .map(|poly| {
            let mut acc = 0.0;
            let mut p = 1.0;
            for &c in poly {
                acc += c * p;
                p *= delta;
            }
            acc
        })
        .fold(0.0, f64::max)
}
