use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{CharacterGroup, DirichletCharacter};
use crate::error::{Error, Result};
use crate::measures::cis;
use crate::numtheory::{gcd, is_prime, mod_inv, pairwise_sum, primes_up_to, rem};

/// Largest polynomial degree accepted by [`weil_sum_check`].
pub const WEIL_DEGREE_CAP: usize = 32;

const TOL: f64 = 1e-9;

/// A polynomial over `F_p`, coefficients little-endian with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FpPoly {
    pub p: u64,
    pub coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, coeffs: &[i64]) -> FpPoly {
        FpPoly::from_residues(p, coeffs.iter().map(|&c| rem(c, p)).collect())
    }

    fn from_residues(p: u64, mut coeffs: Vec<u64>) -> FpPoly {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FpPoly { p, coeffs }
    }

    fn one(p: u64) -> FpPoly {
        FpPoly { p, coeffs: vec![1] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| (acc * x + c) % self.p)
    }

    fn lead(&self) -> u64 {
        *self.coeffs.last().unwrap_or(&0)
    }

    fn monic(&self) -> FpPoly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = mod_inv(self.lead(), self.p).unwrap();
        FpPoly::from_residues(self.p, self.coeffs.iter().map(|&c| c * inv % self.p).collect())
    }

    fn derivative(&self) -> FpPoly {
        let p = self.p;
        FpPoly::from_residues(p, self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| (i as u64 % p) * c % p).collect())
    }

    fn mul(&self, o: &FpPoly) -> FpPoly {
        if self.is_zero() || o.is_zero() {
            return FpPoly::from_residues(self.p, vec![]);
        }
        let mut out = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + a * b) % self.p;
            }
        }
        FpPoly::from_residues(self.p, out)
    }

    fn sub(&self, o: &FpPoly) -> FpPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let p = self.p;
        let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0);
        FpPoly::from_residues(p, (0..n).map(|i| (get(&self.coeffs, i) + p - get(&o.coeffs, i)) % p).collect())
    }

    fn divrem(&self, d: &FpPoly) -> (FpPoly, FpPoly) {
        let p = self.p;
        assert!(!d.is_zero(), "division by zero polynomial");
        let inv = mod_inv(d.lead(), p).unwrap();
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        if r.len() < d.coeffs.len() {
            return (FpPoly::from_residues(p, vec![]), self.clone());
        }
        let mut q = vec![0u64; r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = r[i + dd] * inv % p;
            q[i] = c;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                r[i + j] = (r[i + j] + p - c * dc % p) % p;
            }
        }
        (FpPoly::from_residues(p, q), FpPoly::from_residues(p, r))
    }

    fn modulo(&self, d: &FpPoly) -> FpPoly {
        self.divrem(d).1
    }

    fn div(&self, d: &FpPoly) -> FpPoly {
        self.divrem(d).0
    }

    fn gcd(&self, o: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.modulo(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `h` with `h^p = self`, valid when only exponents divisible by `p` occur.
    fn pth_root(&self) -> FpPoly {
        let p = self.p as usize;
        FpPoly::from_residues(self.p, self.coeffs.iter().step_by(p).copied().collect())
    }

    /// `self = c·Π f_i^{e_i}` with squarefree, pairwise coprime monic `f_i`.
    pub fn squarefree_factorization(&self) -> Vec<(FpPoly, u32)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        let f = self.monic();
        let c = f.gcd(&f.derivative());
        let mut w = f.div(&c);
        let mut c = c;
        let mut i = 1u32;
        while w.degree() > 0 {
            let y = w.gcd(&c);
            let fac = w.div(&y);
            if fac.degree() > 0 {
                out.push((fac, i));
            }
            w = y;
            c = c.div(&w);
            i += 1;
        }
        if c.degree() > 0 {
            for (fac, e) in c.pth_root().squarefree_factorization() {
                out.push((fac, e * self.p as u32));
            }
        }
        out
    }

    /// Number of distinct roots over the algebraic closure of `F_p`.
    pub fn distinct_roots(&self) -> usize {
        self.squarefree_factorization().iter().map(|(f, _)| f.degree()).sum()
    }

    /// Number of distinct roots in `F_p`, as `deg gcd(f, x^p − x)`.
    pub fn roots_in_field(&self) -> usize {
        if self.degree() == 0 {
            return 0;
        }
        let f = self.monic();
        let x = FpPoly::from_residues(self.p, vec![0, 1]);
        let mut acc = FpPoly::one(self.p);
        let mut base = x.modulo(&f);
        let mut e = self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).modulo(&f);
            }
            base = base.mul(&base).modulo(&f);
            e >>= 1;
        }
        let frob = acc.sub(&x);
        if frob.is_zero() {
            f.degree()
        } else {
            f.gcd(&frob).degree()
        }
    }

    /// Whether `self` is a constant times a `d`-th power.
    pub fn is_constant_times_power(&self, d: u64) -> bool {
        self.squarefree_factorization().iter().all(|(_, e)| *e as u64 % d == 0)
    }
}

/// `Σ_{x ∈ F_p} χ(f(x))` against the Weil bound `(m − 1)√p`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeilCheck {
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    /// Distinct roots over the algebraic closure (the `m` of the bound).
    pub distinct_roots: usize,
    pub roots_in_field: usize,
    pub character_order: u64,
    /// `f` is a constant times a `d`-th power, so the bound does not apply.
    pub excluded: bool,
    pub bound: f64,
    pub satisfied: Option<bool>,
}

pub fn weil_sum_check(p: u64, f: &FpPoly, chi: &DirichletCharacter) -> Result<WeilCheck> {
    if !is_prime(p) || chi.modulus() != p || f.p != p {
        return Err(Error::arg("need a prime p, a character mod p and f over F_p"));
    }
    if chi.is_principal() {
        return Err(Error::arg("character must be nontrivial"));
    }
    if f.is_zero() {
        return Err(Error::arg("f must be nonzero"));
    }
    if f.degree() > WEIL_DEGREE_CAP {
        return Err(Error::arg(format!("degree above {WEIL_DEGREE_CAP}")));
    }
    let l = chi.denominator() as f64;
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for x in 0..p {
        if let Some(e) = chi.exponent(f.eval(x) as i64) {
            let z = cis(e as f64 / l);
            re.push(z.re);
            im.push(z.im);
        }
    }
    let s = Complex64::new(pairwise_sum(&re), pairwise_sum(&im));
    Ok(assess(f, chi.order(), s))
}

fn assess(f: &FpPoly, d: u64, s: Complex64) -> WeilCheck {
    let m = f.distinct_roots();
    let excluded = f.is_constant_times_power(d);
    let bound = (m as f64 - 1.0) * (f.p as f64).sqrt();
    WeilCheck {
        re: s.re,
        im: s.im,
        abs: s.norm(),
        distinct_roots: m,
        roots_in_field: f.roots_in_field(),
        character_order: d,
        excluded,
        bound,
        satisfied: (!excluded).then_some(s.norm() <= bound + TOL),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeilSweepRow {
    pub p: u64,
    pub degree: usize,
    pub polynomials: u64,
    pub checks: u64,
    pub excluded: u64,
    pub violations: u64,
    /// Largest `|sum| / bound` over checks with a positive bound.
    pub max_ratio: f64,
}

/// Monic polynomials of degree `n` over `F_p`, with the `x^{n−1}` coefficient
/// removed by translation when `p ∤ n`. Shifting `x` and scaling `f` leave
/// `|Σ χ(f(x))|`, the root count and the power test unchanged.
fn normalized_polys(p: u64, n: usize) -> (usize, Vec<usize>) {
    let depress = n >= 1 && (n as u64) % p != 0;
    let free: Vec<usize> = (0..n).filter(|&i| !(depress && i + 1 == n)).collect();
    let count = (p as usize).pow(free.len() as u32);
    (count, free)
}

/// Exhaustive Weil-bound sweep over primes `p ≤ p_max`, degrees `1..=deg_max`
/// and every nontrivial character mod `p`.
pub fn weil_sweep(p_max: u64, deg_max: usize) -> Result<Vec<WeilSweepRow>> {
    let mut rows = Vec::new();
    for p in primes_up_to(p_max) {
        if p == 2 {
            // (Z/2)^* has no nontrivial character
            continue;
        }
        let group = CharacterGroup::new(p)?;
        let root = crate::numtheory::primitive_root(p);
        let mut log = vec![u32::MAX; p as usize];
        let mut y = 1u64;
        for j in 0..p - 1 {
            log[y as usize] = j as u32;
            y = y * root % p;
        }
        let order = p - 1;
        let fft = FftPlanner::new().plan_fft_inverse(order as usize);
        // character e ↦ order of χ_e where χ_e(root) = e(e/(p−1))
        let orders: Vec<u64> = (0..order).map(|e| order / gcd(e, order)).collect();
        debug_assert_eq!(group.len(), order);
        for n in 1..=deg_max {
            let (count, free) = normalized_polys(p, n);
            let chunk = 4096usize;
            let parts: Vec<(u64, u64, u64, f64)> = (0..count.div_ceil(chunk))
                .into_par_iter()
                .map(|ci| {
                    let mut stats = (0u64, 0u64, 0u64, 0.0f64);
                    let mut buf = vec![Complex64::new(0.0, 0.0); order as usize];
                    let end = ((ci + 1) * chunk).min(count);
                    for idx in ci * chunk..end {
                        let mut coeffs = vec![0u64; n + 1];
                        coeffs[n] = 1;
                        let mut r = idx;
                        for &i in &free {
                            coeffs[i] = (r % p as usize) as u64;
                            r /= p as usize;
                        }
                        let f = FpPoly::from_residues(p, coeffs);
                        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                        for x in 0..p {
                            let v = f.eval(x);
                            if v != 0 {
                                buf[log[v as usize] as usize] += 1.0;
                            }
                        }
                        fft.process(&mut buf);
                        let factors = f.squarefree_factorization();
                        let m: usize = factors.iter().map(|(g, _)| g.degree()).sum();
                        let bound = (m as f64 - 1.0) * (p as f64).sqrt();
                        for e in 1..order as usize {
                            let d = orders[e];
                            if factors.iter().all(|(_, k)| *k as u64 % d == 0) {
                                stats.1 += 1;
                                continue;
                            }
                            stats.0 += 1;
                            let s = buf[e].norm();
                            if s > bound + TOL {
                                stats.2 += 1;
                            }
                            if bound > 0.0 {
                                stats.3 = stats.3.max(s / bound);
                            }
                        }
                    }
                    stats
                })
                .collect();
            let mut row = WeilSweepRow { p, degree: n, polynomials: count as u64, checks: 0, excluded: 0, violations: 0, max_ratio: 0.0 };
            for (c, x, v, r) in parts {
                row.checks += c;
                row.excluded += x;
                row.violations += v;
                row.max_ratio = row.max_ratio.max(r);
            }
            rows.push(row);
        }
    }
    Ok(rows)
}
