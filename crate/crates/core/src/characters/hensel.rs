use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DirichletCharacter;
use crate::error::{Error, Result};
use crate::measures::cis;
use crate::numtheory::{is_prime, lcm, mod_inv, pairwise_sum, rem};

/// Integer polynomial, coefficients little-endian.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntPoly(pub Vec<i64>);

impl IntPoly {
    pub fn eval_mod(&self, y: u64, m: u64) -> u64 {
        let (y, m128) = (y as u128 % m as u128, m as u128);
        self.0.iter().rev().fold(0u128, |acc, &c| (acc * y + rem(c, m) as u128) % m128) as u64
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly(self.0.iter().enumerate().skip(1).map(|(i, &c)| c * i as i64).collect())
    }

    /// `f''/2`, which has integer coefficients.
    fn half_second_derivative(&self) -> IntPoly {
        IntPoly(self.0.iter().enumerate().skip(2).map(|(i, &c)| c * (i as i64 * (i as i64 - 1) / 2)).collect())
    }
}

/// Both sides of the stationary-phase reduction of a complete sum mod `p^{2α}` or `p^{2α+1}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HenselCheck {
    pub q: u64,
    pub odd_exponent: bool,
    /// The parameter with `χ(1 + z p^α)` in the stated exponential form.
    pub b: u64,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub difference: f64,
    pub matches: bool,
}

fn sum(parts: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = parts.iter().map(|z| z.re).collect();
    let im: Vec<f64> = parts.iter().map(|z| z.im).collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

/// `χ(v) e(num/den)` with exact phase, `None` if `χ(v) = 0`.
fn term(chi: &DirichletCharacter, v: u64, num: u64, den: u64) -> Option<Complex64> {
    let x = chi.exponent(v as i64)? as u128;
    let l = chi.denominator() as u128;
    let d = lcm(l as u64, den) as u128;
    let ph = (x * (d / l) + num as u128 * (d / den as u128)) % d;
    Some(cis(ph as f64 / d as f64))
}

/// Compares `Σ_{y mod q} χ(f(y)) e(a g(y)/q)` with its reduction to
/// `y mod p^α` satisfying `h(y) ≡ 0 mod p^α`, where
/// `h = a g' + b f'/f` and `f'/f` means `f'·f^{-1}`.
pub fn hensel_reduction_check(p: u64, alpha: u32, f: &IntPoly, g: &IntPoly, chi: &DirichletCharacter, a: i64) -> Result<HenselCheck> {
    if p == 2 || !is_prime(p) {
        return Err(Error::arg("p must be an odd prime"));
    }
    if alpha == 0 {
        return Err(Error::arg("alpha must be at least 1"));
    }
    let pa = p.pow(alpha);
    let q = chi.modulus();
    let odd = if q == pa * pa {
        false
    } else if q == pa * pa * p {
        true
    } else {
        return Err(Error::arg("character modulus must be p^{2α} or p^{2α+1}"));
    };
    let ar = rem(a, q);
    let lhs_terms: Vec<Complex64> = (0..q)
        .filter_map(|y| {
            let ph = (ar as u128 * g.eval_mod(y, q) as u128 % q as u128) as u64;
            term(chi, f.eval_mod(y, q), ph, q)
        })
        .collect();
    let lhs = sum(&lhs_terms);
    // `b` lives modulo m = p^α (even) or p^{α+1} (odd)
    let m = if odd { pa * p } else { pa };
    let l = chi.denominator() as u128;
    let half = (p - 1) / 2;
    let unit = if odd { (1 + half as u128 * pa as u128) % m as u128 } else { 1 };
    let x1 = chi.exponent((1 + pa) as i64).unwrap() as u128;
    if (x1 * m as u128) % l != 0 {
        return Err(Error::Diagnostic("χ(1 + p^α) is not an m-th root of unity".into()));
    }
    let b = ((x1 * m as u128 / l) * mod_inv(unit as u64, m).unwrap() as u128 % m as u128) as u64;
    for z in 0..m {
        let xz = chi.exponent((1 + z * pa) as i64).unwrap() as u128;
        let lin = b as u128 * z as u128 % m as u128;
        let quad = if odd { half as u128 * b as u128 % m as u128 * (z as u128 * z as u128 % m as u128) % m as u128 * pa as u128 % m as u128 } else { 0 };
        let want = (lin + quad) % m as u128;
        if (xz * m as u128) % (l * m as u128) != (want * l) % (l * m as u128) {
            return Err(Error::Diagnostic(format!("no b solves χ(1 + z·p^α) at z = {z}")));
        }
    }
    let df = f.derivative();
    let dg = g.derivative();
    let hf = f.half_second_derivative();
    let hg = g.half_second_derivative();
    let mut rhs_terms = Vec::new();
    for y in 0..pa {
        let fy = f.eval_mod(y, m);
        if fy % p == 0 {
            continue;
        }
        let inv = mod_inv(fy, m).unwrap() as u128;
        let ratio = df.eval_mod(y, m) as u128 * inv % m as u128;
        let h = ((ar % m) as u128 * dg.eval_mod(y, m) as u128 + b as u128 * ratio) % m as u128;
        if h % pa as u128 != 0 {
            continue;
        }
        let ph = (ar as u128 * g.eval_mod(y, q) as u128 % q as u128) as u64;
        let Some(base) = term(chi, f.eval_mod(y, q), ph, q) else { continue };
        let gauss = if odd {
            let pp = p as u128;
            let inv_p = mod_inv(fy % p, p).unwrap() as u128;
            let r = ratio % pp;
            let d = ((ar % p) as u128 * hg.eval_mod(y, p) as u128
                + b as u128 % pp * (hf.eval_mod(y, p) as u128 * inv_p % pp)
                + half as u128 * (b as u128 % pp) % pp * (r * r % pp))
                % pp;
            let lin = h / pa as u128;
            sum(&(0..p as u128).map(|z| cis(((d * z % pp * z + lin * z) % pp) as f64 / p as f64)).collect::<Vec<_>>())
        } else {
            Complex64::new(1.0, 0.0)
        };
        rhs_terms.push(base * gauss * pa as f64);
    }
    let rhs = sum(&rhs_terms);
    let difference = (lhs - rhs).norm();
    Ok(HenselCheck {
        q,
        odd_exponent: odd,
        b,
        lhs_re: lhs.re,
        lhs_im: lhs.im,
        rhs_re: rhs.re,
        rhs_im: rhs.im,
        difference,
        matches: difference <= 1e-8,
    })
}
