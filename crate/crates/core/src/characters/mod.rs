//! Dirichlet characters with exact root-of-unity exponents, Gauss sums and
//! the complete character sums used by the minor-arc analysis.
//!
//! A character mod `q` is stored by its exponents on the cyclic generators
//! of `(Z/q)^*`: one primitive root per odd prime power, and `(−1, 5)` for
//! `2^a` with `a ≥ 3`. Values are `e(x/L)` with `L` the group exponent, so
//! equality tests are exact.

mod hensel;
mod residues;
mod weil;
mod wsum;

pub use hensel::{hensel_reduction_check, HenselCheck, IntPoly};
pub use residues::{
    count_square_roots, fraction_pair_count, fraction_pair_sweep, square_root_sweep, FractionPairCount,
    FractionSweepRow, SquareRootCount, SquareRootSweepRow,
};
pub use weil::{weil_sum_check, weil_sweep, FpPoly, WeilCheck, WeilSweepRow};
pub use wsum::{w_bound, w_sum, w_sum_sweep, w_sum_sweep_cell, WSum, WSweepCell, W_CELL_BUDGET};

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::cis;
use crate::numtheory::{euler_phi, factorize, gcd, lcm, mobius, mod_pow, pairwise_sum, primitive_root, rem};

/// Largest modulus for which discrete-log tables are built.
pub const CHARACTER_MODULUS_CAP: u64 = 1_000_000;

/// One cyclic factor of `(Z/p^a)^*` with its discrete-log table.
#[derive(Debug)]
struct Generator {
    order: u64,
    /// `log[x]` for units `x mod p^a`; unused entries for non-units.
    log: Vec<u32>,
}

#[derive(Debug)]
struct PrimePower {
    p: u64,
    a: u32,
    pa: u64,
    gens: Vec<Generator>,
}

impl PrimePower {
    fn new(p: u64, a: u32) -> PrimePower {
        let pa = p.pow(a);
        let mut gens = Vec::new();
        if p == 2 {
            if a == 2 {
                let mut log = vec![0u32; 4];
                log[3] = 1;
                gens.push(Generator { order: 2, log });
            } else if a >= 3 {
                let order = pa / 4;
                let mut sign = vec![0u32; pa as usize];
                let mut five = vec![0u32; pa as usize];
                let mut y = 1u64;
                for j in 0..order {
                    five[y as usize] = j as u32;
                    five[(pa - y) as usize] = j as u32;
                    sign[(pa - y) as usize] = 1;
                    y = y * 5 % pa;
                }
                gens.push(Generator { order: 2, log: sign });
                gens.push(Generator { order, log: five });
            }
        } else {
            let mut r = primitive_root(p);
            if a >= 2 && mod_pow(r, p - 1, p * p) == 1 {
                r += p;
            }
            let order = pa / p * (p - 1);
            let mut log = vec![0u32; pa as usize];
            let mut y = 1u64;
            for j in 0..order {
                log[y as usize] = j as u32;
                y = (y as u128 * r as u128 % pa as u128) as u64;
            }
            gens.push(Generator { order, log });
        }
        PrimePower { p, a, pa, gens }
    }

    /// Conductor exponent of the component with generator exponents `e`.
    fn conductor_exponent(&self, e: &[u64]) -> u32 {
        if e.iter().all(|&x| x == 0) {
            return 0;
        }
        if self.p == 2 {
            let t = if self.a >= 3 { e[1] } else { 0 };
            if t == 0 {
                return 2;
            }
            // 1 + 2^c Z is generated by 5^(2^(c−2)) for c ≥ 2
            let order = self.gens[1].order;
            return (3..=self.a)
                .find(|&c| (t as u128 * (1u128 << (c - 2))) % order as u128 == 0)
                .unwrap_or(self.a);
        }
        let order = self.gens[0].order;
        (1..=self.a)
            .find(|&c| {
                let phi_c = self.p.pow(c - 1) * (self.p - 1);
                (e[0] as u128 * phi_c as u128) % order as u128 == 0
            })
            .unwrap_or(self.a)
    }
}

/// The group of Dirichlet characters modulo `q`, with shared lookup tables.
#[derive(Debug)]
pub struct CharacterGroup {
    q: u64,
    parts: Vec<PrimePower>,
    /// Orders of the cyclic generators, first prime first.
    orders: Vec<u64>,
    exponent: u64,
}

impl CharacterGroup {
    pub fn new(q: u64) -> Result<Arc<CharacterGroup>> {
        if q == 0 {
            return Err(Error::arg("modulus must be positive"));
        }
        Error::check_cap("character modulus", q as u128, CHARACTER_MODULUS_CAP as u128)?;
        let parts: Vec<PrimePower> = factorize(q).into_iter().map(|(p, a)| PrimePower::new(p, a)).collect();
        let orders: Vec<u64> = parts.iter().flat_map(|pp| pp.gens.iter().map(|g| g.order)).collect();
        let exponent = orders.iter().fold(1, |l, &o| lcm(l, o));
        Ok(Arc::new(CharacterGroup { q, parts, orders, exponent }))
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Number of characters, `φ(q)`.
    pub fn len(&self) -> u64 {
        self.orders.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Common denominator of all character-value exponents.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Character number `index` in mixed radix over the generator orders,
    /// first generator least significant; index 0 is principal.
    pub fn character(self: &Arc<Self>, index: u64) -> Result<DirichletCharacter> {
        if index >= self.len() {
            return Err(Error::arg(format!("character index {index} out of range for modulus {}", self.q)));
        }
        let mut rest = index;
        let exps: Vec<u64> = self
            .orders
            .iter()
            .map(|&o| {
                let e = rest % o;
                rest /= o;
                e
            })
            .collect();
        Ok(DirichletCharacter::from_exponents(self.clone(), exps, index))
    }

    pub fn characters(self: &Arc<Self>) -> Vec<DirichletCharacter> {
        (0..self.len()).map(|i| self.character(i).unwrap()).collect()
    }

    pub fn primitive_characters(self: &Arc<Self>) -> Vec<DirichletCharacter> {
        self.characters().into_iter().filter(|c| c.is_primitive()).collect()
    }

    /// Discrete logs of `n` on every generator, or `None` if `gcd(n, q) > 1`.
    fn logs(&self, n: u64, out: &mut Vec<u64>) -> bool {
        out.clear();
        for pp in &self.parts {
            let r = n % pp.pa;
            if r % pp.p == 0 {
                return false;
            }
            out.extend(pp.gens.iter().map(|g| g.log[r as usize] as u64));
        }
        true
    }
}

/// All `φ(q)` characters modulo `q` in canonical order.
pub fn character_group(q: u64) -> Result<Vec<DirichletCharacter>> {
    Ok(CharacterGroup::new(q)?.characters())
}

/// A Dirichlet character, `χ(g_i) = e(e_i / n_i)` on the group generators.
#[derive(Clone)]
pub struct DirichletCharacter {
    group: Arc<CharacterGroup>,
    index: u64,
    exps: Vec<u64>,
    /// `exps[i]·L/n_i`, the value exponent contributed per unit of log.
    weights: Vec<u64>,
    conductor: u64,
}

impl std::fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirichletCharacter")
            .field("modulus", &self.group.q)
            .field("index", &self.index)
            .field("exponents", &self.exps)
            .field("conductor", &self.conductor)
            .finish()
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.q == other.group.q && self.exps == other.exps
    }
}

impl Eq for DirichletCharacter {}

/// Serializable reference to a character: modulus and canonical index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharacterRef {
    pub modulus: u64,
    pub index: u64,
}

impl DirichletCharacter {
    fn from_exponents(group: Arc<CharacterGroup>, exps: Vec<u64>, index: u64) -> DirichletCharacter {
        let l = group.exponent;
        let weights = exps.iter().zip(&group.orders).map(|(&e, &o)| e * (l / o)).collect();
        let mut conductor = 1u64;
        let mut offset = 0;
        for pp in &group.parts {
            let n = pp.gens.len();
            let c = pp.conductor_exponent(&exps[offset..offset + n]);
            conductor *= pp.p.pow(c);
            offset += n;
        }
        DirichletCharacter { group, index, exps, weights, conductor }
    }

    /// The character identically 1 on integers (modulus 1).
    pub fn trivial() -> DirichletCharacter {
        CharacterGroup::new(1).unwrap().character(0).unwrap()
    }

    pub fn modulus(&self) -> u64 {
        self.group.q
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn reference(&self) -> CharacterRef {
        CharacterRef { modulus: self.modulus(), index: self.index }
    }

    pub fn group(&self) -> &Arc<CharacterGroup> {
        &self.group
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.group.q
    }

    pub fn is_principal(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Denominator `L` of value exponents.
    pub fn denominator(&self) -> u64 {
        self.group.exponent
    }

    /// Multiplicative order of the character.
    pub fn order(&self) -> u64 {
        self.exps
            .iter()
            .zip(&self.group.orders)
            .fold(1, |acc, (&e, &o)| lcm(acc, o / gcd(e, o)))
    }

    /// `x` with `χ(n) = e(x/L)`, or `None` when `χ(n) = 0`.
    pub fn exponent(&self, n: i64) -> Option<u64> {
        let mut logs = Vec::with_capacity(self.exps.len());
        self.exponent_with(rem(n, self.group.q), &mut logs)
    }

    fn exponent_with(&self, n: u64, logs: &mut Vec<u64>) -> Option<u64> {
        if !self.group.logs(n, logs) {
            return None;
        }
        let l = self.group.exponent as u128;
        let x = logs
            .iter()
            .zip(&self.weights)
            .fold(0u128, |acc, (&lg, &w)| (acc + lg as u128 * w as u128) % l);
        Some(x as u64)
    }

    pub fn value(&self, n: i64) -> Complex64 {
        match self.exponent(n) {
            Some(x) => cis(x as f64 / self.denominator() as f64),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `χ(n)` for every residue `n mod q`.
    pub fn exponent_table(&self) -> Vec<Option<u64>> {
        let mut logs = Vec::with_capacity(self.exps.len());
        (0..self.group.q).map(|n| self.exponent_with(n, &mut logs)).collect()
    }

    pub fn conj(&self) -> DirichletCharacter {
        let exps: Vec<u64> = self.exps.iter().zip(&self.group.orders).map(|(&e, &o)| (o - e) % o).collect();
        let index = mixed_radix(&exps, &self.group.orders);
        DirichletCharacter::from_exponents(self.group.clone(), exps, index)
    }

    /// The components `χ_p` modulo each prime power `p^a ∥ q`.
    pub fn components(&self) -> Result<Vec<DirichletCharacter>> {
        let mut out = Vec::new();
        let mut offset = 0;
        for pp in &self.group.parts {
            let g = CharacterGroup::new(pp.pa)?;
            let n = pp.gens.len();
            let exps = self.exps[offset..offset + n].to_vec();
            let index = mixed_radix(&exps, &g.orders);
            out.push(DirichletCharacter::from_exponents(g, exps, index));
            offset += n;
        }
        Ok(out)
    }
}

fn mixed_radix(digits: &[u64], radices: &[u64]) -> u64 {
    digits.iter().zip(radices).rev().fold(0, |acc, (&d, &r)| acc * r + d)
}

/// `τ(χ) = Σ_{b ∈ (Z/q)^*} χ(b) e(b/q)`.
pub fn gauss_sum(chi: &DirichletCharacter) -> Complex64 {
    twisted_sum(chi, chi.modulus(), 1)
}

/// `Σ_{b ∈ (Z/r)^*} χ(b) e(bn/r)` for `χ` mod `q | r`, phases reduced exactly.
pub(crate) fn twisted_sum(chi: &DirichletCharacter, r: u64, n: i64) -> Complex64 {
    let q = chi.modulus();
    debug_assert_eq!(r % q, 0);
    let l = chi.denominator() as u128;
    let den = l * r as u128;
    let nr = rem(n, r) as u128;
    let mut logs = Vec::new();
    let mut re = Vec::new();
    let mut im = Vec::new();
    for b in 1..=r {
        if gcd(b, r) != 1 {
            continue;
        }
        let x = chi.exponent_with(b % q, &mut logs).expect("unit mod r is a unit mod q") as u128;
        let num = (x * r as u128 + (b as u128 * nr % r as u128) * l) % den;
        let z = cis(num as f64 / den as f64);
        re.push(z.re);
        im.push(z.im);
    }
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

/// `c_χ(b, r) = χ(b) μ(r/q) conj(χ(r/q)) conj(τ(χ)) / φ(r)` for `q | r`, else 0.
pub fn coefficient_c_chi(chi: &DirichletCharacter, b: i64, r: u64) -> Result<Complex64> {
    if r == 0 {
        return Err(Error::arg("r must be positive"));
    }
    if !chi.is_primitive() {
        return Err(Error::arg("c_chi needs a primitive character"));
    }
    let q = chi.modulus();
    if r % q != 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if gcd(rem(b, r), r) != 1 {
        return Err(Error::arg(format!("b = {b} is not a unit modulo r = {r}")));
    }
    let s = r / q;
    let mu = mobius(s);
    if mu == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let v = chi.value(b) * chi.value(s as i64).conj() * gauss_sum(chi).conj();
    Ok(v * mu as f64 / euler_phi(r) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    /// Number of primitive characters mod q, `Σ_{d|q} μ(q/d) φ(d)`.
    fn primitive_count(q: u64) -> u64 {
        crate::numtheory::divisors(q)
            .into_iter()
            .map(|d| mobius(q / d) * euler_phi(d) as i64)
            .sum::<i64>() as u64
    }

    /// Smallest `d | q` such that `χ(n) = 1` whenever `n ≡ 1 mod d`, `gcd(n,q)=1`.
    fn brute_conductor(chi: &DirichletCharacter) -> u64 {
        let q = chi.modulus();
        crate::numtheory::divisors(q)
            .into_iter()
            .find(|&d| (1..=q).filter(|&n| n % d == 1 % d && gcd(n, q) == 1).all(|n| chi.exponent(n as i64) == Some(0)))
            .unwrap()
    }

    #[test]
    fn small_groups() {
        let one = character_group(1).unwrap();
        assert_eq!(one.len(), 1);
        assert!((0..10).all(|n| one[0].value(n) == Complex64::new(1.0, 0.0)));
        let three = character_group(3).unwrap();
        assert_eq!(three.len(), 2);
        assert!((three[1].value(2) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let eight = character_group(8).unwrap();
        assert_eq!(eight.len(), 4);
        assert!(eight.iter().all(|c| c.order() <= 2));
        assert!(eight[0].is_principal());
    }

    #[test]
    fn structure_up_to_200() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for q in 1..=200u64 {
            let chars = character_group(q).unwrap();
            assert_eq!(chars.len() as u64, euler_phi(q));
            let distinct: HashSet<Vec<Option<u64>>> = chars.iter().map(|c| c.exponent_table()).collect();
            assert_eq!(distinct.len(), chars.len(), "q={q}");
            assert_eq!(chars.iter().filter(|c| c.is_primitive()).count() as u64, primitive_count(q));
            for chi in &chars {
                assert_eq!(chi.exponent(1), Some(0));
                for n in 0..q as i64 {
                    assert_eq!(chi.exponent(n).is_none(), gcd(n as u64, q) > 1);
                }
                for _ in 0..1000 {
                    let m = rng.gen_range(-1000i64..1000);
                    let n = rng.gen_range(-1000i64..1000);
                    let l = chi.denominator();
                    let want = match (chi.exponent(m), chi.exponent(n)) {
                        (Some(a), Some(b)) => Some((a + b) % l),
                        _ => None,
                    };
                    assert_eq!(chi.exponent(m * n), want);
                }
                let total: Complex64 = (0..q as i64).map(|n| chi.value(n)).sum();
                if !chi.is_principal() {
                    assert!(total.norm() <= 1e-9, "q={q} index={}", chi.index());
                }
                if q <= 60 {
                    assert_eq!(chi.conductor(), brute_conductor(chi), "q={q} index={}", chi.index());
                }
                let comps = chi.components().unwrap();
                if chi.is_primitive() {
                    assert!(comps.iter().all(|c| c.is_primitive()));
                }
                assert_eq!(comps.iter().map(|c| c.conductor()).product::<u64>(), chi.conductor());
                assert_eq!(chi.conj().conj(), *chi);
            }
        }
    }

    #[test]
    fn gauss_sums() {
        assert!((gauss_sum(&DirichletCharacter::trivial()) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let g = CharacterGroup::new(3).unwrap();
        let tau = gauss_sum(&g.character(1).unwrap());
        assert!((tau - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
        for q in 1..=200u64 {
            for chi in CharacterGroup::new(q).unwrap().primitive_characters() {
                let direct: Complex64 = (1..=q)
                    .filter(|&b| gcd(b, q) == 1)
                    .map(|b| chi.value(b as i64) * cis(b as f64 / q as f64))
                    .sum();
                let tau = gauss_sum(&chi);
                assert!((tau - direct).norm() < 1e-9);
                assert!((tau.norm() - (q as f64).sqrt()).abs() <= 1e-9, "q={q}");
            }
        }
    }

    #[test]
    fn c_chi_cases() {
        let five = CharacterGroup::new(5).unwrap();
        let chi = five.character(2).unwrap();
        assert_eq!(coefficient_c_chi(&chi, 1, 12).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(coefficient_c_chi(&chi, 1, 20).unwrap(), Complex64::new(0.0, 0.0));
        assert!(coefficient_c_chi(&chi, 5, 15).is_err());
        let t = DirichletCharacter::trivial();
        for r in 1..200u64 {
            for b in [1i64, 7, -3] {
                if gcd(rem(b, r), r) != 1 {
                    continue;
                }
                let c = coefficient_c_chi(&t, b, r).unwrap();
                assert!((c.re - mobius(r) as f64 / euler_phi(r) as f64).abs() < 1e-12 && c.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn twisted_sum_reduces_to_ramanujan() {
        let t = DirichletCharacter::trivial();
        for r in 1..80u64 {
            for n in -20i64..20 {
                let s = twisted_sum(&t, r, n);
                assert!((s.re - crate::numtheory::ramanujan_sum_exact(r, n) as f64).abs() < 1e-9);
            }
        }
    }
}
