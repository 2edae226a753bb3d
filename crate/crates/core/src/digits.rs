//! Base-g expansions and the set of positive integers avoiding one digit.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base `g`, forbidden digit `b` and digit length `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitSystem {
    pub g: u32,
    pub b: u32,
    pub k: u32,
}

/// Little-endian digits: `digits[j]` is the coefficient of `g^j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitVector {
    pub digits: Vec<u32>,
}

impl DigitSystem {
    pub fn new(g: u32, b: u32, k: u32) -> Result<Self> {
        if g < 3 {
            return Err(Error::arg(format!("base must be at least 3, got {g}")));
        }
        if b >= g {
            return Err(Error::arg(format!("forbidden digit {b} is not below base {g}")));
        }
        if k == 0 {
            return Err(Error::arg("digit length must be positive"));
        }
        Ok(DigitSystem { g, b, k })
    }

    /// System whose length `k` satisfies `g^(k-1) ≤ n < g^k`.
    pub fn for_target(g: u32, b: u32, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("target must be positive"));
        }
        let k = digit_len(n, g);
        Self::new(g, b, k)
    }

    /// Same as [`DigitSystem::for_target`] for arbitrary-size targets.
    pub fn for_big_target(g: u32, b: u32, n: &BigUint) -> Result<Self> {
        if n.is_zero() {
            return Err(Error::arg("target must be positive"));
        }
        Self::new(g, b, big_digits(n, g).len() as u32)
    }

    /// `g^k` if it fits in 64 bits.
    pub fn modulus(&self) -> Option<u64> {
        crate::numtheory::checked_pow(self.g as u64, self.k)
    }

    pub fn modulus_big(&self) -> BigUint {
        BigUint::from(self.g).pow(self.k)
    }

    pub fn to_digits(&self, n: u64) -> Result<DigitVector> {
        if let Some(m) = self.modulus() {
            if n >= m {
                return Err(Error::range(format!("{n} needs more than {} digits", self.k)));
            }
        }
        let mut digits = vec![0u32; self.k as usize];
        let mut x = n;
        for d in digits.iter_mut() {
            *d = (x % self.g as u64) as u32;
            x /= self.g as u64;
        }
        Ok(DigitVector { digits })
    }

    pub fn from_digits(&self, dv: &DigitVector) -> Result<u64> {
        if dv.digits.len() > self.k as usize {
            return Err(Error::range("digit vector longer than k"));
        }
        let mut acc: u64 = 0;
        for &d in dv.digits.iter().rev() {
            if d >= self.g {
                return Err(Error::range(format!("digit {d} not below base {}", self.g)));
            }
            acc = acc
                .checked_mul(self.g as u64)
                .and_then(|v| v.checked_add(d as u64))
                .ok_or_else(|| Error::range("value exceeds 64 bits"))?;
        }
        Ok(acc)
    }

    /// True iff `n ≥ 1` has no base-g digit equal to `b`.
    pub fn is_restricted(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        let g = self.g as u64;
        let b = self.b as u64;
        let mut x = n;
        while x > 0 {
            if x % g == b {
                return false;
            }
            x /= g;
        }
        true
    }

    /// Members of the restricted set below `limit`, in increasing order.
    pub fn enumerate_restricted(&self, limit: u64) -> RestrictedIter {
        RestrictedIter::new(*self, limit)
    }
}

/// Number of base-g digits of `n ≥ 1`.
pub fn digit_len(mut n: u64, g: u32) -> u32 {
    let mut k = 0;
    while n > 0 {
        n /= g as u64;
        k += 1;
    }
    k
}

/// Little-endian base-g digits of a big integer (empty for zero).
pub fn big_digits(n: &BigUint, g: u32) -> Vec<u32> {
    if n.is_zero() {
        return Vec::new();
    }
    n.to_radix_le(g).into_iter().map(u32::from).collect()
}

/// Little-endian digits of `n` with no leading zeros (empty for zero).
pub fn small_digits(mut n: u64, g: u32) -> Vec<u32> {
    let mut out = Vec::new();
    while n > 0 {
        out.push((n % g as u64) as u32);
        n /= g as u64;
    }
    out
}

pub fn big_from_digits(digits: &[u32], g: u32) -> BigUint {
    let mut acc = BigUint::zero();
    for &d in digits.iter().rev() {
        acc = acc * g + d;
    }
    acc
}

pub fn big_to_u64(n: &BigUint) -> Option<u64> {
    n.to_u64()
}

/// Odometer over restricted integers: inner digits avoid `b`, the top digit
/// also avoids 0.
#[derive(Debug, Clone)]
pub struct RestrictedIter {
    sys: DigitSystem,
    limit: u64,
    digits: Vec<u32>,
    value: u64,
    done: bool,
}

impl RestrictedIter {
    fn new(sys: DigitSystem, limit: u64) -> Self {
        let first = min_top_digit(&sys);
        let mut it = RestrictedIter {
            sys,
            limit,
            digits: vec![first],
            value: first as u64,
            done: false,
        };
        if it.value >= limit {
            it.done = true;
        }
        it
    }

    fn advance(&mut self) {
        let g = self.sys.g;
        let b = self.sys.b;
        let inner_min = if b == 0 { 1 } else { 0 };
        let mut j = 0;
        loop {
            if j == self.digits.len() {
                self.digits.push(min_top_digit(&self.sys));
                break;
            }
            let mut d = self.digits[j] + 1;
            if d == b {
                d += 1;
            }
            if d < g {
                self.digits[j] = d;
                break;
            }
            self.digits[j] = inner_min;
            j += 1;
        }
        let g64 = g as u64;
        let mut v: u64 = 0;
        for &d in self.digits.iter().rev() {
            match v.checked_mul(g64).and_then(|x| x.checked_add(d as u64)) {
                Some(x) => v = x,
                None => {
                    self.done = true;
                    return;
                }
            }
        }
        self.value = v;
        if v >= self.limit {
            self.done = true;
        }
    }
}

fn min_top_digit(sys: &DigitSystem) -> u32 {
    if sys.b == 1 {
        2
    } else {
        1
    }
}

impl Iterator for RestrictedIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.done {
            return None;
        }
        let v = self.value;
        self.advance();
        Some(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sys(g: u32, b: u32, k: u32) -> DigitSystem {
        DigitSystem::new(g, b, k).unwrap()
    }

    #[test]
    fn digit_examples() {
        let s = sys(10, 7, 3);
        assert_eq!(s.to_digits(203).unwrap().digits, vec![3, 0, 2]);
        assert_eq!(s.to_digits(0).unwrap().digits, vec![0, 0, 0]);
        assert!(matches!(s.to_digits(1000), Err(Error::Range(_))));
        assert!(!s.is_restricted(17));
        assert!(s.is_restricted(1));
        assert!(!s.is_restricted(0));
        assert_eq!((1..100).filter(|&n| s.is_restricted(n)).count(), 80);
    }

    #[test]
    fn construction_checks() {
        assert!(DigitSystem::new(2, 0, 3).is_err());
        assert!(DigitSystem::new(10, 10, 3).is_err());
        assert!(DigitSystem::new(10, 1, 0).is_err());
        let s = DigitSystem::for_target(10, 7, 999).unwrap();
        assert_eq!(s.k, 3);
        let s = DigitSystem::for_target(10, 7, 1000).unwrap();
        assert_eq!(s.k, 4);
    }

    #[test]
    fn enumeration_examples() {
        let s = sys(10, 7, 2);
        let v: Vec<u64> = s.enumerate_restricted(10).collect();
        assert_eq!(v, vec![1, 2, 3, 4, 5, 6, 8, 9]);
        assert_eq!(s.enumerate_restricted(100).count(), 80);
        let z = sys(10, 0, 2);
        let v: Vec<u64> = z.enumerate_restricted(100).collect();
        assert_eq!(v.len(), 90);
        assert!(v.iter().all(|&n| n % 10 != 0));
        let one = sys(10, 1, 2);
        assert_eq!(one.enumerate_restricted(25).collect::<Vec<_>>(), vec![2, 3, 4, 5, 6, 7, 8, 9, 20, 22, 23, 24]);
    }

    #[test]
    fn enumeration_counts_by_length() {
        for g in [3u32, 5, 10] {
            for b in 1..g {
                let s = sys(g, b, 6);
                for j in 1..=5u32 {
                    let lim = (g as u64).pow(j);
                    let c = s.enumerate_restricted(lim).count() as u64;
                    assert_eq!(c, ((g - 1) as u64).pow(j) - 1, "g={g} b={b} j={j}");
                }
            }
        }
    }

    #[test]
    fn enumeration_matches_filter() {
        for g in [3u32, 4, 7, 10] {
            for b in 0..g {
                let s = sys(g, b, 8);
                let lim = 5000;
                let a: Vec<u64> = s.enumerate_restricted(lim).collect();
                let f: Vec<u64> = (1..lim).filter(|&n| s.is_restricted(n)).collect();
                assert_eq!(a, f, "g={g} b={b}");
            }
        }
    }

    #[test]
    fn membership_matches_digit_scan() {
        for b in 0..10 {
            let s = sys(10, b, 7);
            for n in 1..=1_000_000u64 {
                let dv = s.to_digits(n).unwrap();
                let top = dv.digits.iter().rposition(|&d| d != 0).unwrap();
                let scan = dv.digits[..=top].iter().all(|&d| d != b);
                assert_eq!(s.is_restricted(n), scan, "n={n} b={b}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip(n in 0u64..10_000_000, g in 3u32..17) {
            let s = DigitSystem::new(g, 0, 8).unwrap();
            let k_needed = digit_len(n, g).max(1);
            let s = DigitSystem::new(g, 0, s.k.max(k_needed)).unwrap();
            let dv = s.to_digits(n).unwrap();
            prop_assert_eq!(s.from_digits(&dv).unwrap(), n);
        }

        #[test]
        fn big_digits_agree(n in 1u64..u64::MAX, g in 3u32..40) {
            prop_assert_eq!(big_digits(&BigUint::from(n), g), small_digits(n, g));
            prop_assert_eq!(big_from_digits(&small_digits(n, g), g), BigUint::from(n));
        }
    }
}
