use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::{gcd, is_prime, primes_up_to, rem};

/// Largest modulus scanned by [`count_square_roots`] and [`fraction_pair_count`].
pub const RESIDUE_SCAN_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SquareRootCount {
    pub a: i64,
    pub p: u64,
    pub k: u32,
    pub count: u64,
    pub bound: u64,
    pub satisfied: bool,
}

fn prime_power_capped(p: u64, k: u32) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::arg(format!("{p} is not prime")));
    }
    let pk = crate::numtheory::checked_pow(p, k).unwrap_or(u64::MAX);
    Error::check_cap("prime power modulus", pk as u128, RESIDUE_SCAN_CAP as u128)?;
    Ok(pk)
}

/// `2p^{k−⌈k/2⌉}` for odd `p`, `4·2^{k−⌈k/2⌉}` for `p = 2`.
pub fn square_root_bound(p: u64, k: u32) -> u64 {
    let e = k - k.div_ceil(2);
    if p == 2 {
        4 << e
    } else {
        2 * p.pow(e)
    }
}

/// `#{x mod p^k : x² ≡ a}` by exhaustive scan.
pub fn count_square_roots(a: i64, p: u64, k: u32) -> Result<SquareRootCount> {
    if k == 0 {
        return Err(Error::arg("k must be at least 1"));
    }
    let pk = prime_power_capped(p, k)?;
    let ar = rem(a, pk);
    let count = (0..pk).filter(|&x| (x as u128 * x as u128 % pk as u128) as u64 == ar).count() as u64;
    let bound = square_root_bound(p, k);
    Ok(SquareRootCount { a, p, k, count, bound, satisfied: count <= bound })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SquareRootSweepRow {
    pub p: u64,
    pub k: u32,
    pub max_count: u64,
    pub bound: u64,
    pub violations: u64,
}

/// Square-root counts for every residue modulo every prime power `≤ limit`.
pub fn square_root_sweep(limit: u64) -> Result<Vec<SquareRootSweepRow>> {
    Error::check_cap("prime power modulus", limit as u128, RESIDUE_SCAN_CAP as u128)?;
    let mut rows = Vec::new();
    for p in primes_up_to(limit) {
        let mut pk = p;
        let mut k = 1;
        while pk <= limit {
            let mut hist = vec![0u64; pk as usize];
            for x in 0..pk {
                hist[(x * x % pk) as usize] += 1;
            }
            let bound = square_root_bound(p, k);
            rows.push(SquareRootSweepRow {
                p,
                k,
                max_count: *hist.iter().max().unwrap(),
                bound,
                violations: hist.iter().filter(|&&c| c > bound).count() as u64,
            });
            pk *= p;
            k += 1;
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FractionPairCount {
    pub count: u64,
    /// `count ≤ p^{a1}`, and `count = 0` in the unit case with `a1 < a2`, `p | t`.
    pub bound_ok: bool,
}

/// `#{(b1, b2) : b1/p^{a1} + b2/p^{a2} ≡ t/p^{a2} mod 1}`, with `b_i` over
/// all residues or over units. For each `b1` the congruence fixes `b2`.
pub fn fraction_pair_count(p: u64, a1: u32, a2: u32, t: i64, units_only: bool) -> Result<FractionPairCount> {
    if a1 > a2 {
        return Err(Error::arg("need a1 ≤ a2"));
    }
    let q2 = prime_power_capped(p, a2)?;
    let q1 = p.pow(a1);
    let step = q2 / q1;
    let tr = rem(t, q2);
    let ok = |b: u64, q: u64| !units_only || gcd(b, q) == 1;
    let count = (0..q1)
        .filter(|&b1| ok(b1, q1) && ok((tr + q2 - step * b1 % q2) % q2, q2))
        .count() as u64;
    Ok(FractionPairCount { count, bound_ok: fraction_bound_ok(p, a1, a2, tr, units_only, count) })
}

fn fraction_bound_ok(p: u64, a1: u32, a2: u32, t: u64, units_only: bool, count: u64) -> bool {
    let first = count <= p.pow(a1);
    let second = !(units_only && a1 < a2 && t % p == 0) || count == 0;
    first && second
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FractionSweepRow {
    pub p: u64,
    pub a1: u32,
    pub a2: u32,
    pub units_only: bool,
    pub max_count: u64,
    pub violations: u64,
}

/// Histograms over all pairs `(b1, b2)` for every `t`, for `p ∈ primes`, `1 ≤ a1 ≤ a2 ≤ a_max`.
pub fn fraction_pair_sweep(primes: &[u64], a_max: u32) -> Result<Vec<FractionSweepRow>> {
    let mut rows = Vec::new();
    for &p in primes {
        for a2 in 1..=a_max {
            let q2 = prime_power_capped(p, a2)?;
            for a1 in 1..=a2 {
                let q1 = p.pow(a1);
                for units_only in [false, true] {
                    let mut hist = vec![0u64; q2 as usize];
                    for b1 in 0..q1 {
                        if units_only && b1 % p == 0 {
                            continue;
                        }
                        for b2 in 0..q2 {
                            if units_only && b2 % p == 0 {
                                continue;
                            }
                            hist[((q2 / q1 * b1 + b2) % q2) as usize] += 1;
                        }
                    }
                    let violations = hist
                        .iter()
                        .enumerate()
                        .filter(|&(t, &c)| !fraction_bound_ok(p, a1, a2, t as u64, units_only, c))
                        .count() as u64;
                    rows.push(FractionSweepRow { p, a1, a2, units_only, max_count: *hist.iter().max().unwrap(), violations });
                }
            }
        }
    }
    Ok(rows)
}
