//! Sieves, multiplicative functions and small modular arithmetic.

use crate::error::{Error, Result};

/// Largest sieve limit accepted by [`build_tables`].
pub const TABLE_CAP: usize = 100_000_000;

/// Multiplicative-function tables for every `n` in `0..=limit`.
///
/// Index 0 holds placeholder zeros.
#[derive(Debug, Clone)]
pub struct ArithmeticTables {
    limit: usize,
    spf: Vec<u32>,
    mobius: Vec<i8>,
    phi: Vec<u32>,
    tau: Vec<u32>,
    lambda: Vec<f64>,
    primes: Vec<u32>,
}

/// Linear sieve producing smallest prime factors, μ, φ, τ and Λ up to `limit`.
pub fn build_tables(limit: usize) -> Result<ArithmeticTables> {
    build_tables_capped(limit, TABLE_CAP)
}

pub fn build_tables_capped(limit: usize, cap: usize) -> Result<ArithmeticTables> {
    if limit < 2 {
        return Err(Error::arg(format!("sieve limit must be at least 2, got {limit}")));
    }
    Error::check_cap("sieve limit", limit as u128, cap as u128)?;
    if limit >= u32::MAX as usize {
        return Err(Error::range("sieve limit must fit in 32 bits"));
    }
    let len = limit + 1;
    let mut spf = vec![0u32; len];
    let mut mobius = vec![0i8; len];
    let mut phi = vec![0u32; len];
    let mut tau = vec![0u32; len];
    let mut lambda = vec![0f64; len];
    // exponent of the smallest prime, and the cofactor with that prime removed
    let mut spf_exp = vec![0u8; len];
    let mut rest = vec![0u32; len];
    let mut primes: Vec<u32> = Vec::new();

    mobius[1] = 1;
    phi[1] = 1;
    tau[1] = 1;
    rest[1] = 1;
    for i in 2..len {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
            mobius[i] = -1;
            phi[i] = i as u32 - 1;
            tau[i] = 2;
            spf_exp[i] = 1;
            rest[i] = 1;
        }
        let si = spf[i];
        for &p in &primes {
            if p > si {
                break;
            }
            let n = i * p as usize;
            if n >= len {
                break;
            }
            spf[n] = p;
            if p == si {
                mobius[n] = 0;
                phi[n] = phi[i] * p;
                spf_exp[n] = spf_exp[i] + 1;
                rest[n] = rest[i];
                tau[n] = tau[rest[i] as usize] * (spf_exp[n] as u32 + 1);
            } else {
                mobius[n] = -mobius[i];
                phi[n] = phi[i] * (p - 1);
                spf_exp[n] = 1;
                rest[n] = i as u32;
                tau[n] = tau[i] * 2;
            }
        }
        if rest[i] == 1 {
            lambda[i] = (spf[i] as f64).ln();
        }
    }

    Ok(ArithmeticTables {
        limit,
        spf,
        mobius,
        phi,
        tau,
        lambda,
        primes,
    })
}

impl ArithmeticTables {
    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn smallest_prime_factor(&self, n: usize) -> u64 {
        self.spf[n] as u64
    }

    pub fn mobius(&self, n: usize) -> i8 {
        self.mobius[n]
    }

    pub fn euler_phi(&self, n: usize) -> u64 {
        self.phi[n] as u64
    }

    pub fn divisor_count(&self, n: usize) -> u64 {
        self.tau[n] as u64
    }

    pub fn von_mangoldt(&self, n: usize) -> f64 {
        self.lambda[n]
    }

    pub fn von_mangoldt_slice(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mobius_slice(&self) -> &[i8] {
        &self.mobius
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.spf[n] as usize == n
    }

    /// Prime factorization of `n ≤ limit` as (prime, exponent) pairs in increasing order.
    pub fn factorize(&self, mut n: usize) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        out
    }

    /// Ramanujan sum from the tables when `q` is within range.
    pub fn ramanujan_sum(&self, q: u64, n: i64) -> f64 {
        if q as usize > self.limit {
            return ramanujan_sum(q, n);
        }
        let g = gcd(q, n.unsigned_abs());
        let r = (q / g) as usize;
        let mu = self.mobius[r] as i64;
        if mu == 0 {
            return 0.0;
        }
        (mu * (self.phi[q as usize] / self.phi[r]) as i64) as f64
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

pub fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// `x mod m` for signed `x`, in `[0, m)`.
pub fn rem(x: i64, m: u64) -> u64 {
    (x as i128).rem_euclid(m as i128) as u64
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mod_mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Trial-division factorization as (prime, exponent) pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn divisor_count(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Sorted list of the positive divisors of `n`.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Primes up to and including `n`, by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Ramanujan sum c_q(n) as an exact integer, via μ(q/(q,n))·φ(q)/φ(q/(q,n)).
pub fn ramanujan_sum_exact(q: u64, n: i64) -> i64 {
    assert!(q >= 1, "ramanujan sum needs q >= 1");
    let g = gcd(q, n.unsigned_abs());
    let r = q / g;
    let mu = mobius(r);
    if mu == 0 {
        return 0;
    }
    mu * (euler_phi(q) / euler_phi(r)) as i64
}

/// Ramanujan sum c_q(n) = Σ_{a ∈ (Z/q)*} e(an/q).
pub fn ramanujan_sum(q: u64, n: i64) -> f64 {
    ramanujan_sum_exact(q, n) as f64
}

/// Largest `e` with `p^e | x`.
pub fn p_adic_valuation(x: u64, p: u64) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::arg(format!("{p} is not prime")));
    }
    if x == 0 {
        return Err(Error::arg("valuation of 0 is undefined"));
    }
    Ok(valuation(x, p))
}

/// Valuation without argument checks; `x = 0` yields `u32::MAX`.
pub(crate) fn valuation(mut x: u64, p: u64) -> u32 {
    if x == 0 {
        return u32::MAX;
    }
    let mut e = 0;
    while x % p == 0 {
        x /= p;
        e += 1;
    }
    e
}

/// Least primitive root modulo an odd prime `p` (or 1 for p = 2).
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors: Vec<u64> = factorize(p - 1).into_iter().map(|(q, _)| q).collect();
    (2..p)
        .find(|&g| factors.iter().all(|&q| mod_pow(g, (p - 1) / q, p) != 1))
        .expect("every prime has a primitive root")
}

/// Integer power with overflow detection.
pub fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut acc = 1u64;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Sum of f64 values in a fixed pairwise order, independent of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
