use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fourier_transform, ProductMeasure, Theta};
use crate::error::{Error, Result};
use crate::numtheory::{gcd, pairwise_sum};

/// Largest `Q²` accepted by [`large_sieve_sum`].
pub const SIEVE_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LargeSieveSum {
    pub value: f64,
    pub fractions: u64,
    /// Smallest `K ≥ 1` with `value ≤ K·Π_j|B_j|·(Q²/d + 1)` (the `t = 0` term).
    pub implied_constant: f64,
    /// Smallest `C` such that `value ≤ K·Π_{j≥t}|B_j|·(Q²/d·(C ln g)^t + (Cg ln g)^t)` for every `t ≥ 1`.
    pub fitted_c: f64,
}

/// `Σ_{Q ≤ b < 2Q, d|b} Σ_{0<a<b, (a,b)=1} |μ̂(a/b + β)|` by exact enumeration.
pub fn large_sieve_sum(mu: &ProductMeasure, q: u64, d: u64, beta: f64) -> Result<LargeSieveSum> {
    large_sieve_sum_capped(mu, q, d, beta, SIEVE_CAP)
}

pub fn large_sieve_sum_capped(
    mu: &ProductMeasure,
    q: u64,
    d: u64,
    beta: f64,
    cap: u64,
) -> Result<LargeSieveSum> {
    if d == 0 || q < d {
        return Err(Error::arg(format!("need Q ≥ d ≥ 1, got Q={q}, d={d}")));
    }
    Error::check_cap("Q^2", q as u128 * q as u128, cap as u128)?;
    let dens: Vec<u64> = (q..2 * q).filter(|b| b % d == 0).collect();
    let per_den: Vec<(f64, u64)> = dens
        .par_iter()
        .map(|&b| {
            let vals: Vec<f64> = (1..b)
                .filter(|&a| gcd(a, b) == 1)
                .map(|a| fourier_transform(mu, &Theta { num: a as i64, den: b, offset: beta }).norm())
                .collect();
            (pairwise_sum(&vals), vals.len() as u64)
        })
        .collect();
    let sums: Vec<f64> = per_den.iter().map(|p| p.0).collect();
    let value = pairwise_sum(&sums);
    let fractions = per_den.iter().map(|p| p.1).sum();
    let (implied_constant, fitted_c) = fit_constants(mu, q, d, value);
    Ok(LargeSieveSum { value, fractions, implied_constant, fitted_c })
}

fn fit_constants(mu: &ProductMeasure, q: u64, d: u64, value: f64) -> (f64, f64) {
    let k = mu.k();
    let ln_g = (mu.g as f64).ln();
    let g = mu.g as f64;
    let ratio = (q as f64).powi(2) / d as f64;
    // tail[t] = Π_{j≥t} |B_j|
    let mut tail = vec![1.0f64; k + 1];
    for t in (0..k).rev() {
        tail[t] = tail[t + 1] * mu.blocks[t].size() as f64;
    }
    let implied = (value / (tail[0] * (ratio + 1.0))).max(1.0);
    let mut c_fit = 0.0f64;
    for t in 1..k {
        let rhs = |c: f64| implied * tail[t] * (ratio * (c * ln_g).powi(t as i32) + (c * g * ln_g).powi(t as i32));
        if rhs(0.0) >= value {
            continue;
        }
        let mut hi = 1.0;
        while rhs(hi) < value {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if rhs(mid) >= value {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        c_fit = c_fit.max(hi);
    }
    (implied, c_fit)
}
