use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{cis, fourier_transform, Block, ProductMeasure, Theta};
use crate::error::{Error, Result};
use crate::numtheory::{gcd, mod_pow};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WellConditionedCaps {
    /// Upper limit for the denominators scanned by the third condition.
    pub b_max: u64,
}

impl Default for WellConditionedCaps {
    fn default() -> Self {
        WellConditionedCaps { b_max: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Interval `start..start+len` of positions with too few large blocks.
    Interval { start: usize, len: usize, large: usize },
    /// Position whose digit set is not an interval missing at most two points.
    Position { j: usize, missing: usize },
    /// Fraction `a/b` with too few well-spread positions.
    Fraction { a: u64, b: u64, count: usize, required: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionFailure {
    pub condition: u8,
    pub witness: Witness,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WellConditionedReport {
    #[serde(rename = "C")]
    pub c: f64,
    pub passed: bool,
    pub failures: Vec<ConditionFailure>,
    pub interval_length: usize,
    /// Number of length-`interval_length` windows inside the first quarter of positions.
    pub intervals_checked: usize,
    /// Largest denominator scanned by the third condition after applying the cap.
    pub b_limit: u64,
    pub b_limit_capped: bool,
    pub log_base: String,
}

/// Tests the three well-conditioning conditions on explicit digit sets `sets[j] ⊆ [0, g−1]`.
pub fn check_well_conditioned(
    g: u32,
    sets: &[Vec<u32>],
    c: f64,
    n: &BigUint,
    caps: &WellConditionedCaps,
) -> Result<WellConditionedReport> {
    if *n < BigUint::from(g as u64 * g as u64) {
        return Err(Error::arg("well-conditioning needs N ≥ g²"));
    }
    let k = sets.len();
    let ln_g = (g as f64).ln();
    let lnln_n = ln_big(n).ln();
    let sizes: Vec<usize> = sets
        .iter()
        .map(|s| {
            let mut v = s.clone();
            v.sort_unstable();
            v.dedup();
            v.len()
        })
        .collect();
    let mut failures = Vec::new();

    // condition 1
    let quarter = k / 4;
    let len = ((c * lnln_n / ln_g).ceil() as usize).max(1);
    let threshold = (g as f64).powf(0.99);
    let large: Vec<bool> = sizes.iter().map(|&s| s as f64 >= threshold).collect();
    let intervals_checked = if len <= quarter { quarter - len + 1 } else { 0 };
    for start in 0..intervals_checked {
        let count = large[start..start + len].iter().filter(|&&x| x).count();
        if (count as f64) < 0.99 * len as f64 {
            failures.push(ConditionFailure {
                condition: 1,
                witness: Witness::Interval { start, len, large: count },
            });
            break;
        }
    }

    // condition 2
    for (j, s) in sets.iter().enumerate() {
        let missing = match (s.iter().min(), s.iter().max()) {
            (Some(&lo), Some(&hi)) => (hi - lo + 1) as usize - sizes[j],
            _ => usize::MAX,
        };
        if missing > 2 || s.iter().any(|&d| d >= g) {
            failures.push(ConditionFailure { condition: 2, witness: Witness::Position { j, missing } });
            break;
        }
    }

    // condition 3
    let natural_limit = lnln_n.powi(5).exp();
    let b_limit_capped = natural_limit > caps.b_max as f64;
    let b_limit = if b_limit_capped { caps.b_max } else { natural_limit.floor() as u64 };
    let j_lo = k.div_ceil(8);
    let j_hi = k / 4;
    let positions: Vec<usize> = (j_lo..=j_hi).filter(|&j| j < k && sizes[j] >= 4).collect();
    let g2 = g as u128 * g as u128;
    'outer: for b in 2..=b_limit {
        if gcd(b, g as u64) != 1 {
            continue;
        }
        let required = k as f64 / (40.0 * (b as f64).ln());
        let gj: Vec<u64> = positions.iter().map(|&j| mod_pow(g as u64, j as u64, b)).collect();
        for a in 1..b {
            let count = gj
                .iter()
                .filter(|&&p| {
                    let r = (a as u128 * p as u128 % b as u128) as u128;
                    r.min(b as u128 - r) * g2 >= b as u128
                })
                .count();
            if (count as f64) < required {
                failures.push(ConditionFailure {
                    condition: 3,
                    witness: Witness::Fraction { a, b, count, required },
                });
                break 'outer;
            }
        }
    }

    Ok(WellConditionedReport {
        c,
        passed: failures.is_empty(),
        failures,
        interval_length: len,
        intervals_checked,
        b_limit,
        b_limit_capped,
        log_base: "natural".into(),
    })
}

pub fn check_measure_well_conditioned(
    mu: &ProductMeasure,
    c: f64,
    n: &BigUint,
    caps: &WellConditionedCaps,
) -> Result<WellConditionedReport> {
    let sets: Vec<Vec<u32>> = mu.blocks.iter().map(|b| b.digits().collect()).collect();
    check_well_conditioned(mu.g, &sets, c, n, caps)
}

/// Natural logarithm of a big integer.
pub(crate) fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        let x: f64 = n.to_string().parse().unwrap_or(f64::INFINITY);
        if x.is_finite() {
            return x.ln();
        }
    }
    let shift = bits.saturating_sub(60);
    let top = n >> shift;
    let top: f64 = top.to_string().parse().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinfBound {
    /// `|μ̂(a/b)| / Π|B_j|`.
    pub normalized: f64,
    /// Product of the per-block factors `1 − (2 − |1 + e(a g^j/b)|)/|B_j|` over blocks with `|B_j| ≥ 4`.
    pub bound: f64,
}

/// Sup-norm estimate from two consecutive digits in every large block.
pub fn linf_product_bound(mu: &ProductMeasure, a: i64, b: u64) -> LinfBound {
    let mass = mu.mass_f64();
    let normalized = fourier_transform(mu, &Theta::rational(a, b)).norm() / mass;
    let ar = crate::numtheory::rem(a, b);
    let bound = mu
        .blocks
        .iter()
        .enumerate()
        .filter(|(_, blk)| blk.size() >= 4 && has_consecutive(blk))
        .map(|(j, blk)| {
            let r = crate::numtheory::mod_mul(mod_pow(mu.g as u64, j as u64, b), ar, b);
            let s = (1.0 + cis(r as f64 / b as f64)).norm();
            1.0 - (2.0 - s) / blk.size() as f64
        })
        .product();
    LinfBound { normalized, bound }
}

fn has_consecutive(b: &Block) -> bool {
    (b.lo..b.hi).any(|z| b.contains(z) && b.contains(z + 1))
}
