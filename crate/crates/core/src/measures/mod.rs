//! Product measures over digit positions and their Fourier-side evaluators.
//!
//! A [`ProductMeasure`] puts unit mass on every integer `Σ z_j g^j` whose
//! digit `z_j` lies in the block `B_j`. Each block is an interval with at
//! most two points removed.

mod conditioning;
mod l1;
mod sieve;

pub use conditioning::{
    check_measure_well_conditioned, check_well_conditioned, linf_product_bound, ConditionFailure,
    LinfBound, WellConditionedCaps, WellConditionedReport, Witness,
};
pub(crate) use conditioning::ln_big;
pub use l1::{l1_norm, l1_norm_capped, L1Estimate, GRID_CAP};
pub use sieve::{large_sieve_sum, large_sieve_sum_capped, LargeSieveSum, SIEVE_CAP};

use num_bigint::BigUint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::numtheory::{mod_mul, mod_pow};

/// Digits `lo..=hi` minus at most two excluded points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub lo: u32,
    pub hi: u32,
    pub excluded: Vec<u32>,
}

impl Block {
    pub fn new(lo: u32, hi: u32, mut excluded: Vec<u32>) -> Result<Block> {
        if lo > hi {
            return Err(Error::arg(format!("block bounds {lo} > {hi}")));
        }
        excluded.sort_unstable();
        excluded.dedup();
        if excluded.len() > 2 {
            return Err(Error::arg("a block may exclude at most two digits"));
        }
        if excluded.iter().any(|&d| d < lo || d > hi) {
            return Err(Error::arg("excluded digits must lie inside the block interval"));
        }
        let block = Block { lo, hi, excluded };
        if block.size() == 0 {
            return Err(Error::EmptySupport("block has no digits".into()));
        }
        Ok(block)
    }

    pub fn full(g: u32) -> Block {
        Block { lo: 0, hi: g - 1, excluded: Vec::new() }
    }

    pub fn singleton(d: u32) -> Block {
        Block { lo: d, hi: d, excluded: Vec::new() }
    }

    /// Block from an explicit digit set, if it is an interval missing at most two points.
    pub fn from_digits(digits: &[u32]) -> Result<Block> {
        let mut ds = digits.to_vec();
        ds.sort_unstable();
        ds.dedup();
        let (Some(&lo), Some(&hi)) = (ds.first(), ds.last()) else {
            return Err(Error::EmptySupport("empty digit set".into()));
        };
        let excluded: Vec<u32> = (lo..=hi).filter(|d| ds.binary_search(d).is_err()).collect();
        Block::new(lo, hi, excluded)
    }

    pub fn size(&self) -> u32 {
        self.hi - self.lo + 1 - self.excluded.len() as u32
    }

    pub fn contains(&self, d: u32) -> bool {
        d >= self.lo && d <= self.hi && !self.excluded.contains(&d)
    }

    pub fn digits(&self) -> impl Iterator<Item = u32> + '_ {
        (self.lo..=self.hi).filter(move |d| !self.excluded.contains(d))
    }

    /// `Σ_{z∈B} e(−z(r/den + off))` with the rational part reduced exactly.
    fn phase_sum(&self, r: u64, den: u64, (hi, lo): (f64, f64)) -> Complex64 {
        self.digits()
            .map(|z| {
                let exact = mod_mul(z as u64, r, den) as f64 / den as f64;
                let zf = z as f64;
                cis(-(exact + (zf * hi).rem_euclid(1.0) + zf * lo))
            })
            .sum()
    }
}

/// `e(x) = exp(2πix)`.
#[inline]
pub fn cis(x: f64) -> Complex64 {
    let (s, c) = (TAU * x).sin_cos();
    Complex64::new(c, s)
}

/// Frequency `num/den + offset`, with the rational part kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub num: i64,
    pub den: u64,
    pub offset: f64,
}

impl Theta {
    pub fn new(num: i64, den: u64, offset: f64) -> Result<Theta> {
        if den == 0 {
            return Err(Error::arg("frequency denominator must be positive"));
        }
        Ok(Theta { num, den, offset })
    }

    pub fn rational(num: i64, den: u64) -> Theta {
        Theta { num, den: den.max(1), offset: 0.0 }
    }

    pub fn real(x: f64) -> Theta {
        Theta { num: 0, den: 1, offset: x }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64 + self.offset
    }
}

/// The measure `μ_B` with one block per digit position, little-endian.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductMeasure {
    pub g: u32,
    pub blocks: Vec<Block>,
}

impl ProductMeasure {
    pub fn new(g: u32, blocks: Vec<Block>) -> Result<ProductMeasure> {
        if g < 2 {
            return Err(Error::arg("base must be at least 2"));
        }
        if blocks.is_empty() {
            return Err(Error::arg("a product measure needs at least one block"));
        }
        for (j, b) in blocks.iter().enumerate() {
            if b.hi >= g {
                return Err(Error::arg(format!("block {j} exceeds digit range")));
            }
            if b.size() == 0 {
                return Err(Error::EmptySupport(format!("block {j} is empty")));
            }
        }
        Ok(ProductMeasure { g, blocks })
    }

    /// Every block equal to `[0, g−1]` minus the digit `b`.
    pub fn avoiding_digit(g: u32, b: u32, k: usize) -> Result<ProductMeasure> {
        let block = Block::from_digits(&(0..g).filter(|&d| d != b).collect::<Vec<_>>())?;
        ProductMeasure::new(g, vec![block; k])
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn mass(&self) -> BigUint {
        self.blocks
            .iter()
            .fold(BigUint::from(1u32), |acc, b| acc * b.size())
    }

    pub fn mass_f64(&self) -> f64 {
        self.blocks.iter().map(|b| b.size() as f64).product()
    }

    pub fn log_mass(&self) -> f64 {
        self.blocks.iter().map(|b| (b.size() as f64).ln()).sum()
    }

    /// Every point of the support, in increasing order.
    pub fn support(&self, cap: u64) -> Result<Vec<u64>> {
        let mass = self.mass_f64();
        Error::check_cap("support size", mass as u128, cap as u128)?;
        if (self.g as f64).powi(self.k() as i32) > u64::MAX as f64 {
            return Err(Error::range("support points exceed 64 bits"));
        }
        let mut pts = vec![0u64];
        let mut scale = 1u64;
        for b in &self.blocks {
            let mut next = Vec::with_capacity(pts.len() * b.size() as usize);
            for z in b.digits() {
                next.extend(pts.iter().map(|&p| p + z as u64 * scale));
            }
            pts = next;
            scale = scale.saturating_mul(self.g as u64);
        }
        pts.sort_unstable();
        Ok(pts)
    }

    /// Fourier transform `Σ_x μ(x) e(−xθ)` evaluated block by block.
    pub fn fourier_transform(&self, theta: &Theta) -> Complex64 {
        fourier_transform(self, theta)
    }
}

/// `Π_j Σ_{z∈B_j} e(−z g^j θ)`; the rational part of `g^j θ` is reduced mod 1 exactly.
pub fn fourier_transform(mu: &ProductMeasure, theta: &Theta) -> Complex64 {
    let den = theta.den;
    let num = crate::numtheory::rem(theta.num, den);
    let g = mu.g as u64;
    let mut off = (theta.offset.rem_euclid(1.0), 0.0);
    let mut acc = Complex64::new(1.0, 0.0);
    for (j, b) in mu.blocks.iter().enumerate() {
        let r = mod_mul(mod_pow(g, j as u64, den), num, den);
        acc *= b.phase_sum(r, den, off);
        off = scale_mod_one(off, mu.g as f64);
    }
    acc
}

/// `g·(hi + lo) mod 1` carried as an unevaluated sum, so repeated scaling
/// does not amplify rounding error by `g` per step.
fn scale_mod_one((hi, lo): (f64, f64), g: f64) -> (f64, f64) {
    let p = g * hi;
    let e = g.mul_add(hi, -p) + g * lo;
    let f = p.rem_euclid(1.0);
    let (mut s, mut t) = two_sum(f, e);
    if s >= 1.0 {
        s -= 1.0;
    } else if s < 0.0 {
        let (a, b) = two_sum(s, 1.0);
        s = a;
        t += b;
    }
    (s, t)
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}
