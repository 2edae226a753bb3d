//! Exact counting of representations `x_1 + … + x_m = T` with restricted summands.
//!
//! The dynamic program runs from the least significant digit upward. Its
//! state is the incoming carry `c ∈ [0, m−1]` and the number `a` of summands
//! that still have digits at the current position. At each position some of
//! the live summands may end; an ending summand's top digit must be nonzero,
//! while a continuing summand may use any allowed digit (including 0).

mod decompose;
mod experiments;
mod sampler;
mod table;
mod weight;

pub use decompose::{decompose_conditional, pair_sampler, sample_decomposition_entry, CarryDecomposition, DecompositionEntry};
pub use experiments::{
    chernoff_bound, domination_experiment, lower_bound_sweep, sensitivity_ratio, sensitivity_sweep,
    DominationResult, LowerBoundSweep, PairSet, SensitivityRatio, SensitivitySweep,
};
pub(crate) use experiments::{chunk_rng, TRIAL_CHUNK};
pub use sampler::RepresentationSampler;
pub use table::CountTable;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::digits::{big_digits, DigitSystem};
use crate::error::{Error, Result};
use crate::numtheory::gcd;
use weight::{binomial, Weight};

/// A representation-counting problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepCountQuery {
    #[serde(with = "crate::serde_big")]
    pub target: BigUint,
    pub m: usize,
    pub sys: DigitSystem,
    pub include_zero: bool,
    pub coprime_to_g: bool,
    /// Forbidden digit per position, overriding `sys.b` where present.
    pub forbidden_per_position: Option<Vec<u32>>,
}

impl RepCountQuery {
    pub fn new(target: impl Into<BigUint>, m: usize, sys: DigitSystem) -> RepCountQuery {
        RepCountQuery {
            target: target.into(),
            m,
            sys,
            include_zero: false,
            coprime_to_g: false,
            forbidden_per_position: None,
        }
    }

    pub fn include_zero(mut self, yes: bool) -> Self {
        self.include_zero = yes;
        self
    }

    pub fn coprime(mut self, yes: bool) -> Self {
        self.coprime_to_g = yes;
        self
    }

    pub fn forbidden_per_position(mut self, digits: Vec<u32>) -> Self {
        self.forbidden_per_position = Some(digits);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.m) {
            return Err(Error::arg(format!("number of summands must be 2 or 3, got {}", self.m)));
        }
        if let Some(ov) = &self.forbidden_per_position {
            if ov.iter().any(|&d| d >= self.sys.g) {
                return Err(Error::arg("per-position forbidden digit out of range"));
            }
        }
        let bound = self.sys.modulus_big() * self.m;
        if self.target >= bound {
            return Err(Error::range(format!(
                "target {} is not below m·g^k = {bound}",
                self.target
            )));
        }
        Ok(())
    }

    fn forbidden_at(&self, j: usize) -> u32 {
        self.forbidden_per_position
            .as_ref()
            .and_then(|v| v.get(j).copied())
            .unwrap_or(self.sys.b)
    }
}

/// `n_m(s) = #{(d_1..d_m) ∈ D^m : Σ d_i = s}` for `s ∈ [0, m(g−1)]`.
pub fn digit_tuple_counts(m: usize, allowed: &[u32], g: u32) -> Result<Vec<u64>> {
    if !(1..=3).contains(&m) {
        return Err(Error::arg("tuple length must be 1, 2 or 3"));
    }
    if allowed.is_empty() || allowed.iter().any(|&d| d >= g) {
        return Err(Error::arg("digit set must be a nonempty subset of [0, g−1]"));
    }
    let mask = mask_of(allowed, g);
    let mut out = vec![1u64];
    for _ in 0..m {
        out = convolve(&out, &mask);
    }
    out.resize(m * (g as usize - 1) + 1, 0);
    Ok(out)
}

fn mask_of(digits: &[u32], g: u32) -> Vec<u64> {
    let mut v = vec![0u64; g as usize];
    for &d in digits {
        v[d as usize] = 1;
    }
    v
}

pub(crate) fn convolve(a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Digit-sum tables for one position: `dist[a][e][s]` counts digit tuples of
/// `a − e` continuing summands (digits in `cont`) and `e` ending summands
/// (digits in `end`) with total `s`.
#[derive(Debug, Clone)]
pub(crate) struct Layer {
    pub g: u32,
    pub cont: Vec<bool>,
    pub end: Vec<bool>,
    pub dist: Vec<Vec<Vec<u64>>>,
}

impl Layer {
    pub(crate) fn new(g: u32, m: usize, forbidden: u32, units_only: bool) -> Layer {
        let cont: Vec<bool> = (0..g)
            .map(|d| d != forbidden && (!units_only || gcd(d as u64, g as u64) == 1))
            .collect();
        let end: Vec<bool> = (0..g).map(|d| d != 0 && cont[d as usize]).collect();
        let to_mask = |v: &[bool]| v.iter().map(|&x| x as u64).collect::<Vec<u64>>();
        let (cm, em) = (to_mask(&cont), to_mask(&end));
        let mut cont_pow = vec![vec![1u64]];
        let mut end_pow = vec![vec![1u64]];
        for r in 1..=m {
            cont_pow.push(convolve(&cont_pow[r - 1], &cm));
            end_pow.push(convolve(&end_pow[r - 1], &em));
        }
        let dist = (0..=m)
            .map(|a| (0..=a).map(|e| convolve(&cont_pow[a - e], &end_pow[e])).collect())
            .collect();
        Layer { g, cont, end, dist }
    }

    /// Calls `f(next_carry, e, s, multiplicity)` for every way `a` live summands
    /// with incoming carry `c` produce output digit `t`.
    #[inline]
    pub(crate) fn transitions(&self, c: usize, a: usize, t: u32, mut f: impl FnMut(usize, usize, usize, u64)) {
        let g = self.g as usize;
        let t = t as usize;
        let first = (t + g - c % g) % g;
        for e in 0..=a {
            let table = &self.dist[a][e];
            let coef = binomial(a, e);
            let mut s = first;
            while s < table.len() {
                let n = table[s];
                if n != 0 {
                    f((c + s - t) / g, e, s, coef * n);
                }
                s += g;
            }
        }
    }
}

/// Per-position layers and initial state weights for one query shape.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    pub g: u32,
    pub m: usize,
    pub digits: Vec<u32>,
    pub layers: Vec<Arc<Layer>>,
    /// Weight of starting with `a` live summands (the others are zero).
    pub init: Vec<u64>,
}

impl Plan {
    pub(crate) fn new(q: &RepCountQuery) -> Result<Plan> {
        q.validate()?;
        let g = q.sys.g;
        let m = q.m;
        let digits = big_digits(&q.target, g);
        let mut cache: BTreeMap<(u32, bool), Arc<Layer>> = BTreeMap::new();
        let layers = (0..digits.len())
            .map(|j| {
                let key = (q.forbidden_at(j), q.coprime_to_g && j == 0);
                cache
                    .entry(key)
                    .or_insert_with(|| Arc::new(Layer::new(g, m, key.0, key.1)))
                    .clone()
            })
            .collect();
        let init = (0..=m)
            .map(|a| {
                if a == m {
                    1
                } else if q.include_zero && !q.coprime_to_g {
                    binomial(m, a)
                } else {
                    0
                }
            })
            .collect();
        Ok(Plan { g, m, digits, layers, init })
    }

    pub(crate) fn states(&self) -> usize {
        self.m * (self.m + 1)
    }

    pub(crate) fn state(&self, c: usize, a: usize) -> usize {
        c * (self.m + 1) + a
    }

    /// Whether every intermediate weight provably fits in 128 bits.
    pub(crate) fn fits_u128(&self) -> bool {
        let bits = self.digits.len() as f64 * self.m as f64 * (self.g as f64).log2() + self.m as f64 + 4.0;
        bits < 126.0
    }

    fn initial<W: Weight>(&self) -> Vec<W> {
        let mut v = vec![W::zero(); self.states()];
        for (a, &w) in self.init.iter().enumerate() {
            if w != 0 {
                v[self.state(0, a)] = W::from_u64(w);
            }
        }
        v
    }

    fn step<W: Weight>(&self, j: usize, cur: &[W]) -> Vec<W> {
        let mut next = vec![W::zero(); self.states()];
        let layer = &self.layers[j];
        let t = self.digits[j];
        for c in 0..self.m {
            for a in 0..=self.m {
                let w = &cur[self.state(c, a)];
                if w.is_zero() {
                    continue;
                }
                layer.transitions(c, a, t, |c2, e, _s, mult| {
                    next[c2 * (self.m + 1) + a - e].add_mul(w, mult);
                });
            }
        }
        next
    }

    /// Forward tables for every level `0..=K`.
    pub(crate) fn forward_all<W: Weight>(&self) -> Vec<Vec<W>> {
        let mut levels = vec![self.initial::<W>()];
        for j in 0..self.digits.len() {
            let next = self.step(j, levels.last().unwrap());
            levels.push(next);
        }
        levels
    }

    pub(crate) fn count<W: Weight>(&self) -> W {
        let mut cur = self.initial::<W>();
        for j in 0..self.digits.len() {
            cur = self.step(j, &cur);
        }
        cur[self.state(0, 0)].clone()
    }
}

/// Exact number of ordered representations described by the query.
pub fn count_representations(q: &RepCountQuery) -> Result<BigUint> {
    let plan = Plan::new(q)?;
    Ok(if plan.fits_u128() {
        plan.count::<u128>().to_big()
    } else {
        plan.count::<BigUint>()
    })
}

/// Reusable counter for many targets sharing one query shape.
#[derive(Debug, Clone)]
pub struct RepresentationCounter {
    template: RepCountQuery,
}

impl RepresentationCounter {
    pub fn new(sys: DigitSystem, m: usize, include_zero: bool, coprime_to_g: bool) -> Result<Self> {
        let template = RepCountQuery::new(0u32, m, sys).include_zero(include_zero).coprime(coprime_to_g);
        template.validate()?;
        Ok(RepresentationCounter { template })
    }

    pub fn count(&self, target: &BigUint) -> Result<BigUint> {
        let mut q = self.template.clone();
        q.target = target.clone();
        count_representations(&q)
    }

    pub fn count_u64(&self, target: u64) -> Result<BigUint> {
        self.count(&BigUint::from(target))
    }
}
