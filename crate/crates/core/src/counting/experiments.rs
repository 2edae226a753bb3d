use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampler::RepresentationSampler;
use super::table::CountTable;
use super::{count_representations, RepCountQuery};
use crate::digits::{big_digits, digit_len, DigitSystem};
use crate::error::{Error, Result};

/// Trials per independently seeded stream in Monte-Carlo experiments.
pub(crate) const TRIAL_CHUNK: usize = 1024;

/// Generator for chunk `chunk` of an experiment seeded with `seed`.
pub(crate) fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Ratio of two big integers as a float, robust to huge magnitudes.
pub(crate) fn big_ratio(a: &BigUint, b: &BigUint) -> f64 {
    let shift = a.bits().max(b.bits()).saturating_sub(1000);
    let fa: f64 = (a >> shift).to_string().parse().unwrap_or(f64::INFINITY);
    let fb: f64 = (b >> shift).to_string().parse().unwrap_or(f64::INFINITY);
    fa / fb
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensitivityRatio {
    /// `max_{j1,j2 ∈ [0,3]} count(T−j1)/count(T−j2)`; infinite if a count vanishes.
    pub ratio: f64,
    /// Counts of `T, T−1, T−2, T−3` as decimal strings.
    pub counts: Vec<String>,
    /// Offset `j` whose count is zero, if any.
    pub zero_witness: Option<u32>,
}

/// Largest ratio between the three-summand counts of `T, T−1, T−2, T−3`.
pub fn sensitivity_ratio(t: &BigUint, sys: &DigitSystem) -> Result<SensitivityRatio> {
    let g2 = BigUint::from(sys.g as u64 * sys.g as u64);
    if *t < g2 {
        return Err(Error::arg("sensitivity ratio needs T ≥ g²"));
    }
    let k = big_digits(t, sys.g).len() as u32;
    let s = DigitSystem::new(sys.g, sys.b, k)?;
    let counts: Vec<BigUint> = (0..4u32)
        .map(|j| count_representations(&RepCountQuery::new(t - j, 3, s)))
        .collect::<Result<_>>()?;
    Ok(ratio_of(&counts))
}

fn ratio_of(counts: &[BigUint]) -> SensitivityRatio {
    let zero = counts.iter().position(|c| *c == BigUint::from(0u32));
    let ratio = if zero.is_some() {
        f64::INFINITY
    } else {
        let max = counts.iter().max().unwrap();
        let min = counts.iter().min().unwrap();
        big_ratio(max, min)
    };
    SensitivityRatio {
        ratio,
        counts: counts.iter().map(|c| c.to_string()).collect(),
        zero_witness: zero.map(|j| j as u32),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensitivitySweep {
    pub g: u32,
    pub b: u32,
    pub from: u64,
    pub to: u64,
    pub max_ratio: f64,
    pub argmax: u64,
    /// First target with a vanishing count among `T..T−3`, as `(T, j)`.
    pub first_zero: Option<(u64, u32)>,
}

/// Sensitivity ratios for every `T ∈ [from, to]`, from one count table.
pub fn sensitivity_sweep(g: u32, b: u32, from: u64, to: u64) -> Result<SensitivitySweep> {
    if from < 3 || from > to {
        return Err(Error::arg("need 3 ≤ from ≤ to"));
    }
    let sys = DigitSystem::new(g, b, digit_len(to, g))?;
    let table = CountTable::new(&sys, 3, to / g as u64 + 1)?;
    let mut out = SensitivitySweep { g, b, from, to, max_ratio: 1.0, argmax: from, first_zero: None };
    for t in from..=to {
        let c: Vec<u128> = (0..4).map(|j| table.count(t - j, false, false)).collect();
        if let Some(j) = c.iter().position(|&x| x == 0) {
            if out.first_zero.is_none() {
                out.first_zero = Some((t, j as u32));
            }
            out.max_ratio = f64::INFINITY;
            continue;
        }
        let r = *c.iter().max().unwrap() as f64 / *c.iter().min().unwrap() as f64;
        if r > out.max_ratio {
            out.max_ratio = r;
            out.argmax = t;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerBoundSweep {
    pub g: u32,
    pub b: u32,
    pub from: u64,
    pub to: u64,
    pub holds: bool,
    pub first_violation: Option<u64>,
    /// Smallest `ln count(T) − (⌊log_g T⌋ − 3)·ln(g² − 3g)` over the range.
    pub min_log_margin: f64,
}

/// Checks `count(T) ≥ (g² − 3g)^(⌊log_g T⌋ − 3)` for every `T ∈ [from, to]`.
pub fn lower_bound_sweep(g: u32, b: u32, from: u64, to: u64) -> Result<LowerBoundSweep> {
    let g2 = g as u64 * g as u64;
    if from < g2 * g as u64 || from > to {
        return Err(Error::arg("need g³ ≤ from ≤ to"));
    }
    let sys = DigitSystem::new(g, b, digit_len(to, g))?;
    let table = CountTable::new(&sys, 3, to / g as u64 + 1)?;
    let ln_base = ((g2 - 3 * g as u64) as f64).ln();
    let base = (g2 - 3 * g as u64) as u128;
    let mut out = LowerBoundSweep { g, b, from, to, holds: true, first_violation: None, min_log_margin: f64::INFINITY };
    let mut exp_cache = (u32::MAX, 0u128);
    for t in from..=to {
        let e = digit_len(t, g) - 1 - 3;
        if exp_cache.0 != e {
            exp_cache = (e, base.pow(e));
        }
        let c = table.count(t, false, false);
        if c < exp_cache.1 {
            out.holds = false;
            out.first_violation.get_or_insert(t);
        }
        let margin = if c == 0 { f64::NEG_INFINITY } else { (c as f64).ln() - e as f64 * ln_base };
        out.min_log_margin = out.min_log_margin.min(margin);
    }
    Ok(out)
}

/// A subset of `[0, g−1]²`, the allowed digit pairs at one position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSet {
    pub g: u32,
    members: Vec<bool>,
}

impl PairSet {
    pub fn from_fn(g: u32, f: impl Fn(u32, u32) -> bool) -> PairSet {
        let members = (0..g * g).map(|i| f(i / g, i % g)).collect();
        PairSet { g, members }
    }

    pub fn empty(g: u32) -> PairSet {
        PairSet::from_fn(g, |_, _| false)
    }

    pub fn full(g: u32) -> PairSet {
        PairSet::from_fn(g, |_, _| true)
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&x| x).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.members[(x * self.g + y) as usize]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominationResult {
    pub positions: Vec<usize>,
    pub trials: usize,
    /// `P̂[Σ_j Y_j ≥ t]` for `t = 0..=|S|`.
    pub empirical_tail: Vec<f64>,
    pub std_error: Vec<f64>,
    /// `P[Σ_j Ber(min(C|S_j|/g², 1)) ≥ t]` at the fitted `C`.
    pub bound_tail: Vec<f64>,
    pub fitted_c: f64,
}

/// Monte-Carlo check that pair-indicator counts under uniform three-summand
/// representations are dominated by independent Bernoulli sums.
pub fn domination_experiment(
    t: &BigUint,
    sys: &DigitSystem,
    sets: &[(usize, PairSet)],
    trials: usize,
    seed: u64,
) -> Result<DominationResult> {
    let g = sys.g;
    if *t < BigUint::from(g as u64 * g as u64) {
        return Err(Error::arg("domination experiment needs T ≥ g²"));
    }
    if trials == 0 {
        return Err(Error::arg("need at least one trial"));
    }
    if sets.iter().any(|(_, s)| s.g != g) {
        return Err(Error::arg("pair sets must use the same base"));
    }
    let k = big_digits(t, g).len() as u32;
    let s = DigitSystem::new(g, sys.b, k)?;
    let sampler = RepresentationSampler::new(&RepCountQuery::new(t.clone(), 3, s))?;
    let n = sets.len();
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let hists: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut hist = vec![0u64; n + 1];
            let todo = TRIAL_CHUNK.min(trials - c * TRIAL_CHUNK);
            for _ in 0..todo {
                let x = sampler.sample_digits(&mut rng);
                let digit = |i: usize, j: usize| x[i].get(j).copied().unwrap_or(0);
                let y = sets.iter().filter(|(j, set)| set.contains(digit(0, *j), digit(1, *j))).count();
                hist[y] += 1;
            }
            hist
        })
        .collect();
    let mut hist = vec![0u64; n + 1];
    for h in &hists {
        for (a, b) in hist.iter_mut().zip(h) {
            *a += b;
        }
    }
    let nt = trials as f64;
    let mut empirical_tail = vec![0.0; n + 1];
    let mut acc = 0u64;
    for t in (0..=n).rev() {
        acc += hist[t];
        empirical_tail[t] = acc as f64 / nt;
    }
    let std_error: Vec<f64> = empirical_tail.iter().map(|&p| (p * (1.0 - p) / nt).sqrt()).collect();
    let sizes: Vec<f64> = sets.iter().map(|(_, s)| s.len() as f64).collect();
    let g2 = (g * g) as f64;
    let tail_at = |c: f64| poisson_binomial_tail(&sizes.iter().map(|&s| (c * s / g2).min(1.0)).collect::<Vec<_>>());
    let ok = |c: f64| {
        tail_at(c)
            .iter()
            .zip(empirical_tail.iter().zip(&std_error))
            .all(|(&b, (&e, &se))| b + 1e-12 >= e - 3.0 * se)
    };
    let c_max = sizes.iter().filter(|&&s| s > 0.0).map(|&s| g2 / s).fold(1.0, f64::max);
    let fitted = if ok(0.0) {
        0.0
    } else if !ok(c_max) {
        f64::INFINITY
    } else {
        let (mut lo, mut hi) = (0.0, c_max);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let fitted_c = fitted.max(1.0);
    Ok(DominationResult {
        positions: sets.iter().map(|(j, _)| *j).collect(),
        trials,
        empirical_tail,
        std_error,
        bound_tail: if fitted_c.is_finite() { tail_at(fitted_c) } else { vec![1.0; n + 1] },
        fitted_c,
    })
}

/// `P[Σ Ber(p_i) ≥ t]` for every `t = 0..=len`.
pub(crate) fn poisson_binomial_tail(ps: &[f64]) -> Vec<f64> {
    let mut pmf = vec![1.0f64];
    for &p in ps {
        let mut next = vec![0.0; pmf.len() + 1];
        for (i, &q) in pmf.iter().enumerate() {
            next[i] += q * (1.0 - p);
            next[i + 1] += q * p;
        }
        pmf = next;
    }
    let mut tail = vec![0.0; pmf.len()];
    let mut acc = 0.0;
    for i in (0..pmf.len()).rev() {
        acc += pmf[i];
        tail[i] = acc.min(1.0);
    }
    tail
}

/// Chernoff–Hoeffding bound for `P[Bin(n,p) ≥ np']`.
pub fn chernoff_bound(n: u64, p: f64, p_prime: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) || !(p_prime <= 1.0) {
        return Err(Error::arg("probabilities must satisfy 0 < p ≤ p' ≤ 1"));
    }
    if p_prime < p {
        return Err(Error::arg(format!("p' = {p_prime} is below p = {p}")));
    }
    let n = n as f64;
    if p_prime == 1.0 {
        return Ok((-n * (1.0 / p).ln()).exp());
    }
    let kl = p_prime * (p_prime / p).ln() + (1.0 - p_prime) * ((1.0 - p_prime) / (1.0 - p)).ln();
    Ok((-n * kl).exp())
}
