use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approximant::FChiTable;
use crate::characters::{CharacterRef, DirichletCharacter};
use crate::counting::{chunk_rng, count_representations, CountTable, RepCountQuery, RepresentationSampler, TRIAL_CHUNK};
use crate::digits::{big_to_u64, digit_len, DigitSystem};
use crate::error::{Error, Result};
use crate::numtheory::{build_tables, gcd, pairwise_sum};

/// Largest target for the divisor-moment experiment.
pub const DIVISOR_MOMENT_CAP: u64 = 1_000_000;

/// Largest target for the correction-term experiment.
pub const CORRECTION_CAP: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorMomentRow {
    #[serde(rename = "T")]
    pub t: u64,
    /// Number of representations `x1 + x2 + x3 = T`.
    pub count: String,
    /// Mean of `τ(x1)^A` over representations.
    pub moment: f64,
    /// Mean of `τ(x1 + x2)^A`.
    pub sum_moment: f64,
    /// `c` with `moment = (ln T)^c`.
    pub exponent: f64,
    pub sum_exponent: f64,
}

/// Divisor moments over all representations of each `T`, summed exactly as
/// `Σ_{x ∈ 𝒮_b} τ(x)^A · #{x2 + x3 = T − x}` from one count table.
pub fn divisor_moment_experiment(g: u32, b: u32, a: u32, targets: &[u64]) -> Result<Vec<DivisorMomentRow>> {
    if a > 4 {
        return Err(Error::arg("divisor exponent A must be at most 4"));
    }
    let Some(&t_max) = targets.iter().max() else { return Ok(Vec::new()) };
    Error::check_cap("divisor moment target", t_max as u128, DIVISOR_MOMENT_CAP as u128)?;
    if targets.iter().any(|&t| t < 3) {
        return Err(Error::arg("targets must be at least 3"));
    }
    let sys = DigitSystem::new(g, b, digit_len(t_max, g))?;
    let table = CountTable::new(&sys, 3, t_max)?;
    let tau = build_tables(t_max as usize)?;
    let pow = |x: u64| (tau.divisor_count(x as usize) as u128).pow(a);
    Ok(targets
        .iter()
        .map(|&t| {
            let total = table.positive(3, t);
            let (mut first, mut pair) = (0u128, 0u128);
            for x in (1..t - 1).filter(|&x| sys.is_restricted(x)) {
                let rest = table.positive(2, t - x);
                first += pow(x) * rest;
                pair += pow(t - x) * rest;
            }
            let moment = first as f64 / total as f64;
            let sum_moment = pair as f64 / total as f64;
            let lnln = (t as f64).ln().ln();
            DivisorMomentRow {
                t,
                count: total.to_string(),
                moment,
                sum_moment,
                exponent: moment.ln() / lnln,
                sum_exponent: sum_moment.ln() / lnln,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisibilityRow {
    pub d: u64,
    /// Trials with `d | x1 + x2`.
    pub hits: u64,
    pub probability: f64,
    pub std_error: f64,
    /// Trials with `d/(x1 + x2, d) ≤ √d`.
    pub half_hits: u64,
    pub half_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisibilityResult {
    #[serde(rename = "N", with = "crate::serde_big")]
    pub n: BigUint,
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<DivisibilityRow>,
    /// Smallest `C ≥ 1` with `P[d | x1 + x2] ≤ d^{−1/C}` for every `d > 1`;
    /// absent if some `d > 1` is hit in every trial.
    pub fitted_c: Option<f64>,
    pub fitted_c_half: Option<f64>,
}

fn envelope_exponent(rows: &[(u64, f64)]) -> Option<f64> {
    let mut c = 1.0f64;
    for &(d, p) in rows.iter().filter(|r| r.0 > 1 && r.1 > 0.0) {
        if p >= 1.0 {
            return None;
        }
        c = c.max((d as f64).ln() / -p.ln());
    }
    Some(c)
}

/// Monte-Carlo estimate of `P[d | x1 + x2]` over uniform representations
/// `x1 + x2 + x3 = N`, with `x_i ∈ 𝒮_b`.
pub fn divisibility_experiment(n: &BigUint, g: u32, b: u32, ds: &[u64], trials: u64, seed: u64) -> Result<DivisibilityResult> {
    if trials < 1000 {
        return Err(Error::arg("at least 1000 trials are needed"));
    }
    if ds.contains(&0) {
        return Err(Error::arg("divisors must be positive"));
    }
    let sys = DigitSystem::for_big_target(g, b, n)?;
    let sampler = RepresentationSampler::new(&RepCountQuery::new(n.clone(), 3, sys))?;
    let chunks = trials.div_ceil(TRIAL_CHUNK as u64) as usize;
    let counts: Vec<Vec<(u64, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = (trials - (c * TRIAL_CHUNK) as u64).min(TRIAL_CHUNK as u64);
            let mut acc = vec![(0u64, 0u64); ds.len()];
            for _ in 0..len {
                let x = sampler.sample(&mut rng);
                let s = &x[0] + &x[1];
                for (slot, &d) in acc.iter_mut().zip(ds) {
                    let r = (&s % d).to_u64().unwrap();
                    let common = gcd(r, d);
                    if r == 0 {
                        slot.0 += 1;
                    }
                    if (common as u128) * (common as u128) >= d as u128 {
                        slot.1 += 1;
                    }
                }
            }
            acc
        })
        .collect();
    let tf = trials as f64;
    let rows: Vec<DivisibilityRow> = ds
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let hits: u64 = counts.iter().map(|c| c[i].0).sum();
            let half_hits: u64 = counts.iter().map(|c| c[i].1).sum();
            let p = hits as f64 / tf;
            DivisibilityRow {
                d,
                hits,
                probability: p,
                std_error: (p * (1.0 - p) / tf).sqrt(),
                half_hits,
                half_probability: half_hits as f64 / tf,
            }
        })
        .collect();
    let fitted_c = envelope_exponent(&rows.iter().map(|r| (r.d, r.probability)).collect::<Vec<_>>());
    let fitted_c_half = envelope_exponent(&rows.iter().map(|r| (r.d, r.half_probability)).collect::<Vec<_>>());
    Ok(DivisibilityResult { n: n.clone(), trials, seed, rows, fitted_c, fitted_c_half })
}

/// A zero `ρ = β + iγ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroPoint {
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTerm {
    pub x3: u64,
    pub tau: u64,
    /// `|Σ_{x1 + x2 = N − x3} Π x_j^{ρ_j − 1} F_{χ_j,Q}(x_j)|`.
    pub inner_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTermResult {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub chi1: CharacterRef,
    pub chi2: CharacterRef,
    pub rho1: ZeroPoint,
    pub rho2: ZeroPoint,
    pub lhs_sum: f64,
    /// Number of representations `x1 + x2 + x3 = N`.
    pub baseline: String,
    pub ratio: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub terms: Vec<CorrectionTerm>,
}

/// `Σ_{x3 ∈ 𝒮_b} τ(x3) |Σ_{x1 + x2 = N − x3, x_i ∈ 𝒮_b} Π x_j^{ρ_j − 1} F_{χ_j,Q}(x_j)|`
/// by direct enumeration, with the per-`x3` terms when `dump` is set.
#[allow(clippy::too_many_arguments)]
pub fn correction_term_experiment(
    n: u64,
    g: u32,
    b: u32,
    chi1: &DirichletCharacter,
    chi2: &DirichletCharacter,
    rho1: ZeroPoint,
    rho2: ZeroPoint,
    q: f64,
    dump: bool,
) -> Result<CorrectionTermResult> {
    Error::check_cap("correction-term target", n as u128, CORRECTION_CAP as u128)?;
    if chi1.modulus() == 1 && chi2.modulus() == 1 {
        return Err(Error::arg("the two characters must not both be trivial"));
    }
    let sys = DigitSystem::for_target(g, b, n)?;
    let weights = |chi: &DirichletCharacter, rho: ZeroPoint| -> Result<Vec<Complex64>> {
        let table = FChiTable::new(chi, q)?;
        Ok((0..=n)
            .map(|x| {
                if x == 0 || !sys.is_restricted(x) {
                    return Complex64::new(0.0, 0.0);
                }
                let w = Complex64::new(rho.beta - 1.0, rho.gamma).scale((x as f64).ln()).exp();
                w * table.eval(x as i64)
            })
            .collect())
    };
    let a1 = weights(chi1, rho1)?;
    let a2 = weights(chi2, rho2)?;
    let members: Vec<u64> = (1..=n).filter(|&x| sys.is_restricted(x)).collect();
    let tau = build_tables(n as usize)?;
    let terms: Vec<CorrectionTerm> = members
        .par_iter()
        .filter(|&&x3| x3 + 2 <= n)
        .map(|&x3| {
            let t = n - x3;
            let mut acc = Complex64::new(0.0, 0.0);
            for &x1 in members.iter().take_while(|&&x1| x1 < t) {
                acc += a1[x1 as usize] * a2[(t - x1) as usize];
            }
            CorrectionTerm { x3, tau: tau.divisor_count(x3 as usize), inner_abs: acc.norm() }
        })
        .collect();
    let lhs_sum = pairwise_sum(&terms.iter().map(|t| t.tau as f64 * t.inner_abs).collect::<Vec<_>>());
    let baseline = count_representations(&RepCountQuery::new(n, 3, sys))?;
    let ratio = match big_to_u64(&baseline) {
        Some(0) => 0.0,
        _ => lhs_sum / baseline.to_f64().unwrap_or(f64::INFINITY),
    };
    Ok(CorrectionTermResult {
        n,
        q,
        chi1: chi1.reference(),
        chi2: chi2.reference(),
        rho1,
        rho2,
        lhs_sum,
        baseline: baseline.to_string(),
        ratio,
        terms: if dump { terms } else { Vec::new() },
    })
}
