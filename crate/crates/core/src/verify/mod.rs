//! Both sides of the three-primes asymptotic for restricted digits at desk
//! scale: the von Mangoldt weighted count, the truncated singular series and
//! the coprime main term.

mod experiments;

pub use experiments::{
    correction_term_experiment, divisibility_experiment, divisor_moment_experiment, CorrectionTerm,
    CorrectionTermResult, DivisibilityRow, DivisibilityResult, DivisorMomentRow, ZeroPoint,
};

use std::time::Instant;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::counting::{count_representations, RepCountQuery};
use crate::digits::{big_to_u64, DigitSystem};
use crate::error::{Error, Result};
use crate::measures::ln_big;
use crate::numtheory::{build_tables, factorize, pairwise_sum, primes_up_to};

/// Default truncation point of the singular series.
pub const DEFAULT_P_MAX: u64 = 100_000;

/// Largest target accepted by the convolution.
pub const LHS_CAP: u64 = 10_000_000;

/// Largest target accepted by the direct pair enumeration.
pub const EXACT_CAP: u64 = 200_000;

/// Largest truncation point of the singular series.
pub const P_MAX_CAP: u64 = 100_000_000;

/// Relative error above which an FFT result is flagged.
pub const PRECISION_WARNING: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularSeries {
    pub value: f64,
    /// `|𝔖 − value| ≤ tail_bound` for the full product over `p ∤ g`.
    pub tail_bound: f64,
}

/// `Π_{p ≤ P, p ∤ g} (1 − (p·1[p|N] − 1)/(p−1)³)` with an absolute bound on the
/// omitted factors.
///
/// For `p > P` the factor with `p ∤ N` has logarithm at most `1/(p−1)³`, and
/// these sum to at most `1/(2(P−1)²)`. A factor with `p | N` has logarithm of
/// size at most `2/(p−1)²`; there are at most `ln R/ln P` of them, `R` being
/// the part of `N` free of primes `≤ P`. With `τ` the total,
/// `|𝔖 − value| ≤ |value|·(e^τ − 1)`.
pub fn singular_series(n: &BigUint, g: u32, p_max: u64) -> Result<SingularSeries> {
    check_p_max(p_max)?;
    Ok(series_with(n, g, p_max, &primes_up_to(p_max)))
}

fn check_p_max(p_max: u64) -> Result<()> {
    if p_max < 3 {
        return Err(Error::arg("P_max must be at least 3"));
    }
    Error::check_cap("P_max", p_max as u128, P_MAX_CAP as u128)
}

fn series_with(n: &BigUint, g: u32, p_max: u64, primes: &[u64]) -> SingularSeries {
    let mut value = 1.0f64;
    let mut rest = n.clone();
    for &p in primes {
        if rest.is_zero() {
            // N = 0: every prime divides it
            if g as u64 % p != 0 {
                value *= 1.0 - (p as f64 - 1.0) / ((p - 1) as f64).powi(3);
            }
            continue;
        }
        let divides = (&rest % p).is_zero();
        if divides {
            while (&rest % p).is_zero() {
                rest /= p;
            }
        }
        if g as u64 % p == 0 {
            continue;
        }
        let num = if divides { p as f64 - 1.0 } else { -1.0 };
        value *= 1.0 - num / ((p - 1) as f64).powi(3);
    }
    let pm = (p_max - 1) as f64;
    let big_divisors = if rest.is_zero() || rest <= BigUint::from(1u32) {
        0.0
    } else {
        (ln_big(&rest) / (p_max as f64).ln()).floor()
    };
    let tau = 1.0 / (2.0 * pm * pm) + big_divisors * 2.0 / (pm * pm);
    SingularSeries { value, tail_bound: value.abs() * tau.exp_m1() }
}

/// `Π_{p | g} (p/(p−1))³`.
pub fn g_factor(g: u32) -> f64 {
    factorize(g as u64).iter().map(|&(p, _)| (p as f64 / (p - 1) as f64).powi(3)).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LhsMode {
    /// `f∗f` by floating-point FFT.
    Fft,
    /// `f∗f` by enumerating pairs of prime powers.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LhsValue {
    pub value: f64,
    pub error_estimate: f64,
    pub precision_warning: bool,
}

/// `f = Λ·1_𝒮` on `[0, n_max]` and `h = f∗f`, shared by every target `≤ n_max`.
#[derive(Debug, Clone)]
pub struct TernaryConvolution {
    sys: DigitSystem,
    mode: LhsMode,
    f: Vec<f64>,
    h: Vec<f64>,
    /// Absolute error bound for each entry of `h`.
    h_error: f64,
}

impl TernaryConvolution {
    pub fn new(sys: &DigitSystem, n_max: u64, mode: LhsMode) -> Result<TernaryConvolution> {
        Error::check_cap("ternary target", n_max as u128, LHS_CAP as u128)?;
        if mode == LhsMode::Exact {
            Error::check_cap("ternary target (direct mode)", n_max as u128, EXACT_CAP as u128)?;
        }
        let tables = build_tables(n_max as usize)?;
        let lam = tables.von_mangoldt_slice();
        let f: Vec<f64> = (0..=n_max as usize)
            .map(|x| if lam[x] > 0.0 && sys.is_restricted(x as u64) { lam[x] } else { 0.0 })
            .collect();
        let (h, h_error) = match mode {
            LhsMode::Fft => fft_square(&f),
            LhsMode::Exact => (direct_square(&f), 0.0),
        };
        Ok(TernaryConvolution { sys: *sys, mode, f, h, h_error })
    }

    pub fn n_max(&self) -> u64 {
        self.f.len() as u64 - 1
    }

    pub fn mode(&self) -> LhsMode {
        self.mode
    }

    pub fn weights(&self) -> &[f64] {
        &self.f
    }

    /// `Σ_{x3} f(x3) h(N − x3)`.
    pub fn lhs(&self, n: u64) -> Result<LhsValue> {
        if n > self.n_max() {
            return Err(Error::range(format!("target {n} exceeds the convolution length {}", self.n_max())));
        }
        let n = n as usize;
        let terms: Vec<f64> = (1..n).map(|x| self.f[x] * self.h[n - x]).collect();
        let value = pairwise_sum(&terms);
        let mass: f64 = self.f[1..n.max(1)].iter().sum();
        let error_estimate = match self.mode {
            LhsMode::Fft => self.h_error * mass + f64::EPSILON * value.abs() * (n.max(2) as f64).log2(),
            LhsMode::Exact => f64::EPSILON * value.abs() * (terms.len().max(1) as f64),
        };
        Ok(LhsValue {
            value,
            error_estimate,
            precision_warning: error_estimate > PRECISION_WARNING * value.abs(),
        })
    }

    pub fn system(&self) -> &DigitSystem {
        &self.sys
    }
}

/// `f∗f` truncated to the length of `f`, with a bound of
/// `3·ε·log₂L·Σf²` on the absolute error of each entry.
fn fft_square(f: &[f64]) -> (Vec<f64>, f64) {
    let len = (2 * f.len()).next_power_of_two();
    let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    buf.iter_mut().for_each(|z| *z = *z * *z);
    planner.plan_fft_inverse(len).process(&mut buf);
    let scale = 1.0 / len as f64;
    let h = buf[..f.len()].iter().map(|z| z.re * scale).collect();
    let energy: f64 = f.iter().map(|x| x * x).sum();
    (h, 3.0 * f64::EPSILON * (len as f64).log2() * energy)
}

fn direct_square(f: &[f64]) -> Vec<f64> {
    let support: Vec<usize> = (0..f.len()).filter(|&x| f[x] != 0.0).collect();
    let mut h = vec![0.0f64; f.len()];
    for (i, &a) in support.iter().enumerate() {
        for &b in &support[i..] {
            if a + b >= f.len() {
                break;
            }
            let w = f[a] * f[b];
            h[a + b] += if a == b { w } else { 2.0 * w };
        }
    }
    h
}

/// `Σ_{x1+x2+x3 = N, x_i ∈ 𝒮_b} Λ(x1)Λ(x2)Λ(x3)`.
pub fn lhs_ternary(n: &BigUint, sys: &DigitSystem, mode: LhsMode) -> Result<LhsValue> {
    let nv = big_to_u64(n).ok_or_else(|| Error::Resource { what: "ternary target", requested: u128::MAX, cap: LHS_CAP as u128 })?;
    if BigUint::from(nv) >= sys.modulus_big() {
        return Err(Error::range(format!("target {n} is not below g^k")));
    }
    TernaryConvolution::new(sys, nv, mode)?.lhs(nv)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTerm {
    pub singular_series_truncated: f64,
    pub tail_bound: f64,
    pub g_factor: f64,
    #[serde(with = "crate::serde_big")]
    pub coprime_count: BigUint,
    /// Representations without the coprimality condition.
    #[serde(with = "crate::serde_big")]
    pub restricted_count: BigUint,
    pub main_term: f64,
}

/// `𝔖_P · Π_{p|g}(p/(p−1))³ · #{x1+x2+x3 = N : x_i ∈ 𝒮_b, (x_i, g) = 1}`.
pub fn main_term(n: &BigUint, sys: &DigitSystem, p_max: u64) -> Result<MainTerm> {
    check_p_max(p_max)?;
    main_term_with(n, sys, p_max, &primes_up_to(p_max))
}

fn main_term_with(n: &BigUint, sys: &DigitSystem, p_max: u64, primes: &[u64]) -> Result<MainTerm> {
    let s = series_with(n, sys.g, p_max, primes);
    let q = RepCountQuery::new(n.clone(), 3, *sys);
    let coprime_count = count_representations(&q.clone().coprime(true))?;
    let restricted_count = count_representations(&q)?;
    let gf = g_factor(sys.g);
    let main = s.value * gf * coprime_count.to_f64().unwrap_or(f64::INFINITY);
    Ok(MainTerm {
        singular_series_truncated: s.value,
        tail_bound: s.tail_bound,
        g_factor: gf,
        coprime_count,
        restricted_count,
        main_term: main,
    })
}

/// Both sides of the asymptotic at one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    #[serde(rename = "N", with = "crate::serde_big")]
    pub n: BigUint,
    pub g: u32,
    pub b: u32,
    pub k: u32,
    #[serde(rename = "M", with = "crate::serde_big")]
    pub m: BigUint,
    pub mode: LhsMode,
    pub lhs_weighted: f64,
    pub lhs_error_estimate: f64,
    pub precision_warning: bool,
    pub singular_series_truncated: f64,
    pub tail_bound: f64,
    pub g_factor: f64,
    #[serde(with = "crate::serde_big")]
    pub coprime_count: BigUint,
    #[serde(with = "crate::serde_big")]
    pub restricted_count: BigUint,
    pub main_term: f64,
    /// `lhs_weighted / main_term`, absent when the main term vanishes.
    pub ratio: Option<f64>,
    #[serde(rename = "P_max")]
    pub p_max: u64,
    /// Wall-clock seconds; left out unless requested, to keep output reproducible.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime: Option<f64>,
}

fn assemble(n: u64, g: u32, b: u32, p_max: u64, lhs: LhsValue, mt: MainTerm, mode: LhsMode) -> Result<VerificationReport> {
    let sys = DigitSystem::for_target(g, b, n)?;
    Ok(VerificationReport {
        n: BigUint::from(n),
        g,
        b,
        k: sys.k,
        m: sys.modulus_big(),
        mode,
        lhs_weighted: lhs.value,
        lhs_error_estimate: lhs.error_estimate,
        precision_warning: lhs.precision_warning,
        singular_series_truncated: mt.singular_series_truncated,
        tail_bound: mt.tail_bound,
        g_factor: mt.g_factor,
        coprime_count: mt.coprime_count,
        restricted_count: mt.restricted_count,
        main_term: mt.main_term,
        ratio: (mt.main_term > 0.0).then(|| lhs.value / mt.main_term),
        p_max,
        runtime: None,
    })
}

/// Full report for one target, with `k` chosen so that `g^{k−1} ≤ N < g^k`.
pub fn verify(n: u64, g: u32, b: u32, p_max: u64, mode: LhsMode) -> Result<VerificationReport> {
    check_p_max(p_max)?;
    let sys = DigitSystem::for_target(g, b, n)?;
    let conv = TernaryConvolution::new(&sys, n, mode)?;
    let mt = main_term_with(&BigUint::from(n), &sys, p_max, &primes_up_to(p_max))?;
    assemble(n, g, b, p_max, conv.lhs(n)?, mt, mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeFailure {
    #[serde(rename = "N")]
    pub n: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeSummary {
    /// Odd targets with a positive main term.
    pub counted: usize,
    pub min_ratio: Option<f64>,
    pub median_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    /// Every odd target has a positive weighted count.
    pub odd_lhs_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeReport {
    pub reports: Vec<VerificationReport>,
    pub failures: Vec<RangeFailure>,
    pub summary: RangeSummary,
}

/// Reports for many targets sharing one convolution; per-target errors are
/// collected rather than propagated.
pub fn verify_range(ns: &[u64], g: u32, b: u32, p_max: u64, mode: LhsMode) -> Result<RangeReport> {
    check_p_max(p_max)?;
    DigitSystem::new(g, b, 1)?;
    let cap = match mode {
        LhsMode::Fft => LHS_CAP,
        LhsMode::Exact => EXACT_CAP,
    };
    let mut failures = Vec::new();
    let mut valid = Vec::new();
    for &n in ns {
        if n == 0 {
            failures.push(RangeFailure { n, error: Error::arg("target must be positive").to_string() });
        } else if n > cap {
            failures.push(RangeFailure {
                n,
                error: Error::Resource { what: "ternary target", requested: n as u128, cap: cap as u128 }.to_string(),
            });
        } else {
            valid.push(n);
        }
    }
    let n_max = valid.iter().copied().max().unwrap_or(1);
    let sys = DigitSystem::for_target(g, b, n_max)?;
    let conv = TernaryConvolution::new(&sys, n_max, mode)?;
    let primes = primes_up_to(p_max);
    let results: Vec<Result<VerificationReport>> = valid
        .par_iter()
        .map(|&n| {
            let s = DigitSystem::for_target(g, b, n)?;
            let mt = main_term_with(&BigUint::from(n), &s, p_max, &primes)?;
            assemble(n, g, b, p_max, conv.lhs(n)?, mt, mode)
        })
        .collect();
    let mut reports = Vec::new();
    for (n, r) in valid.iter().zip(results) {
        match r {
            Ok(r) => reports.push(r),
            Err(e) => failures.push(RangeFailure { n: *n, error: e.to_string() }),
        }
    }
    failures.sort_by_key(|f| f.n);
    let summary = summarize(&reports);
    Ok(RangeReport { reports, failures, summary })
}

fn summarize(reports: &[VerificationReport]) -> RangeSummary {
    let odd: Vec<&VerificationReport> = reports.iter().filter(|r| r.n.bit(0)).collect();
    let mut ratios: Vec<f64> = odd.iter().filter_map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median = match ratios.len() {
        0 => None,
        l if l % 2 == 1 => Some(ratios[l / 2]),
        l => Some((ratios[l / 2 - 1] + ratios[l / 2]) / 2.0),
    };
    RangeSummary {
        counted: ratios.len(),
        min_ratio: ratios.first().copied(),
        median_ratio: median,
        max_ratio: ratios.last().copied(),
        odd_lhs_positive: odd.iter().all(|r| r.lhs_weighted > 0.0),
    }
}

/// `count` distinct odd targets drawn uniformly from `[lo, hi]`, sorted.
pub fn sample_odd_targets(lo: u64, hi: u64, count: usize, seed: u64) -> Result<Vec<u64>> {
    let first = lo | 1;
    if first > hi {
        return Err(Error::arg("range contains no odd target"));
    }
    let available = (hi - first) / 2 + 1;
    if count as u64 > available {
        return Err(Error::arg(format!("only {available} odd targets in range")));
    }
    let mut rng = crate::counting::chunk_rng(seed, 0);
    let mut picked = std::collections::BTreeSet::new();
    while picked.len() < count {
        picked.insert(first + 2 * rng.gen_range(0..available));
    }
    Ok(picked.into_iter().collect())
}

/// Runs `f` and stores its wall-clock time in the report.
pub fn timed(f: impl FnOnce() -> Result<VerificationReport>) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut r = f()?;
    r.runtime = Some(start.elapsed().as_secs_f64());
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    /// Triple loop over `[1, N]` with Λ from trial factorization.
    fn brute_lhs(n: u64, sys: &DigitSystem) -> f64 {
        let lam = |x: u64| -> f64 {
            let f = factorize(x);
            if f.len() == 1 && sys.is_restricted(x) {
                (f[0].0 as f64).ln()
            } else {
                0.0
            }
        };
        let mut s = 0.0;
        for a in 1..n {
            for b in 1..n - a {
                s += lam(a) * lam(b) * lam(n - a - b);
            }
        }
        s
    }

    #[test]
    fn small_examples() {
        let sys = DigitSystem::new(10, 7, 1).unwrap();
        for mode in [LhsMode::Fft, LhsMode::Exact] {
            let v = lhs_ternary(&big(6), &sys, mode).unwrap();
            assert!((v.value - 2f64.ln().powi(3)).abs() < 1e-12, "{v:?}");
            let z = lhs_ternary(&big(6), &DigitSystem::new(10, 2, 1).unwrap(), mode).unwrap();
            assert!(z.value.abs() < 1e-12);
        }
        assert!(lhs_ternary(&big(10), &sys, LhsMode::Fft).is_err());
    }

    #[test]
    fn modes_agree_with_brute_force() {
        let sys = DigitSystem::new(10, 7, 3).unwrap();
        let fft = TernaryConvolution::new(&sys, 300, LhsMode::Fft).unwrap();
        let ex = TernaryConvolution::new(&sys, 300, LhsMode::Exact).unwrap();
        for n in [3u64, 9, 57, 100, 173, 299, 300] {
            let want = brute_lhs(n, &sys);
            let a = fft.lhs(n).unwrap().value;
            let b = ex.lhs(n).unwrap().value;
            assert!((a - want).abs() <= 1e-9 * want.max(1.0), "{n}: {a} vs {want}");
            assert!((b - want).abs() <= 1e-9 * want.max(1.0), "{n}: {b} vs {want}");
        }
    }

    #[test]
    fn g_factor_examples() {
        assert!((g_factor(10) - 15.625).abs() < 1e-12);
        assert!((g_factor(7) - (7.0f64 / 6.0).powi(3)).abs() < 1e-12);
    }

    #[test]
    fn singular_series_parity_and_stability() {
        let even = singular_series(&big(1000), 7, 1000).unwrap();
        assert_eq!(even.value, 0.0);
        assert_eq!(even.tail_bound, 0.0);
        // 2 | g removes the parity factor
        assert!(singular_series(&big(1000), 10, 1000).unwrap().value > 0.0);
        let n = big(3 * 5 * 7 * 11 + 2);
        let s: Vec<SingularSeries> = [1_000u64, 10_000, 100_000].iter().map(|&p| singular_series(&n, 10, p).unwrap()).collect();
        for w in s.windows(2) {
            assert!((w[0].value - w[1].value).abs() <= w[0].tail_bound);
            assert!(w[1].tail_bound < w[0].tail_bound);
        }
        let coprime = singular_series(&big(1), 10, 200).unwrap();
        assert!(coprime.value > 1.0);
        assert!(singular_series(&big(5), 10, 2).is_err());
    }

    #[test]
    fn tail_bound_covers_large_prime_divisor() {
        // 1000003 is prime, so truncating below it drops a factor 1 − 1/(p−1)²
        let n = big(2 * 1_000_003);
        let lo = singular_series(&n, 3, 1000).unwrap();
        let hi = singular_series(&n, 3, 1_100_000).unwrap();
        assert!((lo.value - hi.value).abs() <= lo.tail_bound);
    }

    #[test]
    fn main_term_invariant_and_monotonicity() {
        let sys = DigitSystem::for_target(10, 7, 4321).unwrap();
        let mt = main_term(&big(4321), &sys, 1000).unwrap();
        let product = mt.singular_series_truncated * mt.g_factor * mt.coprime_count.to_f64().unwrap();
        assert_eq!(mt.main_term, product);
        assert!(mt.coprime_count <= mt.restricted_count);
        let odd_g = DigitSystem::for_target(9, 4, 4322).unwrap();
        assert_eq!(main_term(&big(4322), &odd_g, 1000).unwrap().main_term, 0.0);
    }

    #[test]
    fn report_fields() {
        let r = verify(12345, 10, 7, 1000, LhsMode::Fft).unwrap();
        assert_eq!((r.k, r.m.clone()), (5, big(100_000)));
        assert!(r.lhs_weighted > 0.0 && !r.precision_warning);
        let json = serde_json::to_value(&r).unwrap();
        for key in ["N", "g", "b", "k", "M", "lhs_weighted", "singular_series_truncated", "tail_bound", "g_factor", "coprime_count", "main_term", "ratio", "P_max"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert!(json.get("runtime").is_none());
        assert_eq!(json["N"], "12345");
    }

    #[test]
    fn range_matches_single_reports() {
        let ns = [0u64, 1001, 1002, 2001, 5003];
        let r = verify_range(&ns, 10, 7, 1000, LhsMode::Fft).unwrap();
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.reports.len(), 4);
        for rep in &r.reports {
            let one = verify(rep.n.to_u64().unwrap(), 10, 7, 1000, LhsMode::Fft).unwrap();
            assert!((one.lhs_weighted - rep.lhs_weighted).abs() <= 1e-9 * one.lhs_weighted);
            assert_eq!(one.main_term, rep.main_term);
        }
        assert_eq!(r.summary.counted, 3);
        assert!(r.summary.odd_lhs_positive);
    }

    #[test]
    fn sampled_targets() {
        let a = sample_odd_targets(100_000, 1_000_000, 50, 0).unwrap();
        assert_eq!(a.len(), 50);
        assert!(a.iter().all(|&n| n % 2 == 1 && (100_000..=1_000_000).contains(&n)));
        assert_eq!(a, sample_odd_targets(100_000, 1_000_000, 50, 0).unwrap());
        assert!(sample_odd_targets(4, 4, 1, 0).is_err());
    }
}
