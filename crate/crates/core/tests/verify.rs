use digit_goldbach::counting::{count_representations, RepCountQuery};
use digit_goldbach::digits::DigitSystem;
use digit_goldbach::numtheory::{build_tables, primes_up_to};
use digit_goldbach::verify::*;
use num_bigint::BigUint;
use proptest::prelude::*;

fn avoids(mut x: u64, g: u64, b: u64) -> bool {
    if x == 0 {
        return false;
    }
    while x > 0 {
        if x % g == b {
            return false;
        }
        x /= g;
    }
    true
}

/// Triple sum over restricted prime powers by nested loops.
fn lhs_oracle(n: u64, g: u64, b: u64) -> f64 {
    let t = build_tables(n as usize).unwrap();
    let w = |x: u64| if avoids(x, g, b) { t.von_mangoldt(x as usize) } else { 0.0 };
    let support: Vec<u64> = (1..=n).filter(|&x| w(x) > 0.0).collect();
    let mut total = 0.0;
    for &x1 in &support {
        for &x2 in support.iter().take_while(|&&x2| x1 + x2 < n) {
            total += w(x1) * w(x2) * w(n - x1 - x2);
        }
    }
    total
}

/// Euler product over primes ≤ p_max with p ∤ g.
fn series_oracle(n: u64, g: u64, p_max: u64) -> f64 {
    primes_up_to(p_max)
        .into_iter()
        .filter(|p| g % p != 0)
        .map(|p| {
            let c = (p - 1) as f64;
            if n % p == 0 {
                1.0 - 1.0 / (c * c)
            } else {
                1.0 + 1.0 / (c * c * c)
            }
        })
        .product()
}

#[test]
fn weighted_count_matches_nested_loops() {
    for (n, g, b) in [(101u64, 10u32, 7u32), (999, 10, 7), (1001, 10, 0), (2047, 7, 3), (3001, 5, 2)] {
        let sys = DigitSystem::for_target(g, b, n).unwrap();
        let want = lhs_oracle(n, g as u64, b as u64);
        for mode in [LhsMode::Exact, LhsMode::Fft] {
            let got = lhs_ternary(&BigUint::from(n), &sys, mode).unwrap();
            assert!((got.value - want).abs() <= 1e-9 * want.max(1.0) + got.error_estimate, "N={n} {mode:?}: {} vs {want}", got.value);
        }
    }
}

#[test]
fn fft_agrees_with_exact_on_a_shared_convolution() {
    let sys = DigitSystem::for_target(10, 7, 60_000).unwrap();
    let fft = TernaryConvolution::new(&sys, 60_000, LhsMode::Fft).unwrap();
    let exact = TernaryConvolution::new(&sys, 60_000, LhsMode::Exact).unwrap();
    for n in (10_001..60_000).step_by(4_999) {
        let (a, e) = (fft.lhs(n).unwrap(), exact.lhs(n).unwrap());
        assert!((a.value - e.value).abs() <= 1e-6 * e.value.max(1.0) + a.error_estimate, "N={n}");
        assert!(!a.precision_warning);
    }
}

#[test]
fn singular_series_matches_euler_product() {
    for n in [1u64, 9, 15, 105, 1001, 123_457, 999_999] {
        for g in [10u32, 7, 12] {
            let s = singular_series(&BigUint::from(n), g, 1000).unwrap();
            assert!((s.value - series_oracle(n, g as u64, 1000)).abs() < 1e-12, "N={n} g={g}");
            let fine = series_oracle(n, g as u64, 200_000);
            assert!((s.value - fine).abs() <= s.tail_bound, "N={n} g={g}: tail {} vs {}", s.tail_bound, (s.value - fine).abs());
        }
    }
    // even targets vanish when 2 ∤ g
    assert_eq!(singular_series(&BigUint::from(1000u32), 7, 1000).unwrap().value, 0.0);
    assert!(singular_series(&BigUint::from(9u32), 10, 2).is_err());
}

#[test]
fn main_term_is_the_product_of_its_parts() {
    for n in [10_001u64, 77_777, 345_679] {
        let sys = DigitSystem::for_target(10, 7, n).unwrap();
        let mt = main_term(&BigUint::from(n), &sys, 10_000).unwrap();
        let coprime = count_representations(&RepCountQuery::new(n, 3, sys).coprime(true)).unwrap();
        let all = count_representations(&RepCountQuery::new(n, 3, sys)).unwrap();
        assert_eq!(mt.coprime_count, coprime);
        assert_eq!(mt.restricted_count, all);
        assert_eq!(mt.g_factor, 8.0 * 125.0 / 64.0);
        let want = mt.singular_series_truncated * mt.g_factor * coprime.to_string().parse::<f64>().unwrap();
        assert!((mt.main_term - want).abs() <= 1e-12 * want);
    }
    assert!((g_factor(12) - 8.0 * 27.0 / 8.0).abs() < 1e-12);
}

#[test]
fn reports_and_ranges() {
    let r = verify(100_001, 10, 7, DEFAULT_P_MAX, LhsMode::Fft).unwrap();
    assert!(r.lhs_weighted > 0.0);
    let ratio = r.ratio.unwrap();
    assert!((0.5..2.0).contains(&ratio));
    assert!(r.runtime.is_none());
    let json = serde_json::to_value(&r).unwrap();
    for key in ["N", "M", "P_max", "lhs_weighted", "main_term", "ratio", "tail_bound"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert!(json.get("runtime").is_none());
    let even = verify(100_000, 7, 3, 1000, LhsMode::Exact).unwrap();
    assert_eq!(even.main_term, 0.0);
    assert!(even.ratio.is_none());

    let range = verify_range(&[20_001, 20_003, 20_004, 30_001], 10, 7, 10_000, LhsMode::Fft).unwrap();
    assert_eq!(range.reports.len(), 4);
    for rep in &range.reports {
        let n: u64 = rep.n.to_string().parse().unwrap();
        let single = verify(n, 10, 7, 10_000, LhsMode::Fft).unwrap();
        assert!((rep.lhs_weighted - single.lhs_weighted).abs() <= 1e-9 * single.lhs_weighted);
        assert_eq!(rep.main_term, single.main_term);
    }
    assert!(range.summary.odd_lhs_positive);
    assert!(verify(20_000_000, 10, 7, 1000, LhsMode::Fft).is_err());
}

#[test]
fn odd_targets_are_sampled_deterministically() {
    let a = sample_odd_targets(100_000, 1_000_000, 50, 4).unwrap();
    assert_eq!(a, sample_odd_targets(100_000, 1_000_000, 50, 4).unwrap());
    assert_ne!(a, sample_odd_targets(100_000, 1_000_000, 50, 5).unwrap());
    assert_eq!(a.len(), 50);
    assert!(a.windows(2).all(|w| w[0] < w[1]));
    assert!(a.iter().all(|&n| n % 2 == 1 && (100_000..=1_000_000).contains(&n)));
    assert_eq!(sample_odd_targets(10, 20, 5, 0).unwrap(), vec![11, 13, 15, 17, 19]);
    assert!(sample_odd_targets(10, 20, 6, 0).is_err());
}

#[test]
fn divisor_moments_by_enumeration() {
    let t = 300u64;
    let tau = build_tables(t as usize).unwrap();
    let (mut n, mut first, mut pair) = (0u64, 0u64, 0u64);
    for x1 in 1..t {
        for x2 in 1..t - x1 {
            let x3 = t - x1 - x2;
            if avoids(x1, 10, 7) && avoids(x2, 10, 7) && avoids(x3, 10, 7) {
                n += 1;
                first += tau.divisor_count(x1 as usize).pow(2);
                pair += tau.divisor_count((x1 + x2) as usize).pow(2);
            }
        }
    }
    let rows = divisor_moment_experiment(10, 7, 2, &[t]).unwrap();
    assert_eq!(rows[0].count, n.to_string());
    assert!((rows[0].moment - first as f64 / n as f64).abs() < 1e-12);
    assert!((rows[0].sum_moment - pair as f64 / n as f64).abs() < 1e-12);
    assert!(divisor_moment_experiment(10, 7, 5, &[t]).is_err());
}

#[test]
fn divisibility_frequencies() {
    let n = BigUint::from(100_001u32);
    let r = divisibility_experiment(&n, 10, 7, &[1, 2, 3, 10], 4000, 7).unwrap();
    assert_eq!(r, divisibility_experiment(&n, 10, 7, &[1, 2, 3, 10], 4000, 7).unwrap());
    assert_eq!(r.rows[0].probability, 1.0);
    // x1 + x2 = N − x3 is even iff x3 is odd
    assert!((0.35..0.65).contains(&r.rows[1].probability));
    assert!(r.rows.iter().all(|row| row.hits <= 4000 && row.half_hits >= row.hits));
    assert!(divisibility_experiment(&n, 10, 7, &[2], 10, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn tail_bound_covers_the_omitted_primes(n in 1u64..10_000_000, p_max in 3u64..300) {
        let s = singular_series(&BigUint::from(n), 10, p_max).unwrap();
        let full = series_oracle(n, 10, 100_000);
        prop_assert!((s.value - full).abs() <= s.tail_bound + 1e-12);
    }
}
