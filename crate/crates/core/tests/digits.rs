use digit_goldbach::digits::*;
use num_bigint::BigUint;
use proptest::prelude::*;

fn avoids(n: u64, g: u32, b: u32) -> bool {
    n > 0 && !format_radix(n, g).contains(&b)
}

fn format_radix(mut n: u64, g: u32) -> Vec<u32> {
    let mut out = Vec::new();
    while n > 0 {
        out.push((n % g as u64) as u32);
        n /= g as u64;
    }
    out
}

#[test]
fn enumeration_matches_filter() {
    for g in 3..=12u32 {
        for b in 0..g {
            let sys = DigitSystem::new(g, b, 6).unwrap();
            let limit = 3000;
            let got: Vec<u64> = sys.enumerate_restricted(limit).collect();
            let want: Vec<u64> = (1..limit).filter(|&n| avoids(n, g, b)).collect();
            assert_eq!(got, want, "g={g} b={b}");
        }
    }
}

#[test]
fn restricted_count_below_a_power() {
    // k-digit strings avoiding b: (g−1)^k, minus the all-zero string when b ≠ 0.
    for g in 3..=10u32 {
        for b in 0..g {
            let k = 5;
            let sys = DigitSystem::new(g, b, k).unwrap();
            let count = sys.enumerate_restricted(sys.modulus().unwrap()).count() as u64;
            let strings = (g as u64 - 1).pow(k);
            assert_eq!(count, if b == 0 { (1..=k).map(|j| (g as u64 - 1).pow(j)).sum() } else { strings - 1 }, "g={g} b={b}");
        }
    }
}

#[test]
fn invalid_systems_are_rejected() {
    assert!(DigitSystem::new(2, 0, 3).is_err());
    assert!(DigitSystem::new(10, 10, 3).is_err());
    assert!(DigitSystem::new(10, 3, 0).is_err());
    assert!(DigitSystem::for_target(10, 3, 0).is_err());
    let sys = DigitSystem::new(10, 3, 2).unwrap();
    assert!(sys.to_digits(100).is_err());
    assert!(sys.from_digits(&DigitVector { digits: vec![10, 0] }).is_err());
}

proptest! {
    #[test]
    fn digits_round_trip(n in 1u64..u64::MAX / 16, g in 3u32..=16) {
        let sys = DigitSystem::for_target(g, 0, n).unwrap();
        let dv = sys.to_digits(n).unwrap();
        prop_assert_eq!(dv.digits.len() as u32, digit_len(n, g));
        prop_assert_eq!(*dv.digits.last().unwrap() != 0, true);
        prop_assert_eq!(sys.from_digits(&dv).unwrap(), n);
        prop_assert_eq!(small_digits(n, g), format_radix(n, g));
    }

    #[test]
    fn big_digits_match_small(n in 0u64..u64::MAX, g in 3u32..=36) {
        let big = BigUint::from(n);
        let d = big_digits(&big, g);
        prop_assert_eq!(&d, &small_digits(n, g));
        prop_assert_eq!(big_from_digits(&d, g), big.clone());
        prop_assert_eq!(big_to_u64(&big), Some(n));
    }

    #[test]
    fn membership(n in 0u64..10_000_000, g in 3u32..=12, b in 0u32..12) {
        prop_assume!(b < g);
        let sys = DigitSystem::new(g, b, 20).unwrap();
        prop_assert_eq!(sys.is_restricted(n), avoids(n, g, b));
    }
}
