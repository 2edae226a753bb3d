use digit_goldbach::numtheory::*;
use proptest::prelude::*;

fn naive_gcd(a: u64, b: u64) -> u64 {
    (1..=a.max(b)).rev().find(|d| a % d == 0 && b % d == 0).unwrap_or(0)
}

fn naive_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while n > 1 {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    out
}

#[test]
fn tables_agree_with_trial_division() {
    let t = build_tables(3000).unwrap();
    for n in 1..=3000u64 {
        let f = naive_factor(n);
        let squarefree = f.iter().all(|&(_, e)| e == 1);
        let mu = if squarefree { if f.len() % 2 == 0 { 1 } else { -1 } } else { 0 };
        let phi = (1..=n).filter(|&a| naive_gcd(a, n) == 1).count() as u64;
        let tau = (1..=n).filter(|d| n % d == 0).count() as u64;
        let lambda = if f.len() == 1 { (f[0].0 as f64).ln() } else { 0.0 };
        assert_eq!(t.mobius(n as usize) as i64, mu, "μ({n})");
        assert_eq!(mobius(n), mu);
        assert_eq!(t.euler_phi(n as usize), phi, "φ({n})");
        assert_eq!(euler_phi(n), phi);
        assert_eq!(t.divisor_count(n as usize), tau, "τ({n})");
        assert_eq!(divisors(n).len() as u64, tau);
        assert!((t.von_mangoldt(n as usize) - lambda).abs() < 1e-12, "Λ({n})");
        assert_eq!(t.factorize(n as usize), f);
        assert_eq!(factorize(n), f);
        assert_eq!(t.is_prime(n as usize), is_prime(n));
    }
}

#[test]
fn prime_list_matches_primality() {
    let ps = primes_up_to(10_000);
    let expected: Vec<u64> = (2..=10_000).filter(|&n| naive_factor(n) == vec![(n, 1)]).collect();
    assert_eq!(ps, expected);
    assert_eq!(ps.len(), 1229);
}

#[test]
fn ramanujan_sums_match_direct_sums() {
    for q in 1..=60u64 {
        for n in -60i64..=60 {
            let r = n.rem_euclid(q as i64) as u64;
            let direct: f64 = (1..=q)
                .filter(|&a| naive_gcd(a, q) == 1)
                .map(|a| (std::f64::consts::TAU * ((a * r) % q) as f64 / q as f64).cos())
                .sum();
            assert!((ramanujan_sum(q, n) - direct).abs() < 1e-9, "c_{q}({n})");
        }
    }
}

#[test]
fn primitive_roots_generate() {
    for p in primes_up_to(500).into_iter().skip(1) {
        let g = primitive_root(p);
        let order = (1..p).find(|&e| mod_pow(g, e, p) == 1).unwrap();
        assert_eq!(order, p - 1, "root {g} mod {p}");
    }
}

#[test]
fn pairwise_sum_is_exact_on_integers() {
    let xs: Vec<f64> = (1..=10_000).map(f64::from).collect();
    assert_eq!(pairwise_sum(&xs), 50_005_000.0);
    assert_eq!(pairwise_sum(&[]), 0.0);
}

proptest! {
    #[test]
    fn gcd_and_lcm(a in 1u64..5000, b in 1u64..5000) {
        prop_assert_eq!(gcd(a, b), naive_gcd(a, b));
        prop_assert_eq!(lcm(a, b) * gcd(a, b), a * b);
    }

    #[test]
    fn modular_inverse(a in 0u64..10_000, m in 2u64..10_000) {
        match mod_inv(a, m) {
            Some(x) => prop_assert_eq!(mod_mul(a, x, m), 1),
            None => prop_assert!(gcd(a, m) > 1),
        }
    }

    #[test]
    fn modular_power(base in 0u64..1000, e in 0u64..40, m in 1u64..1000) {
        let mut naive = 1 % m;
        for _ in 0..e {
            naive = naive * base % m;
        }
        prop_assert_eq!(mod_pow(base, e, m), naive);
    }

    #[test]
    fn mobius_is_multiplicative(a in 1u64..3000, b in 1u64..3000) {
        prop_assume!(gcd(a, b) == 1);
        prop_assert_eq!(mobius(a * b), mobius(a) * mobius(b));
        prop_assert_eq!(euler_phi(a * b), euler_phi(a) * euler_phi(b));
    }

    #[test]
    fn valuation(x in 1u64..1_000_000, p in prop::sample::select(vec![2u64, 3, 5, 7, 11])) {
        let v = p_adic_valuation(x, p).unwrap();
        prop_assert_eq!(x % p.pow(v), 0);
        prop_assert_ne!(x % p.pow(v + 1), 0);
    }

    #[test]
    fn exact_ramanujan_closed_form(q in 1u64..400, n in -400i64..400) {
        prop_assert_eq!(ramanujan_sum_exact(q, n) as f64, ramanujan_sum(q, n));
    }
}
