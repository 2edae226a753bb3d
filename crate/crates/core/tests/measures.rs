use digit_goldbach::measures::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn dft(support: &[u64], theta: f64) -> Complex64 {
    support.iter().map(|&x| Complex64::from_polar(1.0, -std::f64::consts::TAU * x as f64 * theta)).sum()
}

fn measure_strategy() -> impl Strategy<Value = ProductMeasure> {
    (3u32..=10).prop_flat_map(|g| {
        let block = (0..g, 0..g, prop::collection::vec(0..g, 0..=2)).prop_map(|(a, b, ex)| {
            let (lo, hi) = (a.min(b), a.max(b));
            Block::new(lo, hi, ex.into_iter().filter(|&d| d > lo && d < hi).collect()).unwrap()
        });
        prop::collection::vec(block, 1..=4).prop_map(move |blocks| ProductMeasure::new(g, blocks).unwrap())
    })
}

#[test]
fn singleton_measure_has_unit_transform() {
    let mu = ProductMeasure::new(10, vec![Block::singleton(3), Block::singleton(0), Block::singleton(9)]).unwrap();
    for x in [0.0, 0.1, 0.37, 0.5] {
        assert!((fourier_transform(&mu, &Theta::real(x)).norm() - 1.0).abs() < 1e-12);
    }
    let l1 = l1_norm(&mu, 4).unwrap();
    assert!((l1.estimate - 1.0).abs() < 1e-12);
}

#[test]
fn full_block_l1_matches_quadrature() {
    // ∫|Σ_{z<g} e(zθ)| on a fine midpoint grid.
    let g = 10u32;
    let mu = ProductMeasure::new(g, vec![Block::full(g)]).unwrap();
    let n = 400_000;
    let oracle: f64 = (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) / n as f64;
            (0..g).map(|z| Complex64::from_polar(1.0, std::f64::consts::TAU * z as f64 * t)).sum::<Complex64>().norm()
        })
        .sum::<f64>()
        / n as f64;
    let est = l1_norm(&mu, 64).unwrap();
    assert!((est.estimate - oracle).abs() < 1e-3, "{} vs {oracle}", est.estimate);
}

#[test]
fn refinement_delta_shrinks_with_oversampling() {
    let mu = ProductMeasure::avoiding_digit(10, 7, 3).unwrap();
    let coarse = l1_norm(&mu, 2).unwrap();
    let fine = l1_norm(&mu, 4).unwrap();
    assert!(fine.refinement_delta < coarse.refinement_delta);
}

#[test]
fn large_sieve_on_a_point_mass_counts_fractions() {
    let mu = ProductMeasure::new(10, vec![Block::singleton(0)]).unwrap();
    let s = large_sieve_sum(&mu, 2, 1, 0.0).unwrap();
    assert_eq!(s.fractions, 3);
    assert!((s.value - 3.0).abs() < 1e-12);
    let empty = large_sieve_sum(&mu, 1, 1, 0.0).unwrap();
    assert_eq!(empty.value, 0.0);
    // reduced fractions with denominators in [Q, 2Q): Σ φ(b)
    let s = large_sieve_sum(&mu, 30, 1, 0.0).unwrap();
    let phi: u64 = (30..60u64).map(digit_goldbach::numtheory::euler_phi).sum();
    assert_eq!(s.fractions, phi);
}

#[test]
fn large_sieve_matches_direct_enumeration() {
    let mu = ProductMeasure::avoiding_digit(10, 7, 3).unwrap();
    let support = mu.support(10_000).unwrap();
    let (q, d, beta) = (12u64, 2u64, 0.013);
    let mut direct = 0.0;
    for b in (q..2 * q).filter(|b| b % d == 0) {
        for a in (1..b).filter(|&a| digit_goldbach::numtheory::gcd(a, b) == 1) {
            direct += dft(&support, a as f64 / b as f64 + beta).norm();
        }
    }
    let s = large_sieve_sum(&mu, q, d, beta).unwrap();
    assert!((s.value - direct).abs() < 1e-8 * direct, "{} vs {direct}", s.value);
}

#[test]
fn transforms_of_huge_measures_stay_finite() {
    let mu = ProductMeasure::avoiding_digit(10, 7, 60).unwrap();
    let v = fourier_transform(&mu, &Theta::rational(1, 7));
    assert!(v.norm().is_finite());
    assert!(v.norm() <= mu.mass_f64());
}

proptest! {
    #[test]
    fn transform_matches_support_sum(mu in measure_strategy(), num in -50i64..50, den in 1u64..60) {
        let support = mu.support(1 << 16).unwrap();
        let got = fourier_transform(&mu, &Theta::rational(num, den));
        let want = dft(&support, num as f64 / den as f64);
        prop_assert!((got - want).norm() <= 1e-9 * want.norm().max(1.0));
    }

    #[test]
    fn transform_is_bounded_and_periodic(mu in measure_strategy(), x in -2.0f64..2.0) {
        let v = fourier_transform(&mu, &Theta::real(x));
        prop_assert!(v.norm() <= mu.mass_f64() * (1.0 + 1e-12));
        let w = fourier_transform(&mu, &Theta::new(1, 1, x).unwrap());
        prop_assert!((v - w).norm() <= 1e-12 * mu.mass_f64().max(1.0) * 16.0);
    }

    #[test]
    fn mass_is_support_size(mu in measure_strategy()) {
        let support = mu.support(1 << 16).unwrap();
        prop_assert_eq!(num_bigint::BigUint::from(support.len()), mu.mass());
        prop_assert!(support.windows(2).all(|w| w[0] < w[1]));
    }
}
