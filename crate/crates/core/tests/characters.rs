use digit_goldbach::characters::*;
use digit_goldbach::numtheory::{divisors, euler_phi, gcd, mobius};
use num_complex::Complex64;
use proptest::prelude::*;

fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * x)
}

/// Smallest `d | q` such that `χ(n) = 1` whenever `n ≡ 1 mod d` and `(n, q) = 1`.
fn conductor_oracle(chi: &DirichletCharacter) -> u64 {
    let q = chi.modulus();
    divisors(q)
        .into_iter()
        .find(|&d| (0..q / d).map(|j| 1 + j * d).filter(|&n| gcd(n, q) == 1).all(|n| (chi.value(n as i64) - 1.0).norm() < 1e-9))
        .unwrap()
}

#[test]
fn groups_are_complete_and_orthogonal() {
    for q in 1..=120u64 {
        let chars = character_group(q).unwrap();
        assert_eq!(chars.len() as u64, euler_phi(q), "q={q}");
        for (i, a) in chars.iter().enumerate() {
            for b in &chars[i + 1..] {
                assert!((1..=q as i64).any(|n| (a.value(n) - b.value(n)).norm() > 1e-9), "duplicate mod {q}");
            }
            let s: Complex64 = (1..=q as i64).map(|n| a.value(n)).sum();
            let want = if a.is_principal() { euler_phi(q) as f64 } else { 0.0 };
            assert!((s - want).norm() < 1e-8, "q={q} index {}", a.index());
            assert_eq!(a.conductor(), conductor_oracle(a), "q={q} index {}", a.index());
            assert_eq!(a.is_primitive(), a.conductor() == q);
        }
    }
}

#[test]
fn small_moduli() {
    let three = character_group(3).unwrap();
    let quad = three.iter().find(|c| !c.is_principal()).unwrap();
    assert!((quad.value(2) + 1.0).norm() < 1e-12);
    let tau = gauss_sum(quad);
    assert!((tau - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
    for chi in character_group(8).unwrap() {
        for n in 1..8 {
            assert!(chi.value(n).im.abs() < 1e-12);
        }
    }
    assert_eq!(character_group(1).unwrap().len(), 1);
    assert!((gauss_sum(&DirichletCharacter::trivial()) - 1.0).norm() < 1e-12);
}

#[test]
fn gauss_sums_by_direct_summation() {
    for q in [5u64, 12, 16, 27, 45, 64] {
        for chi in character_group(q).unwrap() {
            let direct: Complex64 = (1..q).filter(|&b| gcd(b, q) == 1).map(|b| chi.value(b as i64) * e(b as f64 / q as f64)).sum();
            assert!((gauss_sum(&chi) - direct).norm() < 1e-9);
        }
    }
}

#[test]
fn trivial_character_coefficients() {
    let chi = DirichletCharacter::trivial();
    for r in 1..200u64 {
        let c = coefficient_c_chi(&chi, 1, r).unwrap();
        assert!((c.re - mobius(r) as f64 / euler_phi(r) as f64).abs() < 1e-12 && c.im.abs() < 1e-12);
    }
    let chi5 = CharacterGroup::new(5).unwrap().character(1).unwrap();
    assert_eq!(coefficient_c_chi(&chi5, 2, 7).unwrap(), Complex64::new(0.0, 0.0));
    assert!(coefficient_c_chi(&chi5, 2, 50).is_err());
}

#[test]
fn w_sum_by_direct_summation() {
    let (p, a1, a2) = (3u64, 3u32, 2u32);
    let c1 = CharacterGroup::new(p.pow(a1)).unwrap().primitive_characters();
    let c2 = CharacterGroup::new(p.pow(a2)).unwrap().primitive_characters();
    let q2 = p.pow(a2) as i64;
    let shift = p.pow(a1 - a2) as i64;
    for chi1 in c1.iter().take(3) {
        for chi2 in c2.iter().take(3) {
            for (b1, b2, t) in [(0i64, 1i64, 1i64), (4, 2, 3), (7, 0, 0), (1, 5, 8)] {
                let direct: Complex64 = (0..q2)
                    .map(|x| chi1.value(shift * x + b1) * chi2.value(x + b2) * e((t * x) as f64 / q2 as f64))
                    .sum::<Complex64>()
                    / q2 as f64;
                let w = w_sum(chi1, chi2, b1, b2, t).unwrap();
                assert!((Complex64::new(w.re, w.im) - direct).norm() < 1e-12);
                if let Some(bound) = w.bound {
                    assert_eq!(w.satisfied, Some(w.abs <= bound + 1e-12));
                }
            }
        }
    }
    let nonprimitive = CharacterGroup::new(9).unwrap().character(0).unwrap();
    assert!(w_sum(&nonprimitive, &c2[0], 0, 0, 0).is_err());
}

#[test]
fn weil_sums_by_direct_summation() {
    for p in [5u64, 7, 11, 13] {
        for chi in CharacterGroup::new(p).unwrap().characters().into_iter().filter(|c| !c.is_principal()) {
            for coeffs in [vec![1i64, 0, 1], vec![2, 3, 0, 1], vec![0, 0, 1], vec![1, 1, 1, 1, 1]] {
                let f = FpPoly::new(p, &coeffs);
                let direct: Complex64 = (0..p as i64)
                    .map(|x| chi.value(coeffs.iter().rev().fold(0i64, |acc, &c| (acc * x + c).rem_euclid(p as i64))))
                    .sum();
                let w = weil_sum_check(p, &f, &chi).unwrap();
                assert!((Complex64::new(w.re, w.im) - direct).norm() < 1e-9);
                if !w.excluded {
                    assert!(w.abs <= (w.distinct_roots as f64 - 1.0) * (p as f64).sqrt() + 1e-9);
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn characters_are_multiplicative(q in 1u64..400, idx in 0u64..1000, m in -500i64..500, n in -500i64..500) {
        let g = CharacterGroup::new(q).unwrap();
        let chi = g.character(idx % g.len()).unwrap();
        prop_assert!((chi.value(m * n) - chi.value(m) * chi.value(n)).norm() < 1e-9);
        prop_assert!((chi.value(n) - chi.value(n + q as i64)).norm() < 1e-9);
        prop_assert_eq!(chi.value(n).norm() < 0.5, gcd(n.unsigned_abs(), q) > 1 && q > 1);
        prop_assert!((chi.value(1) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn square_roots_by_scan(a in -200i64..200, p in prop::sample::select(vec![2u64, 3, 5, 7]), k in 1u32..5) {
        let pk = p.pow(k);
        let count = (0..pk).filter(|&x| (x * x) as i64 % pk as i64 == a.rem_euclid(pk as i64)).count() as u64;
        let r = count_square_roots(a, p, k).unwrap();
        prop_assert_eq!(r.count, count);
        prop_assert_eq!(r.satisfied, count <= r.bound);
    }

    #[test]
    fn fraction_pairs_by_double_loop(p in prop::sample::select(vec![2u64, 3, 5]), a1 in 1u32..4, extra in 0u32..2, t in -30i64..30, units in any::<bool>()) {
        let a2 = a1 + extra;
        let (q1, q2) = (p.pow(a1) as i64, p.pow(a2) as i64);
        let ok = |b: i64, q: i64| !units || gcd(b as u64, q as u64) == 1;
        let mut count = 0;
        for b1 in (0..q1).filter(|&b| ok(b, q1)) {
            for b2 in (0..q2).filter(|&b| ok(b, q2)) {
                if (b1 * (q2 / q1) + b2 - t).rem_euclid(q2) == 0 {
                    count += 1;
                }
            }
        }
        prop_assert_eq!(fraction_pair_count(p, a1, a2, t, units).unwrap().count, count);
    }
}
