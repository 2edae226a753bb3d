use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cis, ProductMeasure};
use crate::error::{Error, Result};
use crate::numtheory::pairwise_sum;

/// Largest quadrature grid accepted by [`l1_norm`].
pub const GRID_CAP: u64 = 1 << 26;

const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct L1Estimate {
    pub estimate: f64,
    pub refinement_delta: f64,
    pub grid_points: u64,
    /// Smallest `C` with `estimate ≤ (C ln g)^k`.
    pub fitted_c: f64,
}

/// Riemann-sum estimate of `∫_0^1 |μ̂(θ)| dθ` on `oversampling·g^k` points.
pub fn l1_norm(mu: &ProductMeasure, oversampling: u64) -> Result<L1Estimate> {
    l1_norm_capped(mu, oversampling, GRID_CAP)
}

pub fn l1_norm_capped(mu: &ProductMeasure, oversampling: u64, cap: u64) -> Result<L1Estimate> {
    if oversampling < 2 {
        return Err(Error::arg("oversampling must be at least 2"));
    }
    let gk = (mu.g as f64).powi(mu.k() as i32);
    let requested = gk * oversampling as f64;
    if requested > cap as f64 {
        return Err(Error::Resource {
            what: "quadrature grid",
            requested: requested.min(u128::MAX as f64) as u128,
            cap: cap as u128,
        });
    }
    let estimate = riemann_sum(mu, oversampling);
    let coarse = riemann_sum(mu, oversampling / 2);
    let k = mu.k() as f64;
    let ln_g = (mu.g as f64).ln();
    Ok(L1Estimate {
        estimate,
        refinement_delta: (estimate - coarse).abs(),
        grid_points: requested as u64,
        fitted_c: estimate.powf(1.0 / k) / ln_g,
    })
}

/// Mean of `|μ̂(i/L)|` over `L = os·g^k` points.
///
/// Block `j` only sees `g^j i/L mod 1 = (i mod L_j)/L_j` with `L_j = os·g^(k−j)`,
/// so each block contributes a precomputed table of length `L_j`.
fn riemann_sum(mu: &ProductMeasure, os: u64) -> f64 {
    let g = mu.g as u64;
    let k = mu.k();
    let tables: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let len = os * g.pow((k - j) as u32);
            block_modulus_table(mu, j, len)
        })
        .collect();
    let total = tables[0].len();
    let chunk_sums: Vec<f64> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let vals: Vec<f64> = (start..end)
                .map(|i| {
                    tables
                        .iter()
                        .map(|t| t[i % t.len()])
                        .product::<f64>()
                })
                .collect();
            pairwise_sum(&vals)
        })
        .collect();
    pairwise_sum(&chunk_sums) / total as f64
}

/// `|Σ_{z∈B_j} e(−z t/len)|` for every `t < len`.
fn block_modulus_table(mu: &ProductMeasure, j: usize, len: u64) -> Vec<f64> {
    let block = &mu.blocks[j];
    (0..len as usize)
        .into_par_iter()
        .with_min_len(4096)
        .map(|t| {
            let w = cis(-(t as f64 / len as f64));
            let mut pow = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for z in 0..=block.hi {
                if block.contains(z) {
                    acc += pow;
                }
                pow *= w;
            }
            acc.norm()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Block;

    /// Midpoint rule for `∫|sin(πgθ)/sin(πθ)|` on a fine grid, independent of the product code.
    fn dirichlet_l1(g: u32, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let s: f64 = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) * h;
                let pi = std::f64::consts::PI;
                ((pi * g as f64 * x).sin() / (pi * x).sin()).abs()
            })
            .sum();
        s * h
    }

    #[test]
    fn singletons_have_unit_norm() {
        let mu = ProductMeasure::new(10, vec![Block::singleton(3), Block::singleton(0), Block::singleton(9)]).unwrap();
        let e = l1_norm(&mu, 2).unwrap();
        assert!((e.estimate - 1.0).abs() < 1e-12);
        assert!(e.refinement_delta < 1e-12);
    }

    #[test]
    fn full_block_matches_dirichlet_quadrature() {
        for g in [3u32, 5, 10, 16] {
            let mu = ProductMeasure::new(g, vec![Block::full(g)]).unwrap();
            let e = l1_norm(&mu, 4096).unwrap();
            let oracle = dirichlet_l1(g, 2_000_000);
            assert!((e.estimate - oracle).abs() < 1e-3 * oracle, "g={g}: {} vs {oracle}", e.estimate);
        }
    }

    #[test]
    fn bound_and_fitted_constant() {
        for k in 1..=6 {
            let mu = ProductMeasure::avoiding_digit(10, 7, k).unwrap();
            let e = l1_norm(&mu, 2).unwrap();
            let ln10 = 10f64.ln();
            assert!(e.estimate <= (10.0 * ln10).powi(k as i32));
            assert!(e.estimate <= (e.fitted_c * ln10).powi(k as i32) * (1.0 + 1e-12));
            assert!(e.fitted_c <= 10.0);
        }
    }

    #[test]
    fn refinement_delta_shrinks() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(9);
        for _ in 0..10 {
            let mu = crate::measures::tests::random_measure(&mut rng, 10, 3);
            let d: Vec<f64> = [2u64, 4, 8, 16]
                .iter()
                .map(|&os| l1_norm(&mu, os).unwrap().refinement_delta)
                .collect();
            for w in d.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{d:?}");
            }
        }
    }

    #[test]
    fn grid_cap_enforced() {
        let mu = ProductMeasure::avoiding_digit(10, 7, 9).unwrap();
        assert!(matches!(l1_norm(&mu, 2), Err(Error::Resource { .. })));
        assert!(matches!(l1_norm(&mu, 1), Err(Error::Argument(_))));
    }
}
