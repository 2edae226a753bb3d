use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{CharacterGroup, DirichletCharacter};
use crate::error::{Error, Result};
use crate::measures::cis;
use crate::numtheory::{factorize, lcm, rem, valuation};

/// Default work budget per sweep cell, in evaluated summands.
pub const W_CELL_BUDGET: u64 = 1 << 22;

const TOL: f64 = 1e-9;

/// `W(b_1, b_2, T)` with the applicable upper bound, if any.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WSum {
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    /// `None` when neither hypothesis of the bound applies.
    pub bound: Option<f64>,
    pub satisfied: Option<bool>,
}

fn prime_power(q: u64) -> Option<(u64, u32)> {
    match factorize(q).as_slice() {
        [(p, a)] => Some((*p, *a)),
        _ => None,
    }
}

/// Upper bound for `sup |W|` at modulus exponents `a1 ≥ a2` when `v_p(T) = v`
/// (`u32::MAX` for `T = 0`), or `None` if no hypothesis holds.
pub fn w_bound(p: u64, a1: u32, a2: u32, v: u32) -> Option<f64> {
    let d = a1 as i64 - a2 as i64;
    if a1 > 1 && v != u32::MAX {
        let alpha = (a1 / 2) as i64;
        let v = v as i64;
        if alpha + 2 > 2 * d + v {
            let e = d - (alpha - v + 1).div_euclid(2);
            return Some((32.0 * (p as f64).powi(e as i32)).min(1.0));
        }
    }
    if a1 == 1 && a2 == 1 && v == 0 {
        return Some(4.0 / (p as f64).sqrt());
    }
    None
}

fn check_pair(chi1: &DirichletCharacter, chi2: &DirichletCharacter) -> Result<(u64, u32, u32)> {
    if !chi1.is_primitive() || !chi2.is_primitive() {
        return Err(Error::arg("W sums need primitive characters"));
    }
    let (p, a1) = prime_power(chi1.modulus()).ok_or_else(|| Error::arg("first modulus must be a prime power"))?;
    let (p2, a2) = prime_power(chi2.modulus()).ok_or_else(|| Error::arg("second modulus must be a prime power"))?;
    if p != p2 || a1 < a2 {
        return Err(Error::arg("moduli must be p^a1 and p^a2 with a1 ≥ a2"));
    }
    Ok((p, a1, a2))
}

/// `W = p^{−a2} Σ_{t mod p^a2} χ1(p^{a1−a2} t + b1) χ2(t + b2) e(Tt/p^a2)` by direct summation.
pub fn w_sum(chi1: &DirichletCharacter, chi2: &DirichletCharacter, b1: i64, b2: i64, t: i64) -> Result<WSum> {
    let (p, a1, a2) = check_pair(chi1, chi2)?;
    let q1 = chi1.modulus();
    let q2 = chi2.modulus();
    let step = q1 / q2;
    let (l1, l2) = (chi1.denominator(), chi2.denominator());
    let den = lcm(lcm(l1, l2), q2) as u128;
    let tr = rem(t, q2) as u128;
    let mut acc = Complex64::new(0.0, 0.0);
    for s in 0..q2 {
        let x1 = chi1.exponent(rem(b1 + (step * s) as i64, q1) as i64);
        let x2 = chi2.exponent(rem(b2 + s as i64, q2) as i64);
        if let (Some(x1), Some(x2)) = (x1, x2) {
            let num = (x1 as u128 * (den / l1 as u128)
                + x2 as u128 * (den / l2 as u128)
                + (tr * s as u128 % q2 as u128) * (den / q2 as u128))
                % den;
            acc += cis(num as f64 / den as f64);
        }
    }
    let w = acc / q2 as f64;
    let bound = w_bound(p, a1, a2, valuation(t.unsigned_abs(), p));
    Ok(WSum {
        re: w.re,
        im: w.im,
        abs: w.norm(),
        bound,
        satisfied: bound.map(|b| w.norm() <= b + TOL),
    })
}

/// Worst case seen in a sweep cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WWitness {
    pub chi1: u64,
    pub chi2: u64,
    pub m: u64,
    pub t: u64,
    pub abs: f64,
    pub bound: f64,
}

/// Result of checking the W-sum bound over one `(p, a1, a2)` cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WSweepCell {
    pub p: u64,
    pub a1: u32,
    pub a2: u32,
    pub pairs_total: u64,
    pub pairs_checked: u64,
    pub exhaustive: bool,
    /// Whether some `T` in this cell has a bound below the trivial 1.
    pub nontrivial: bool,
    pub checks: u64,
    pub violations: u64,
    pub max_ratio: f64,
    pub worst: Option<WWitness>,
}

/// Shift representatives: after `t ↦ t − b2` the sum depends on
/// `m = b1 − p^{a1−a2} b2`, and scaling `t ↦ ut` by a unit maps `m` to
/// `m u^{-1}` and `T` to `Tu`, so `m ∈ {0} ∪ {p^j}` covers every `(b1, b2)`
/// once `T` runs over all residues.
fn shifts(p: u64, a1: u32) -> Vec<u64> {
    std::iter::once(0).chain((0..a1).map(|j| p.pow(j))).collect()
}

struct PairScan {
    checks: u64,
    violations: u64,
    max_ratio: f64,
    worst: Option<WWitness>,
}

impl PairScan {
    fn empty() -> PairScan {
        PairScan { checks: 0, violations: 0, max_ratio: 0.0, worst: None }
    }

    fn merge(&mut self, o: PairScan) {
        self.checks += o.checks;
        self.violations += o.violations;
        if o.max_ratio > self.max_ratio {
            self.max_ratio = o.max_ratio;
            self.worst = o.worst;
        }
    }
}

/// `|W(m, T)|` for all `T mod p^a2`, one row per shift representative.
fn reduced_rows(chi1: &DirichletCharacter, chi2: &DirichletCharacter, p: u64, a1: u32, fft: &Arc<dyn Fft<f64>>) -> Vec<(u64, Vec<f64>)> {
    let q1 = chi1.modulus();
    let q2 = chi2.modulus();
    let step = q1 / q2;
    let (l1, l2) = (chi1.denominator(), chi2.denominator());
    let den = lcm(l1, l2) as u128;
    let t2: Vec<Option<u64>> = chi2.exponent_table();
    let mut buf = vec![Complex64::new(0.0, 0.0); q2 as usize];
    let mut logs = Vec::new();
    shifts(p, a1)
        .into_iter()
        .map(|m| {
            for (s, slot) in buf.iter_mut().enumerate() {
                let x1 = chi1.exponent_with((step * s as u64 + m) % q1, &mut logs);
                *slot = match (x1, t2[s]) {
                    (Some(x1), Some(x2)) => {
                        let num = (x1 as u128 * (den / l1 as u128) + x2 as u128 * (den / l2 as u128)) % den;
                        cis(num as f64 / den as f64)
                    }
                    _ => Complex64::new(0.0, 0.0),
                };
            }
            fft.process(&mut buf);
            (m, buf.iter().map(|z| z.norm() / q2 as f64).collect())
        })
        .collect()
}

/// `sup_{b1,b2} |W|` grouped by `v = v_p(T)` for `v = 0..=a2` (index `a2` is `T ≡ 0`).
#[cfg(test)]
pub(crate) fn sup_by_valuation(chi1: &DirichletCharacter, chi2: &DirichletCharacter) -> Result<Vec<f64>> {
    let (p, a1, a2) = check_pair(chi1, chi2)?;
    let fft = FftPlanner::new().plan_fft_inverse(chi2.modulus() as usize);
    let mut sup = vec![0.0f64; a2 as usize + 1];
    for (_, row) in reduced_rows(chi1, chi2, p, a1, &fft) {
        for (t, &w) in row.iter().enumerate() {
            let v = valuation(t as u64, p).min(a2) as usize;
            sup[v] = sup[v].max(w);
        }
    }
    Ok(sup)
}

fn primitive_indices(g: &Arc<CharacterGroup>) -> Vec<u64> {
    (0..g.len()).filter(|&i| g.character(i).unwrap().is_primitive()).collect()
}

/// Checks the W-sum bound over all primitive pairs modulo `(p^a1, p^a2)`,
/// all `(b1, b2)` and all `T`. Cells whose bound is trivial everywhere are
/// subsampled (deterministically) when the work exceeds `budget`.
pub fn w_sum_sweep_cell(p: u64, a1: u32, a2: u32, budget: u64) -> Result<WSweepCell> {
    if a2 == 0 || a1 < a2 {
        return Err(Error::arg("need a1 ≥ a2 ≥ 1"));
    }
    let g1 = CharacterGroup::new(p.pow(a1))?;
    let g2 = CharacterGroup::new(p.pow(a2))?;
    let (i1, i2) = (primitive_indices(&g1), primitive_indices(&g2));
    let total = i1.len() as u64 * i2.len() as u64;
    let q2 = p.pow(a2);
    let bound_for = |t: u64| w_bound(p, a1, a2, valuation(t, p).min(a2));
    let nontrivial = (0..=a2).any(|v| w_bound(p, a1, a2, v).is_some_and(|b| b < 1.0));
    let per_pair = (a1 as u64 + 1) * q2;
    let want = if nontrivial { total } else { total.min((budget / per_pair).max(1)) };
    let pairs: Vec<u64> = if want == total {
        (0..total).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(p * 1_000 + a1 as u64 * 10 + a2 as u64);
        let mut v: Vec<u64> = rand::seq::index::sample(&mut rng, total as usize, want as usize)
            .into_iter()
            .map(|x| x as u64)
            .collect();
        v.sort_unstable();
        v
    };
    let fft = FftPlanner::new().plan_fft_inverse(q2 as usize);
    let bounds: Vec<Option<f64>> = (0..q2).map(bound_for).collect();
    let scans: Vec<PairScan> = pairs
        .par_iter()
        .with_min_len(1)
        .map(|&k| {
            let chi1 = g1.character(i1[(k / i2.len() as u64) as usize]).unwrap();
            let chi2 = g2.character(i2[(k % i2.len() as u64) as usize]).unwrap();
            let mut scan = PairScan::empty();
            for (m, row) in reduced_rows(&chi1, &chi2, p, a1, &fft) {
                for (t, &w) in row.iter().enumerate() {
                    let Some(b) = bounds[t] else { continue };
                    scan.checks += 1;
                    if w > b + TOL {
                        scan.violations += 1;
                    }
                    let r = w / b;
                    if r > scan.max_ratio {
                        scan.max_ratio = r;
                        scan.worst = Some(WWitness { chi1: chi1.index(), chi2: chi2.index(), m, t: t as u64, abs: w, bound: b });
                    }
                }
            }
            scan
        })
        .collect();
    let mut acc = PairScan::empty();
    for s in scans {
        acc.merge(s);
    }
    Ok(WSweepCell {
        p,
        a1,
        a2,
        pairs_total: total,
        pairs_checked: pairs.len() as u64,
        exhaustive: pairs.len() as u64 == total,
        nontrivial,
        checks: acc.checks,
        violations: acc.violations,
        max_ratio: acc.max_ratio,
        worst: acc.worst,
    })
}

/// The full grid: odd `p ≤ odd_max` with `a ≤ a_max`, and `p = 2` with `a ≤ two_max`.
pub fn w_sum_sweep(odd_max: u64, a_max: u32, two_max: u32, budget: u64) -> Result<Vec<WSweepCell>> {
    let mut cells = Vec::new();
    for a1 in 1..=two_max {
        for a2 in 1..=a1 {
            cells.push((2, a1, a2));
        }
    }
    for p in crate::numtheory::primes_up_to(odd_max).into_iter().filter(|&p| p > 2) {
        for a1 in 1..=a_max {
            for a2 in 1..=a1 {
                cells.push((p, a1, a2));
            }
        }
    }
    cells.into_iter().map(|(p, a1, a2)| w_sum_sweep_cell(p, a1, a2, budget)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic_mod(p: u64) -> DirichletCharacter {
        let g = CharacterGroup::new(p).unwrap();
        g.characters().into_iter().find(|c| c.order() == 2).unwrap()
    }

    #[test]
    fn three_term_example() {
        let chi = quadratic_mod(3);
        let w = w_sum(&chi, &chi, 0, 0, 1).unwrap();
        assert!((w.re + 1.0 / 3.0).abs() < 1e-12 && w.im.abs() < 1e-12);
        assert!((w.bound.unwrap() - 4.0 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(w.satisfied, Some(true));
        let z = w_sum(&chi, &chi, 0, 0, 3).unwrap();
        assert!(z.bound.is_none() && z.satisfied.is_none());
    }

    #[test]
    fn rejects_imprimitive() {
        let g = CharacterGroup::new(9).unwrap();
        let principal = g.character(0).unwrap();
        let prim = g.primitive_characters().remove(0);
        assert!(w_sum(&principal, &prim, 0, 0, 1).is_err());
    }

    #[test]
    fn bound_formula() {
        assert_eq!(w_bound(5, 1, 1, 0), Some(4.0 / 5f64.sqrt()));
        assert_eq!(w_bound(5, 1, 1, 1), None);
        // α = 2, v = 0: 32·p^{−1}
        assert_eq!(w_bound(101, 4, 4, 0), Some(32.0 / 101.0));
        assert_eq!(w_bound(3, 4, 4, 0), Some(1.0));
        // α + 2 > 2(a1−a2) + v fails
        assert_eq!(w_bound(3, 4, 2, 0), None);
    }

    /// The shift/scaling reduction reproduces the brute-force supremum.
    #[test]
    fn reduction_matches_direct_supremum() {
        for (p, a1, a2) in [(3u64, 2u32, 1u32), (3, 2, 2), (5, 1, 1), (2, 3, 3), (2, 4, 3), (3, 3, 2)] {
            let g1 = CharacterGroup::new(p.pow(a1)).unwrap();
            let g2 = CharacterGroup::new(p.pow(a2)).unwrap();
            let (q1, q2) = (p.pow(a1), p.pow(a2));
            for chi1 in g1.primitive_characters().into_iter().take(3) {
                for chi2 in g2.primitive_characters().into_iter().take(3) {
                    let fast = sup_by_valuation(&chi1, &chi2).unwrap();
                    let mut slow = vec![0.0f64; a2 as usize + 1];
                    for b1 in 0..q1 as i64 {
                        for b2 in 0..q2 as i64 {
                            for t in 0..q2 as i64 {
                                let v = valuation(t as u64, p).min(a2) as usize;
                                slow[v] = slow[v].max(w_sum(&chi1, &chi2, b1, b2, t).unwrap().abs);
                            }
                        }
                    }
                    for (a, b) in fast.iter().zip(&slow) {
                        assert!((a - b).abs() < 1e-9, "p={p} a1={a1} a2={a2}: {fast:?} vs {slow:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn sweep_small_cells() {
        for (p, a1, a2) in [(17u64, 1u32, 1u32), (3, 3, 2), (2, 5, 4)] {
            let c = w_sum_sweep_cell(p, a1, a2, W_CELL_BUDGET).unwrap();
            assert!(c.exhaustive);
            assert_eq!(c.violations, 0, "{c:?}");
            assert!(c.checks > 0);
        }
        assert!(w_sum_sweep_cell(17, 1, 1, 1).unwrap().nontrivial);
    }
}
