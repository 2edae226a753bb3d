use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::weight::Weight;
use super::{Layer, Plan, RepCountQuery};
use crate::digits::big_from_digits;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum Levels {
    Small(Vec<Vec<u128>>),
    Big(Vec<Vec<BigUint>>),
}

/// Exactly uniform sampler over all representations of a query.
///
/// Stores the forward DP tables and walks them backward from the accepting
/// state, choosing each transition with probability proportional to its
/// exact weight.
#[derive(Debug, Clone)]
pub struct RepresentationSampler {
    plan: Plan,
    levels: Levels,
}

/// Per-position choice made by the backward walk.
#[derive(Debug, Clone, Copy)]
struct Step {
    live: usize,
    ending: usize,
    sum: usize,
}

impl RepresentationSampler {
    pub fn new(q: &RepCountQuery) -> Result<Self> {
        let plan = Plan::new(q)?;
        let levels = if plan.fits_u128() {
            Levels::Small(plan.forward_all::<u128>())
        } else {
            Levels::Big(plan.forward_all::<BigUint>())
        };
        let s = RepresentationSampler { plan, levels };
        if s.count() == BigUint::from(0u32) {
            return Err(Error::EmptySupport(format!("no representations of {}", q.target)));
        }
        Ok(s)
    }

    pub fn count(&self) -> BigUint {
        let idx = self.plan.state(0, 0);
        match &self.levels {
            Levels::Small(l) => l.last().unwrap()[idx].to_big(),
            Levels::Big(l) => l.last().unwrap()[idx].clone(),
        }
    }

    pub fn positions(&self) -> usize {
        self.plan.digits.len()
    }

    /// One uniform representation as little-endian digit vectors, `out[i][j]`
    /// being digit `j` of summand `i`.
    pub fn sample_digits<R: Rng>(&self, rng: &mut R) -> Vec<Vec<u32>> {
        let steps = match &self.levels {
            Levels::Small(l) => backward(&self.plan, l, rng),
            Levels::Big(l) => backward(&self.plan, l, rng),
        };
        self.assign(&steps, rng)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<BigUint> {
        self.sample_digits(rng)
            .iter()
            .map(|d| big_from_digits(d, self.plan.g))
            .collect()
    }

    pub fn sample_with_seed(&self, seed: u64) -> Vec<BigUint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample(&mut rng)
    }

    fn assign<R: Rng>(&self, steps: &[Step], rng: &mut R) -> Vec<Vec<u32>> {
        let m = self.plan.m;
        let k = steps.len();
        let mut digits = vec![vec![0u32; k]; m];
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        let mut live: Vec<usize> = order[..steps.first().map_or(0, |s| s.live)].to_vec();
        for (j, step) in steps.iter().enumerate() {
            debug_assert_eq!(live.len(), step.live);
            live.shuffle(rng);
            let (ending, continuing) = live.split_at(step.ending);
            let layer: &Layer = &self.plan.layers[j];
            let mut sets: Vec<(usize, &[bool])> = Vec::with_capacity(live.len());
            sets.extend(continuing.iter().map(|&i| (i, layer.cont.as_slice())));
            sets.extend(ending.iter().map(|&i| (i, layer.end.as_slice())));
            let chosen = sample_digit_tuple(&sets, step.sum, rng);
            for (&(i, _), d) in sets.iter().zip(chosen) {
                digits[i][j] = d;
            }
            live = continuing.to_vec();
        }
        digits
    }
}

fn backward<W: Weight, R: Rng>(plan: &Plan, levels: &[Vec<W>], rng: &mut R) -> Vec<Step> {
    let k = plan.digits.len();
    let m = plan.m;
    let mut steps = vec![Step { live: 0, ending: 0, sum: 0 }; k];
    let (mut cur_c, mut cur_a) = (0usize, 0usize);
    for j in (0..k).rev() {
        let total = &levels[j + 1][plan.state(cur_c, cur_a)];
        let mut r = total.random_below(rng);
        let layer = &plan.layers[j];
        let mut picked: Option<(usize, usize, usize, usize)> = None;
        'scan: for c in 0..m {
            for a in cur_a..=m {
                let w = &levels[j][plan.state(c, a)];
                if w.is_zero() {
                    continue;
                }
                let mut found = None;
                layer.transitions(c, a, plan.digits[j], |c2, e, s, mult| {
                    if found.is_some() || c2 != cur_c || a - e != cur_a {
                        return;
                    }
                    let wt = w.mul_u64(mult);
                    if r.less_than(&wt) {
                        found = Some((c, a, e, s));
                    } else {
                        r.sub_assign(&wt);
                    }
                });
                if found.is_some() {
                    picked = found;
                    break 'scan;
                }
            }
        }
        let (c, a, e, s) = picked.expect("backward walk lost probability mass");
        steps[j] = Step { live: a, ending: e, sum: s };
        cur_c = c;
        cur_a = a;
    }
    debug_assert_eq!(cur_c, 0);
    steps
}

/// Uniform tuple `(d_i)` with `d_i ∈ sets[i]` and `Σ d_i = sum`.
fn sample_digit_tuple<R: Rng>(sets: &[(usize, &[bool])], sum: usize, rng: &mut R) -> Vec<u32> {
    let n = sets.len();
    let width = sum + 1;
    // ways[i][v]: tuples for sets i.. summing to v
    let mut ways = vec![vec![0u64; width]; n + 1];
    ways[n][0] = 1;
    for i in (0..n).rev() {
        for v in 0..width {
            let mut acc = 0;
            for (d, &ok) in sets[i].1.iter().enumerate() {
                if ok && d <= v {
                    acc += ways[i + 1][v - d];
                }
            }
            ways[i][v] = acc;
        }
    }
    let mut out = Vec::with_capacity(n);
    let mut rest = sum;
    for i in 0..n {
        let mut r = rng.gen_range(0..ways[i][rest]);
        let mut chosen = None;
        for (d, &ok) in sets[i].1.iter().enumerate() {
            if !ok || d > rest {
                continue;
            }
            let w = ways[i + 1][rest - d];
            if r < w {
                chosen = Some(d);
                break;
            }
            r -= w;
        }
        let d = chosen.expect("digit tuple sampling lost mass");
        out.push(d as u32);
        rest -= d;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::DigitSystem;
    use std::collections::HashMap;

    #[test]
    fn unique_representation() {
        let s = DigitSystem::new(10, 7, 1).unwrap();
        let sampler = RepresentationSampler::new(&RepCountQuery::new(3u32, 3, s)).unwrap();
        for seed in 0..20 {
            let x = sampler.sample_with_seed(seed);
            assert!(x.iter().all(|v| *v == BigUint::from(1u32)));
        }
    }

    #[test]
    fn empty_support_error() {
        let s = DigitSystem::new(10, 7, 1).unwrap();
        assert!(matches!(
            RepresentationSampler::new(&RepCountQuery::new(1u32, 3, s)),
            Err(Error::EmptySupport(_))
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let s = DigitSystem::new(10, 3, 6).unwrap();
        let sampler = RepresentationSampler::new(&RepCountQuery::new(987_654u32, 3, s)).unwrap();
        assert_eq!(sampler.sample_with_seed(42), sampler.sample_with_seed(42));
    }

    /// Chi-square test against the exact uniform law on all representations.
    fn chi_square(q: &RepCountQuery, samples: usize, seed: u64) -> (f64, usize) {
        let sampler = RepresentationSampler::new(q).unwrap();
        let t: u64 = q.target.to_string().parse().unwrap();
        let ok = |x: u64| if x == 0 { q.include_zero } else { q.sys.is_restricted(x) };
        let support: Vec<u64> = (0..=t).filter(|&x| ok(x) && ok(t - x)).collect();
        assert_eq!(BigUint::from(support.len()), sampler.count());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hist: HashMap<u64, usize> = HashMap::new();
        for _ in 0..samples {
            let x = sampler.sample(&mut rng);
            let x1: u64 = x[0].to_string().parse().unwrap();
            let x2: u64 = x[1].to_string().parse().unwrap();
            assert_eq!(x1 + x2, t);
            assert!(ok(x1) && ok(x2));
            *hist.entry(x1).or_default() += 1;
        }
        let expect = samples as f64 / support.len() as f64;
        let stat = support
            .iter()
            .map(|x| {
                let o = *hist.get(x).unwrap_or(&0) as f64;
                (o - expect).powi(2) / expect
            })
            .sum();
        (stat, support.len() - 1)
    }

    /// Wilson–Hilferty approximation of the 0.999 chi-square quantile.
    fn chi2_999(df: usize) -> f64 {
        let d = df as f64;
        let h = 2.0 / (9.0 * d);
        d * (1.0 - h + 3.0902 * h.sqrt()).powi(3)
    }

    #[test]
    fn uniform_over_pairs_of_twenty() {
        let s = DigitSystem::new(10, 7, 2).unwrap();
        for zero in [false, true] {
            let (stat, df) = chi_square(&RepCountQuery::new(20u32, 2, s).include_zero(zero), 10_000, 1);
            assert!(stat < chi2_999(df), "stat={stat} df={df}");
        }
        let z = DigitSystem::new(10, 0, 3).unwrap();
        let (stat, df) = chi_square(&RepCountQuery::new(120u32, 2, z), 20_000, 2);
        assert!(stat < chi2_999(df), "stat={stat} df={df}");
    }

    #[test]
    fn triples_respect_constraints() {
        let s = DigitSystem::new(10, 0, 5).unwrap();
        let q = RepCountQuery::new(54_321u32, 3, s).coprime(true);
        let sampler = RepresentationSampler::new(&q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let x = sampler.sample(&mut rng);
            let v: Vec<u64> = x.iter().map(|b| b.to_string().parse().unwrap()).collect();
            assert_eq!(v.iter().sum::<u64>(), 54_321);
            assert!(v.iter().all(|&y| s.is_restricted(y) && y % 2 == 1 && y % 5 != 0));
        }
    }
}
