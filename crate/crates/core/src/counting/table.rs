use super::weight::binomial;
use super::Layer;
use crate::digits::DigitSystem;
use crate::error::{Error, Result};

/// Largest table length accepted by [`CountTable::new`].
pub const TABLE_LIMIT_CAP: u64 = 50_000_000;

/// Representation counts for every target up to a limit, for a fixed digit rule.
///
/// `P_a(V)` counts ordered `a`-tuples of positive restricted integers summing
/// to `V`. Writing `V = gV' + s`, the lowest digits of the tuple sum to
/// `s + cg` for a carry `c`, `e` of the summands end there, and the rest sum
/// to `V' − c` after the shift:
///
/// `P_a(V) = Σ_e C(a,e) Σ_c D_{a,e}(s + cg) · P_{a−e}(V' − c)`.
#[derive(Debug, Clone)]
pub struct CountTable {
    g: u32,
    m: usize,
    layer: Layer,
    units_layer: Layer,
    limit: u64,
    /// `p[a][V]` for `a ≤ m` and `V ≤ limit`.
    p: Vec<Vec<u128>>,
}

impl CountTable {
    /// Tables up to `limit`; counts are then available up to `g·limit + g − 1`.
    pub fn new(sys: &DigitSystem, m: usize, limit: u64) -> Result<CountTable> {
        if !(1..=3).contains(&m) {
            return Err(Error::arg("table supports 1 to 3 summands"));
        }
        Error::check_cap("count table length", limit as u128, TABLE_LIMIT_CAP as u128)?;
        let g = sys.g;
        let layer = Layer::new(g, m, sys.b, false);
        let units_layer = Layer::new(g, m, sys.b, true);
        let len = limit as usize + 1;
        let mut p = vec![vec![0u128; len]; m + 1];
        p[0][0] = 1;
        for v in 1..len {
            for a in 1..=m {
                p[a][v] = level(&layer, &p, a, v as u64, g);
            }
        }
        Ok(CountTable { g, m, layer, units_layer, limit, p })
    }

    pub fn max_target(&self) -> u64 {
        self.limit * self.g as u64 + self.g as u64 - 1
    }

    /// Ordered `a`-tuples of positive members summing to `v`.
    pub fn positive(&self, a: usize, v: u64) -> u128 {
        assert!(a <= self.m && v <= self.max_target(), "target outside the table");
        if v <= self.limit {
            return self.p[a][v as usize];
        }
        level(&self.layer, &self.p, a, v, self.g)
    }

    /// Representations of `t` by `m` summands with the given side conditions.
    pub fn count(&self, t: u64, include_zero: bool, coprime_to_g: bool) -> u128 {
        if coprime_to_g {
            if t == 0 {
                return 0;
            }
            return level(&self.units_layer, &self.p, self.m, t, self.g);
        }
        if !include_zero {
            return self.positive(self.m, t);
        }
        (0..=self.m)
            .map(|a| binomial(self.m, a) as u128 * self.positive(a, t))
            .sum()
    }
}

/// One recursion step for `P_a(v)`, reading lower values from `p`.
fn level(layer: &Layer, p: &[Vec<u128>], a: usize, v: u64, g: u32) -> u128 {
    if v == 0 {
        return (a == 0) as u128;
    }
    if a == 0 {
        return 0;
    }
    let g64 = g as u64;
    let hi = v / g64;
    let s = (v % g64) as usize;
    let mut acc = 0u128;
    for e in 0..=a {
        let dist = &layer.dist[a][e];
        let coef = binomial(a, e) as u128;
        let rest = &p[a - e];
        let mut c = 0u64;
        while c <= hi {
            let idx = s + (c * g64) as usize;
            if idx >= dist.len() {
                break;
            }
            let n = dist[idx];
            if n != 0 {
                acc += coef * n as u128 * rest[(hi - c) as usize];
            }
            c += 1;
        }
    }
    acc
}
