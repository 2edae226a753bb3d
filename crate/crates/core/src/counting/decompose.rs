use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampler::RepresentationSampler;
use super::RepCountQuery;
use crate::digits::{big_digits, DigitSystem};
use crate::error::{Error, Result};
use crate::measures::{Block, ProductMeasure};

/// Largest number of entries [`decompose_conditional`] will materialize.
pub const ENTRY_CAP: usize = 1_000_000;

/// One conditioning event: a carry sequence (and, where needed, the two
/// summand lengths) together with the product measure of `x_1` given it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionEntry {
    /// `carries[j]` is the carry out of position `j`.
    pub carries: Vec<u8>,
    /// Digit lengths of `(x_1, x_2)`, revealed when the forbidden digit is 0 or
    /// zero summands are excluded.
    pub lengths: Option<[usize; 2]>,
    pub measure: ProductMeasure,
}

/// The law of `x_1` given `x_1 + x_2 = T`, split into product measures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CarryDecomposition {
    #[serde(with = "crate::serde_big")]
    pub target: BigUint,
    pub entries: Vec<DecompositionEntry>,
}

impl CarryDecomposition {
    pub fn total_mass(&self) -> BigUint {
        self.entries.iter().map(|e| e.measure.mass()).sum()
    }
}

struct Shape<'a> {
    g: u32,
    b: u32,
    t: &'a [u32],
    include_zero: bool,
    reveal_lengths: bool,
}

impl Shape<'_> {
    fn positions(&self) -> usize {
        self.t.len().max(1)
    }

    fn digit(&self, j: usize) -> u32 {
        self.t.get(j).copied().unwrap_or(0)
    }

    /// Whether digit `d` may sit at position `j` of a summand of length `len`.
    fn allowed(&self, d: u32, j: usize, len: Option<usize>) -> bool {
        match len {
            None => d != self.b,
            Some(len) if j + 1 < len => d != self.b,
            Some(len) if j + 1 == len => d != self.b && d != 0,
            Some(_) => d == 0,
        }
    }

    /// Digits of `x_1` at position `j` compatible with digit sum `s`.
    fn block(&self, j: usize, s: i64, lens: Option<[usize; 2]>) -> Option<Vec<u32>> {
        if s < 0 || s > 2 * (self.g as i64 - 1) {
            return None;
        }
        let s = s as u32;
        let lo = s.saturating_sub(self.g - 1);
        let hi = s.min(self.g - 1);
        let digits: Vec<u32> = (lo..=hi)
            .filter(|&d| {
                self.allowed(d, j, lens.map(|l| l[0])) && self.allowed(s - d, j, lens.map(|l| l[1]))
            })
            .collect();
        (!digits.is_empty()).then_some(digits)
    }

    fn length_choices(&self) -> Vec<Option<[usize; 2]>> {
        if !self.reveal_lengths {
            return vec![None];
        }
        let k = self.positions();
        let min = if self.include_zero { 0 } else { 1 };
        let mut out = Vec::new();
        for l1 in min..=k {
            for l2 in min..=k {
                out.push(Some([l1, l2]));
            }
        }
        out
    }

    /// Blocks for a complete carry sequence, or `None` if some block is empty.
    fn blocks(&self, carries: &[u8], lens: Option<[usize; 2]>) -> Result<Option<Vec<Block>>> {
        let mut out = Vec::with_capacity(carries.len());
        let mut carry_in = 0i64;
        for (j, &c) in carries.iter().enumerate() {
            let s = self.digit(j) as i64 - carry_in + self.g as i64 * c as i64;
            match self.block(j, s, lens) {
                Some(ds) => out.push(Block::from_digits(&ds).map_err(|e| {
                    Error::Diagnostic(format!("position {j} is not an interval minus two points: {e}"))
                })?),
                None => return Ok(None),
            }
            carry_in = c as i64;
        }
        Ok(Some(out))
    }
}

fn shape<'a>(t: &'a [u32], sys: &DigitSystem, include_zero: bool) -> Shape<'a> {
    Shape {
        g: sys.g,
        b: sys.b,
        t,
        include_zero,
        reveal_lengths: sys.b == 0 || !include_zero,
    }
}

fn check_target(t: &BigUint, sys: &DigitSystem) -> Result<()> {
    if *t >= sys.modulus_big() * 2u32 {
        return Err(Error::range(format!("target {t} is not below 2·g^k")));
    }
    Ok(())
}

/// Every carry sequence of `x_1 + x_2 = T` with its conditional product measure.
///
/// Positions at or above `reveal_above` get singleton blocks, one entry per
/// revealed digit of `x_1`.
pub fn decompose_conditional(
    t: &BigUint,
    sys: &DigitSystem,
    include_zero: bool,
    reveal_above: Option<usize>,
) -> Result<CarryDecomposition> {
    check_target(t, sys)?;
    let digits = big_digits(t, sys.g);
    let sh = shape(&digits, sys, include_zero);
    let k = sh.positions();
    let mut entries = Vec::new();
    for lens in sh.length_choices() {
        for mask in 0u64..(1u64 << (k - 1)) {
            let carries: Vec<u8> = (0..k).map(|j| ((mask >> j) & 1) as u8).collect();
            let Some(blocks) = sh.blocks(&carries, lens)? else {
                continue;
            };
            for blocks in reveal(blocks, reveal_above) {
                entries.push(DecompositionEntry {
                    carries: carries.clone(),
                    lengths: lens,
                    measure: ProductMeasure::new(sys.g, blocks)?,
                });
                if entries.len() > ENTRY_CAP {
                    return Err(Error::Resource {
                        what: "decomposition entries",
                        requested: entries.len() as u128,
                        cap: ENTRY_CAP as u128,
                    });
                }
            }
        }
    }
    Ok(CarryDecomposition { target: t.clone(), entries })
}

fn reveal(blocks: Vec<Block>, above: Option<usize>) -> Vec<Vec<Block>> {
    let mut out = vec![blocks.clone()];
    let Some(r) = above else {
        return out;
    };
    for (j, b) in blocks.iter().enumerate().skip(r) {
        out = out
            .into_iter()
            .flat_map(|bs| {
                b.digits().map(move |d| {
                    let mut v = bs.clone();
                    v[j] = Block::singleton(d);
                    v
                })
            })
            .collect();
    }
    out
}

/// The entry containing a uniformly random representation of `T = x_1 + x_2`,
/// i.e. an entry drawn with probability proportional to its mass. Positions at
/// or above `reveal_above` are singletons holding the sampled digit of `x_1`.
pub fn sample_decomposition_entry<R: Rng>(
    sampler: &RepresentationSampler,
    t: &BigUint,
    sys: &DigitSystem,
    include_zero: bool,
    reveal_above: Option<usize>,
    rng: &mut R,
) -> Result<DecompositionEntry> {
    check_target(t, sys)?;
    let digits = big_digits(t, sys.g);
    let sh = shape(&digits, sys, include_zero);
    let k = sh.positions();
    let mut x = sampler.sample_digits(rng);
    for v in x.iter_mut() {
        v.resize(k, 0);
    }
    let mut carries = Vec::with_capacity(k);
    let mut carry = 0u32;
    for j in 0..k {
        let s = x[0][j] + x[1][j] + carry;
        carry = s / sys.g;
        carries.push(carry as u8);
    }
    let len = |v: &[u32]| v.iter().rposition(|&d| d != 0).map_or(0, |p| p + 1);
    let lens = sh.reveal_lengths.then(|| [len(&x[0]), len(&x[1])]);
    let mut blocks = sh
        .blocks(&carries, lens)?
        .ok_or_else(|| Error::Diagnostic("sampled representation has an empty block".into()))?;
    if let Some(r) = reveal_above {
        for j in r..k {
            blocks[j] = Block::singleton(x[0][j]);
        }
    }
    Ok(DecompositionEntry { carries, lengths: lens, measure: ProductMeasure::new(sys.g, blocks)? })
}

/// Sampler for `x_1 + x_2 = T` matching [`sample_decomposition_entry`].
pub fn pair_sampler(t: &BigUint, sys: &DigitSystem, include_zero: bool) -> Result<RepresentationSampler> {
    let k = big_digits(t, sys.g).len().max(1) as u32;
    let sys2 = DigitSystem::new(sys.g, sys.b, k.max(sys.k))?;
    if t.is_zero() && !include_zero {
        return Err(Error::EmptySupport("no positive representations of 0".into()));
    }
    RepresentationSampler::new(&RepCountQuery::new(t.clone(), 2, sys2).include_zero(include_zero))
}
