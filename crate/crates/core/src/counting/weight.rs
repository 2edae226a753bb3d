use num_bigint::{BigUint, RandBigInt};
use num_traits::Zero;
use rand::Rng;

/// Exact nonnegative weight used by the carry DP.
pub(crate) trait Weight: Clone + Send + Sync + 'static {
    fn zero() -> Self;
    fn from_u64(x: u64) -> Self;
    fn is_zero(&self) -> bool;
    /// `self += w·k`.
    fn add_mul(&mut self, w: &Self, k: u64);
    fn mul_u64(&self, k: u64) -> Self;
    fn less_than(&self, other: &Self) -> bool;
    fn sub_assign(&mut self, other: &Self);
    fn random_below<R: Rng>(&self, rng: &mut R) -> Self;
    fn to_big(&self) -> BigUint;
}

impl Weight for u128 {
    fn zero() -> Self {
        0
    }
    fn from_u64(x: u64) -> Self {
        x as u128
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add_mul(&mut self, w: &Self, k: u64) {
        *self = w
            .checked_mul(k as u128)
            .and_then(|p| self.checked_add(p))
            .expect("carry DP weight overflowed 128 bits");
    }
    fn mul_u64(&self, k: u64) -> Self {
        self.checked_mul(k as u128).expect("carry DP weight overflowed 128 bits")
    }
    fn less_than(&self, other: &Self) -> bool {
        self < other
    }
    fn sub_assign(&mut self, other: &Self) {
        *self -= other;
    }
    fn random_below<R: Rng>(&self, rng: &mut R) -> Self {
        rng.gen_range(0..*self)
    }
    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl Weight for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_u64(x: u64) -> Self {
        BigUint::from(x)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_mul(&mut self, w: &Self, k: u64) {
        if k == 1 {
            *self += w;
        } else {
            *self += w * k;
        }
    }
    fn mul_u64(&self, k: u64) -> Self {
        self * k
    }
    fn less_than(&self, other: &Self) -> bool {
        self < other
    }
    fn sub_assign(&mut self, other: &Self) {
        *self -= other;
    }
    fn random_below<R: Rng>(&self, rng: &mut R) -> Self {
        rng.gen_biguint_below(self)
    }
    fn to_big(&self) -> BigUint {
        self.clone()
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}
