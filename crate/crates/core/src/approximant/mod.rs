//! Fourier approximants of the von Mangoldt function: the Ramanujan-sum
//! main part `Λ_Q`, the zero corrections `F_{χ,Q}`, and their combination.

mod scan;
mod zeros;

pub use scan::{deviation_scan, DeviationScan, Integrand, ScanPlan, SCAN_CAP};
pub use zeros::{load_zeros, parse_zeros, LoadedZeros, RejectedRow, ZeroDatum, ZeroSet};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::characters::{gauss_sum, DirichletCharacter};
use crate::error::{Error, Result};
use crate::numtheory::{divisor_count, euler_phi, gcd, mobius, ramanujan_sum_exact};

/// Default `σ0`.
pub const DEFAULT_SIGMA0: f64 = 1e-3;

/// Largest `q·Q` accepted by [`f_chi_q`].
pub const FCHI_CAP: u64 = 10_000_000;

/// Largest total period length stored by [`FChiTable`].
pub const FCHI_TABLE_CAP: u64 = 20_000_000;

fn q_floor(q: f64) -> u64 {
    if q.is_nan() || q < 1.0 {
        0
    } else {
        q.floor() as u64
    }
}

/// `Λ_Q(n) = Σ_{q ≤ Q} μ(q)/φ(q) · c_q(n)`.
pub fn lambda_q(n: u64, q: f64) -> f64 {
    (1..=q_floor(q))
        .filter_map(|d| {
            let mu = mobius(d);
            (mu != 0).then(|| mu as f64 * ramanujan_sum_exact(d, n as i64) as f64 / euler_phi(d) as f64)
        })
        .sum()
}

/// `Λ_Q(n)` for every `n ≤ m`, accumulated one period at a time.
pub fn lambda_q_table(m: u64, q: f64) -> Result<Vec<f64>> {
    Error::check_cap("approximant range", m as u128, SCAN_CAP as u128)?;
    let moduli: Vec<(u64, Vec<f64>)> = (1..=q_floor(q))
        .filter(|&d| mobius(d) != 0)
        .map(|d| {
            let coef = mobius(d) as f64 / euler_phi(d) as f64;
            (d, (0..d).map(|r| coef * ramanujan_sum_exact(d, r as i64) as f64).collect())
        })
        .collect();
    let mut out = vec![0.0f64; m as usize + 1];
    out.par_chunks_mut(1 << 14).enumerate().for_each(|(ci, chunk)| {
        let start = (ci << 14) as u64;
        for (d, period) in &moduli {
            let mut r = (start % d) as usize;
            for v in chunk.iter_mut() {
                *v += period[r];
                r += 1;
                if r == *d as usize {
                    r = 0;
                }
            }
        }
    });
    Ok(out)
}

/// `F_{χ,Q}` as a sum of periodic sequences, one per `r = q·s`, `s ≤ Q`.
#[derive(Debug, Clone)]
pub struct FChiTable {
    rows: Vec<(u64, Vec<Complex64>)>,
}

impl FChiTable {
    pub fn new(chi: &DirichletCharacter, q: f64) -> Result<FChiTable> {
        if !chi.is_primitive() {
            return Err(Error::arg("F_chi_Q needs a primitive character"));
        }
        let qm = chi.modulus();
        let smax = q_floor(q);
        let total = qm as u128 * smax as u128 * (smax as u128 + 1) / 2;
        Error::check_cap("F_chi_Q period table", total, FCHI_TABLE_CAP as u128)?;
        let tau_bar = gauss_sum(chi).conj();
        let mut planner = FftPlanner::new();
        let rows = (1..=smax)
            .filter(|&s| mobius(s) != 0 && gcd(s, qm) == 1)
            .map(|s| {
                let r = qm * s;
                let coef = tau_bar * chi.value(s as i64).conj() * (mobius(s) as f64 / euler_phi(r) as f64);
                let mut buf: Vec<Complex64> = (0..r)
                    .map(|b| if gcd(b, r) == 1 { chi.value(b as i64) } else { Complex64::new(0.0, 0.0) })
                    .collect();
                planner.plan_fft_inverse(r as usize).process(&mut buf);
                buf.iter_mut().for_each(|z| *z *= coef);
                (r, buf)
            })
            .collect();
        Ok(FChiTable { rows })
    }

    pub fn eval(&self, n: i64) -> Complex64 {
        self.rows.iter().map(|(r, v)| v[n.rem_euclid(*r as i64) as usize]).sum()
    }
}

/// `F_{χ,Q}(n) = Σ_{q | r, r/q ≤ Q} Σ_{b ∈ (Z/r)^*} c_χ(b, r) e(bn/r)`, summed directly.
pub fn f_chi_q(n: i64, chi: &DirichletCharacter, q: f64) -> Result<Complex64> {
    if !chi.is_primitive() {
        return Err(Error::arg("F_chi_Q needs a primitive character"));
    }
    let qm = chi.modulus();
    let smax = q_floor(q);
    Error::check_cap("q·Q", qm as u128 * smax as u128, FCHI_CAP as u128)?;
    let tau_bar = gauss_sum(chi).conj();
    let mut acc = Complex64::new(0.0, 0.0);
    for s in 1..=smax {
        let mu = mobius(s);
        if mu == 0 || gcd(s, qm) != 1 {
            continue;
        }
        let r = qm * s;
        let inner = crate::characters::twisted_sum(chi, r, n);
        acc += inner * chi.value(s as i64).conj() * tau_bar * (mu as f64 / euler_phi(r) as f64);
    }
    Ok(acc)
}

/// `n^{ρ−1} = exp((β − 1 + iγ) ln n)`.
fn zero_weight(n: u64, beta: f64, gamma: f64) -> Complex64 {
    Complex64::new(beta - 1.0, gamma).scale((n as f64).ln()).exp()
}

/// `Λ_{Q,σ0}(n) = Λ_Q(n) − Σ_ρ n^{ρ−1} F_{χ_ρ,Q}(n)`, multiplicities included.
pub fn lambda_q_sigma0(n: u64, q: f64, zs: &ZeroSet) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let chars = zs.characters()?;
    let mut acc = Complex64::new(lambda_q(n, q), 0.0);
    for (z, chi) in zs.zeros.iter().zip(&chars) {
        acc -= zero_weight(n, z.beta, z.gamma) * f_chi_q(n as i64, chi, q)? * z.multiplicity as f64;
    }
    Ok(acc)
}

/// `Λ_{Q,σ0}(n)` for `1 ≤ n ≤ m`, index 0 unused.
pub fn lambda_q_sigma0_table(m: u64, q: f64, zs: &ZeroSet) -> Result<Vec<Complex64>> {
    let base = lambda_q_table(m, q)?;
    let mut out: Vec<Complex64> = base.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    out[0] = Complex64::new(0.0, 0.0);
    for (z, chi) in zs.zeros.iter().zip(zs.characters()?) {
        let table = FChiTable::new(&chi, q)?;
        let mult = z.multiplicity as f64;
        out.par_iter_mut().enumerate().skip(1).for_each(|(n, v)| {
            *v -= zero_weight(n as u64, z.beta, z.gamma) * table.eval(n as i64) * mult;
        });
    }
    Ok(out)
}

/// Zeros with `1 − β ≤ A·ln ln M / ln M`.
pub fn filter_zeros_a(zs: &ZeroSet, a: f64, m: u64) -> Result<ZeroSet> {
    if m < 16 {
        return Err(Error::arg("M must be at least 16"));
    }
    let lm = (m as f64).ln();
    let threshold = if a.is_infinite() { f64::INFINITY } else { a * lm.ln() / lm };
    Ok(ZeroSet {
        q: zs.q,
        sigma0: zs.sigma0,
        zeros: zs.zeros.iter().filter(|z| 1.0 - z.beta <= threshold).cloned().collect(),
    })
}

/// Smallest `C` with `|F_{χ,Q}(n)| ≤ C·τ(n)·(ln Q)³` over a range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FChiGrowth {
    pub q: f64,
    pub n_max: u64,
    pub modulus_max: u64,
    pub characters: usize,
    pub fitted_c: f64,
    pub argmax_n: u64,
    pub argmax_modulus: u64,
    pub argmax_index: u64,
}

pub fn f_chi_growth(n_max: u64, modulus_max: u64, q: f64) -> Result<FChiGrowth> {
    if q <= 1.0 {
        return Err(Error::arg("Q must exceed 1 so that ln Q > 0"));
    }
    let lq3 = q.ln().powi(3);
    let chars: Vec<DirichletCharacter> = (1..=modulus_max)
        .map(crate::characters::CharacterGroup::new)
        .collect::<Result<Vec<_>>>()?
        .iter()
        .flat_map(|g| g.primitive_characters())
        .collect();
    let tau: Vec<f64> = (0..=n_max).map(|n| divisor_count(n.max(1)) as f64).collect();
    let best: Vec<(f64, u64)> = chars
        .par_iter()
        .map(|chi| {
            let t = FChiTable::new(chi, q)?;
            let mut best = (0.0f64, 1u64);
            for n in 1..=n_max {
                let r = t.eval(n as i64).norm() / (tau[n as usize] * lq3);
                if r > best.0 {
                    best = (r, n);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let mut out = FChiGrowth { q, n_max, modulus_max, characters: chars.len(), fitted_c: 0.0, argmax_n: 0, argmax_modulus: 0, argmax_index: 0 };
    for (chi, (r, n)) in chars.iter().zip(best) {
        if r > out.fitted_c {
            out.fitted_c = r;
            out.argmax_n = n;
            out.argmax_modulus = chi.modulus();
            out.argmax_index = chi.index();
        }
    }
    Ok(out)
}
