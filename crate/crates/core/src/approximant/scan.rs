use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{lambda_q_sigma0_table, ZeroSet};
use crate::digits::DigitSystem;
use crate::error::{Error, Result};
use crate::numtheory::{build_tables, gcd};

/// Largest `M` accepted by [`deviation_scan`].
pub const SCAN_CAP: u64 = 10_000_000;

/// Frequencies sampled by a deviation scan: every reduced `a/q` with
/// `q ≤ farey_limit`, plus the uniform grid `j/grid_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanPlan {
    pub farey_limit: u64,
    pub grid_size: usize,
}

impl Default for ScanPlan {
    fn default() -> Self {
        ScanPlan { farey_limit: 512, grid_size: 1 << 16 }
    }
}

/// What is compared against the approximant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrand {
    VonMangoldt,
    /// The approximant against itself; every sample is zero.
    SelfCheck,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviationScan {
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub zeros: u64,
    pub restricted: bool,
    /// Maximum over the sampled frequencies: a lower bound for the supremum.
    pub sup_estimate: f64,
    pub sup_over_m: f64,
    pub argmax_num: u64,
    pub argmax_den: u64,
    /// The sample at `θ = 0`.
    pub at_zero: f64,
    pub samples: u64,
}

struct Best {
    value: f64,
    num: u64,
    den: u64,
}

impl Best {
    fn offer(&mut self, value: f64, num: u64, den: u64) {
        if value > self.value {
            let g = gcd(num, den).max(1);
            *self = Best { value, num: num / g, den: den / g };
        }
    }
}

/// `max_θ |Σ_{n≤M} (Λ(n) − Λ_{Q,σ0}(n)) w(n) e(nθ)|` over a finite frequency set,
/// with `w` the indicator of a restricted digit set when given.
pub fn deviation_scan(
    m: u64,
    q: f64,
    zs: &ZeroSet,
    plan: &ScanPlan,
    restricted: Option<&DigitSystem>,
    integrand: Integrand,
) -> Result<DeviationScan> {
    Error::check_cap("scan length M", m as u128, SCAN_CAP as u128)?;
    if m < 2 || plan.farey_limit == 0 || plan.grid_size == 0 {
        return Err(Error::arg("need M ≥ 2 and a nonempty frequency plan"));
    }
    let approx = lambda_q_sigma0_table(m, q, zs)?;
    let mut a: Vec<Complex64> = match integrand {
        Integrand::SelfCheck => approx.iter().map(|z| z - z).collect(),
        Integrand::VonMangoldt => {
            let t = build_tables(m as usize)?;
            let lam = t.von_mangoldt_slice();
            approx.iter().enumerate().map(|(n, z)| Complex64::new(lam[n], 0.0) - z).collect()
        }
    };
    a[0] = Complex64::new(0.0, 0.0);
    if let Some(sys) = restricted {
        a.iter_mut().enumerate().for_each(|(n, v)| {
            if !sys.is_restricted(n as u64) {
                *v = Complex64::new(0.0, 0.0);
            }
        });
    }
    // Farey fractions: fold by residue, then one DFT per denominator.
    let farey: Vec<Vec<(u64, f64)>> = (1..=plan.farey_limit)
        .into_par_iter()
        .map(|den| {
            let mut buf = vec![Complex64::new(0.0, 0.0); den as usize];
            let mut r = 0usize;
            for v in &a {
                buf[r] += v;
                r += 1;
                if r == den as usize {
                    r = 0;
                }
            }
            FftPlanner::new().plan_fft_inverse(den as usize).process(&mut buf);
            (0..den).filter(|&num| gcd(num, den) == 1).map(|num| (num, buf[num as usize].norm())).collect()
        })
        .collect();
    let mut best = Best { value: -1.0, num: 0, den: 1 };
    let mut samples = 0u64;
    for (i, row) in farey.iter().enumerate() {
        for &(num, v) in row {
            best.offer(v, num, i as u64 + 1);
            samples += 1;
        }
    }
    let at_zero = farey[0][0].1;
    let g = plan.grid_size;
    let mut grid = vec![Complex64::new(0.0, 0.0); g];
    for (n, v) in a.iter().enumerate() {
        grid[n % g] += v;
    }
    FftPlanner::new().plan_fft_inverse(g).process(&mut grid);
    for (j, z) in grid.iter().enumerate() {
        best.offer(z.norm(), j as u64, g as u64);
        samples += 1;
    }
    Ok(DeviationScan {
        m,
        q,
        zeros: zs.count(),
        restricted: restricted.is_some(),
        sup_estimate: best.value,
        sup_over_m: best.value / m as f64,
        argmax_num: best.num,
        argmax_den: best.den,
        at_zero,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximant::lambda_q_table;
    use crate::measures::cis;

    #[test]
    fn self_deviation_vanishes() {
        let zs = ZeroSet::empty(30.0, 1e-3);
        let s = deviation_scan(20_000, 30.0, &zs, &ScanPlan { farey_limit: 40, grid_size: 1024 }, None, Integrand::SelfCheck).unwrap();
        assert_eq!(s.sup_estimate, 0.0);
    }

    #[test]
    fn zero_frequency_is_psi_minus_mean() {
        let m = 50_000u64;
        let zs = ZeroSet::empty(20.0, 1e-3);
        let s = deviation_scan(m, 20.0, &zs, &ScanPlan { farey_limit: 8, grid_size: 64 }, None, Integrand::VonMangoldt).unwrap();
        let t = build_tables(m as usize).unwrap();
        let psi: f64 = t.von_mangoldt_slice()[1..].iter().sum();
        let lq: f64 = lambda_q_table(m, 20.0).unwrap()[1..].iter().sum();
        assert!((s.at_zero - (psi - lq).abs()).abs() < 1e-6 * psi);
    }

    #[test]
    fn samples_match_direct_sums() {
        let m = 3000u64;
        let sys = DigitSystem::new(10, 7, 4).unwrap();
        let zs = ZeroSet::empty(5.0, 1e-3);
        let plan = ScanPlan { farey_limit: 12, grid_size: 32 };
        let s = deviation_scan(m, 5.0, &zs, &plan, Some(&sys), Integrand::VonMangoldt).unwrap();
        let t = build_tables(m as usize).unwrap();
        let lq = lambda_q_table(m, 5.0).unwrap();
        let direct = |x: f64| -> f64 {
            (1..=m)
                .filter(|&n| sys.is_restricted(n))
                .map(|n| cis(n as f64 * x) * (t.von_mangoldt(n as usize) - lq[n as usize]))
                .sum::<Complex64>()
                .norm()
        };
        let mut best = 0.0f64;
        for den in 1..=12u64 {
            for num in (0..den).filter(|&a| gcd(a, den) == 1) {
                best = best.max(direct(num as f64 / den as f64));
            }
        }
        for j in 0..32 {
            best = best.max(direct(j as f64 / 32.0));
        }
        assert!((s.sup_estimate - best).abs() < 1e-6 * best.max(1.0));
        assert!((direct(s.argmax_num as f64 / s.argmax_den as f64) - best).abs() < 1e-6 * best);
    }

    #[test]
    fn refinement_never_lowers_the_max() {
        let zs = ZeroSet::empty(10.0, 1e-3);
        let small = deviation_scan(30_000, 10.0, &zs, &ScanPlan { farey_limit: 16, grid_size: 256 }, None, Integrand::VonMangoldt).unwrap();
        let big = deviation_scan(30_000, 10.0, &zs, &ScanPlan { farey_limit: 64, grid_size: 256 }, None, Integrand::VonMangoldt).unwrap();
        assert!(big.sup_estimate >= small.sup_estimate);
    }

    #[test]
    fn cap_enforced() {
        let zs = ZeroSet::empty(10.0, 1e-3);
        assert!(matches!(
            deviation_scan(SCAN_CAP + 1, 10.0, &zs, &ScanPlan::default(), None, Integrand::VonMangoldt),
            Err(Error::Resource { .. })
        ));
    }
}
