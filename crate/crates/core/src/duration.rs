//! Per-state sojourn-time distributions.
//!
//! Observed integer durations are smoothed by a Gaussian-kernel density
//! estimate with the rule-of-thumb bandwidth, evaluated at integer points
//! 1..=dmax, floored, and renormalized into a proper pmf. The geometric pmf
//! implied by a constant self-transition probability is provided as the
//! reference shape an ordinary HMM would impose.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Fallback bandwidth when the sample standard deviation degenerates
/// (single sample or all samples equal). Spreads mass to adjacent integers
/// without overwhelming the point estimate.
const FALLBACK_BANDWIDTH: f64 = 0.5;

/// Pre-normalization floor keeping every in-support duration decodable.
const PMF_FLOOR: f64 = 1e-12;

/// A discrete duration pmf over 1..=dmax fit by Gaussian-kernel KDE.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationDensity {
    sample_count: usize,
    bandwidth: f64,
    dmax: u32,
    pmf: Vec<f64>,
}

impl DurationDensity {
    /// Rebuild a density from serialized parts, revalidating the pmf.
    pub fn from_parts(sample_count: usize, bandwidth: f64, dmax: u32, pmf: Vec<f64>) -> Result<Self> {
        if dmax == 0 {
            return Err(Error::InvalidArgument {
                what: "dmax",
                detail: "must be at least 1".to_string(),
            });
        }
        if pmf.len() != dmax as usize {
            return Err(Error::DimensionMismatch {
                what: "duration pmf",
                expected: dmax as usize,
                got: pmf.len(),
            });
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel {
                detail: format!("duration pmf sums to {sum}"),
            });
        }
        if pmf.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidModel {
                detail: "duration pmf has non-positive or non-finite mass".to_string(),
            });
        }
        Ok(DurationDensity {
            sample_count,
            bandwidth,
            dmax,
            pmf,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Upper support bound; durations longer than this are undecodable.
    pub fn dmax(&self) -> u32 {
        self.dmax
    }

    /// Probability of sojourning exactly `m` time units (0 outside support).
    pub fn pmf(&self, m: u32) -> f64 {
        if m == 0 || m > self.dmax {
            0.0
        } else {
            self.pmf[(m - 1) as usize]
        }
    }

    /// The pmf values for m = 1..=dmax.
    pub fn pmf_values(&self) -> &[f64] {
        &self.pmf
    }

    /// The duration with maximal probability.
    pub fn mode(&self) -> u32 {
        let mut best = 0usize;
        for (i, &p) in self.pmf.iter().enumerate() {
            if p > self.pmf[best] {
                best = i;
            }
        }
        best as u32 + 1
    }
}

/// Rule-of-thumb kernel bandwidth `(4 sigma^5 / 3n)^(1/5)`.
///
/// `sigma` is the sample standard deviation with the n-1 divisor. Returns
/// the 0.5 fallback when the formula degenerates (n = 1 or zero variance).
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::EmptyInput("bandwidth samples"));
    }
    if n == 1 {
        return Ok(FALLBACK_BANDWIDTH);
    }
    let n_f = n as f64;
    let mean = samples.iter().sum::<f64>() / n_f;
    let ss: f64 = samples.iter().map(|&x| (x - mean) * (x - mean)).sum();
    let sigma = (ss / (n_f - 1.0)).sqrt();
    if sigma == 0.0 {
        return Ok(FALLBACK_BANDWIDTH);
    }
    Ok((4.0 * sigma.powi(5) / (3.0 * n_f)).powf(0.2))
}

/// Fit a duration pmf to observed sojourn times.
///
/// The Gaussian-kernel estimate `(1/nh) sum_i phi((m - x_i)/h)` is evaluated
/// at m = 1..=dmax, floored at 1e-12, and renormalized.
pub fn fit_duration_density(samples: &[u32], dmax: u32) -> Result<DurationDensity> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("duration samples"));
    }
    let max_sample = *samples.iter().max().expect("nonempty");
    if dmax < max_sample {
        return Err(Error::InvalidArgument {
            what: "dmax",
            detail: format!("must cover the largest sample ({max_sample}), got {dmax}"),
        });
    }
    let as_f64: Vec<f64> = samples.iter().map(|&x| f64::from(x)).collect();
    let h = silverman_bandwidth(&as_f64)?;
    let norm = 1.0 / ((2.0 * core::f64::consts::PI).sqrt() * h * samples.len() as f64);

    let mut pmf: Vec<f64> = (1..=dmax)
        .map(|m| {
            let m = f64::from(m);
            let density: f64 = as_f64
                .iter()
                .map(|&x| {
                    let z = (m - x) / h;
                    (-0.5 * z * z).exp()
                })
                .sum();
            (density * norm).max(PMF_FLOOR)
        })
        .collect();
    let total: f64 = pmf.iter().sum();
    for p in &mut pmf {
        *p /= total;
    }
    Ok(DurationDensity {
        sample_count: samples.len(),
        bandwidth: h,
        dmax,
        pmf,
    })
}

/// Sojourn probability `p_self^(m-1) * (1 - p_self)` of an ordinary HMM
/// whose state self-transitions with probability `p_self`.
pub fn geometric_duration_pmf(p_self: f64, m: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&p_self) {
        return Err(Error::InvalidArgument {
            what: "p_self",
            detail: format!("must lie in [0, 1), got {p_self}"),
        });
    }
    if m == 0 {
        return Err(Error::InvalidArgument {
            what: "m",
            detail: "duration must be at least 1".to_string(),
        });
    }
    Ok(p_self.powf(f64::from(m - 1)) * (1.0 - p_self))
}

#[cfg(test)]
mod tests {
    use super::*;

    // 99 ones and a single 11 give a sample standard deviation of exactly 1.
    fn unit_sigma_samples() -> Vec<f64> {
        let mut s = vec![1.0; 99];
        s.push(11.0);
        s
    }

    #[test]
    fn bandwidth_matches_formula_at_unit_sigma() {
        let h = silverman_bandwidth(&unit_sigma_samples()).unwrap();
        // (4/300)^(1/5) evaluated at high precision.
        assert!((h - 0.421684606342750).abs() < 1e-12);
    }

    #[test]
    fn bandwidth_degenerate_cases_fall_back() {
        assert_eq!(silverman_bandwidth(&[3.0, 3.0, 3.0]).unwrap(), 0.5);
        assert_eq!(silverman_bandwidth(&[7.0]).unwrap(), 0.5);
        assert!(silverman_bandwidth(&[]).is_err());
    }

    #[test]
    fn kde_peaks_at_the_point_mass() {
        let d = fit_duration_density(&[3, 3, 3, 3], 10).unwrap();
        assert_eq!(d.mode(), 3);
        let sum: f64 = d.pmf_values().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        for m in 1..=10 {
            assert!(d.pmf(m) > 0.0);
        }
        assert_eq!(d.pmf(11), 0.0);
        assert_eq!(d.pmf(0), 0.0);
    }

    #[test]
    fn kde_rejects_support_smaller_than_samples() {
        assert!(fit_duration_density(&[3, 9], 8).is_err());
        assert!(fit_duration_density(&[], 8).is_err());
    }

    #[test]
    fn geometric_examples() {
        assert!((geometric_duration_pmf(0.8, 1).unwrap() - 0.2).abs() < 1e-12);
        assert!((geometric_duration_pmf(0.8, 2).unwrap() - 0.16).abs() < 1e-12);
        assert!(geometric_duration_pmf(1.0, 1).is_err());
        assert!(geometric_duration_pmf(-0.1, 1).is_err());
        assert!(geometric_duration_pmf(0.8, 0).is_err());
    }

    #[test]
    fn geometric_partial_sum_and_mean() {
        let mut sum = 0.0;
        let mut mean = 0.0;
        for m in 1..=500u32 {
            let p = geometric_duration_pmf(0.8, m).unwrap();
            sum += p;
            mean += f64::from(m) * p;
        }
        assert!((sum - 1.0).abs() < 1e-9);
        assert!((mean - 5.0).abs() < 1e-6);
    }

    #[test]
    fn geometric_is_monotone_decreasing() {
        for &p_self in &[0.0, 0.3, 0.8, 0.99] {
            let mut prev = f64::INFINITY;
            for m in 1..=50 {
                let p = geometric_duration_pmf(p_self, m).unwrap();
                assert!(p <= prev);
                prev = p;
            }
        }
    }
}
