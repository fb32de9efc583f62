//! Zero-mean AR(1) process: y_t = φ y_{t−1} + ε_t with ε_t ~ N(0, σ²).

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::rng::{standard_normal, stream};

/// Observations discarded ahead of every simulated series by default.
pub const DEFAULT_BURN_IN: usize = 200;

/// Largest |φ| at which the exact likelihood is evaluated.
pub const PHI_EDGE: f64 = 1.0 - 1e-8;

/// Ordered, finite observations y_1..y_T with T ≥ 2.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SeriesTooShort {
                needed: 2,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// First `n` observations.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n > self.len() {
            return Err(Error::SeriesTooShort {
                needed: n,
                got: self.len(),
            });
        }
        Self::new(self.values[..n].to_vec())
    }

    /// Observations from index `start` (0-based) to the end.
    pub fn suffix(&self, start: usize) -> Result<Self> {
        Self::new(self.values.get(start..).unwrap_or_default().to_vec())
    }

    /// Lagged cross-products `(Σ y_t y_{t−1}, Σ y²_{t−1})` over t = 2..T.
    pub fn lag_sums(&self) -> LagSums {
        let (cross, lagged_sq) = self
            .values
            .windows(2)
            .fold((0.0, 0.0), |(c, s), w| (c + w[1] * w[0], s + w[0] * w[0]));
        LagSums { cross, lagged_sq }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }
}

/// Sufficient statistics of the conditional likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagSums {
    /// Σ_{t=2..T} y_t y_{t−1}
    pub cross: f64,
    /// Σ_{t=2..T} y²_{t−1}
    pub lagged_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Params {
    pub phi: f64,
    pub sigma_eps2: f64,
}

impl Ar1Params {
    pub fn new(phi: f64, sigma_eps2: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(invalid("phi", phi, "must be finite"));
        }
        check_variance(sigma_eps2)?;
        Ok(Self { phi, sigma_eps2 })
    }

    /// Stationary variance σ² / (1 − φ²).
    pub fn stationary_variance(&self) -> f64 {
        self.sigma_eps2 / (1.0 - self.phi * self.phi)
    }
}

fn check_variance(sigma_eps2: f64) -> Result<()> {
    if sigma_eps2 > 0.0 && sigma_eps2.is_finite() {
        Ok(())
    } else {
        Err(invalid("sigma_eps2", sigma_eps2, "must be positive and finite"))
    }
}

/// Simulates `burn_in + length` values from y_0 = 0 and keeps the last
/// `length`. Innovations come from the seeded stream in [`crate::rng`].
pub fn simulate(params: Ar1Params, length: usize, burn_in: usize, seed: u64) -> Result<TimeSeries> {
    if params.phi.abs() >= 1.0 {
        return Err(Error::Nonstationary(params.phi.abs()));
    }
    if length < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: length,
        });
    }
    let sd = params.sigma_eps2.sqrt();
    let mut rng = stream(seed);
    let mut y = 0.0;
    let mut values = Vec::with_capacity(length);
    for t in 0..burn_in + length {
        y = params.phi * y + sd * standard_normal(&mut rng);
        if t >= burn_in {
            values.push(y);
        }
    }
    TimeSeries::new(values)
}

/// Log of the conditional likelihood, summing t = 2..T.
pub fn conditional_log_likelihood(series: &TimeSeries, phi: f64, sigma_eps2: f64) -> Result<f64> {
    check_variance(sigma_eps2)?;
    Ok(conditional_unchecked(series, phi, sigma_eps2))
}

fn conditional_unchecked(series: &TimeSeries, phi: f64, sigma_eps2: f64) -> f64 {
    let ssr: f64 = series
        .values
        .windows(2)
        .map(|w| {
            let r = w[1] - phi * w[0];
            r * r
        })
        .sum();
    let n = (series.len() - 1) as f64;
    -0.5 * n * (2.0 * PI * sigma_eps2).ln() - ssr / (2.0 * sigma_eps2)
}

/// Conditional log-likelihood plus the stationary N(0, σ²/(1 − φ²)) density
/// of y_1.
pub fn exact_log_likelihood(series: &TimeSeries, phi: f64, sigma_eps2: f64) -> Result<f64> {
    check_variance(sigma_eps2)?;
    if !(phi.abs() < 1.0) {
        return Err(Error::Nonstationary(phi.abs()));
    }
    Ok(conditional_unchecked(series, phi, sigma_eps2) + initial_term(series.values[0], phi, sigma_eps2))
}

pub(crate) fn initial_term(y1: f64, phi: f64, sigma_eps2: f64) -> f64 {
    let one_minus = (1.0 - phi) * (1.0 + phi);
    -0.5 * (2.0 * PI * sigma_eps2 / one_minus).ln() - y1 * y1 * one_minus / (2.0 * sigma_eps2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    fn lag1_autocorr(x: &[f64]) -> f64 {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let num: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        let den: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
        num / den
    }

    #[test]
    fn rejects_bad_series() {
        assert!(TimeSeries::new(vec![1.0]).is_err());
        assert_eq!(
            TimeSeries::new(vec![1.0, f64::NAN, 2.0]),
            Err(Error::NonFinite(1))
        );
    }

    #[test]
    fn simulate_white_noise() {
        let s = simulate(Ar1Params::new(0.0, 1.0).unwrap(), 100_000, 200, 1).unwrap();
        assert_eq!(s.len(), 100_000);
        assert!(lag1_autocorr(s.values()).abs() < 0.01);
    }

    #[test]
    fn simulate_stationary_variance() {
        let p = Ar1Params::new(0.8, 1.0).unwrap();
        let s = simulate(p, 100_000, 200, 2).unwrap();
        let m = s.mean();
        let var = s.values().iter().map(|v| (v - m).powi(2)).sum::<f64>() / (s.len() - 1) as f64;
        assert!((var / p.stationary_variance() - 1.0).abs() < 0.05);
        // Effective sample size for the mean is T (1 − φ)/(1 + φ).
        let t_eff = s.len() as f64 * 0.2 / 1.8;
        assert!(m.abs() < 4.0 * (p.stationary_variance() / t_eff).sqrt());
    }

    #[test]
    fn simulate_is_deterministic_and_checks_stationarity() {
        let p = Ar1Params::new(0.5, 2.0).unwrap();
        assert_eq!(simulate(p, 50, 200, 9).unwrap(), simulate(p, 50, 200, 9).unwrap());
        assert_ne!(simulate(p, 50, 200, 9).unwrap(), simulate(p, 50, 200, 10).unwrap());
        let bad = Ar1Params::new(1.0, 1.0).unwrap();
        assert_eq!(simulate(bad, 50, 0, 1), Err(Error::Nonstationary(1.0)));
        assert!(simulate(p, 1, 0, 1).is_err());
    }

    #[test]
    fn burn_in_prefix_relation() {
        // The retained window is the tail of the longer run.
        let p = Ar1Params::new(0.3, 1.0).unwrap();
        let long = simulate(p, 60, 0, 4).unwrap();
        let short = simulate(p, 40, 20, 4).unwrap();
        assert_eq!(&long.values()[20..], short.values());
    }

    #[test]
    fn conditional_zero_series() {
        let ll = conditional_log_likelihood(&series(&[0.0, 0.0, 0.0]), 0.5, 1.0).unwrap();
        assert!((ll + 1.8378770664093453).abs() < 1e-12);
        assert!(conditional_log_likelihood(&series(&[0.0, 1.0]), 0.5, 0.0).is_err());
    }

    #[test]
    fn conditional_excludes_first_observation() {
        // Changing y_1 alters only the t = 2 residual.
        let a = conditional_log_likelihood(&series(&[0.0, 1.0, 2.0]), 0.0, 1.0).unwrap();
        let b = conditional_log_likelihood(&series(&[50.0, 1.0, 2.0]), 0.0, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn conditional_maximised_at_ls_ratio() {
        let s = series(&[0.3, -1.2, 0.4, 2.0, 1.1, -0.5, 0.9]);
        let sums = s.lag_sums();
        let best = sums.cross / sums.lagged_sq;
        let at_best = conditional_log_likelihood(&s, best, 1.0).unwrap();
        for i in -300..=300 {
            let phi = best + i as f64 * 0.005;
            assert!(conditional_log_likelihood(&s, phi, 1.0).unwrap() <= at_best + 1e-12);
        }
        // Strict concavity: negative second difference.
        let h = 1e-3;
        let f = |p| conditional_log_likelihood(&s, p, 1.0).unwrap();
        for &p in &[-0.7, 0.0, 0.4, 1.3] {
            assert!(f(p + h) - 2.0 * f(p) + f(p - h) < 0.0);
        }
    }

    #[test]
    fn exact_minus_conditional_is_initial_density() {
        let s = series(&[1.3, -0.2, 0.7, 0.1]);
        for &(phi, s2) in &[(0.0, 1.0), (0.6, 2.5), (-0.9, 0.3)] {
            let diff = exact_log_likelihood(&s, phi, s2).unwrap()
                - conditional_log_likelihood(&s, phi, s2).unwrap();
            let v: f64 = s2 / (1.0 - phi * phi);
            let expected = -0.5 * (2.0 * PI * v).ln() - 1.3f64.powi(2) / (2.0 * v);
            assert!((diff - expected).abs() < 1e-12);
        }
        assert!(exact_log_likelihood(&s, 1.0, 1.0).is_err());
        assert!(exact_log_likelihood(&s, PHI_EDGE, 1.0).unwrap().is_finite());
        assert!(exact_log_likelihood(&s, -PHI_EDGE, 1.0).unwrap().is_finite());
    }
}
