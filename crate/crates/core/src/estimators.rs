//! Frequentist point estimators of φ.

use std::fmt;

use crate::ar1::{conditional_log_likelihood, exact_log_likelihood, TimeSeries, PHI_EDGE};
use crate::error::{invalid, Error, Result};
use crate::optimize::golden_section_max;

pub const DEFAULT_TOL: f64 = 1e-8;
const PRESCAN: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Mme,
    Cls,
    Mle,
    Cmle,
    Be,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Mme, Method::Cls, Method::Mle, Method::Cmle, Method::Be];

    pub fn label(self) -> &'static str {
        match self {
            Method::Mme => "MME",
            Method::Cls => "CLS",
            Method::Mle => "MLE",
            Method::Cmle => "CMLE",
            Method::Be => "BE",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorResult {
    pub method: Method,
    pub estimate: f64,
}

impl EstimatorResult {
    pub fn new(method: Method, estimate: f64) -> Result<Self> {
        if !estimate.is_finite() {
            return Err(Error::Numerical(format!("{method} estimate is not finite")));
        }
        Ok(Self { method, estimate })
    }
}

/// Method of moments: lag-1 sample autocorrelation about the sample mean.
pub fn mme(series: &TimeSeries) -> Result<EstimatorResult> {
    let y = series.values();
    let mean = series.mean();
    let denom: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if denom <= 0.0 {
        return Err(Error::Degenerate("constant series has no autocorrelation"));
    }
    let num: f64 = y.windows(2).map(|w| (w[1] - mean) * (w[0] - mean)).sum();
    EstimatorResult::new(Method::Mme, num / denom)
}

/// Conditional least squares: regression of y_t on y_{t−1} through the
/// origin. Not restricted to (−1, 1).
pub fn cls(series: &TimeSeries) -> Result<EstimatorResult> {
    let sums = series.lag_sums();
    if sums.lagged_sq <= 0.0 {
        return Err(Error::Degenerate("sum of squared lagged values is zero"));
    }
    EstimatorResult::new(Method::Cls, sums.cross / sums.lagged_sq)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(invalid("tol", tol, "must be positive"))
    }
}

/// Exact maximum likelihood over (−1, 1), including the stationary density
/// of the first observation.
pub fn mle(series: &TimeSeries, sigma_eps2: f64, tol: f64) -> Result<EstimatorResult> {
    check_tol(tol)?;
    // Validates sigma_eps2 once up front.
    exact_log_likelihood(series, 0.0, sigma_eps2)?;
    let objective = |phi: f64| exact_log_likelihood(series, phi, sigma_eps2).unwrap_or(f64::NEG_INFINITY);
    let phi = golden_section_max(objective, -PHI_EDGE, PHI_EDGE, tol, PRESCAN);
    EstimatorResult::new(Method::Mle, phi)
}

/// Numerical maximiser of the conditional likelihood. The search starts on
/// [−1.5, 1.5] and widens while the optimum sits on the boundary.
pub fn cmle(series: &TimeSeries, sigma_eps2: f64, tol: f64) -> Result<EstimatorResult> {
    check_tol(tol)?;
    if series.lag_sums().lagged_sq <= 0.0 {
        return Err(Error::Degenerate("sum of squared lagged values is zero"));
    }
    conditional_log_likelihood(series, 0.0, sigma_eps2)?;
    // Same argmax as the conditional log-likelihood, minus the additive
    // constants that would otherwise swamp the curvature of a flat objective.
    let y = series.values();
    let objective = |phi: f64| -y.windows(2).map(|w| (w[1] - phi * w[0]).powi(2)).sum::<f64>();
    let mut half_width = 1.5;
    loop {
        let phi = golden_section_max(&objective, -half_width, half_width, tol, PRESCAN);
        if phi.abs() < half_width - tol || half_width > 1e12 {
            return EstimatorResult::new(Method::Cmle, phi);
        }
        half_width *= 4.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ar1::{simulate, Ar1Params};

    fn series(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn mme_examples() {
        let r = mme(&series(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0])).unwrap();
        assert!((r.estimate + 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.method, Method::Mme);
        assert!(matches!(mme(&series(&[2.0, 2.0, 2.0])), Err(Error::Degenerate(_))));

        let wn = simulate(Ar1Params::new(0.0, 1.0).unwrap(), 100_000, 0, 3).unwrap();
        assert!(mme(&wn).unwrap().estimate.abs() < 0.01);
    }

    #[test]
    fn cls_examples() {
        assert_eq!(cls(&series(&[0.0, 1.0, 0.0, 1.0, 0.0])).unwrap().estimate, 0.0);
        assert_eq!(cls(&series(&[1.0, 2.0, 4.0, 8.0])).unwrap().estimate, 2.0);
        assert!(cls(&series(&[0.0, 0.0, 5.0])).is_err());
    }

    #[test]
    fn cmle_matches_cls_even_outside_unit_interval() {
        let explosive = series(&[1.0, 2.0, 4.0, 8.0]);
        assert!((cmle(&explosive, 1.0, DEFAULT_TOL).unwrap().estimate - 2.0).abs() < 1e-7);
        let s = series(&[0.0, 1.0, 0.0, 1.0, 0.0]);
        assert!(cmle(&s, 1.0, DEFAULT_TOL).unwrap().estimate.abs() < 1e-7);
    }

    #[test]
    fn mle_local_max_certificate() {
        let s = simulate(Ar1Params::new(0.6, 1.0).unwrap(), 40, 200, 5).unwrap();
        let tol = DEFAULT_TOL;
        let phi = mle(&s, 1.0, tol).unwrap().estimate;
        let ll = |p| exact_log_likelihood(&s, p, 1.0).unwrap();
        assert!(ll(phi) >= ll(phi + 10.0 * tol));
        assert!(ll(phi) >= ll(phi - 10.0 * tol));
        assert!(phi.abs() < 1.0);
    }

    #[test]
    fn mle_near_zero_for_white_noise() {
        let s = simulate(Ar1Params::new(0.0, 1.0).unwrap(), 10_000, 200, 8).unwrap();
        assert!(mle(&s, 1.0, DEFAULT_TOL).unwrap().estimate.abs() < 0.03);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let s = series(&[0.5, 0.2, 0.1]);
        assert!(mle(&s, 1.0, 0.0).is_err());
        assert!(cmle(&s, 1.0, -1.0).is_err());
        assert!(mle(&s, 0.0, 1e-8).is_err());
    }

    #[test]
    fn consistency_smoke() {
        for (i, &phi) in [-0.9, -0.5, 0.0, 0.5, 0.9].iter().enumerate() {
            let s = simulate(Ar1Params::new(phi, 1.0).unwrap(), 10_000, 200, 100 + i as u64).unwrap();
            for est in [
                mme(&s).unwrap(),
                cls(&s).unwrap(),
                mle(&s, 1.0, DEFAULT_TOL).unwrap(),
                cmle(&s, 1.0, DEFAULT_TOL).unwrap(),
            ] {
                assert!((est.estimate - phi).abs() < 0.05, "{} at phi={phi}", est.method);
            }
        }
    }
}
