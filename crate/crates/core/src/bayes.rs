//! Posterior inference for φ under four priors.
//!
//! With known innovation variance σ², the conditional likelihood is a
//! Gaussian kernel in φ with precision S_xx/σ² and centre S_xy/S_xx, where
//! S_xy = Σ y_t y_{t−1} and S_xx = Σ y²_{t−1}. Combining it with a normal
//! prior N(d, σ_φ²) gives precision f = S_xx/σ² + 1/σ_φ² and location e/f
//! with e = S_xy/σ² + d/σ_φ². Under the truncated-normal prior the
//! posterior keeps the same kernel restricted to [−1, 1].

use std::fmt;

use crate::ar1::TimeSeries;
use crate::error::{invalid, Error, Result};
use crate::estimators::{EstimatorResult, Method};
use crate::truncnorm::{std_normal_cdf, std_normal_quantile, TruncatedNormal};

pub const DEFAULT_PROB: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PriorKind {
    Jeffreys,
    GPrior,
    NaturalConjugate,
    TruncatedNormal,
}

impl PriorKind {
    /// Column order used in every coverage table.
    pub const ALL: [PriorKind; 4] = [
        PriorKind::Jeffreys,
        PriorKind::GPrior,
        PriorKind::NaturalConjugate,
        PriorKind::TruncatedNormal,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PriorKind::Jeffreys => "Jeffreys",
            PriorKind::GPrior => "g",
            PriorKind::NaturalConjugate => "NC",
            PriorKind::TruncatedNormal => "TN",
        }
    }

    /// Whether the prior takes its hyperparameters from a training sample.
    pub fn is_trained(self) -> bool {
        matches!(self, PriorKind::NaturalConjugate | PriorKind::TruncatedNormal)
    }
}

impl fmt::Display for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A prior on φ together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorSpec {
    /// N(d, σ_φ²) truncated to [−1, 1].
    TruncatedNormal { d: f64, sigma_phi2: f64 },
    /// Flat on φ.
    Jeffreys,
    /// Zellner's g prior N(location, g σ² / S_xx). `g = None` selects the
    /// unit-information choice g = T.
    GPrior { g: Option<f64>, location: f64 },
    /// Untruncated N(d, σ_φ²).
    NaturalConjugate { d: f64, sigma_phi2: f64 },
}

impl PriorSpec {
    pub fn truncated_normal(d: f64, sigma_phi2: f64) -> Result<Self> {
        check_normal_hyper(d, sigma_phi2)?;
        Ok(PriorSpec::TruncatedNormal { d, sigma_phi2 })
    }

    pub fn natural_conjugate(d: f64, sigma_phi2: f64) -> Result<Self> {
        check_normal_hyper(d, sigma_phi2)?;
        Ok(PriorSpec::NaturalConjugate { d, sigma_phi2 })
    }

    pub fn g_prior(g: Option<f64>, location: f64) -> Result<Self> {
        if let Some(g) = g {
            if !(g > 0.0 && g.is_finite()) {
                return Err(invalid("g", g, "must be positive and finite"));
            }
        }
        if !location.is_finite() {
            return Err(invalid("location", location, "must be finite"));
        }
        Ok(PriorSpec::GPrior { g, location })
    }

    pub fn kind(&self) -> PriorKind {
        match self {
            PriorSpec::TruncatedNormal { .. } => PriorKind::TruncatedNormal,
            PriorSpec::Jeffreys => PriorKind::Jeffreys,
            PriorSpec::GPrior { .. } => PriorKind::GPrior,
            PriorSpec::NaturalConjugate { .. } => PriorKind::NaturalConjugate,
        }
    }

    /// Same family with new normal hyperparameters; other kinds are returned
    /// unchanged.
    pub fn with_hyperparameters(self, d: f64, sigma_phi2: f64) -> Self {
        match self {
            PriorSpec::TruncatedNormal { .. } => PriorSpec::TruncatedNormal { d, sigma_phi2 },
            PriorSpec::NaturalConjugate { .. } => PriorSpec::NaturalConjugate { d, sigma_phi2 },
            other => other,
        }
    }
}

fn check_normal_hyper(d: f64, sigma_phi2: f64) -> Result<()> {
    if !d.is_finite() {
        return Err(invalid("d", d, "must be finite"));
    }
    if !(sigma_phi2 > 0.0 && sigma_phi2.is_finite()) {
        return Err(invalid("sigma_phi2", sigma_phi2, "must be positive and finite"));
    }
    Ok(())
}

fn check_sigma_eps2(sigma_eps2: f64) -> Result<()> {
    if sigma_eps2 > 0.0 && sigma_eps2.is_finite() {
        Ok(())
    } else {
        Err(invalid("sigma_eps2", sigma_eps2, "must be positive and finite"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosteriorFamily {
    TruncatedNormalPosterior,
    NormalPosterior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PosteriorDist {
    Truncated(TruncatedNormal),
    Normal { mean: f64, variance: f64 },
}

impl PosteriorDist {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            PosteriorDist::Truncated(tn) => tn.cdf(x),
            PosteriorDist::Normal { mean, variance } => std_normal_cdf((x - mean) / variance.sqrt()),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            PosteriorDist::Truncated(tn) => tn.pdf(x),
            PosteriorDist::Normal { mean, variance } => {
                let z = (x - mean) / variance.sqrt();
                crate::truncnorm::std_normal_pdf(z) / variance.sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorSummary {
    pub prior: PriorKind,
    pub family: PosteriorFamily,
    pub mean: f64,
    pub variance: f64,
    pub dist: PosteriorDist,
}

impl PosteriorSummary {
    pub fn from_truncated(prior: PriorKind, tn: TruncatedNormal) -> Self {
        Self {
            prior,
            family: PosteriorFamily::TruncatedNormalPosterior,
            mean: tn.mean(),
            variance: tn.variance(),
            dist: PosteriorDist::Truncated(tn),
        }
    }

    pub fn normal(prior: PriorKind, mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) || !mean.is_finite() {
            return Err(Error::Numerical(format!(
                "{prior} posterior has mean {mean}, variance {variance}"
            )));
        }
        Ok(Self {
            prior,
            family: PosteriorFamily::NormalPosterior,
            mean,
            variance,
            dist: PosteriorDist::Normal { mean, variance },
        })
    }
}

/// Posterior location numerator `e` and precision `f`.
pub fn compute_ef(series: &TimeSeries, sigma_eps2: f64, d: f64, sigma_phi2: f64) -> Result<(f64, f64)> {
    check_sigma_eps2(sigma_eps2)?;
    check_normal_hyper(d, sigma_phi2)?;
    let sums = series.lag_sums();
    let e = sums.cross / sigma_eps2 + d / sigma_phi2;
    let f = sums.lagged_sq / sigma_eps2 + 1.0 / sigma_phi2;
    Ok((e, f))
}

/// Posterior of φ under the truncated-normal prior: N(e/f, 1/f) restricted
/// to [−1, 1].
pub fn posterior_tn(series: &TimeSeries, sigma_eps2: f64, d: f64, sigma_phi2: f64) -> Result<TruncatedNormal> {
    let (e, f) = compute_ef(series, sigma_eps2, d, sigma_phi2)?;
    TruncatedNormal::on_unit_interval(e / f, (1.0 / f).sqrt())
}

/// Posterior mean under the truncated-normal prior (squared-error loss).
pub fn bayes_estimator(series: &TimeSeries, sigma_eps2: f64, d: f64, sigma_phi2: f64) -> Result<EstimatorResult> {
    let post = posterior_tn(series, sigma_eps2, d, sigma_phi2)?;
    EstimatorResult::new(Method::Be, post.mean())
}

pub fn posterior_for_prior(series: &TimeSeries, sigma_eps2: f64, prior: &PriorSpec) -> Result<PosteriorSummary> {
    check_sigma_eps2(sigma_eps2)?;
    let kind = prior.kind();
    match *prior {
        PriorSpec::TruncatedNormal { d, sigma_phi2 } => Ok(PosteriorSummary::from_truncated(
            kind,
            posterior_tn(series, sigma_eps2, d, sigma_phi2)?,
        )),
        PriorSpec::NaturalConjugate { d, sigma_phi2 } => {
            let (e, f) = compute_ef(series, sigma_eps2, d, sigma_phi2)?;
            PosteriorSummary::normal(kind, e / f, 1.0 / f)
        }
        PriorSpec::Jeffreys => {
            let sums = series.lag_sums();
            if sums.lagged_sq <= 0.0 {
                return Err(Error::Degenerate("Jeffreys posterior needs a nonzero sum of squared lags"));
            }
            PosteriorSummary::normal(kind, sums.cross / sums.lagged_sq, sigma_eps2 / sums.lagged_sq)
        }
        PriorSpec::GPrior { g, location } => {
            let sums = series.lag_sums();
            if sums.lagged_sq <= 0.0 {
                return Err(Error::Degenerate("g-prior posterior needs a nonzero sum of squared lags"));
            }
            let g = g.unwrap_or(series.len() as f64);
            let shrink = g / (1.0 + g);
            let ls = sums.cross / sums.lagged_sq;
            let mean = shrink * ls + (1.0 - shrink) * location;
            PosteriorSummary::normal(kind, mean, shrink * sigma_eps2 / sums.lagged_sq)
        }
    }
}

/// Interval `(m − h, m + h)` about the posterior mean holding posterior
/// mass `prob`.
pub fn centered_interval(posterior: &PosteriorSummary, prob: f64) -> Result<(f64, f64)> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(invalid("prob", prob, "must lie in (0, 1)"));
    }
    let m = posterior.mean;
    let h = match posterior.dist {
        PosteriorDist::Normal { variance, .. } => std_normal_quantile(0.5 * (1.0 + prob))? * variance.sqrt(),
        PosteriorDist::Truncated(tn) => {
            let mass = |h: f64| tn.cdf(m + h) - tn.cdf(m - h);
            let (mut lo, mut hi) = (0.0, (m - tn.lower()).max(tn.upper() - m));
            // Mass is continuous and nondecreasing in h; bisect to full precision.
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if mass(mid) < prob {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        }
    };
    Ok((m - h, m + h))
}

/// Share of replications, in percent, whose interval covered the truth.
pub fn coverage_percentage(hits: usize, total: usize) -> Result<f64> {
    if total == 0 {
        return Err(invalid("total", 0.0, "must be positive"));
    }
    if hits > total {
        return Err(invalid("hits", hits as f64, "cannot exceed total"));
    }
    Ok(hits as f64 / total as f64 * 100.0)
}
