//! Standard-normal and truncated-normal distribution primitives.
//!
//! The truncated normal is parameterised by the location `d` and scale
//! `sigma` of the untruncated parent together with the truncation points
//! `a < b`. Internally every quantity is evaluated on the standardized
//! interval `[alpha, beta] = [(a - d)/sigma, (b - d)/sigma]`. When both
//! standardized bounds sit on the same side of zero the normalizer is a
//! difference of two upper-tail probabilities, and all ratios are scaled by
//! the density at the bound nearest to zero so that posteriors concentrated
//! far outside `[a, b]` keep full relative precision.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::RngCore;
use libm::{erf, erfc};
use statrs::function::erf::erfc_inv;

use crate::error::{invalid, Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Standard normal distribution function Φ(x).
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper-tail probability 1 − Φ(x), accurate in relative terms for large x.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Inverse of the standard normal distribution function.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", p, "must lie in the open interval (0, 1)"));
    }
    Ok(quantile_unchecked(p))
}

pub(crate) fn quantile_unchecked(p: f64) -> f64 {
    if p > 0.5 {
        return -quantile_unchecked(1.0 - p);
    }
    let mut x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    // Halley steps on the lower tail, where Φ keeps relative precision.
    for _ in 0..2 {
        let dens = std_normal_pdf(x);
        if !(dens > 0.0) {
            break;
        }
        let r = (std_normal_cdf(x) - p) / dens;
        x -= r / (1.0 + 0.5 * x * r);
    }
    x
}

/// Mills ratio (1 − Φ(x)) / φ(x) for x ≥ 0.
fn mills_ratio(x: f64) -> f64 {
    if x < 30.0 {
        std_normal_sf(x) / std_normal_pdf(x)
    } else {
        // Asymptotic series; the truncation error is below 1e-17 at x = 30.
        let inv2 = 1.0 / (x * x);
        (1.0 - inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2 * (1.0 - 7.0 * inv2 * (1.0 - 9.0 * inv2)))))
            / x
    }
}

/// Where the standardized support lies relative to the parent mode.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Region {
    /// `alpha < 0 < beta`; `norm` is Φ(beta) − Φ(alpha).
    Central { norm: f64 },
    /// `alpha >= 0`; `scaled_norm` is (Φ(beta) − Φ(alpha)) / φ(alpha).
    Upper { scaled_norm: f64 },
    /// `beta <= 0`; mirror image of `Upper` with
    /// `scaled_norm` = (Φ(beta) − Φ(alpha)) / φ(beta).
    Lower { scaled_norm: f64 },
}

/// Normal distribution with location `d` and scale `sigma`, restricted and
/// renormalised to `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    d: f64,
    sigma: f64,
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
    region: Region,
}

impl TruncatedNormal {
    pub fn new(d: f64, sigma: f64, a: f64, b: f64) -> Result<Self> {
        if !d.is_finite() {
            return Err(invalid("d", d, "must be finite"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", sigma, "must be positive and finite"));
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(invalid("a", a, "truncation points must be finite"));
        }
        if !(a < b) {
            return Err(invalid("b", b, "upper truncation point must exceed the lower"));
        }
        let alpha = (a - d) / sigma;
        let beta = (b - d) / sigma;
        let region = if alpha >= 0.0 {
            Region::Upper {
                scaled_norm: tail_scaled_mass(alpha, beta),
            }
        } else if beta <= 0.0 {
            Region::Lower {
                scaled_norm: tail_scaled_mass(-beta, -alpha),
            }
        } else {
            Region::Central {
                norm: 0.5 * (erf(beta * FRAC_1_SQRT_2) - erf(alpha * FRAC_1_SQRT_2)),
            }
        };
        let ok = match region {
            Region::Central { norm } => norm > 0.0,
            Region::Upper { scaled_norm } | Region::Lower { scaled_norm } => scaled_norm > 0.0,
        };
        if !ok {
            return Err(Error::Numerical(format!(
                "truncated normal normalizer vanishes for d={d}, sigma={sigma}, [{a}, {b}]"
            )));
        }
        Ok(Self {
            d,
            sigma,
            a,
            b,
            alpha,
            beta,
            region,
        })
    }

    /// Truncated to the stationarity region `[-1, 1]`.
    pub fn on_unit_interval(d: f64, sigma: f64) -> Result<Self> {
        Self::new(d, sigma, -1.0, 1.0)
    }

    pub fn location(&self) -> f64 {
        self.d
    }

    pub fn scale(&self) -> f64 {
        self.sigma
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    /// Standardized truncation points `(alpha, beta)`.
    pub fn standardized_bounds(&self) -> (f64, f64) {
        (self.alpha, self.beta)
    }

    /// Φ(beta) − Φ(alpha). May underflow to zero for supports far in the
    /// tail even though every other method stays accurate.
    pub fn normalizer(&self) -> f64 {
        match self.region {
            Region::Central { norm } => norm,
            Region::Upper { scaled_norm } => scaled_norm * std_normal_pdf(self.alpha),
            Region::Lower { scaled_norm } => scaled_norm * std_normal_pdf(self.beta),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        let z = (x - self.d) / self.sigma;
        let std = match self.region {
            Region::Central { norm } => std_normal_pdf(z) / norm,
            Region::Upper { scaled_norm } => {
                (0.5 * (self.alpha - z) * (self.alpha + z)).exp() / scaled_norm
            }
            Region::Lower { scaled_norm } => {
                (0.5 * (self.beta - z) * (self.beta + z)).exp() / scaled_norm
            }
        };
        std / self.sigma
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return f64::NEG_INFINITY;
        }
        let z = (x - self.d) / self.sigma;
        let ln_std = match self.region {
            Region::Central { norm } => -0.5 * z * z - LN_SQRT_2PI - norm.ln(),
            Region::Upper { scaled_norm } => {
                0.5 * (self.alpha - z) * (self.alpha + z) - scaled_norm.ln()
            }
            Region::Lower { scaled_norm } => {
                0.5 * (self.beta - z) * (self.beta + z) - scaled_norm.ln()
            }
        };
        ln_std - self.sigma.ln()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x >= self.b {
            return 1.0;
        }
        let z = (x - self.d) / self.sigma;
        let p = match self.region {
            Region::Central { norm } => {
                0.5 * (erf(z * FRAC_1_SQRT_2) - erf(self.alpha * FRAC_1_SQRT_2)) / norm
            }
            Region::Upper { scaled_norm } => {
                tail_scaled_mass(self.alpha, z) / scaled_norm
            }
            Region::Lower { scaled_norm } => {
                1.0 - tail_scaled_mass(-self.beta, -z) / scaled_norm
            }
        };
        p.clamp(0.0, 1.0)
    }

    /// Inverse distribution function, solved by a bracketed Newton iteration
    /// that falls back to bisection whenever a step leaves the bracket.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("p", p, "must lie in [0, 1]"));
        }
        Ok(self.quantile_unchecked(p))
    }

    fn quantile_unchecked(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.a;
        }
        if p >= 1.0 {
            return self.b;
        }
        let (mut lo, mut hi) = (self.a, self.b);
        let mut x = self.initial_guess(p);
        for _ in 0..200 {
            let f = self.cdf(x) - p;
            if f.abs() <= 1e-14 {
                return x;
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            let dens = self.pdf(x);
            let newton = x - f / dens;
            x = if dens > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }

    fn initial_guess(&self, p: f64) -> f64 {
        match self.region {
            // Inverse of the untruncated cdf mapped into the support.
            Region::Central { norm } => {
                let target = std_normal_cdf(self.alpha) + p * norm;
                if target > 0.0 && target < 1.0 {
                    (self.d + self.sigma * quantile_unchecked(target)).clamp(self.a, self.b)
                } else {
                    0.5 * (self.a + self.b)
                }
            }
            // Exponential approximation of a far tail: density ∝ exp(-alpha·t).
            Region::Upper { .. } => {
                let rate = self.alpha.max(1.0) / self.sigma;
                (self.a - (1.0 - p).ln() / rate).min(self.b)
            }
            Region::Lower { .. } => {
                let rate = (-self.beta).max(1.0) / self.sigma;
                (self.b + p.ln() / rate).max(self.a)
            }
        }
    }

    /// Standardized moment ratios `(m, v)` with
    /// m = (φ(α) − φ(β)) / Z and v = (αφ(α) − βφ(β)) / Z.
    fn moment_ratios(&self) -> (f64, f64) {
        match self.region {
            Region::Central { norm } => {
                let pa = std_normal_pdf(self.alpha);
                let pb = std_normal_pdf(self.beta);
                ((pa - pb) / norm, (self.alpha * pa - self.beta * pb) / norm)
            }
            Region::Upper { scaled_norm } => {
                let ratio = (0.5 * (self.alpha - self.beta) * (self.alpha + self.beta)).exp();
                (
                    (1.0 - ratio) / scaled_norm,
                    (self.alpha - self.beta * ratio) / scaled_norm,
                )
            }
            Region::Lower { scaled_norm } => {
                // Reflect: X on [alpha, beta] is -Y with Y on [-beta, -alpha].
                let (lo, hi) = (-self.beta, -self.alpha);
                let ratio = (0.5 * (lo - hi) * (lo + hi)).exp();
                (
                    -(1.0 - ratio) / scaled_norm,
                    (lo - hi * ratio) / scaled_norm,
                )
            }
        }
    }

    /// d + σ (φ(α) − φ(β)) / (Φ(β) − Φ(α)).
    pub fn mean(&self) -> f64 {
        let (m, _) = self.moment_ratios();
        (self.d + self.sigma * m).clamp(self.a, self.b)
    }

    /// σ² [1 + (αφ(α) − βφ(β))/Z − ((φ(α) − φ(β))/Z)²].
    pub fn variance(&self) -> f64 {
        let (m, v) = self.moment_ratios();
        let var = self.sigma * self.sigma * (1.0 + v - m * m);
        var.max(f64::MIN_POSITIVE)
    }

    /// Inverse-cdf draw from one uniform variate.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile_unchecked(crate::rng::open_uniform(rng))
    }
}

/// (Φ(hi) − Φ(lo)) / φ(lo) for 0 ≤ lo ≤ hi.
fn tail_scaled_mass(lo: f64, hi: f64) -> f64 {
    let decay = (0.5 * (lo - hi) * (lo + hi)).exp();
    (mills_ratio(lo) - mills_ratio(hi) * decay).max(0.0)
}
