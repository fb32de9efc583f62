//! Residual diagnostics and the Phillips–Perron unit-root test.

use crate::ar1::TimeSeries;
use crate::error::{Error, Result};
use crate::truncnorm::{std_normal_cdf, std_normal_sf, quantile_unchecked};

// ---------------------------------------------------------------------------
// Phillips–Perron

/// Phillips–Perron statistics at one Newey–West truncation lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitRootResult {
    pub lag: usize,
    pub rho_stat: f64,
    pub tau_stat: f64,
    /// Approximate P(Z_ρ < rho_stat) under the unit-root null.
    pub rho_p: f64,
    /// Approximate P(Z_τ < tau_stat) under the unit-root null.
    pub tau_p: f64,
}

/// Lower and upper tail probabilities of the tabulated percentiles.
const DF_PROBS: [f64; 8] = [0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99];
/// Sample sizes of the table rows; the last row is the limit.
const DF_SIZES: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, f64::INFINITY];

/// Percentiles of n(ρ̂ − 1), regression with intercept (Fuller).
const DF_RHO_MEAN: [[f64; 8]; 6] = [
    [-17.2, -14.6, -12.5, -10.2, -0.76, 0.01, 0.65, 1.40],
    [-18.9, -15.7, -13.3, -10.7, -0.81, -0.07, 0.53, 1.22],
    [-19.8, -16.3, -13.7, -11.0, -0.83, -0.10, 0.47, 1.14],
    [-20.3, -16.6, -14.0, -11.2, -0.84, -0.12, 0.43, 1.09],
    [-20.5, -16.8, -14.0, -11.2, -0.84, -0.13, 0.42, 1.06],
    [-20.7, -16.9, -14.1, -11.3, -0.85, -0.13, 0.41, 1.04],
];

/// Percentiles of the studentized statistic, regression with intercept.
const DF_TAU_MEAN: [[f64; 8]; 6] = [
    [-3.75, -3.33, -3.00, -2.63, -0.37, 0.00, 0.34, 0.72],
    [-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66],
    [-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63],
    [-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62],
    [-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61],
    [-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60],
];

/// Percentiles for sample size `n`, linear in 1/n between table rows.
fn percentiles_at(table: &[[f64; 8]; 6], n: usize) -> [f64; 8] {
    let inv = 1.0 / n as f64;
    let inv_size = |i: usize| 1.0 / DF_SIZES[i];
    if inv >= inv_size(0) {
        return table[0];
    }
    let i = (1..DF_SIZES.len()).find(|&i| inv >= inv_size(i)).unwrap_or(DF_SIZES.len() - 1);
    let w = (inv_size(i - 1) - inv) / (inv_size(i - 1) - inv_size(i));
    let mut out = [0.0; 8];
    for (k, o) in out.iter_mut().enumerate() {
        *o = table[i - 1][k] + w * (table[i][k] - table[i - 1][k]);
    }
    out
}

/// Left-tail probability of `stat`: piecewise linear on the probit scale
/// through the tabulated percentiles, extrapolated from the outermost pair.
fn table_p_value(table: &[[f64; 8]; 6], n: usize, stat: f64) -> f64 {
    let q = percentiles_at(table, n);
    let z: Vec<f64> = DF_PROBS.iter().map(|&p| quantile_unchecked(p)).collect();
    let k = match q.iter().position(|&v| stat < v) {
        Some(0) => 0,
        Some(k) => k - 1,
        None => q.len() - 2,
    };
    let slope = (z[k + 1] - z[k]) / (q[k + 1] - q[k]);
    std_normal_cdf(z[k] + slope * (stat - q[k]))
}

/// Newey–West long-run variance with Bartlett weights.
fn long_run_variance(resid: &[f64], lag: usize) -> (f64, f64) {
    let n = resid.len() as f64;
    let autocov = |j: usize| resid[j..].iter().zip(resid).map(|(a, b)| a * b).sum::<f64>() / n;
    let gamma0 = autocov(0);
    let lrv = gamma0
        + 2.0
            * (1..=lag.min(resid.len() - 1))
                .map(|j| (1.0 - j as f64 / (lag as f64 + 1.0)) * autocov(j))
                .sum::<f64>();
    (gamma0, lrv)
}

/// Z_ρ and Z_τ of the regression y_t = μ + ρ y_{t−1} + u_t, one result per
/// Newey–West truncation lag 0..=max_lag.
pub fn phillips_perron(series: &TimeSeries, max_lag: usize) -> Result<Vec<UnitRootResult>> {
    if series.len() < max_lag + 10 {
        return Err(Error::SeriesTooShort {
            needed: max_lag + 10,
            got: series.len(),
        });
    }
    let y = series.values();
    let x = &y[..y.len() - 1];
    let z = &y[1..];
    let n = x.len();
    let nf = n as f64;
    let xm = x.iter().sum::<f64>() / nf;
    let zm = z.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Degenerate("constant series"));
    }
    let sxz: f64 = x.iter().zip(z).map(|(a, b)| (a - xm) * (b - zm)).sum();
    let rho = sxz / sxx;
    let mu = zm - rho * xm;
    let resid: Vec<f64> = x.iter().zip(z).map(|(a, b)| b - mu - rho * a).collect();
    let ssr: f64 = resid.iter().map(|u| u * u).sum();
    let s2 = ssr / (nf - 2.0);
    let se = (s2 / sxx).sqrt();
    if !(se > 0.0) {
        return Err(Error::Degenerate("perfect fit in the unit-root regression"));
    }
    let t_stat = (rho - 1.0) / se;

    (0..=max_lag)
        .map(|lag| {
            let (gamma0, lrv) = long_run_variance(&resid, lag);
            if !(lrv > 0.0) {
                return Err(Error::Numerical(format!("non-positive long-run variance at lag {lag}")));
            }
            let correction = lrv - gamma0;
            let rho_stat = nf * (rho - 1.0) - 0.5 * nf * nf * se * se / s2 * correction;
            let tau_stat = (gamma0 / lrv).sqrt() * t_stat - 0.5 * correction / lrv.sqrt() * nf * se / s2.sqrt();
            Ok(UnitRootResult {
                lag,
                rho_stat,
                tau_stat,
                rho_p: table_p_value(&DF_RHO_MEAN, n, rho_stat),
                tau_p: table_p_value(&DF_TAU_MEAN, n, tau_stat),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Residuals

/// e_t = y_t − φ̂ y_{t−1} for t = 2..T.
pub fn residuals(series: &TimeSeries, phi_hat: f64) -> Vec<f64> {
    series.values().windows(2).map(|w| w[1] - phi_hat * w[0]).collect()
}

// ---------------------------------------------------------------------------
// Normality

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalityTest {
    KolmogorovSmirnov,
    CramerVonMises,
    AndersonDarling,
}

impl NormalityTest {
    pub fn label(self) -> &'static str {
        match self {
            NormalityTest::KolmogorovSmirnov => "Kolmogorov-Smirnov",
            NormalityTest::CramerVonMises => "Cramer-von Mises",
            NormalityTest::AndersonDarling => "Anderson-Darling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityResult {
    pub test: NormalityTest,
    pub statistic: f64,
    /// Approximate p-value for a normal with estimated mean and variance.
    pub p_value: f64,
    /// False when the approximation was clipped at the edge of the range it
    /// was fitted on (p reported as 0 or 1).
    pub within_range: bool,
}

const MIN_NORMALITY_SAMPLE: usize = 8;

/// Kolmogorov–Smirnov (Lilliefors), Cramér–von Mises and Anderson–Darling
/// statistics of the standardized sample against N(0, 1).
pub fn normality_tests(sample: &[f64]) -> Result<Vec<NormalityResult>> {
    let n = sample.len();
    if n < MIN_NORMALITY_SAMPLE {
        return Err(Error::SeriesTooShort {
            needed: MIN_NORMALITY_SAMPLE,
            got: n,
        });
    }
    if let Some(i) = sample.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let sd = (sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Degenerate("zero-variance sample"));
    }
    let mut z: Vec<f64> = sample.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(f64::total_cmp);

    let d = ks_statistic(&z);
    let w2 = cvm_statistic(&z);
    let a2 = ad_statistic(&z);
    let (p_ks, ok_ks) = lilliefors_p(d, n);
    let (p_cvm, ok_cvm) = cvm_p(w2, n);
    let (p_ad, ok_ad) = ad_p(a2, n);
    Ok(vec![
        NormalityResult {
            test: NormalityTest::KolmogorovSmirnov,
            statistic: d,
            p_value: p_ks,
            within_range: ok_ks,
        },
        NormalityResult {
            test: NormalityTest::CramerVonMises,
            statistic: w2,
            p_value: p_cvm,
            within_range: ok_cvm,
        },
        NormalityResult {
            test: NormalityTest::AndersonDarling,
            statistic: a2,
            p_value: p_ad,
            within_range: ok_ad,
        },
    ])
}

fn ks_statistic(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = std_normal_cdf(x);
            (((i + 1) as f64 / n) - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

fn cvm_statistic(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    1.0 / (12.0 * n)
        + sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| (std_normal_cdf(x) - (2 * i + 1) as f64 / (2.0 * n)).powi(2))
            .sum::<f64>()
}

fn ad_statistic(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    let ln_cdf = |x: f64| std_normal_cdf(x).max(f64::MIN_POSITIVE).ln();
    let ln_sf = |x: f64| std_normal_sf(x).max(f64::MIN_POSITIVE).ln();
    let s: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (ln_cdf(sorted[i]) + ln_sf(sorted[n - 1 - i])))
        .sum();
    -(n as f64) - s / n as f64
}

/// Dallal–Wilkinson approximation below p = 0.1, Stephens' modified
/// statistic polynomial above.
fn lilliefors_p(d: f64, n: usize) -> (f64, bool) {
    let nf = n as f64;
    let (kd, nd) = if n <= 100 { (d, nf) } else { (d * (nf / 100.0).powf(0.49), 100.0) };
    let p = (-7.01256 * kd * kd * (nd + 2.78019) + 2.99587 * kd * (nd + 2.78019).sqrt() - 0.122119
        + 0.974598 / nd.sqrt()
        + 1.67997 / nd)
        .exp();
    if p <= 0.1 {
        return (p, true);
    }
    let kk = (nf.sqrt() - 0.01 + 0.85 / nf.sqrt()) * d;
    let poly = |c: [f64; 5]| c[0] + kk * (c[1] + kk * (c[2] + kk * (c[3] + kk * c[4])));
    if kk <= 0.302 {
        (1.0, false)
    } else if kk <= 0.5 {
        (poly([2.76773, -19.828315, 80.709644, -138.55152, 81.218052]), true)
    } else if kk <= 0.9 {
        (poly([-4.901232, 40.662806, -97.490286, 94.029866, -32.355711]), true)
    } else if kk <= 1.31 {
        (poly([6.198765, -19.558097, 23.186922, -12.234627, 2.423045]), true)
    } else {
        (0.0, false)
    }
}

/// Stephens' modification W²(1 + 0.5/n) with piecewise exponential tails.
fn cvm_p(w2: f64, n: usize) -> (f64, bool) {
    let w = w2 * (1.0 + 0.5 / n as f64);
    let p = if w < 0.0275 {
        1.0 - (-13.953 + 775.5 * w - 12542.61 * w * w).exp()
    } else if w < 0.051 {
        1.0 - (-5.903 + 179.546 * w - 1515.29 * w * w).exp()
    } else if w < 0.092 {
        (0.886 - 31.62 * w + 10.897 * w * w).exp()
    } else if w < 1.1 {
        (1.111 - 34.242 * w + 12.832 * w * w).exp()
    } else {
        return (0.0, false);
    };
    (p.clamp(0.0, 1.0), true)
}

/// Stephens' modification A²(1 + 0.75/n + 2.25/n²) with piecewise
/// exponential tails.
fn ad_p(a2: f64, n: usize) -> (f64, bool) {
    let nf = n as f64;
    let a = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = if a < 0.2 {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    } else if a < 0.34 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else if a < 0.6 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a < 153.467 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else {
        return (0.0, false);
    };
    (p.clamp(0.0, 1.0), true)
}
