//! Seeded Monte Carlo studies: estimator comparison, absolute bias per
//! repeat, and interval coverage under the four priors.
//!
//! Replication `r` always draws its innovations from seed `base_seed + r`,
//! shared by every grid cell, and results are aggregated as integer counts
//! or in index order, so reports do not depend on thread scheduling.

use rayon::prelude::*;

use crate::ar1::{simulate, Ar1Params, TimeSeries, DEFAULT_BURN_IN};
use crate::bayes::{bayes_estimator, centered_interval, coverage_percentage, posterior_for_prior, PriorKind, PriorSpec, DEFAULT_PROB};
use crate::error::{invalid, Error, Result};
use crate::estimators::{cls, cmle, mle, mme, EstimatorResult, Method, DEFAULT_TOL};

/// Prior hyperparameter clamps for out-of-range training estimates.
pub const D_CLAMP: f64 = 0.999;
pub const SIGMA_PHI2_FLOOR: f64 = 1e-4;

/// Training prefix length `max(min_count, ceil(fraction · T))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingRule {
    pub min_count: usize,
    pub fraction: f64,
}

impl Default for TrainingRule {
    fn default() -> Self {
        Self {
            min_count: 10,
            fraction: 0.10,
        }
    }
}

impl TrainingRule {
    pub fn prefix_len(&self, total: usize) -> usize {
        self.min_count.max((self.fraction * total as f64).ceil() as usize)
    }
}

/// Which observations feed the likelihood of the trained (TN, NC) priors
/// and of the Bayes estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingUse {
    /// Likelihood uses the observations after the training prefix (the last
    /// prefix value enters only as the first lag).
    HoldOut,
    /// Likelihood reuses the whole series, prefix included.
    Reuse,
}

impl TrainingUse {
    pub fn label(self) -> &'static str {
        match self {
            TrainingUse::HoldOut => "holdout",
            TrainingUse::Reuse => "reuse",
        }
    }
}

/// Hyperparameters `(d, σ_φ²)` estimated from the training prefix: the CLS
/// estimate clamped to ±0.999 and its sampling variance σ²/Σ y²_{t−1},
/// floored at 1e-4.
pub fn training_hyperparams(series: &TimeSeries, sigma_eps2: f64) -> Result<(f64, f64)> {
    training_hyperparams_with(series, sigma_eps2, &TrainingRule::default())
}

pub fn training_hyperparams_with(series: &TimeSeries, sigma_eps2: f64, rule: &TrainingRule) -> Result<(f64, f64)> {
    if !(sigma_eps2 > 0.0 && sigma_eps2.is_finite()) {
        return Err(invalid("sigma_eps2", sigma_eps2, "must be positive and finite"));
    }
    let m = rule.prefix_len(series.len());
    if series.len() < m + 2 {
        return Err(Error::SeriesTooShort {
            needed: m + 2,
            got: series.len(),
        });
    }
    let prefix = series.prefix(m)?;
    let sums = prefix.lag_sums();
    if sums.lagged_sq <= 0.0 {
        return Err(Error::Degenerate("training prefix has zero sum of squared lags"));
    }
    let d = (sums.cross / sums.lagged_sq).clamp(-D_CLAMP, D_CLAMP);
    let sigma_phi2 = (sigma_eps2 / sums.lagged_sq).max(SIGMA_PHI2_FLOOR);
    Ok((d, sigma_phi2))
}

/// Hyperparameters plus the part of the series the trained posterior sees.
pub fn trained_split(
    series: &TimeSeries,
    sigma_eps2: f64,
    rule: &TrainingRule,
    usage: TrainingUse,
) -> Result<((f64, f64), TimeSeries)> {
    let hyper = training_hyperparams_with(series, sigma_eps2, rule)?;
    let data = match usage {
        TrainingUse::Reuse => series.clone(),
        TrainingUse::HoldOut => series.suffix(rule.prefix_len(series.len()) - 1)?,
    };
    Ok((hyper, data))
}

/// Everything a study needs; the presets mirror the three studies.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub phi_grid: Vec<f64>,
    pub lengths: Vec<usize>,
    pub replications: usize,
    pub burn_in: usize,
    pub sigma_eps2: f64,
    pub base_seed: u64,
    pub priors: Vec<PriorSpec>,
    pub training: TrainingRule,
    pub training_use: TrainingUse,
    /// Posterior mass of the centered interval.
    pub prob: f64,
    pub tol: f64,
}

pub const DEFAULT_SEED: u64 = 20_190_601;

impl SimulationConfig {
    fn base(phi_grid: Vec<f64>, lengths: Vec<usize>, replications: usize) -> Self {
        Self {
            phi_grid,
            lengths,
            replications,
            burn_in: DEFAULT_BURN_IN,
            sigma_eps2: 1.0,
            base_seed: DEFAULT_SEED,
            priors: default_priors(),
            training: TrainingRule::default(),
            training_use: TrainingUse::HoldOut,
            prob: DEFAULT_PROB,
            tol: DEFAULT_TOL,
        }
    }

    /// φ ∈ {−0.9, −0.5, 0, 0.5, 0.9}, T ∈ {30, 100}, one run per cell.
    pub fn estimator_comparison() -> Self {
        Self::base(vec![-0.9, -0.5, 0.0, 0.5, 0.9], vec![30, 100], 1)
    }

    /// φ = 0.5, T = 30.
    pub fn bias_study() -> Self {
        Self::base(vec![0.5], vec![30], 1)
    }

    /// φ ∈ {±0.2, ±0.5, ±0.8}, n ∈ {30, 50, 100, 200, 500}, 500 replications.
    pub fn sensitivity() -> Self {
        Self::base(vec![-0.2, 0.2, -0.5, 0.5, -0.8, 0.8], vec![30, 50, 100, 200, 500], 500)
    }

    pub fn validate(&self) -> Result<()> {
        if self.phi_grid.is_empty() {
            return Err(Error::EmptyGrid("phi"));
        }
        if self.lengths.is_empty() {
            return Err(Error::EmptyGrid("lengths"));
        }
        if let Some(&phi) = self.phi_grid.iter().find(|p| !(p.abs() < 1.0)) {
            return Err(Error::Nonstationary(phi.abs()));
        }
        if self.replications == 0 {
            return Err(invalid("replications", 0.0, "must be at least 1"));
        }
        let min_len = self.training.prefix_len(0) + 2;
        if let Some(&n) = self.lengths.iter().find(|&&n| n < min_len) {
            return Err(Error::SeriesTooShort { needed: min_len, got: n });
        }
        if !(self.sigma_eps2 > 0.0 && self.sigma_eps2.is_finite()) {
            return Err(invalid("sigma_eps2", self.sigma_eps2, "must be positive and finite"));
        }
        if !(self.prob > 0.0 && self.prob < 1.0) {
            return Err(invalid("prob", self.prob, "must lie in (0, 1)"));
        }
        if !(self.training.fraction >= 0.0 && self.training.fraction < 1.0) {
            return Err(invalid("training fraction", self.training.fraction, "must lie in [0, 1)"));
        }
        if self.priors.is_empty() {
            return Err(Error::EmptyGrid("priors"));
        }
        Ok(())
    }

    pub fn seed_for(&self, replication: usize) -> u64 {
        self.base_seed.wrapping_add(replication as u64)
    }

    fn max_length(&self) -> usize {
        self.lengths.iter().copied().max().unwrap_or(0)
    }
}

/// One prior of each family; TN and NC hyperparameters are placeholders
/// replaced by the training estimates in every replication.
pub fn default_priors() -> Vec<PriorSpec> {
    vec![
        PriorSpec::Jeffreys,
        PriorSpec::GPrior { g: None, location: 0.0 },
        PriorSpec::NaturalConjugate { d: 0.0, sigma_phi2: 1.0 },
        PriorSpec::TruncatedNormal { d: 0.0, sigma_phi2: 1.0 },
    ]
}

/// How the Bayes estimator gets its prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeHyper {
    Fixed { d: f64, sigma_phi2: f64 },
    Trained { rule: TrainingRule, usage: TrainingUse },
}

/// The five estimates of φ, in [`Method::ALL`] order; each may fail on its
/// own.
pub fn estimate_all(series: &TimeSeries, sigma_eps2: f64, tol: f64, be: BeHyper) -> [Result<EstimatorResult>; 5] {
    let bayes = match be {
        BeHyper::Fixed { d, sigma_phi2 } => bayes_estimator(series, sigma_eps2, d, sigma_phi2),
        BeHyper::Trained { rule, usage } => trained_split(series, sigma_eps2, &rule, usage)
            .and_then(|((d, s2), data)| bayes_estimator(&data, sigma_eps2, d, s2)),
    };
    [
        mme(series),
        cls(series),
        mle(series, sigma_eps2, tol),
        cmle(series, sigma_eps2, tol),
        bayes,
    ]
}

/// Per-method aggregate of one (φ, T) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodCell {
    /// Mean estimate over successful replications, `None` if all failed.
    pub mean: Option<f64>,
    /// Mean of |estimate − φ| over successful replications.
    pub mean_abs_bias: Option<f64>,
    pub succeeded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub phi: f64,
    pub length: usize,
    /// Indexed like [`Method::ALL`].
    pub cells: [MethodCell; 5],
}

impl ComparisonRow {
    pub fn cell(&self, method: Method) -> &MethodCell {
        &self.cells[Method::ALL.iter().position(|&m| m == method).unwrap_or(0)]
    }
}

fn be_training(config: &SimulationConfig) -> BeHyper {
    BeHyper::Trained {
        rule: config.training,
        usage: config.training_use,
    }
}

/// Estimates every (φ, T) cell, averaging over `config.replications`
/// seeded series (a single run when `replications == 1`).
pub fn run_estimator_comparison(config: &SimulationConfig) -> Result<Vec<ComparisonRow>> {
    config.validate()?;
    let cells: Vec<(f64, usize)> = config
        .phi_grid
        .iter()
        .flat_map(|&phi| config.lengths.iter().map(move |&t| (phi, t)))
        .collect();
    cells
        .into_par_iter()
        .map(|(phi, length)| {
            let params = Ar1Params::new(phi, config.sigma_eps2)?;
            let mut sums = [(0.0, 0.0, 0usize); 5];
            for r in 0..config.replications {
                let series = simulate(params, length, config.burn_in, config.seed_for(r))?;
                let estimates = estimate_all(&series, config.sigma_eps2, config.tol, be_training(config));
                for (slot, est) in sums.iter_mut().zip(estimates) {
                    if let Ok(est) = est {
                        slot.0 += est.estimate;
                        slot.1 += (est.estimate - phi).abs();
                        slot.2 += 1;
                    }
                }
            }
            let cells = sums.map(|(sum, abs, k)| MethodCell {
                mean: (k > 0).then(|| sum / k as f64),
                mean_abs_bias: (k > 0).then(|| abs / k as f64),
                succeeded: k,
            });
            Ok(ComparisonRow { phi, length, cells })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasRow {
    pub repeat: usize,
    pub method: Method,
    /// |estimate − φ|, `None` when the estimator failed.
    pub abs_bias: Option<f64>,
}

/// Absolute bias of each estimator over `repeats` independent seeded runs
/// at the first φ and length of the config. Long format, ordered by repeat
/// then method.
pub fn run_bias_study(config: &SimulationConfig, repeats: usize) -> Result<Vec<BiasRow>> {
    config.validate()?;
    if repeats == 0 {
        return Err(invalid("repeats", 0.0, "must be at least 1"));
    }
    let phi = config.phi_grid[0];
    let length = config.lengths[0];
    let params = Ar1Params::new(phi, config.sigma_eps2)?;
    let per_repeat: Vec<Vec<BiasRow>> = (0..repeats)
        .into_par_iter()
        .map(|repeat| {
            let series = simulate(params, length, config.burn_in, config.seed_for(repeat))?;
            let estimates = estimate_all(&series, config.sigma_eps2, config.tol, be_training(config));
            Ok(Method::ALL
                .iter()
                .zip(estimates)
                .map(|(&method, est)| BiasRow {
                    repeat,
                    method,
                    abs_bias: est.ok().map(|e| (e.estimate - phi).abs()),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_repeat.into_iter().flatten().collect())
}

/// Coverage of one (prior, n, φ) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageCell {
    pub prior: PriorKind,
    pub length: usize,
    pub phi: f64,
    pub hits: usize,
    /// Replications that produced an interval (the denominator).
    pub total: usize,
    /// Replications dropped because the posterior could not be formed.
    pub excluded: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    /// Ordered by φ, then n, then prior, following the config.
    pub cells: Vec<CoverageCell>,
    pub replications_used: usize,
    pub prob: f64,
}

impl CoverageReport {
    pub fn get(&self, prior: PriorKind, length: usize, phi: f64) -> Option<&CoverageCell> {
        self.cells
            .iter()
            .find(|c| c.prior == prior && c.length == length && c.phi == phi)
    }
}

/// Outcome of one replication for one cell.
#[derive(Clone, Copy)]
enum Outcome {
    Hit,
    Miss,
    Failed,
}

fn replication_outcomes(config: &SimulationConfig, r: usize) -> Result<Vec<Outcome>> {
    let max_len = config.max_length();
    let mut out = Vec::with_capacity(config.phi_grid.len() * config.lengths.len() * config.priors.len());
    for &phi in &config.phi_grid {
        let params = Ar1Params::new(phi, config.sigma_eps2)?;
        let full = simulate(params, max_len, config.burn_in, config.seed_for(r))?;
        for &n in &config.lengths {
            let series = full.prefix(n)?;
            let trained = trained_split(&series, config.sigma_eps2, &config.training, config.training_use);
            for prior in &config.priors {
                let interval = if prior.kind().is_trained() {
                    trained.clone().and_then(|((d, s2), data)| {
                        let spec = prior.with_hyperparameters(d, s2);
                        posterior_for_prior(&data, config.sigma_eps2, &spec)
                    })
                } else {
                    posterior_for_prior(&series, config.sigma_eps2, prior)
                }
                .and_then(|post| centered_interval(&post, config.prob));
                out.push(match interval {
                    Ok((lo, hi)) if lo <= phi && phi <= hi => Outcome::Hit,
                    Ok(_) => Outcome::Miss,
                    Err(err) => {
                        log::warn!(
                            "replication {r}: {} prior failed at n={n}, phi={phi}: {err}",
                            prior.kind()
                        );
                        Outcome::Failed
                    }
                });
            }
        }
    }
    Ok(out)
}

/// Coverage percentage P of the centered interval for every
/// (prior, n, φ) cell.
pub fn run_sensitivity_study(config: &SimulationConfig) -> Result<CoverageReport> {
    config.validate()?;
    let width = config.phi_grid.len() * config.lengths.len() * config.priors.len();
    let counts = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            replication_outcomes(config, r).map(|outcomes| {
                outcomes
                    .into_iter()
                    .map(|o| match o {
                        Outcome::Hit => (1usize, 0usize, 0usize),
                        Outcome::Miss => (0, 1, 0),
                        Outcome::Failed => (0, 0, 1),
                    })
                    .collect::<Vec<_>>()
            })
        })
        .try_reduce(
            || vec![(0, 0, 0); width],
            |mut acc, next| {
                for (a, b) in acc.iter_mut().zip(next) {
                    a.0 += b.0;
                    a.1 += b.1;
                    a.2 += b.2;
                }
                Ok(acc)
            },
        )?;

    let mut cells = Vec::with_capacity(width);
    let mut idx = 0;
    for &phi in &config.phi_grid {
        for &length in &config.lengths {
            for prior in &config.priors {
                let (hits, misses, failed) = counts[idx];
                idx += 1;
                let total = hits + misses;
                let percent = if total > 0 {
                    coverage_percentage(hits, total)?
                } else {
                    f64::NAN
                };
                cells.push(CoverageCell {
                    prior: prior.kind(),
                    length,
                    phi,
                    hits,
                    total,
                    excluded: failed,
                    percent,
                });
            }
        }
    }
    Ok(CoverageReport {
        cells,
        replications_used: config.replications,
        prob: config.prob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn training_lengths() {
        let rule = TrainingRule::default();
        assert_eq!(rule.prefix_len(30), 10);
        assert_eq!(rule.prefix_len(100), 10);
        assert_eq!(rule.prefix_len(101), 11);
        assert_eq!(rule.prefix_len(500), 50);
    }

    #[test]
    fn training_clamps_explosive_prefix() {
        let mut v: Vec<f64> = (0..10).map(|i| 2f64.powi(i)).collect();
        v.extend([0.5, -0.3, 0.2]);
        let s = TimeSeries::new(v).unwrap();
        let (d, s2) = training_hyperparams(&s, 1.0).unwrap();
        assert_eq!(d, D_CLAMP);
        assert_eq!(s2, SIGMA_PHI2_FLOOR);
    }

    #[test]
    fn training_values_and_errors() {
        let v = vec![1.0, 0.5, -0.2, 0.3, 0.8, -1.0, 0.4, 0.1, -0.6, 0.9, 0.2, 0.3];
        let s = TimeSeries::new(v.clone()).unwrap();
        let (d, s2) = training_hyperparams(&s, 2.0).unwrap();
        let sxy: f64 = v[..10].windows(2).map(|w| w[0] * w[1]).sum();
        let sxx: f64 = v[..9].iter().map(|x| x * x).sum();
        assert!((d - sxy / sxx).abs() < 1e-15);
        assert!((s2 - 2.0 / sxx).abs() < 1e-15);

        let short = TimeSeries::new(v[..11].to_vec()).unwrap();
        assert!(matches!(training_hyperparams(&short, 1.0), Err(Error::SeriesTooShort { .. })));
        let mut zeros = vec![0.0; 10];
        zeros.extend([1.0, 2.0]);
        assert!(training_hyperparams(&TimeSeries::new(zeros).unwrap(), 1.0).is_err());
    }

    #[test]
    fn holdout_keeps_last_prefix_value_as_lag() {
        let v: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin()).collect();
        let s = TimeSeries::new(v.clone()).unwrap();
        let (_, data) = trained_split(&s, 1.0, &TrainingRule::default(), TrainingUse::HoldOut).unwrap();
        assert_eq!(data.values(), &v[9..]);
        let (_, data) = trained_split(&s, 1.0, &TrainingRule::default(), TrainingUse::Reuse).unwrap();
        assert_eq!(data.values(), &v[..]);
    }

    #[test]
    fn config_validation() {
        let mut c = SimulationConfig::estimator_comparison();
        assert!(c.validate().is_ok());
        c.phi_grid.clear();
        assert_eq!(c.validate(), Err(Error::EmptyGrid("phi")));
        let mut c = SimulationConfig::estimator_comparison();
        c.phi_grid.push(1.0);
        assert!(matches!(c.validate(), Err(Error::Nonstationary(_))));
        let mut c = SimulationConfig::estimator_comparison();
        c.lengths = vec![11];
        assert!(c.validate().is_err());
        let mut c = SimulationConfig::estimator_comparison();
        c.replications = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn comparison_is_deterministic() {
        let c = SimulationConfig::estimator_comparison();
        let a = run_estimator_comparison(&c).unwrap();
        let b = run_estimator_comparison(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        for row in &a {
            for cell in &row.cells {
                assert_eq!(cell.succeeded, 1);
            }
        }
    }

    #[test]
    fn single_run_near_truth_at_high_persistence() {
        let mut c = SimulationConfig::estimator_comparison();
        c.phi_grid = vec![0.9];
        c.lengths = vec![100];
        let row = &run_estimator_comparison(&c).unwrap()[0];
        for m in Method::ALL {
            let est = row.cell(m).mean.unwrap();
            assert!((est - 0.9).abs() < 0.1, "{m}: {est}");
        }
        assert!(row.cell(Method::Be).mean.unwrap() < 1.0);
    }

    #[test]
    fn bias_study_shape() {
        let c = SimulationConfig::bias_study();
        let rows = run_bias_study(&c, 10).unwrap();
        assert_eq!(rows.len(), 50);
        assert!(rows.iter().all(|r| r.abs_bias.unwrap() >= 0.0));
        assert_eq!(rows, run_bias_study(&c, 10).unwrap());
        assert_eq!(run_bias_study(&c, 1).unwrap().len(), 5);
        assert!(run_bias_study(&c, 0).is_err());
    }

    #[test]
    fn bias_study_bounded_at_t100() {
        let mut c = SimulationConfig::bias_study();
        c.lengths = vec![100];
        // Sampling SD of the estimates is about sqrt((1 - 0.25)/100) = 0.087.
        for row in run_bias_study(&c, 10).unwrap() {
            assert!(row.abs_bias.unwrap() < 4.0 * 0.087, "{row:?}");
        }
    }

    #[test]
    fn sensitivity_small_run() {
        let mut c = SimulationConfig::sensitivity();
        c.replications = 40;
        c.lengths = vec![30, 100];
        let report = run_sensitivity_study(&c).unwrap();
        assert_eq!(report.cells.len(), 6 * 2 * 4);
        for cell in &report.cells {
            assert_eq!(cell.total + cell.excluded, 40);
            assert!((0.0..=100.0).contains(&cell.percent));
        }
        assert_eq!(report, run_sensitivity_study(&c).unwrap());

        // Near-full-mass intervals cover everything.
        c.prob = 0.999_999;
        let wide = run_sensitivity_study(&c).unwrap();
        assert!(wide.cells.iter().all(|cell| cell.percent == 100.0));
    }

    #[test]
    fn coverage_monotone_in_prob() {
        let mut c = SimulationConfig::sensitivity();
        c.replications = 60;
        c.lengths = vec![30, 50];
        let p95 = run_sensitivity_study(&c).unwrap();
        c.prob = 0.99;
        let p99 = run_sensitivity_study(&c).unwrap();
        for (a, b) in p95.cells.iter().zip(&p99.cells) {
            assert!(b.hits >= a.hits);
        }
    }
}
