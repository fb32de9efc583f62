use std::path::Path;

use ar1bayes::ar1::{simulate as simulate_series, Ar1Params, TimeSeries};
use ar1bayes::bayes::{centered_interval, posterior_for_prior, PriorKind, PriorSpec};
use ar1bayes::diagnostics::{normality_tests, phillips_perron, residuals};
use ar1bayes::estimators::{cls, Method, DEFAULT_TOL};
use ar1bayes::experiments::{
    estimate_all, run_bias_study, run_estimator_comparison, run_sensitivity_study, trained_split, BeHyper,
    SimulationConfig, TrainingRule, TrainingUse,
};
use ar1bayes::Error;

use crate::config::{parse_training_use, ConfigFile};
use crate::data::read_series;
use crate::output::{ensure_dir, sibling_manifest, Precision, RunManifest, Table, MANIFEST_FILE};
use crate::svg::{line_chart, Series};
use crate::{
    AnalyzeArgs, BiasPlotArgs, CliError, CliResult, EstimateArgs, PriorArgs, SensitivityArgs, SimulateArgs, StudyArgs,
};

const MIN_ANALYZE_LEN: usize = 20;
const STDOUT_MANIFEST: &str = "none (written to stdout; header lines carry the configuration)";

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Writes `table` to `out` (with a sibling manifest) or to stdout.
fn emit_single(mut manifest: RunManifest, mut table: Table, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => {
            let manifest_path = sibling_manifest(path);
            let name = manifest_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            manifest.write_table(path, &mut table, &name)?;
            manifest.finish(&manifest_path)
        }
        None => {
            manifest.stamp(&mut table, STDOUT_MANIFEST);
            print!("{}", table.render());
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// simulate

pub fn simulate(a: SimulateArgs) -> CliResult<()> {
    let precision = Precision::from_args(&a.format)?;
    let params = Ar1Params::new(a.phi, a.sigma2)?;
    let series = simulate_series(params, a.length, a.burn_in, a.seed)?;

    let mut manifest = RunManifest::new("simulate", Some(a.seed));
    manifest
        .set("phi", a.phi)
        .set("length", a.length)
        .set("burn_in", a.burn_in)
        .set("sigma2", a.sigma2)
        .set("precision", &a.format.precision);
    let mut table = Table::new(["index", "value"]);
    for (i, v) in series.values().iter().enumerate() {
        table.row(vec![(i + 1).to_string(), precision.num(*v)]);
    }
    emit_single(manifest, table, a.out.as_deref())
}

// ---------------------------------------------------------------------------
// estimate

enum Hyper {
    Fixed { d: f64, sigma_phi2: f64 },
    Trained(TrainingUse),
}

fn resolve_hyper(p: &PriorArgs) -> CliResult<Hyper> {
    if p.train {
        let usage = p.training_use.as_deref().map(parse_training_use).transpose()?;
        return Ok(Hyper::Trained(usage.unwrap_or(TrainingUse::HoldOut)));
    }
    if p.training_use.is_some() {
        return Err(CliError::Usage("--training-use only applies with --train".into()));
    }
    match (p.d, p.sigma_phi2) {
        (Some(d), Some(sigma_phi2)) => {
            PriorSpec::truncated_normal(d, sigma_phi2)?;
            Ok(Hyper::Fixed { d, sigma_phi2 })
        }
        _ => Err(CliError::Usage(
            "prior hyperparameters needed: give --d and --sigma-phi2, or --train".into(),
        )),
    }
}

/// Hyperparameters and the data the trained posterior sees.
fn hyper_values(hyper: &Hyper, series: &TimeSeries, sigma2: f64) -> CliResult<((f64, f64), TimeSeries)> {
    match *hyper {
        Hyper::Fixed { d, sigma_phi2 } => Ok(((d, sigma_phi2), series.clone())),
        Hyper::Trained(usage) => Ok(trained_split(series, sigma2, &TrainingRule::default(), usage)?),
    }
}

fn record_hyper(manifest: &mut RunManifest, hyper: &Hyper, (d, s2): (f64, f64)) {
    match hyper {
        Hyper::Fixed { .. } => manifest.set("prior", "fixed"),
        Hyper::Trained(usage) => manifest.set("prior", format!("trained ({})", usage.label())),
    };
    manifest.set("d", d).set("sigma_phi2", s2);
}

pub fn estimate(a: EstimateArgs) -> CliResult<()> {
    let precision = Precision::from_args(&a.format)?;
    let hyper = resolve_hyper(&a.prior)?;
    let series = read_series(&a.input.input, a.input.column.as_deref())?;
    let (values, _) = hyper_values(&hyper, &series, a.sigma2)?;
    let be = match hyper {
        Hyper::Fixed { d, sigma_phi2 } => BeHyper::Fixed { d, sigma_phi2 },
        Hyper::Trained(usage) => BeHyper::Trained {
            rule: TrainingRule::default(),
            usage,
        },
    };
    let mut row = Vec::new();
    for est in estimate_all(&series, a.sigma2, DEFAULT_TOL, be) {
        row.push(precision.num(est?.estimate));
    }

    let mut manifest = RunManifest::new("estimate", None);
    manifest
        .set("input", a.input.input.display())
        .set("observations", series.len())
        .set("sigma2", a.sigma2);
    record_hyper(&mut manifest, &hyper, values);
    let mut table = Table::new(Method::ALL.iter().map(|m| m.label()));
    table.row(row);
    emit_single(manifest, table, a.out.as_deref())
}

// ---------------------------------------------------------------------------
// studies

fn apply_study_overrides(config: &mut SimulationConfig, a: &StudyArgs, file: &ConfigFile) -> CliResult<()> {
    if let Some(v) = file.list("simulation.phi_grid")? {
        config.phi_grid = v;
    }
    if let Some(v) = file.list("simulation.lengths")? {
        config.lengths = v;
    }
    if let Some(v) = file.get("simulation.replications")? {
        config.replications = v;
    }
    if let Some(v) = file.get("simulation.burn_in")? {
        config.burn_in = v;
    }
    if let Some(v) = file.get("simulation.sigma2")? {
        config.sigma_eps2 = v;
    }
    if let Some(v) = file.get("simulation.seed")? {
        config.base_seed = v;
    }
    if let Some(v) = file.get("simulation.prob")? {
        config.prob = v;
    }
    if let Some(v) = file.get("simulation.tol")? {
        config.tol = v;
    }
    if let Some(v) = file.get("training.min_count")? {
        config.training.min_count = v;
    }
    if let Some(v) = file.get("training.fraction")? {
        config.training.fraction = v;
    }
    if let Some(v) = file.get::<String>("training.use")? {
        config.training_use = parse_training_use(&v)?;
    }

    if let Some(v) = &a.phi {
        config.phi_grid = v.clone();
    }
    if let Some(v) = &a.length {
        config.lengths = v.clone();
    }
    if let Some(v) = a.replications {
        config.replications = v;
    }
    if let Some(v) = a.burn_in {
        config.burn_in = v;
    }
    if let Some(v) = a.sigma2 {
        config.sigma_eps2 = v;
    }
    if let Some(v) = a.seed {
        config.base_seed = v;
    }
    if let Some(v) = &a.training_use {
        config.training_use = parse_training_use(v)?;
    }
    Ok(())
}

fn record_study(manifest: &mut RunManifest, config: &SimulationConfig) {
    manifest
        .set("phi_grid", join(&config.phi_grid))
        .set("lengths", join(&config.lengths))
        .set("replications", config.replications)
        .set("burn_in", config.burn_in)
        .set("sigma2", config.sigma_eps2)
        .set("training.min_count", config.training.min_count)
        .set("training.fraction", config.training.fraction)
        .set("training.use", config.training_use.label())
        .set("tol", config.tol);
}

pub fn compare(a: StudyArgs) -> CliResult<()> {
    let precision = Precision::from_args(&a.format)?;
    let file = ConfigFile::load(a.config.as_deref())?;
    let mut config = SimulationConfig::estimator_comparison();
    apply_study_overrides(&mut config, &a, &file)?;
    let rows = run_estimator_comparison(&config)?;
    if rows.iter().all(|r| r.cells.iter().all(|c| c.succeeded == 0)) {
        return Err(CliError::Numerical("every estimator failed in every cell".into()));
    }

    ensure_dir(&a.out)?;
    let mut manifest = RunManifest::new("compare", Some(config.base_seed));
    record_study(&mut manifest, &config);
    manifest.set("precision", &a.format.precision);

    let header = || std::iter::once("phi").chain(Method::ALL.iter().map(|m| m.label()));
    for &length in &config.lengths {
        let mut means = Table::new(header());
        let mut biases = Table::new(header());
        means.comment(format!(
            "T = {length}; mean estimate over {} replication(s); NA = every replication failed",
            config.replications
        ));
        biases.comment(format!(
            "T = {length}; mean |estimate - phi| over {} replication(s)",
            config.replications
        ));
        for row in rows.iter().filter(|r| r.length == length) {
            let phi = precision.num(row.phi);
            means.row(std::iter::once(phi.clone()).chain(row.cells.iter().map(|c| precision.opt(c.mean))).collect());
            biases.row(
                std::iter::once(phi)
                    .chain(row.cells.iter().map(|c| precision.opt(c.mean_abs_bias)))
                    .collect(),
            );
            for (m, c) in Method::ALL.iter().zip(&row.cells) {
                if c.succeeded < config.replications {
                    means.comment(format!(
                        "{m} at phi = {}: {} of {} replications succeeded",
                        row.phi, c.succeeded, config.replications
                    ));
                }
            }
        }
        manifest.write_table(&a.out.join(format!("compare_T{length}.csv")), &mut means, MANIFEST_FILE)?;
        manifest.write_table(&a.out.join(format!("abs_bias_T{length}.csv")), &mut biases, MANIFEST_FILE)?;
    }
    manifest.finish(&a.out.join(MANIFEST_FILE))
}

fn parse_priors(names: &[String], g: Option<f64>, location: f64) -> CliResult<Vec<PriorSpec>> {
    let mut out = Vec::new();
    for name in names {
        let spec = match name.trim().to_ascii_lowercase().as_str() {
            "jeffreys" | "j" => PriorSpec::Jeffreys,
            "g" => PriorSpec::g_prior(g, location)?,
            // Placeholders: hyperparameters are filled in per series.
            "nc" => PriorSpec::natural_conjugate(0.0, 1.0)?,
            "tn" => PriorSpec::truncated_normal(0.0, 1.0)?,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown prior `{other}` (expected jeffreys, g, nc or tn)"
                )))
            }
        };
        if out.iter().any(|p: &PriorSpec| p.kind() == spec.kind()) {
            return Err(CliError::Usage(format!("prior `{name}` listed twice")));
        }
        out.push(spec);
    }
    if out.is_empty() {
        return Err(Error::EmptyGrid("priors").into());
    }
    Ok(out)
}

fn default_prior_names() -> Vec<String> {
    ["jeffreys", "g", "nc", "tn"].iter().map(|s| s.to_string()).collect()
}

pub fn sensitivity(a: SensitivityArgs) -> CliResult<()> {
    let precision = Precision::from_args(&a.study.format)?;
    let file = ConfigFile::load(a.study.config.as_deref())?;
    let mut config = SimulationConfig::sensitivity();
    apply_study_overrides(&mut config, &a.study, &file)?;
    let names = match (&a.prior, file.list::<String>("priors.include")?) {
        (Some(v), _) => v.clone(),
        (None, Some(v)) => v,
        (None, None) => default_prior_names(),
    };
    let g = a.g.or(file.get("priors.g")?);
    let location = file.get("priors.g_location")?.unwrap_or(0.0);
    config.priors = parse_priors(&names, g, location)?;
    if let Some(p) = a.prob {
        config.prob = p;
    }

    let report = run_sensitivity_study(&config)?;
    if report.cells.iter().all(|c| c.total == 0) {
        return Err(CliError::Numerical("no replication produced an interval".into()));
    }

    let out = &a.study.out;
    ensure_dir(out)?;
    let mut manifest = RunManifest::new("sensitivity", Some(config.base_seed));
    record_study(&mut manifest, &config);
    manifest
        .set("priors", join(&config.priors.iter().map(|p| p.kind().label()).collect::<Vec<_>>()))
        .set("g", g.map_or("series length".to_string(), |g| g.to_string()))
        .set("g_location", location)
        .set("prob", config.prob)
        .set("precision", &a.study.format.precision);

    let kinds: Vec<PriorKind> = config.priors.iter().map(|p| p.kind()).collect();
    let mc_se = (config.prob * (1.0 - config.prob) / config.replications as f64).sqrt() * 100.0;
    for &phi in &config.phi_grid {
        let cells: Vec<_> = report.cells.iter().filter(|c| c.phi == phi).collect();
        let any_excluded = cells.iter().any(|c| c.excluded > 0);
        let mut header: Vec<String> = std::iter::once("n".to_string())
            .chain(kinds.iter().map(|k| k.label().to_string()))
            .collect();
        if any_excluded {
            header.extend(kinds.iter().map(|k| format!("{}_used", k.label())));
        }
        let mut table = Table::new(header);
        table.comment(format!(
            "phi = {phi}; percentage of {} replications whose {}% centered interval covers phi",
            config.replications,
            config.prob * 100.0
        ));
        table.comment(format!("Monte Carlo standard error near nominal coverage: {mc_se:.2} points"));
        if any_excluded {
            table.comment("*_used: replications in the denominator after excluding failed posteriors");
        }
        for &n in &config.lengths {
            let row_cells: Vec<_> = kinds.iter().map(|&k| report.get(k, n, phi)).collect();
            let mut row = vec![n.to_string()];
            row.extend(row_cells.iter().map(|c| precision.opt(c.map(|c| c.percent))));
            if any_excluded {
                row.extend(row_cells.iter().map(|c| c.map_or("NA".into(), |c| c.total.to_string())));
            }
            table.row(row);
        }
        manifest.write_table(&out.join(format!("sensitivity_phi_{phi}.csv")), &mut table, MANIFEST_FILE)?;
    }

    let mut long = Table::new(["prior", "n", "phi", "hits", "total", "excluded", "P"]);
    for c in &report.cells {
        long.row(vec![
            c.prior.label().into(),
            c.length.to_string(),
            precision.num(c.phi),
            c.hits.to_string(),
            c.total.to_string(),
            c.excluded.to_string(),
            precision.num(c.percent),
        ]);
    }
    manifest.write_table(&out.join("coverage.csv"), &mut long, MANIFEST_FILE)?;
    manifest.finish(&out.join(MANIFEST_FILE))
}

// ---------------------------------------------------------------------------
// analyze

pub fn analyze(a: AnalyzeArgs) -> CliResult<()> {
    let precision = Precision::from_args(&a.format)?;
    let hyper = resolve_hyper(&a.prior)?;
    let names = a.prior_list.clone().unwrap_or_else(default_prior_names);
    let priors = parse_priors(&names, a.g, 0.0)?;
    let series = read_series(&a.input.input, a.input.column.as_deref())?;
    if series.len() < MIN_ANALYZE_LEN {
        return Err(Error::SeriesTooShort {
            needed: MIN_ANALYZE_LEN,
            got: series.len(),
        }
        .into());
    }
    let (values, trained_data) = hyper_values(&hyper, &series, a.sigma2)?;

    let mut manifest = RunManifest::new("analyze", None);
    manifest
        .set("input", a.input.input.display())
        .set("observations", series.len())
        .set("sigma2", a.sigma2)
        .set("pp_lags", a.pp_lags);
    record_hyper(&mut manifest, &hyper, values);
    manifest
        .set("g", a.g.map_or("series length".to_string(), |g| g.to_string()))
        .set("precision", &a.format.precision);

    // 1. Unit-root test.
    let mut pp = Table::new(["lag", "rho", "rho_p", "tau", "tau_p"]);
    pp.comment("Phillips-Perron, single-mean regression; p-values interpolated from Dickey-Fuller tables (approximate)");
    for r in phillips_perron(&series, a.pp_lags)? {
        pp.row(vec![
            r.lag.to_string(),
            precision.num(r.rho_stat),
            precision.num(r.rho_p),
            precision.num(r.tau_stat),
            precision.num(r.tau_p),
        ]);
    }

    // 2. Point estimates; failures are reported, not fatal.
    let be = BeHyper::Fixed {
        d: values.0,
        sigma_phi2: values.1,
    };
    let be = match hyper {
        Hyper::Fixed { .. } => be,
        Hyper::Trained(usage) => BeHyper::Trained {
            rule: TrainingRule::default(),
            usage,
        },
    };
    let mut estimates = Table::new(Method::ALL.iter().map(|m| m.label()));
    let mut row = Vec::new();
    for (m, est) in Method::ALL.iter().zip(estimate_all(&series, a.sigma2, DEFAULT_TOL, be)) {
        match est {
            Ok(e) => row.push(precision.num(e.estimate)),
            Err(err) => {
                estimates.comment(format!("{m} failed: {err}"));
                row.push("NA".into());
            }
        }
    }
    estimates.row(row);

    // 3. Residual normality on the CLS residuals.
    let mut normality = Table::new(["test", "statistic", "p_value", "note"]);
    normality.comment("residuals of the CLS fit; p-values for estimated mean and variance (approximate)");
    match cls(&series) {
        Ok(fit) => {
            normality.comment(format!("CLS estimate = {}", precision.num(fit.estimate)));
            for r in normality_tests(&residuals(&series, fit.estimate))? {
                normality.row(vec![
                    r.test.label().into(),
                    precision.num(r.statistic),
                    precision.num(r.p_value),
                    if r.within_range { "approximate" } else { "outside fitted range; clipped" }.into(),
                ]);
            }
        }
        Err(err) => {
            normality.comment(format!("skipped: {err}"));
        }
    }

    // 4. Posterior summaries.
    let mut posterior = Table::new(["prior", "mean", "lower", "upper", "length"]);
    posterior.comment(format!("centered 95% interval about the posterior mean; TN/NC d = {}, sigma_phi2 = {}", precision.num(values.0), precision.num(values.1)));
    for prior in &priors {
        let spec = prior.with_hyperparameters(values.0, values.1);
        let data = if prior.kind().is_trained() { &trained_data } else { &series };
        let summary = posterior_for_prior(data, a.sigma2, &spec)
            .and_then(|post| centered_interval(&post, 0.95).map(|iv| (post.mean, iv)));
        match summary {
            Ok((mean, (lo, hi))) => posterior.row(vec![
                prior.kind().label().into(),
                precision.num(mean),
                precision.num(lo),
                precision.num(hi),
                precision.num(hi - lo),
            ]),
            Err(err) => posterior
                .comment(format!("{} failed: {err}", prior.kind()))
                .row(vec![prior.kind().label().into(), "NA".into(), "NA".into(), "NA".into(), "NA".into()]),
        };
    }

    let sections = [
        ("unit_root.csv", pp),
        ("estimates.csv", estimates),
        ("normality.csv", normality),
        ("posterior.csv", posterior),
    ];
    match &a.out {
        Some(dir) => {
            ensure_dir(dir)?;
            for (name, mut table) in sections {
                manifest.write_table(&dir.join(name), &mut table, MANIFEST_FILE)?;
            }
            manifest.finish(&dir.join(MANIFEST_FILE))
        }
        None => {
            let mut text = String::new();
            for line in std::iter::once(format!("manifest: {STDOUT_MANIFEST}")).chain(manifest.header_lines()) {
                text.push_str(&format!("# {line}\n"));
            }
            for (name, table) in sections {
                text.push_str(&format!("\n# [{}]\n", name.trim_end_matches(".csv")));
                text.push_str(&table.render());
            }
            print!("{text}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// bias-plot

pub fn bias_plot(a: BiasPlotArgs) -> CliResult<()> {
    let precision = Precision::from_args(&a.format)?;
    let file = ConfigFile::load(a.config.as_deref())?;
    let mut config = SimulationConfig::bias_study();
    let study = StudyArgs {
        config: None,
        out: Default::default(),
        seed: a.seed,
        sigma2: a.sigma2,
        phi: a.phi.map(|p| vec![p]),
        length: a.length.map(|n| vec![n]),
        burn_in: a.burn_in,
        replications: None,
        training_use: a.training_use.clone(),
        format: a.format.clone(),
    };
    apply_study_overrides(&mut config, &study, &file)?;
    let repeats = a.repeats.or(file.get("simulation.repeats")?).unwrap_or(10);
    let rows = run_bias_study(&config, repeats)?;
    if rows.iter().all(|r| r.abs_bias.is_none()) {
        return Err(CliError::Numerical("every estimator failed in every repeat".into()));
    }
    let (phi, length) = (config.phi_grid[0], config.lengths[0]);

    let mut manifest = RunManifest::new("bias-plot", Some(config.base_seed));
    manifest
        .set("phi", phi)
        .set("length", length)
        .set("repeats", repeats)
        .set("burn_in", config.burn_in)
        .set("sigma2", config.sigma_eps2)
        .set("training.use", config.training_use.label())
        .set("precision", &a.format.precision);
    if config.phi_grid.len() > 1 || config.lengths.len() > 1 {
        manifest.set("note", "only the first phi and length of the grid are used");
    }

    let mut table = Table::new(["repeat", "method", "abs_bias"]);
    for r in &rows {
        table.row(vec![(r.repeat + 1).to_string(), r.method.label().into(), precision.opt(r.abs_bias)]);
    }

    if let Some(svg_path) = &a.svg {
        let series: Vec<Series> = Method::ALL
            .iter()
            .map(|&m| Series {
                name: m.label().into(),
                points: rows
                    .iter()
                    .filter(|r| r.method == m)
                    .map(|r| ((r.repeat + 1) as f64, r.abs_bias))
                    .collect(),
            })
            .collect();
        let svg = line_chart(
            &format!("Absolute bias, phi = {phi}, T = {length}"),
            "repeat",
            "|estimate - phi|",
            &series,
        );
        manifest.write_text(svg_path, &svg)?;
    }
    emit_single(manifest, table, a.out.as_deref())
}
