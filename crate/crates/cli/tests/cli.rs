use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ar1bayes"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Non-comment lines.
fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).collect()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

#[test]
fn simulate_is_reproducible_and_has_500_rows() {
    let args = ["simulate", "--phi", "0.5", "--length", "500", "--burn-in", "200", "--seed", "42"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let rows = data_lines(&text);
    assert_eq!(rows[0], "index,value");
    assert_eq!(rows.len(), 501);
    assert!(text.contains("seed=42"));
}

#[test]
fn simulate_defaults_burn_in_to_200() {
    let out = run(&["simulate", "--phi", "0.3", "--length", "5"]);
    assert!(stdout(&out).contains("# burn_in = 200"));
}

#[test]
fn simulate_rejects_nonstationary_phi() {
    let out = run(&["simulate", "--phi", "1.2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("stationarity violated"));
}

#[test]
fn simulate_writes_file_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = run(&["simulate", "--phi", "-0.4", "--length", "50", "--out", &p(&dir, "y.csv")]);
    assert!(out.status.success());
    let table = read(&dir.path().join("y.csv"));
    assert!(table.starts_with("# manifest: y.manifest.txt"));
    let manifest = read(&dir.path().join("y.manifest.txt"));
    for key in ["command = simulate", "version = ", "seed = ", "config.phi = -0.4", "output = ", "duration_seconds = "] {
        assert!(manifest.contains(key), "{key} missing from\n{manifest}");
    }
}

#[test]
fn unwritable_output_is_a_usage_error() {
    let out = run(&["simulate", "--phi", "0.1", "--out", "/nonexistent-dir/x/y.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cannot write"));
}

#[test]
fn simulate_output_round_trips_through_estimate_and_analyze() {
    let dir = TempDir::new().unwrap();
    let series = p(&dir, "s.csv");
    assert!(run(&["simulate", "--phi", "0.7", "--length", "200", "--seed", "3", "--out", &series, "--precision", "full"])
        .status
        .success());

    let est = run(&["estimate", &series, "--d", "0.75", "--sigma-phi2", "1"]);
    assert!(est.status.success(), "{}", stderr(&est));
    let text = stdout(&est);
    let rows = data_lines(&text);
    assert_eq!(rows[0], "MME,CLS,MLE,CMLE,BE");
    let values: Vec<f64> = rows[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(values.len(), 5);
    assert!(values.iter().all(|v| (v - 0.7).abs() < 0.15), "{values:?}");
    // CLS and CMLE agree to the printed precision.
    assert_eq!(rows[1].split(',').nth(1), rows[1].split(',').nth(3));

    let again = run(&["estimate", &series, "--d", "0.75", "--sigma-phi2", "1"]);
    assert_eq!(est.stdout, again.stdout);

    let analyzed = run(&["analyze", &series, "--train"]);
    assert!(analyzed.status.success(), "{}", stderr(&analyzed));
}

#[test]
fn estimate_needs_prior_hyperparameters() {
    let dir = TempDir::new().unwrap();
    let f = p(&dir, "x.csv");
    std::fs::write(&f, "1\n2\n1\n0\n").unwrap();
    let out = run(&["estimate", &f]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--train"));
}

#[test]
fn estimate_rejects_constant_zero_series() {
    let dir = TempDir::new().unwrap();
    let f = p(&dir, "zeros.csv");
    std::fs::write(&f, "0\n0\n0\n0\n0\n").unwrap();
    let out = run(&["estimate", &f, "--d", "0", "--sigma-phi2", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("degenerate"));
}

#[test]
fn estimate_parse_error_names_the_line() {
    let dir = TempDir::new().unwrap();
    let f = p(&dir, "bad.csv");
    std::fs::write(&f, "value\n0.1\n0.2\noops\n0.3\n").unwrap();
    let out = run(&["estimate", &f, "--d", "0", "--sigma-phi2", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
}

#[test]
fn estimate_selects_columns() {
    let dir = TempDir::new().unwrap();
    let f = p(&dir, "two.csv");
    std::fs::write(&f, "a b\n1 5\n2 4\n1 6\n3 5\n2 4\n").unwrap();
    let by_name = stdout(&run(&["estimate", &f, "--column", "a", "--d", "0", "--sigma-phi2", "1"]));
    let by_index = stdout(&run(&["estimate", &f, "--column", "1", "--d", "0", "--sigma-phi2", "1"]));
    let last = stdout(&run(&["estimate", &f, "--d", "0", "--sigma-phi2", "1"]));
    assert_eq!(data_lines(&by_name)[1], data_lines(&by_index)[1]);
    assert_ne!(data_lines(&by_name)[1], data_lines(&last)[1]);
}

#[test]
fn compare_default_grid_and_determinism() {
    let dir = TempDir::new().unwrap();
    let a = p(&dir, "a");
    let b = p(&dir, "b");
    assert!(run(&["compare", "--out", &a]).status.success());
    assert!(run(&["compare", "--out", &b]).status.success());
    for t in [30, 100] {
        let name = format!("compare_T{t}.csv");
        let table = read(&dir.path().join("a").join(&name));
        assert_eq!(table, read(&dir.path().join("b").join(&name)));
        let rows = data_lines(&table);
        assert_eq!(rows[0], "phi,MME,CLS,MLE,CMLE,BE");
        let phis: Vec<&str> = rows[1..].iter().map(|r| r.split(',').next().unwrap()).collect();
        assert_eq!(phis, ["-0.9000", "-0.5000", "0.0000", "0.5000", "0.9000"]);
    }
    assert!(read(&dir.path().join("a/manifest.txt")).contains("command = compare"));
}

#[test]
fn compare_flags_override_config() {
    let dir = TempDir::new().unwrap();
    let cfg = p(&dir, "c.conf");
    std::fs::write(&cfg, "[simulation]\nphi_grid = 0.1, 0.2\nlengths = 40\nreplications = 3\n").unwrap();
    let out = p(&dir, "o");
    assert!(run(&["compare", "--config", &cfg, "--out", &out, "--replications", "20"]).status.success());
    let table = read(&dir.path().join("o/compare_T40.csv"));
    assert!(table.contains("# replications = 20"));
    assert_eq!(data_lines(&table).len(), 3);
}

#[test]
fn compare_rejects_empty_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = p(&dir, "c.conf");
    std::fs::write(&cfg, "[simulation]\nphi_grid =\n").unwrap();
    let out = run(&["compare", "--config", &cfg, "--out", &p(&dir, "o")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("empty grid"));
}

#[test]
fn config_errors_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = p(&dir, "c.conf");
    std::fs::write(&cfg, "[simulation]\nnot_a_key = 1\n").unwrap();
    let out = run(&["compare", "--config", &cfg, "--out", &p(&dir, "o")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown key"));
}

#[test]
fn sensitivity_tables_are_complete_and_thread_independent() {
    let dir = TempDir::new().unwrap();
    let args = |out: &str| {
        vec![
            "sensitivity".to_string(),
            "--out".into(),
            out.to_string(),
            "--replications".into(),
            "20".into(),
            "--length".into(),
            "30,100".into(),
        ]
    };
    let many = bin().args(args(&p(&dir, "many"))).output().unwrap();
    let one = bin()
        .args(args(&p(&dir, "one")))
        .env("RAYON_NUM_THREADS", "1")
        .output()
        .unwrap();
    assert!(many.status.success() && one.status.success());
    for phi in ["-0.2", "0.2", "-0.5", "0.5", "-0.8", "0.8"] {
        let name = format!("sensitivity_phi_{phi}.csv");
        let table = read(&dir.path().join("many").join(&name));
        assert_eq!(table, read(&dir.path().join("one").join(&name)));
        let rows = data_lines(&table);
        assert_eq!(rows[0], "n,Jeffreys,g,NC,TN");
        assert_eq!(rows.len(), 3);
        for cell in rows[1..].iter().flat_map(|r| r.split(',').skip(1)) {
            let v: f64 = cell.parse().unwrap();
            assert!((0.0..=100.0).contains(&v));
        }
    }
}

#[test]
fn sensitivity_prior_selection() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "o");
    let res = run(&[
        "sensitivity", "--out", &out, "--replications", "5", "--phi", "0.5", "--length", "30", "--prior", "tn,jeffreys",
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let table = read(&dir.path().join("o/sensitivity_phi_0.5.csv"));
    assert_eq!(data_lines(&table)[0], "n,TN,Jeffreys");
    let bad = run(&["sensitivity", "--out", &out, "--prior", "flat"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn analyze_rejects_short_series() {
    let dir = TempDir::new().unwrap();
    let f = p(&dir, "five.csv");
    std::fs::write(&f, "1\n2\n3\n2\n1\n").unwrap();
    let out = run(&["analyze", &f, "--d", "0.5", "--sigma-phi2", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("series too short"));
}

#[test]
fn analyze_white_noise() {
    let dir = TempDir::new().unwrap();
    let series = p(&dir, "wn.csv");
    assert!(run(&["simulate", "--phi", "0", "--length", "500", "--seed", "11", "--out", &series, "--precision", "full"])
        .status
        .success());
    let out_dir = p(&dir, "report");
    let res = run(&["analyze", &series, "--d", "0", "--sigma-phi2", "1", "--out", &out_dir]);
    assert!(res.status.success(), "{}", stderr(&res));
    let report = dir.path().join("report");

    let pp = read(&report.join("unit_root.csv"));
    for row in &data_lines(&pp)[1..] {
        let tau_p: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!(tau_p < 0.01, "{row}");
    }
    let est = read(&report.join("estimates.csv"));
    for v in data_lines(&est)[1].split(',') {
        assert!(v.parse::<f64>().unwrap().abs() < 0.15);
    }
    let normality = read(&report.join("normality.csv"));
    assert_eq!(data_lines(&normality).len(), 4);
    let posterior = read(&report.join("posterior.csv"));
    let rows = data_lines(&posterior);
    assert_eq!(rows[0], "prior,mean,lower,upper,length");
    assert_eq!(rows.len(), 5);
    assert!(read(&report.join("manifest.txt")).contains("output = "));
}

#[test]
fn bias_plot_default_has_fifty_rows() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "bias.csv");
    let svg = p(&dir, "bias.svg");
    let res = run(&["bias-plot", "--out", &data, "--svg", &svg]);
    assert!(res.status.success(), "{}", stderr(&res));
    let table = read(&dir.path().join("bias.csv"));
    assert!(table.contains("# phi = 0.5"));
    let rows = data_lines(&table);
    assert_eq!(rows[0], "repeat,method,abs_bias");
    assert_eq!(rows.len(), 51);
    for row in &rows[1..] {
        assert!(row.split(',').nth(2).unwrap().parse::<f64>().unwrap() >= 0.0);
    }
    let chart = read(&dir.path().join("bias.svg"));
    assert!(chart.starts_with("<svg") && chart.trim_end().ends_with("</svg>"));
    for m in ["MME", "CLS", "MLE", "CMLE", "BE"] {
        assert!(chart.contains(&format!(">{m}</text>")));
    }
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["simulate"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--phi", "0.1", "--precision", "lots"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
