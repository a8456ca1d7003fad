use std::path::PathBuf;
use std::process::{Command, Output};

fn holee(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holee"))
        .args(args)
        .env_remove("HOLEE_N_LEVELS")
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Parses the CSV body (after `#` report lines) into header and rows.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn report_value(text: &str, key: &str) -> f64 {
    let prefix = format!("# {key} = ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no '{key}' in report:\n{text}"))
        .parse()
        .unwrap()
}

#[test]
fn price_thirty_year_yield() {
    let o = holee(&["price", "--model", "semi", "--beta", "0.0924", "--r0", "-0.05834", "--z", "-0.00184", "--maturities", "30"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(&header[..3], ["maturity", "price", "yield_pct"]);
    let y: f64 = rows[0][2].parse().unwrap();
    assert!((y - 2.80).abs() < 0.01, "yield {y}");
}

#[test]
fn maturities_from_file() {
    let o = holee(&["price", "--beta", "0.0924", "--z", "0.01", "--maturities", &fixture("ust_2015.csv")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_rows(&stdout(&o)).1.len(), 11);
}

#[test]
fn spectrum_levels_match_airy_zeros() {
    let o = holee(&["spectrum", "--beta", "0.0924", "--r0", "-0.05834", "--n", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["n", "e_n", "E_n", "chi_n_pct", "coef"]);
    let e1: f64 = rows[0][1].parse().unwrap();
    assert!((e1 - 1.018792972).abs() < 1e-9);
    let chi1: f64 = rows[0][3].parse().unwrap();
    assert!((chi1 - 3.58).abs() < 0.01);
}

#[test]
fn calibrate_jgb_uses_header_date() {
    let o = holee(&["calibrate", "--input", &fixture("jgb_2002.csv")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rmse = report_value(&text, "RMSE");
    assert!(rmse > 5e-4 && rmse < 7e-4, "rmse {rmse}");
    let beta = report_value(&text, "beta");
    assert!(beta > 0.0);
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["maturity", "empirical_pct", "model_pct", "residual_pct"]);
    assert_eq!(rows.len(), 13);
}

#[test]
fn calibrate_filter_and_drift_file() {
    let dir = tempfile::tempdir().unwrap();
    let drift = dir.path().join("drift.csv");
    let o = holee(&[
        "calibrate",
        "--input",
        &fixture("ust_2015.csv"),
        "--min-maturity",
        "1.0",
        "--drift-output",
        drift.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_rows(&stdout(&o)).1.len(), 8);
    let (header, rows) = csv_rows(&std::fs::read_to_string(&drift).unwrap());
    assert_eq!(header, ["s", "chi", "nu"]);
    let r0 = report_value(&stdout(&o), "r0");
    let chi0: f64 = rows[0][1].parse().unwrap();
    assert!((chi0 - r0).abs() < 1e-9);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let o = holee(&["baseline", "--input", &fixture("jgb_2002.csv"), "--output", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let (header, rows) = csv_rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(header, ["maturity", "empirical_pct", "cubic_pct"]);
    assert_eq!(rows.len(), 13);
}

#[test]
fn identical_arguments_give_identical_bytes() {
    let args = ["oracle", "--method", "mc", "--beta", "0.0924", "--z", "0.03", "--maturities", "2", "--n-paths", "5000", "--seed", "7"];
    let a = holee(&args);
    let b = holee(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let c = holee(&["calibrate", "--input", &fixture("jgb_2002.csv")]);
    let d = holee(&["calibrate", "--input", &fixture("jgb_2002.csv")]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn pde_oracle_agrees_with_spectral() {
    let o = holee(&["oracle", "--method", "pde", "--beta", "0.0924", "--z", "0.03", "--maturities", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv_rows(&stdout(&o));
    let gap = header.iter().position(|h| h == "rel_gap").unwrap();
    assert!(rows[0][gap].parse::<f64>().unwrap() < 1e-4);
}

#[test]
fn airy_zeros_and_values() {
    let o = holee(&["airy", "--zeros", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("-2.338107410"));
    let o = holee(&["airy", "--y", "0"]);
    assert!(stdout(&o).contains("0.3550280539"));
}

#[test]
fn validation_errors_exit_one() {
    for args in [
        vec!["price", "--beta", "0.09", "--z", "0.01", "--maturities", "-1"],
        vec!["price", "--beta", "-0.09", "--z", "0.01", "--maturities", "1"],
        vec!["price", "--z", "0.01", "--maturities", "1"],
        vec!["price", "--model", "interval", "--beta", "0.09", "--z", "0.01", "--maturities", "1"],
        vec!["oracle", "--method", "mc", "--model", "robin", "--beta", "0.09", "--z", "0.01", "--maturities", "1"],
        vec!["price", "--beta", "0.09", "--z", "0.01", "--maturities", "1", "--bogus"],
        vec!["frobnicate"],
    ] {
        let o = holee(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn malformed_csv_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "maturity_years,yield_pct\n1,0.1\n2,0.2\n3,oops\n4,0.4\n").unwrap();
    let o = holee(&["calibrate", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    std::fs::write(&path, "maturity_years,price\n1,0.1\n").unwrap();
    let o = holee(&["baseline", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("yield_pct"), "{}", stderr(&o));
}

#[test]
fn infeasible_calibration_exits_two() {
    // A floor above every sensible lowest level leaves no admissible fit.
    let o = holee(&["calibrate", "--input", &fixture("jgb_2002.csv"), "--rmin", "5"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn help_exits_zero() {
    let o = holee(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("percent"));
}
