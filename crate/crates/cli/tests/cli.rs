use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn milnor(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_milnor"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn catalog_germ(name: &str) -> String {
    format!("{}/catalog/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn formulas_table_and_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let ok = milnor(dir.path(), &["formulas", "--m", "3", "--k", "2", "--chi-f", "1"]);
    assert_eq!(ok.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("formulas-m3-k2-chi1.json")).unwrap())
            .unwrap();
    assert_eq!(report["db"], 0);
    let rows: Vec<(i64, i64)> = report["stages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["chi_boundary"].as_i64().unwrap(), r["chi_link"].as_i64().unwrap()))
        .collect();
    assert_eq!(rows, vec![(0, 0), (2, 2)]);

    let even = milnor(dir.path(), &["--format", "csv", "formulas", "--m", "4", "--k", "2", "--chi-f", "5"]);
    assert_eq!(even.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("formulas-m4-k2-chi5.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[2], f[3], "boundary equals link in {line}");
    }

    let bad = milnor(dir.path(), &["formulas", "--m", "2", "--k", "2", "--chi-f", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("M>K≥2"));
}

#[test]
fn negative_chi_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let out = milnor(dir.path(), &["formulas", "--m", "5", "--k", "3", "--chi-f", "-2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(milnor(dir.path(), &["catalog", "run", "no-such-germ"]).status.code(), Some(2));
    let germ = catalog_germ("linear-4-3");
    let zero = milnor(dir.path(), &["openbook", &germ, "--stage", "1", "--angles", "0", "--epsilon", "0.5"]);
    assert_eq!(zero.status.code(), Some(2));
    assert_eq!(milnor(dir.path(), &["verify"]).status.code(), Some(2));
    let missing = milnor(dir.path(), &["verify", "/nonexistent/germ.toml"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn verify_pass_fail_and_unstable() {
    let dir = tempfile::tempdir().unwrap();
    let germ = catalog_germ("linear-3-2");
    let common = ["--stage", "2", "--kinds", "boundary,link", "--epsilon", "0.5"];

    let pass = milnor(dir.path(), &[&["verify", &germ, "--chi-f", "1"], &common[..]].concat());
    assert_eq!(pass.status.code(), Some(0), "{}", String::from_utf8_lossy(&pass.stdout));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify-linear-3-2.json")).unwrap()).unwrap();
    assert_eq!(v["schema"], "milnor-verdict/1");
    assert_eq!(v["verdict"], "PASS");

    // Claiming χ(F_f) = 3 predicts χ(∂F_2) = 6; two points are measured.
    let fail = milnor(dir.path(), &[&["verify", &germ, "--chi-f", "3"], &common[..]].concat());
    assert_eq!(fail.status.code(), Some(4));

    let starved = milnor(
        dir.path(),
        &["verify", &germ, "--chi-f", "1", "--stage", "1", "--kinds", "fiber", "--epsilon", "0.5", "--points", "12"],
    );
    assert_eq!(starved.status.code(), Some(3), "{}", String::from_utf8_lossy(&starved.stdout));
}

#[test]
fn verify_measures_chi_f_when_not_given() {
    let dir = tempfile::tempdir().unwrap();
    let germ = catalog_germ("linear-3-2");
    let out = milnor(dir.path(), &["verify", &germ, "--stage", "2", "--kinds", "boundary", "--epsilon", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify-linear-3-2.json")).unwrap()).unwrap();
    assert_eq!(v["chi_f_source"], "measured");
    assert_eq!(v["chiF"], 1);
}

#[test]
fn run_record_is_separate_from_report() {
    let dir = tempfile::tempdir().unwrap();
    let germ = catalog_germ("linear-3-2");
    let out = milnor(
        dir.path(),
        &["--format", "csv", "verify", &germ, "--chi-f", "1", "--stage", "2", "--kinds", "boundary", "--epsilon", "0.5", "--svg"],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("verify-linear-3-2.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("I,kind,expected,measured,confidence,verdict"));
    assert_eq!(csv.lines().nth(1), Some("2,boundary,2,2,stable,PASS"));
    assert!(fs::read_to_string(dir.path().join("verify-linear-3-2-I2-boundary.svg")).unwrap().starts_with("<svg"));
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify-linear-3-2.run.json")).unwrap()).unwrap();
    assert!(record["started_unix"].as_f64().unwrap() > 0.0);
    assert_eq!(record["exit_code"], 0);
    assert_eq!(record["params"]["chi_f"], 1);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_milnor"))
        .env("MILNOR_OUT_DIR", dir.path())
        .args(["formulas", "--m", "4", "--k", "3", "--chi-f", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("formulas-m4-k3-chi0.json").exists());
}

#[test]
fn openbook_two_sign_pages() {
    let dir = tempfile::tempdir().unwrap();
    let germ = catalog_germ("linear-3-2");
    let out = milnor(dir.path(), &["openbook", &germ, "--stage", "1", "--chi-f", "1", "--epsilon", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("openbook-linear-3-2-I1.json")).unwrap()).unwrap();
    let chis: Vec<i64> = v["pages"].as_array().unwrap().iter().map(|p| p["chi"].as_i64().unwrap()).collect();
    assert_eq!(chis, vec![1, 1]);
    assert_eq!(v["matches_chi_f"], true);
}

#[test]
fn sample_exports_a_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let germ = catalog_germ("zw-4-2");
    let out = milnor(
        dir.path(),
        &["--format", "csv", "sample", &germ, "--stage", "2", "--kind", "link", "--epsilon", "0.5", "--points", "300"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("sample-zw-4-2-I2-link.csv")).unwrap();
    assert!(text.starts_with("# milnor-pointcloud v1"));
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 301);
}

#[test]
fn tameness_flags_the_demo() {
    let dir = tempfile::tempdir().unwrap();
    let bad = milnor(dir.path(), &["tameness", &catalog_germ("nontame-demo"), "--epsilon", "0.5", "--starts", "200"]);
    assert_eq!(bad.status.code(), Some(4));
    let good = milnor(dir.path(), &["tameness", &catalog_germ("linear-3-2"), "--epsilon", "0.5", "--starts", "200"]);
    assert_eq!(good.status.code(), Some(0));
}

#[test]
fn catalog_list_names_every_entry() {
    let dir = tempfile::tempdir().unwrap();
    let out = milnor(dir.path(), &["catalog", "list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for e in milnor_cli::catalog::entries() {
        assert!(text.contains(&e.name));
    }
}
