use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hubbard-lax")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn verify_passes_with_envelope() {
    let out = run(&["verify", "--u", "1", "--seed", "7", "--K", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "verify");
    assert_eq!(v["passed"], true);
    assert!(!v["result"].as_array().unwrap().is_empty());
}

#[test]
fn ness_asymmetric_chain_passes() {
    let out = run(&["ness", "--n", "4", "--gammaL", "1", "--gammaR", "0.5", "--u", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn zero_coupling_is_rejected_as_non_unique() {
    let out = run(&["ness", "--n", "2", "--gammaL", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("non-unique"));
}

#[test]
fn negative_coupling_and_short_chain_have_distinct_messages() {
    let neg = run(&["ness", "--n", "2", "--gammaR", "-0.5"]);
    assert_eq!(neg.status.code(), Some(3));
    assert!(stderr(&neg).contains("cannot be negative"));
    let short = run(&["ness", "--n", "1"]);
    assert_eq!(short.status.code(), Some(3));
    assert!(stderr(&short).contains("n >= 2"));
    assert_ne!(stderr(&neg), stderr(&short));
}

#[test]
fn unwritable_output_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, b"x").unwrap();
    let target = file.join("sub");
    let out = run(&["--out", target.to_str().unwrap(), "verify"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("cannot write output path"));
}

#[test]
fn unknown_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "gamma = 1.0\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "ness"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runs_are_byte_identical() {
    let args = ["ness", "--n", "3", "--gammaL", "0.7", "--gammaR", "1.3", "--muL", "0.2", "--u", "0.5"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "n = 3\ngamma_l = 2.0\nu = 0.25\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "ness", "--u", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let d = &json(&out)["parameters"]["driving"];
    assert_eq!(d["n_sites"], 3);
    assert_eq!(d["gamma_l"], 2.0);
    assert_eq!(d["u"], 0.5);
}

#[test]
fn ness_dumps_rho_into_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let rho = dir.path().join("rho.bin");
    let out = run(&["--out", dir.path().to_str().unwrap(), "ness", "--n", "2", "--dump-rho", rho.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(dir.path().join("ness.json").is_file());
    let back = hubbard_lax::io::read_rho(std::fs::File::open(&rho).unwrap()).unwrap();
    assert_eq!(back.dim(), 16);
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect()
}

#[test]
fn observe_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--out", dir.path().to_str().unwrap(), "observe", "--sizes", "3,4,5", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for f in ["observe.json", "profile.csv", "currents.csv", "profile.dat", "scaling.dat", "scaling.json"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let currents = read_csv(&dir.path().join("currents.csv"));
    assert_eq!(currents.len(), 3);
    let j: Vec<f64> = currents.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(j.iter().all(|x| (x - j[0]).abs() < 1e-9));
    assert_eq!(read_csv(&dir.path().join("profile.csv")).len(), 4);
}

#[test]
fn commute_reports_conjecture_tier() {
    let out = run(&["commute", "--n", "3", "--pairs", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["tier"], "conjecture");
    assert_eq!(v["result"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_output_is_sorted() {
    let out = run(&["sweep", "--n", "3,2", "--u", "1,0", "--threads", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    let keys: Vec<(u64, f64)> = v["result"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["driving"]["n_sites"].as_u64().unwrap(), e["driving"]["u"].as_f64().unwrap()))
        .collect();
    assert_eq!(keys, vec![(2, 0.0), (2, 1.0), (3, 0.0), (3, 1.0)]);
}
