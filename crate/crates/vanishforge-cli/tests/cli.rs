use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_vanishforge"));
    c.env_remove("VANISHFORGE_PRECISION");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

fn construct_55(dir: &TempDir, name: &str) -> std::path::PathBuf {
    let out = dir.path().join(name);
    let o = run(&["construct", "--p1", "5", "--p2", "5", "--k", "6", "--l1", "2", "--l2", "2", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn cotsum_classical_value() {
    let o = run(&["cotsum", "--N", "5", "--power", "2", "--ones", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((num(&v["value"][0]) - 4.0).abs() < 1e-30);
    assert_eq!(v["closed_form"], "4");
    let human = stdout(&run(&["cotsum", "--N", "5", "--power", "2", "--ones"]));
    assert!(human.contains("closed form = 4"), "{human}");
}

#[test]
fn cotsum_fourth_power_matches_closed_form() {
    let o = run(&["cotsum", "--N", "7", "--power", "4", "--ones", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["closed_form"], "38");
    assert!((num(&v["value"][0]) - 38.0).abs() < 1e-28);
}

#[test]
fn dims_example() {
    let o = run(&["dims", "--p1", "5", "--p2", "7", "--k", "3", "--l1", "2", "--l2", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().next(), Some("2"));
}

#[test]
fn basis_files_and_sizes() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("b5.json");
    let o = run(&["basis", "--level", "5", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = read(&path);
    assert_eq!(doc["schema"], "vanishforge.basis/1");
    let f = doc["functions"].as_array().unwrap();
    assert_eq!(f.len(), 3);
    // alpha_1 = sqrt5 i/(4 pi) (1, -1, -1, 1)
    let a = 5f64.sqrt() / (4.0 * std::f64::consts::PI);
    let beta = f[1]["function"]["beta"].as_array().unwrap();
    for (b, s) in beta.iter().zip([1.0, -1.0, -1.0, 1.0]) {
        assert!(num(&b[0]).abs() < 1e-30);
        assert!((num(&b[1]) - s * a).abs() < 1e-14);
    }
    assert_eq!(f[2]["order"], "2");

    for (level, n) in [("4", 2), ("3", 1)] {
        let o = run(&["basis", "--level", level, "--raw", "--format", "json"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["functions"].as_array().unwrap().len(), n);
    }
}

fn weakfn(dir: &TempDir, name: &str, level: usize, beta: &[(f64, f64)]) -> std::path::PathBuf {
    let doc = json!({
        "schema": "vanishforge.weakfn/1",
        "level": level,
        "beta": beta.iter().map(|(r, i)| [r.to_string(), i.to_string()]).collect::<Vec<_>>(),
    });
    let p = dir.path().join(name);
    fs::write(&p, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    p
}

#[test]
fn order_examples() {
    let dir = TempDir::new().unwrap();
    let b5 = dir.path().join("b5.json");
    assert_eq!(code(&run(&["basis", "--level", "5", "--output", b5.to_str().unwrap()])), 0);
    let o = run(&["order", "--input", b5.to_str().unwrap(), "--index", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("order 2, witness u=3"), "{}", stdout(&o));

    let zero = weakfn(&dir, "zero.json", 5, &[(0.0, 0.0); 4]);
    assert_eq!(stdout(&run(&["order", "--input", zero.to_str().unwrap()])).trim(), "order ∞");

    let legendre = weakfn(&dir, "leg.json", 5, &[(1.0, 0.0), (-1.0, 0.0), (-1.0, 0.0), (1.0, 0.0)]);
    let out = stdout(&run(&["order", "--input", legendre.to_str().unwrap()]));
    assert!(out.starts_with("order 1,"), "{out}");
}

#[test]
fn order_in_the_threshold_band_is_ambiguous() {
    // the alpha_2 direction (1, -r, r, -1) with r = cot(pi/5)/cot(2pi/5)
    // rounded to a double: S_1 is about 1e-16 of the vector size, between
    // 2^-100 and 2^-50
    let dir = TempDir::new().unwrap();
    let pi = std::f64::consts::PI;
    let r = (pi / 5.0).tan().recip() / (2.0 * pi / 5.0).tan().recip();
    let p = weakfn(&dir, "amb.json", 5, &[(1.0, 0.0), (-r, 0.0), (r, 0.0), (-1.0, 0.0)]);
    let o = run(&["order", "--input", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}{}", stdout(&o), stderr(&o));
    assert!(stderr(&o).contains("ambiguity"), "{}", stderr(&o));
    // coefficients not summing to zero: rejected as bad input
    let q = weakfn(&dir, "pole.json", 5, &[(1.0, 0.0), (1.0, 0.0), (1.0, 0.0), (1.0, 0.0)]);
    assert_eq!(code(&run(&["order", "--input", q.to_str().unwrap()])), 1);
}

#[test]
fn construct_hypothesis_violation_exits_one() {
    let o = run(&["construct", "--p1", "5", "--p2", "5", "--k", "9", "--vanish-set", "0"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("k <="), "{}", stderr(&o));
}

#[test]
fn argument_errors_exit_one() {
    assert_eq!(code(&run(&["construct", "--p1", "5"])), 1);
    assert_eq!(code(&run(&["construct", "--p1", "7", "--p2", "7", "--k", "5", "--vanish-set", "1", "--l1", "1", "--l2", "1"])), 1);
    assert_eq!(code(&run(&["cotsum", "--N", "5", "--power", "2", "--ones", "--precision", "32"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn certificates_are_deterministic_and_verify() {
    let dir = TempDir::new().unwrap();
    let a = construct_55(&dir, "a.json");
    let b = construct_55(&dir, "b.json");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let doc = read(&a);
    assert_eq!(doc["schema"], "vanishforge.certificate/1");
    assert_eq!(doc["passed"], true);
    let o = run(&["verify", "--certificate", a.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("verification passed"));
}

#[test]
fn recheck_point_three_is_non_vanishing() {
    let dir = TempDir::new().unwrap();
    let a = construct_55(&dir, "a.json");
    let o = run(&["verify", "--certificate", a.to_str().unwrap(), "--recheck-points", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let line = stdout(&o).lines().find(|l| l.contains("s=3:")).map(str::to_owned).unwrap_or_default();
    assert!(line.contains("(non-vanishing, non-trivial)"), "{}", stdout(&o));
}

#[test]
fn tampered_certificate_fails_at_the_perturbed_claims() {
    let dir = TempDir::new().unwrap();
    let a = construct_55(&dir, "a.json");
    let mut doc = read(&a);
    let coeff = &mut doc["basis"][0]["form"]["terms"][1]["coeff"][0];
    let s = coeff.as_str().unwrap().to_owned();
    // change the ninth digit, well inside the mantissa
    let mut chars: Vec<char> = s.chars().collect();
    let idx = chars.iter().enumerate().filter(|(_, c)| c.is_ascii_digit()).nth(8).unwrap().0;
    chars[idx] = if chars[idx] == '9' { '1' } else { '9' };
    *coeff = Value::String(chars.into_iter().collect());
    let t = dir.path().join("t.json");
    fs::write(&t, serde_json::to_string_pretty(&doc).unwrap()).unwrap();

    let o = run(&["verify", "--certificate", t.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 3);
    let rep: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep["passed"], false);
    let failed: Vec<&str> = rep["claims"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert!(failed.iter().any(|id| id.starts_with("vanish:")), "{failed:?}");
    assert!(failed.iter().any(|id| id.starts_with("q-digest:")), "{failed:?}");
    assert!(!rep["changed"].as_array().unwrap().is_empty());
}

#[test]
fn files_round_trip_through_readers() {
    let dir = TempDir::new().unwrap();
    let b = dir.path().join("b7.json");
    assert_eq!(code(&run(&["basis", "--level", "7", "--output", b.to_str().unwrap()])), 0);
    for i in 0..5 {
        let o = run(&["order", "--input", b.to_str().unwrap(), "--index", &i.to_string(), "--format", "json"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["order"], i.to_string());
    }
    let c = dir.path().join("c.json");
    let o = run(&["construct", "--p1", "7", "--p2", "7", "--k", "5", "--vanish-set", "1,3", "--output", c.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read(&c)["exactness"], "exact");
    assert_eq!(code(&run(&["verify", "--certificate", c.to_str().unwrap()])), 0);
    let r = dir.path().join("r.json");
    let o = run(&["verify", "--certificate", c.to_str().unwrap(), "--output", r.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(&r)["schema"], "vanishforge.verify/1");
}

#[test]
fn precision_from_env_and_flag() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("e.json");
    let o = bin()
        .env("VANISHFORGE_PRECISION", "160")
        .args(["cotsum", "--N", "5", "--power", "2", "--ones", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let digits = |o: &Output| {
        let v: Value = serde_json::from_str(&stdout(o)).unwrap();
        v["value"][0].as_str().unwrap().len()
    };
    let env_len = digits(&o);
    let default_len = digits(&run(&["cotsum", "--N", "5", "--power", "2", "--ones", "--format", "json"]));
    assert!(env_len < default_len, "{env_len} vs {default_len}");

    let o = bin()
        .env("VANISHFORGE_PRECISION", "160")
        .args(["construct", "--p1", "5", "--p2", "5", "--k", "4", "--l1", "2", "--l2", "2", "--precision", "192"])
        .args(["--output", p.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read(&p)["precision"]["precision_bits"], 192);
}
