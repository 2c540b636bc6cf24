use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use weighted_inner::Complex64;

fn winner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_winner"))
        .args(args)
        .output()
        .expect("run winner")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SINGLE_ZERO: &str = r#"{"d0":0,"zeros":[{"z":[0.5,0.0],"mult":1}]}"#;

#[test]
fn construct_hardy_single_zero() {
    let tmp = TempDir::new().unwrap();
    let spec = write(tmp.path(), "spec.json", SINGLE_ZERO);
    let out = tmp.path().join("out");
    let o = winner(&["construct", "--spec", &spec, "--N", "512", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let report = json(&out.join("report.json"));
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["inner"]["verdict"], "Inner");
    assert!(report["oracle"]["max_deviation"].as_f64().unwrap() < 1e-8);
    assert_eq!(report["extraneous_zeros"], 0);

    let zeros = fs::read_to_string(out.join("zeros.csv")).unwrap();
    let lines: Vec<&str> = zeros.lines().collect();
    assert!(lines[0].starts_with("# winner zeros v1"));
    assert_eq!(lines[1], "re,im,kind");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].ends_with(",prescribed"));

    let boundary = fs::read_to_string(out.join("boundary.csv")).unwrap();
    assert_eq!(boundary.lines().nth(1), Some("theta,modulus"));
    for line in boundary.lines().skip(2) {
        let m: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(m > 0.99 && m < 1.0);
    }
    let b = json(&out.join("B.json"));
    assert_eq!(b["coeffs"].as_array().unwrap().len(), 513);
}

#[test]
fn construct_dirichlet_monomial() {
    let tmp = TempDir::new().unwrap();
    let spec = write(tmp.path(), "spec.json", r#"{"d0":2}"#);
    let out = tmp.path().join("out");
    let o = winner(&[
        "construct", "--spec", &spec, "--weight", "dirichlet", "--N", "64", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let coeffs = json(&out.join("B.json"))["coeffs"].clone();
    let c2 = coeffs[2][0].as_f64().unwrap();
    assert!((c2 - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    assert_eq!(coeffs[0][0].as_f64().unwrap(), 0.0);
}

#[test]
fn construct_rejects_malformed_spec() {
    let tmp = TempDir::new().unwrap();
    let spec = write(tmp.path(), "spec.json", r#"{"d0":0,"zeroes":[]}"#);
    let o = winner(&["construct", "--spec", &spec, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zeroes"));

    let spec = write(tmp.path(), "outside.json", r#"{"zeros":[{"z":[1.2,0.0]}]}"#);
    let o = winner(&["construct", "--spec", &spec, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn construct_reports_ill_conditioning() {
    let tmp = TempDir::new().unwrap();
    let spec = write(
        tmp.path(),
        "spec.json",
        r#"{"zeros":[{"z":[0.5,0.0],"mult":3},{"z":[0.5000001,0.0],"mult":3}]}"#,
    );
    let o = winner(&["construct", "--spec", &spec, "--N", "256", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hint:"));
}

#[test]
fn verify_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let e5 = write(
        tmp.path(),
        "e5.json",
        &format!(
            r#"{{"weight":{{"kind":"bergman"}},"coeffs":[[0,0],[0,0],[0,0],[0,0],[0,0],[{},0]]}}"#,
            6f64.sqrt()
        ),
    );
    assert_eq!(winner(&["verify", &e5, "--N", "64", "--out", dir]).status.code(), Some(0));
    assert_eq!(json(&tmp.path().join("report.json"))["inner"]["verdict"], "Inner");

    let h = 0.5f64.sqrt();
    let f = write(
        tmp.path(),
        "f.json",
        &format!(r#"{{"weight":{{"kind":"hardy"}},"coeffs":[[{h},0],[{h},0]]}}"#),
    );
    assert_eq!(winner(&["verify", &f, "--N", "64", "--out", dir]).status.code(), Some(3));
    let r = json(&tmp.path().join("report.json"));
    assert!((r["inner"]["ortho_defect"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    // A unit vector whose first pairing sits between tol and 100·tol.
    let eps = 1e-7f64;
    let a0 = (1.0 - eps * eps).sqrt();
    let g = write(
        tmp.path(),
        "g.json",
        &format!(r#"{{"weight":{{"kind":"hardy"}},"coeffs":[[{a0},0],[{eps},0]]}}"#),
    );
    assert_eq!(winner(&["verify", &g, "--N", "64", "--out", dir]).status.code(), Some(4));
}

#[test]
fn recover_hardy_inner_part() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("rec");
    // b = (2 + z)(z - 0.5)/(1 - 0.5z), truncated at degree 128.
    let n = 128;
    let mut bl = vec![0.0; n + 1];
    bl[0] = -0.5;
    for k in 1..=n {
        bl[k] = 0.75 * 0.5f64.powi(k as i32 - 1);
    }
    let mut b = vec![0.0; n + 1];
    for k in 0..=n {
        b[k] = 2.0 * bl[k] + if k > 0 { bl[k - 1] } else { 0.0 };
    }
    let coeffs: Vec<String> = b.iter().map(|x| format!("[{x},0]")).collect();
    let file = write(
        tmp.path(),
        "b.json",
        &format!(r#"{{"weight":{{"kind":"hardy"}},"coeffs":[{}]}}"#, coeffs.join(",")),
    );
    let o = winner(&["recover", &file, "--N", "512", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let u = json(&dir.join("u.json"));
    // Canonical phase makes u₀ positive, so u = -(z - 0.5)/(1 - 0.5z).
    for k in 0..8 {
        let want = -bl[k];
        assert!((u["coeffs"][k][0].as_f64().unwrap() - want).abs() < 1e-8, "k={k}");
    }
    let report = json(&dir.join("report.json"));
    assert!(report["residuals"]["max_reproducing_defect"].as_f64().unwrap() < 1e-8);

    let zero = write(tmp.path(), "zero.json", r#"{"weight":{"kind":"hardy"},"coeffs":[[0,0]]}"#);
    let o = winner(&["recover", &zero, "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zero vector"));
}

#[test]
fn scan_command() {
    let tmp = TempDir::new().unwrap();
    let spec = write(tmp.path(), "spec.json", SINGLE_ZERO);
    let out = tmp.path().join("c");
    let out_s = out.to_str().unwrap();
    assert_eq!(winner(&["construct", "--spec", &spec, "--N", "512", "--out", out_s]).status.code(), Some(0));
    let b = out.join("B.json");
    let b_s = b.to_str().unwrap();

    let o = winner(&["scan", b_s, "--radius", "1.5", "--out", out_s]);
    assert_eq!(o.status.code(), Some(1));

    let scan_dir = tmp.path().join("s");
    let o = winner(&["scan", b_s, "--spec", &spec, "--out", scan_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(scan_dir.join("zeros.csv")).unwrap();
    let kinds: Vec<&str> = csv.lines().skip(2).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(kinds, ["prescribed"]);
}

#[test]
fn power_kernel_scan_lists_candidates() {
    let tmp = TempDir::new().unwrap();
    let spec = write(tmp.path(), "spec.json", r#"{"zeros":[{"z":[0.9,0.0]}]}"#);
    let out = tmp.path().join("p");
    let o = winner(&[
        "construct", "--spec", &spec, "--weight", r#"{"kind":"power","gamma":8}"#, "--N", "1024",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("zeros.csv")).unwrap();
    let extraneous: Vec<(f64, f64)> = csv
        .lines()
        .skip(2)
        .filter(|l| l.ends_with(",extraneous"))
        .map(|l| {
            let mut it = l.split(',');
            (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
        })
        .collect();
    // 1 - (1 - 0.9z)^(-8)/K(0.9) vanishes where 1 - 0.9z = 0.19·ω, ω⁸ = 1.
    assert_eq!(extraneous.len(), 2);
    for (re, im) in extraneous {
        let z = Complex64::new(re, im);
        let w = (Complex64::new(1.0, 0.0) - z * 0.9) / 0.19;
        assert!((w.norm() - 1.0).abs() < 1e-8 && (w.powu(8) - 1.0).norm() < 1e-7);
    }
}

#[test]
fn reports_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let spec = write(
        tmp.path(),
        "spec.json",
        r#"{"d0":1,"zeros":[{"z":[0.3,0.4],"mult":2},{"z":[-0.5,0.1]}]}"#,
    );
    let mut texts = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let o = winner(&[
            "construct", "--spec", &spec, "--weight", "bergman", "--N", "512", "--seed", "7",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        texts.push(
            ["B.json", "report.json", "zeros.csv", "boundary.csv"]
                .map(|f| fs::read(out.join(f)).unwrap()),
        );
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn weight_from_file() {
    let tmp = TempDir::new().unwrap();
    let w = write(
        tmp.path(),
        "w.json",
        r#"{"kind":"perturbed","base":{"kind":"dirichlet"},"overrides":{"1":1.4142135623730951}}"#,
    );
    let spec = write(tmp.path(), "spec.json", SINGLE_ZERO);
    let out = tmp.path().join("o");
    let o = winner(&["construct", "--spec", &spec, "--weight", &w, "--N", "256", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&out.join("report.json"))["weight"]["kind"], "perturbed");

    let o = winner(&["construct", "--spec", &spec, "--weight", r#"{"kind":"explicit","omega":[]}"#]);
    assert_eq!(o.status.code(), Some(1));
}
