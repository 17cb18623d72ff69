use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name)
}

fn sims(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sims")).args(args).output().expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("not JSON: {l}: {e}")))
        .collect()
}

fn cx(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn classify_limit_circle_oscillator() {
    let p = problem("osc.prob");
    let out = sims(&["classify", "--problem", p.to_str().unwrap(), "--lambda", "0+1i"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["case"], "III");
    assert_eq!(recs[0]["asymptotic_case"], "III");
    // fixed key order: case first
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("{\"case\":\"III\""));
}

#[test]
fn poles_of_the_rotated_oscillator() {
    let p = problem("osc_i.prob");
    let out = sims(&["poles", "--problem", p.to_str().unwrap(), "--rect", "-1,-1,15,15"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for n in 0..4 {
        let want = (4.0 * n as f64 + 1.0) * r;
        assert!(
            recs.iter().any(|v| {
                let (x, y) = cx(&v["location"]);
                (x - want).abs() < 1e-4 && (y - want).abs() < 1e-4 && v["order"] == 1
            }),
            "missing pole n = {n}"
        );
    }
    // (4n + 1) e^{i pi/4} for n = 4, 5 also lie in this rectangle
    assert_eq!(recs.len(), 6);
}

#[test]
fn input_errors_exit_one_with_one_line() {
    for args in [
        vec!["bogus"],
        vec!["classify", "--problem", "/nonexistent.prob", "--lambda", "0+1i"],
        vec!["verify", "--tol", "nonsense=1"],
        vec!["verify", "--filter", "nope"],
    ] {
        let out = sims(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
}

#[test]
fn corrupted_wronskian_tolerance_fails_numerically() {
    let out = sims(&["verify", "--filter", "odecore", "--tol", "wronskian=1e-30"]);
    assert_eq!(out.status.code(), Some(2));
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["pass"], false);
}

#[test]
fn verify_filter_selects_module() {
    let out = sims(&["verify", "--filter", "weyl"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert!(!recs.is_empty());
    assert!(recs.iter().all(|r| r["module"] == "weyl" && r["pass"] == true));
}

#[test]
fn verify_full_suite_passes() {
    let out = sims(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let modules: Vec<String> = records(&out).iter().map(|r| r["module"].as_str().unwrap().to_string()).collect();
    for m in ["problem", "rangegeom", "odecore", "weyl", "classify", "mextend", "resolventops"] {
        assert!(modules.iter().any(|x| x == m), "no {m} checks");
    }
}

#[test]
fn seeded_output_is_byte_identical() {
    let p = problem("free.prob");
    let args = ["resolvent-check", "--problem", p.to_str().unwrap(), "--lambda", "0+1i", "--count", "4", "--seed", "11"];
    let (a, b) = (sims(&args), sims(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let recs = records(&a);
    assert_eq!(recs.len(), 5);
    assert!(recs[4]["max_bound_ratio"].as_f64().unwrap() <= 1.0);
}

#[test]
fn m_eval_free_problem_and_output_file() {
    let p = problem("free.prob");
    let dir = std::env::temp_dir().join(format!("sims-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("m.jsonl");
    let out = sims(&["m-eval", "--problem", p.to_str().unwrap(), "--lambda", "0+1i", "--output", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&file).unwrap();
    let v: Value = serde_json::from_str(text.trim()).unwrap();
    let (re, im) = cx(&v["m"]);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    assert!((re - r).abs() < 1e-8 && (im + r).abs() < 1e-8);
    assert_eq!(v["kind"], "limit-point");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn samples_file_and_region() {
    let p = problem("free.prob");
    let dir = std::env::temp_dir().join(format!("sims-samples-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("f.txt");
    let body: String = (0..=200)
        .map(|k| {
            let x = 1.0 + 2.0 * k as f64 / 200.0;
            let s = (std::f64::consts::PI * (x - 1.0) / 2.0).sin().powi(2);
            format!("{x} {s}+{}i\n", 0.5 * s)
        })
        .collect();
    std::fs::write(&file, body).unwrap();
    let out = sims(&["resolvent-check", "--problem", p.to_str().unwrap(), "--lambda", "0+1i", "--samples", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = records(&out);
    assert_eq!(recs.len(), 2);
    assert!(recs[0]["bound_ratio"].as_f64().unwrap() <= 1.0);
    std::fs::remove_dir_all(&dir).unwrap();

    let out = sims(&["region", "--problem", p.to_str().unwrap(), "--lambda", "-1-1i"]);
    let recs = records(&out);
    assert_eq!(recs[0]["cone"], "wedge");
    assert_eq!(recs[1]["admissible"], true);
    assert_eq!(recs[1]["in_q"], false);
}
