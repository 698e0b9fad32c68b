use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn heavysum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heavysum"))
        .args(args)
        .env_remove("HEAVYSUM_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn check_exit_codes() {
    let o = heavysum(&["check", "--dist", "pareto(alpha=1)", "--criterion", "class-h"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["report"]["verdict"], "pass");

    let o = heavysum(&["check", "--dist", "frechet(alpha=2)", "--criterion", "class-h"]);
    assert_eq!(code(&o), 1);
    let w = &json(&o)["report"]["witness"];
    let (x, y) = (w[0].as_f64().unwrap(), w[1].as_f64().unwrap());
    assert_eq!(x, y);
    assert!((x.ln()).abs() < 0.1, "witness {x}");

    // With a grid containing 1 the witness is exactly (1, 1).
    let o = heavysum(&[
        "check", "--dist", "frechet(alpha=2)", "--grid-points", "201",
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["report"]["witness"], serde_json::json!([1.0, 1.0]));

    let o = heavysum(&["check", "--dist", "pareto(alpha=1,bogus=2)"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`bogus`"));
}

#[test]
fn check_other_criteria() {
    for (dist, criterion, want) in [
        ("pareto(alpha=1)", "super-frechet", 0),
        ("inverse_geometric(c=1)", "super-frechet", 1),
        ("burr(alpha=0.8,tau=0.9)", "super-pareto", 0),
        ("pareto(alpha=1)", "sufficient", 0),
        ("frechet(alpha=0.8)", "class-h-strict", 0),
    ] {
        let o = heavysum(&["check", "--dist", dist, "--criterion", criterion]);
        assert_eq!(code(&o), want, "{dist} {criterion}");
    }
    let o = heavysum(&["check", "--dist", "pareto(alpha=1)", "--criterion", "class-x"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&heavysum(&[])), 3);
    assert_eq!(code(&heavysum(&["check"])), 3);
    assert_eq!(code(&heavysum(&["dominance", "--mode", "nope", "--dist", "pareto(alpha=1)"])), 3);
    assert_eq!(code(&heavysum(&["dominance", "--mode", "bound"])), 3);
    let o = heavysum(&["dominance", "--mode", "bound", "--dist", "pareto(alpha=1)", "--weights", "0.5,0.4"]);
    assert_eq!(code(&o), 3);
    let o = heavysum(&["dominance", "--mode", "empirical", "--dist", "pareto(alpha=1)", "--dep", "gauss(rho=-0.9)", "--weights", "0.3,0.3,0.4"]);
    assert_eq!(code(&o), 3);
    assert_eq!(code(&heavysum(&["--help"])), 0);
}

#[test]
fn dominance_modes() {
    let o = heavysum(&["dominance", "--mode", "bound", "--dist", "pareto(alpha=1)", "--weights", "0.5,0.5"]);
    assert_eq!(code(&o), 0);
    let o = heavysum(&["dominance", "--mode", "bound", "--dist", "frechet(alpha=2)", "--weights", "0.5,0.5"]);
    assert_eq!(code(&o), 1);
    let o = heavysum(&[
        "dominance", "--mode", "empirical", "--dist", "pareto(alpha=1)", "--weights", "0.5,0.5",
        "--dep", "countermono", "--m", "1000000", "--seed", "42",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["config"]["seed"], 42);
    assert_eq!(v["report"]["dep"], "countermono");
    let o = heavysum(&[
        "dominance", "--mode", "rmean", "--dists", "pareto(alpha=0.7);burr(alpha=0.8,tau=0.9)",
        "--r", "0", "--weights", "0.5,0.5",
    ]);
    assert_eq!(code(&o), 0);
    for extra in [
        &["--mode", "quadrature", "--dist", "pareto(alpha=1)", "--grid-points", "30"][..],
        &["--mode", "var", "--dist", "pareto(alpha=1)", "--m", "100000"],
        &["--mode", "random-weights", "--dist", "pareto(alpha=1)", "--event-prob", "0.5", "--m", "100000"],
        &["--mode", "deadly", "--dist", "deadly(p=0.3)", "--dep", "comono"],
        &["--mode", "ratio", "--dist", "pareto(alpha=0.5)", "--p", "0.9,0.99"],
    ] {
        let mut args = vec!["dominance"];
        args.extend_from_slice(extra);
        let o = heavysum(&args);
        assert_eq!(code(&o), 0, "{extra:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = heavysum(&[
        "dominance", "--mode", "majorize", "--dist", "pareto(alpha=1)", "--weights", "0.5,0.5",
        "--compare-weights", "0.999,0.001", "--m", "100000",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["report"]["exploratory"], true);
    let o = heavysum(&[
        "dominance", "--mode", "majorize", "--dist", "pareto(alpha=1)", "--weights", "0.999,0.001",
        "--compare-weights", "0.5,0.5",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_heavysum"));
        c.args(["dominance", "--mode", "empirical", "--dist", "pareto(alpha=1)", "--m", "10000"]);
        match env {
            Some(s) => c.env("HEAVYSUM_SEED", s),
            None => c.env_remove("HEAVYSUM_SEED"),
        };
        let v: Value = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        v["config"]["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None), 42);
    assert_eq!(run(Some("9")), 9);
}

#[test]
fn reports_are_reproducible_and_csv_is_a_projection() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str, fmt: &str| {
        vec![
            "dominance".to_string(), "--mode".into(), "empirical".into(), "--dist".into(),
            "burr(alpha=0.8,tau=0.9)".into(), "--dep".into(), "gauss(rho=-0.4)".into(), "--m".into(),
            "100000".into(), "--out".into(), out.into(), "--format".into(), fmt.into(),
        ]
    };
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    for (name, fmt) in [("a.json", "json"), ("b.json", "json"), ("c.csv", "csv")] {
        let a: Vec<String> = args(&p(name), fmt);
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        assert_eq!(code(&heavysum(&a)), 0);
    }
    let a = fs::read_to_string(p("a.json")).unwrap();
    let b = fs::read_to_string(p("b.json")).unwrap();
    assert_eq!(heavysum::report::body(&a), heavysum::report::body(&b));
    assert!(a.contains("\"metadata\""));
    let csv = fs::read_to_string(p("c.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,F_target,F_sum,margin"));
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(lines.count(), v["report"]["points"].as_array().unwrap().len());
    assert!(!csv.contains('\r'));
}

#[test]
fn suite_with_injected_counterexample_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("suite");
    let o = Command::new(env!("CARGO_BIN_EXE_heavysum"))
        .args(["suite", "--format", "csv", "--inject", "frechet(alpha=1.5)", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(out.join("index.json").exists());
    assert!(out.join("index.csv").exists());
    let index: Value = serde_json::from_str(&fs::read_to_string(out.join("index.json")).unwrap()).unwrap();
    let entries = index["report"]["entries"].as_array().unwrap();
    let failed: Vec<&str> = entries
        .iter()
        .filter(|e| e["ok"] == false)
        .map(|e| e["id"].as_str().unwrap())
        .collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|id| id.contains("frechet-alpha-1.5")), "{failed:?}");
    let csvs = fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(csvs, entries.len() + 1);
}
