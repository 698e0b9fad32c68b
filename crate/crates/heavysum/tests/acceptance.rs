//! Acceptance battery: one line per criterion, non-zero exit on any failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use heavysum::cli::suite_config;
use heavysum::report::{self, Format};
use heavysum::suite::{self, CheckOutcome, SuiteOptions, CRITERIA};
use serde_json::Value;

const TITLES: [&str; 12] = [
    "membership battery",
    "closure battery",
    "exact product-bound certificate",
    "statistical dominance under NLOD models",
    "quadrature vs Monte Carlo oracle",
    "deadly risks",
    "generalized r-mean dominance",
    "super-Frechet and super-Pareto",
    "Value-at-Risk superadditivity",
    "asymptotic VaR ratio",
    "random-weight bound",
    "reproducibility",
];

fn line(k: u8, ok: bool, secs: f64, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {k:>2} [{status}] {} ({secs:.1}s){detail}", TITLES[k as usize - 1]);
}

fn run_cli(dir: &Path, seed: u64) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_heavysum"))
        .args(["suite", "--seed", &seed.to_string(), "--out"])
        .arg(dir)
        .env_remove("HEAVYSUM_SEED")
        .status()
        .expect("binary runs")
        .code()
        .unwrap_or(-1)
}

fn verdicts(dir: &Path) -> BTreeMap<String, String> {
    let index: Value = serde_json::from_str(&fs::read_to_string(dir.join("index.json")).unwrap()).unwrap();
    index["report"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["id"].as_str().unwrap().to_string(), e["observed"].as_str().unwrap().to_string()))
        .collect()
}

fn bodies(dir: &Path) -> BTreeMap<String, String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let text = fs::read_to_string(&p).unwrap();
            (p.file_name().unwrap().to_string_lossy().into_owned(), report::body(&text).to_string())
        })
        .collect()
}

fn main() {
    let seed = 42;
    let opts = SuiteOptions { seed, inject: Vec::new() };
    let mut all: Vec<CheckOutcome> = Vec::new();
    let mut failures = 0;
    for k in CRITERIA {
        let t = Instant::now();
        let outcomes = suite::run_criterion(k, &opts);
        let ok = !outcomes.is_empty() && outcomes.iter().all(|o| o.ok);
        let bad: Vec<String> = outcomes
            .iter()
            .filter(|o| !o.ok)
            .map(|o| format!("{} (expected {}, observed {}; {})", o.id, o.expected, o.observed, o.detail))
            .collect();
        let detail = if bad.is_empty() {
            format!(": {} checks", outcomes.len())
        } else {
            format!(": {}", bad.join("; "))
        };
        line(k, ok, t.elapsed().as_secs_f64(), &detail);
        failures += usize::from(!ok);
        all.extend(outcomes);
    }

    let t = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    suite::write(&all, &suite_config(&opts, Format::Json), &a, Format::Json).unwrap();
    let code_b = run_cli(&b, seed);
    let code_c = run_cli(&c, 7);
    let (ba, bb) = (bodies(&a), bodies(&b));
    let identical = ba.len() == all.len() + 1 && ba == bb;
    let (va, vc) = (verdicts(&a), verdicts(&c));
    let flips: Vec<&String> = va.keys().filter(|k| va.get(*k) != vc.get(*k)).collect();
    let ok = code_b == 0 && code_c == 0 && identical && flips.is_empty() && va.len() == vc.len();
    line(
        12,
        ok,
        t.elapsed().as_secs_f64(),
        &format!(
            ": same seed byte-identical bodies {identical} ({} files), exit codes {code_b}/{code_c}, verdict flips {flips:?}",
            ba.len()
        ),
    );
    failures += usize::from(!ok);

    println!("{} of 12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
