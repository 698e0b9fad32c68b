//! Report files: canonical JSON with the resolved configuration embedded,
//! and CSV projections.
//!
//! A JSON document has three top-level keys in this order: `config`,
//! `report` and `metadata`. Everything before `metadata` is the body and
//! is byte-identical across runs with the same configuration and seed.

use std::fs;
use std::io;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use heavysum_core::dominance::{DominanceReport, RatioRow};
use heavysum_core::{Grid, MembershipReport};
use serde::Serialize;
use serde_json::Value;

pub const TOOL: &str = concat!("heavysum ", env!("CARGO_PKG_VERSION"));

/// Separator between the body and the metadata block of a JSON document.
const METADATA_KEY: &str = ",\n  \"metadata\": ";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Fully resolved run configuration, embedded in every report.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dists: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dep: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject: Option<Vec<String>>,
    pub format: Option<Format>,
}

#[derive(Serialize)]
struct Metadata {
    tool: &'static str,
    generated_unix: u64,
}

#[derive(Serialize)]
struct Document<'a, T> {
    config: &'a RunConfig,
    report: &'a T,
    metadata: Metadata,
}

/// Pretty JSON document with a trailing newline.
pub fn to_json<T: Serialize>(config: &RunConfig, report: &T) -> String {
    let generated_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let doc = Document {
        config,
        report,
        metadata: Metadata {
            tool: TOOL,
            generated_unix,
        },
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
    s.push('\n');
    s
}

/// The part of a JSON document that excludes the metadata block.
pub fn body(json: &str) -> &str {
    json.rfind(METADATA_KEY).map_or(json, |i| &json[..i])
}

/// JSON value for an extended real, using the string forms for non-finite
/// values like the library reports do.
pub fn ext(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else if v.is_nan() {
        Value::from("nan")
    } else if v > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields")
}

/// `x, F_target, F_sum, margin` per evaluation point.
pub fn dominance_csv(report: &DominanceReport) -> String {
    let mut w = csv_writer();
    w.write_record(["x", "F_target", "F_sum", "margin"]).expect("in-memory writer");
    for p in &report.points {
        w.write_record([p.x, p.f_target, p.f_sum, p.margin].map(|v| v.to_string()))
            .expect("in-memory writer");
    }
    finish(w)
}

/// One summary row per report.
pub fn membership_csv(report: &MembershipReport) -> String {
    let mut w = csv_writer();
    w.write_record([
        "criterion", "verdict", "worst_margin", "witness_x", "witness_y", "tol", "tested", "dist",
    ])
    .expect("in-memory writer");
    let (wx, wy) = report
        .witness
        .map_or((String::new(), String::new()), |[x, y]| (x.to_string(), y.to_string()));
    w.write_record([
        report.criterion.to_string(),
        report.verdict.to_string(),
        report.worst_margin.to_string(),
        wx,
        wy,
        report.tol.to_string(),
        report.tested.to_string(),
        report.dist.clone(),
    ])
    .expect("in-memory writer");
    finish(w)
}

pub fn ratio_csv(rows: &[RatioRow]) -> String {
    let mut w = csv_writer();
    w.write_record(["p", "var_single", "var_sum", "ratio", "asymptotic"])
        .expect("in-memory writer");
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.var_single.to_string(),
            r.var_sum.to_string(),
            r.ratio.to_string(),
            r.asymptotic.to_string(),
        ])
        .expect("in-memory writer");
    }
    finish(w)
}

/// Generic table: header plus rows of already formatted cells.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv_writer();
    w.write_record(header).expect("in-memory writer");
    for r in rows {
        w.write_record(r).expect("in-memory writer");
    }
    finish(w)
}

/// Writes `contents` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> io::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, contents)
        }
        None => {
            use io::Write;
            io::stdout().lock().write_all(contents.as_bytes())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use heavysum_core::{dominance, membership, Distribution, WeightVector};

    #[test]
    fn body_excludes_metadata() {
        let cfg = RunConfig {
            command: "check".into(),
            ..RunConfig::default()
        };
        let r = membership::check_subadditive(
            &Distribution::pareto(1.0).unwrap(),
            &Grid::log(0.1, 10.0, 5).unwrap(),
            1e-9,
        );
        let a = to_json(&cfg, &r);
        let b = body(&a);
        assert!(b.len() < a.len());
        assert!(!b.contains("generated_unix"));
        assert!(a.ends_with("}\n"));
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["report"]["verdict"], "pass");
        assert_eq!(v["config"]["command"], "check");
    }

    #[test]
    fn csv_has_header_and_lf() {
        let r = dominance::check_product_bound(
            &Distribution::pareto(1.0).unwrap(),
            &WeightVector::uniform(2).unwrap(),
            &Grid::log(0.1, 10.0, 3).unwrap(),
        );
        let s = dominance_csv(&r);
        let lines: Vec<&str> = s.split('\n').collect();
        assert_eq!(lines[0], "x,F_target,F_sum,margin");
        assert_eq!(lines.len(), 5);
        assert!(!s.contains('\r'));
    }

    #[test]
    fn ext_strings() {
        assert_eq!(ext(f64::INFINITY), "inf");
        assert_eq!(ext(1.5), 1.5);
    }
}
