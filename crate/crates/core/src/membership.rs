//! Grid checkers for subadditivity of `h_F`, its sufficient conditions,
//! and the super-Fréchet / super-Pareto shape conditions.
//!
//! Verdicts are numerical evidence on a finite grid, never proofs.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;

use crate::dist::Distribution;
use crate::grid::Grid;
use crate::math;
use crate::serde_ext::{ext_f64, ext_f64_opt_pair};

/// Default tolerance for membership checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Rounding allowance for strict subadditivity, in units of machine epsilon
/// times `h(x) + h(y)`.
const STRICT_ULPS: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Process exit code: 0 pass, 1 fail, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }

    /// Worst of two verdicts (fail dominates inconclusive dominates pass).
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    ClassH,
    ClassHStrict,
    Sufficient,
    SuperFrechet,
    SuperPareto,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::ClassH,
        Criterion::ClassHStrict,
        Criterion::Sufficient,
        Criterion::SuperFrechet,
        Criterion::SuperPareto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::ClassH => "class-h",
            Criterion::ClassHStrict => "class-h-strict",
            Criterion::Sufficient => "sufficient",
            Criterion::SuperFrechet => "super-frechet",
            Criterion::SuperPareto => "super-pareto",
        }
    }

    pub fn from_name(s: &str) -> Option<Criterion> {
        Criterion::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One named condition inside a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubCheck {
    pub name: &'static str,
    pub verdict: Verdict,
    #[serde(serialize_with = "ext_f64")]
    pub worst_margin: f64,
    #[serde(serialize_with = "ext_f64_opt_pair")]
    pub witness: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub criterion: Criterion,
    pub verdict: Verdict,
    pub grid: Grid,
    pub tol: f64,
    /// Smallest normalized margin over everything tested; negative values
    /// are violations.
    #[serde(serialize_with = "ext_f64")]
    pub worst_margin: f64,
    #[serde(serialize_with = "ext_f64_opt_pair")]
    pub witness: Option<[f64; 2]>,
    pub dist: String,
    /// Number of evaluation points or pairs that entered the check.
    pub tested: usize,
    /// Some grid points were dropped (CDF in `{0, 1}` or infinite values).
    pub truncated: bool,
    pub checks: Vec<SubCheck>,
    pub notes: Vec<String>,
}

impl MembershipReport {
    fn new(criterion: Criterion, dist: &Distribution, grid: &Grid, tol: f64) -> Self {
        MembershipReport {
            criterion,
            verdict: Verdict::Pass,
            grid: *grid,
            tol,
            worst_margin: f64::INFINITY,
            witness: None,
            dist: dist.expression(),
            tested: 0,
            truncated: false,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn note(&mut self, s: &str) {
        self.notes.push(String::from(s));
    }
}

/// Runs the checker selected by `criterion`.
pub fn check(dist: &Distribution, criterion: Criterion, grid: &Grid, tol: f64) -> MembershipReport {
    match criterion {
        Criterion::ClassH => check_subadditive(dist, grid, tol),
        Criterion::ClassHStrict => check_subadditive_strict(dist, grid, tol),
        Criterion::Sufficient => check_sufficient_conditions(dist, grid, tol),
        Criterion::SuperFrechet => check_super_frechet(dist, grid, tol),
        Criterion::SuperPareto => check_super_pareto(dist, grid, tol),
    }
}

/// `h` of the distribution recentred to essential infimum 0.
struct Recentred<'a> {
    dist: &'a Distribution,
    shift: f64,
}

impl<'a> Recentred<'a> {
    fn new(dist: &'a Distribution, report: &mut MembershipReport) -> Option<Self> {
        let shift = dist.essinf();
        if !shift.is_finite() {
            report.verdict = Verdict::Inconclusive;
            report.note("essential infimum is not finite");
            return None;
        }
        if shift != 0.0 {
            report.note("distribution recentred to essential infimum 0");
        }
        Some(Recentred { dist, shift })
    }

    fn h(&self, x: f64) -> f64 {
        if self.shift == 0.0 {
            self.dist.h_f(x)
        } else {
            let h = -self.dist.log_cdf(1.0 / x + self.shift);
            if h == 0.0 {
                0.0
            } else {
                h
            }
        }
    }

    fn log_cdf(&self, x: f64) -> f64 {
        self.dist.log_cdf(x + self.shift)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.dist.cdf(x + self.shift)
    }

    /// `Q(1 - q) - essinf`.
    fn quantile_upper(&self, q: f64) -> f64 {
        self.dist.quantile_upper(q).map_or(f64::NAN, |v| v - self.shift)
    }
}

fn log_dist_to_one(x: f64, y: f64) -> f64 {
    let (a, b) = (math::ln(x), math::ln(y));
    a * a + b * b
}

/// Worst-pair tracker: lowest normalized margin, with the witness among
/// near-ties (within `1e-12`) chosen closest to `(1, 1)` on the log scale.
struct Worst {
    margin: f64,
    at: Option<[f64; 2]>,
    at_margin: f64,
}

impl Worst {
    fn new() -> Self {
        Worst {
            margin: f64::INFINITY,
            at: None,
            at_margin: f64::INFINITY,
        }
    }

    fn offer(&mut self, margin: f64, x: f64, y: f64) {
        self.margin = self.margin.min(margin);
        let replace = match self.at {
            None => true,
            Some([a, b]) => {
                margin < self.at_margin - 1e-12
                    || (margin <= self.at_margin + 1e-12
                        && log_dist_to_one(x, y) < log_dist_to_one(a, b))
            }
        };
        if replace {
            self.at = Some([x, y]);
            self.at_margin = margin;
        }
    }
}

struct PairScan {
    worst: Worst,
    strict_fail: Option<[f64; 2]>,
    strict_worst: f64,
    infinite: bool,
    tested: usize,
}

fn scan_pairs(h: &Recentred<'_>, xs: &[f64]) -> PairScan {
    let hx: Vec<f64> = xs.iter().map(|&x| h.h(x)).collect();
    let n = xs.len();
    let mut scan = PairScan {
        worst: Worst::new(),
        strict_fail: None,
        strict_worst: f64::INFINITY,
        infinite: false,
        tested: 0,
    };
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (xs[i], xs[j]);
            let sum = hx[i] + hx[j];
            let hs = h.h(x + y);
            if !(sum.is_finite() && hs.is_finite()) {
                scan.infinite = true;
                continue;
            }
            scan.tested += 1;
            let raw = sum - hs;
            let norm = raw / sum.abs().max(1.0);
            scan.worst.offer(norm, x, y);
            let interior = i > 0 && j > 0 && i + 1 < n && j + 1 < n;
            if interior {
                let floor = STRICT_ULPS * f64::EPSILON * sum.abs();
                let excess = raw - floor;
                if excess <= 0.0 && scan.strict_fail.is_none() {
                    scan.strict_fail = Some([x, y]);
                }
                scan.strict_worst = scan.strict_worst.min(norm);
            }
        }
    }
    scan
}

fn subadditive_report(dist: &Distribution, grid: &Grid, tol: f64, strict: bool) -> MembershipReport {
    let criterion = if strict {
        Criterion::ClassHStrict
    } else {
        Criterion::ClassH
    };
    let mut report = MembershipReport::new(criterion, dist, grid, tol);
    let Some(h) = Recentred::new(dist, &mut report) else {
        return report;
    };
    let scan = scan_pairs(&h, &grid.values());
    report.tested = scan.tested;
    report.worst_margin = scan.worst.margin;
    let violated = scan.worst.margin < -tol;
    report.checks.push(SubCheck {
        name: "subadditive",
        verdict: if violated { Verdict::Fail } else { Verdict::Pass },
        worst_margin: scan.worst.margin,
        witness: if violated { scan.worst.at } else { None },
    });
    if strict {
        report.checks.push(SubCheck {
            name: "strict-interior",
            verdict: if scan.strict_fail.is_some() {
                Verdict::Fail
            } else {
                Verdict::Pass
            },
            worst_margin: scan.strict_worst,
            witness: scan.strict_fail,
        });
    }
    if violated {
        report.verdict = Verdict::Fail;
        report.witness = scan.worst.at;
    } else if strict && scan.strict_fail.is_some() {
        report.verdict = Verdict::Fail;
        report.witness = scan.strict_fail;
        report.note("margin does not exceed rounding level at an interior pair");
    } else if scan.infinite {
        report.verdict = Verdict::Inconclusive;
        report.truncated = true;
        report.note("h_F is infinite on part of the grid");
    } else {
        report.note("numerically consistent with subadditivity on the grid");
    }
    report
}

/// `h(x + y) <= h(x) + h(y)` on all ordered grid pairs, up to `tol`
/// relative to `max(1, |h(x) + h(y)|)`.
pub fn check_subadditive(dist: &Distribution, grid: &Grid, tol: f64) -> MembershipReport {
    subadditive_report(dist, grid, tol, false)
}

/// As [`check_subadditive`], and additionally every interior pair must
/// have a margin above rounding level.
pub fn check_subadditive_strict(dist: &Distribution, grid: &Grid, tol: f64) -> MembershipReport {
    subadditive_report(dist, grid, tol, true)
}

/// Worst violation of `v[k+1] <= v[k]` along a sequence, normalized.
/// Returns `(margin, k)` of the smallest `(v[k] - v[k+1]) / max(1, |v[k]|)`.
fn worst_nonincrease(v: &[f64]) -> (f64, usize) {
    let mut worst = (f64::INFINITY, 0);
    for k in 0..v.len().saturating_sub(1) {
        let m = (v[k] - v[k + 1]) / v[k].abs().max(1.0);
        if m < worst.0 {
            worst = (m, k);
        }
    }
    worst
}

/// Two classical sufficient conditions: `h(x)/x` non-increasing, or `h`
/// concave (slopes between consecutive grid points non-increasing).
/// Passes when either holds.
pub fn check_sufficient_conditions(dist: &Distribution, grid: &Grid, tol: f64) -> MembershipReport {
    let mut report = MembershipReport::new(Criterion::Sufficient, dist, grid, tol);
    let Some(h) = Recentred::new(dist, &mut report) else {
        return report;
    };
    let xs = grid.values();
    let hx: Vec<f64> = xs.iter().map(|&x| h.h(x)).collect();
    if hx.iter().any(|v| !v.is_finite()) {
        report.verdict = Verdict::Inconclusive;
        report.truncated = true;
        report.note("h_F is infinite on part of the grid");
        return report;
    }
    report.tested = xs.len();

    let ratio: Vec<f64> = xs.iter().zip(&hx).map(|(x, h)| h / x).collect();
    let (m_a, k_a) = worst_nonincrease(&ratio);
    let a_pass = m_a >= -tol;
    report.checks.push(SubCheck {
        name: "ratio-nonincreasing",
        verdict: if a_pass { Verdict::Pass } else { Verdict::Fail },
        worst_margin: m_a,
        witness: (!a_pass).then(|| [xs[k_a], xs[k_a + 1]]),
    });

    let slopes: Vec<f64> = (0..xs.len() - 1)
        .map(|k| (hx[k + 1] - hx[k]) / (xs[k + 1] - xs[k]))
        .collect();
    let (m_b, k_b) = worst_nonincrease(&slopes);
    let b_pass = m_b >= -tol;
    report.checks.push(SubCheck {
        name: "concave",
        verdict: if b_pass { Verdict::Pass } else { Verdict::Fail },
        worst_margin: m_b,
        witness: (!b_pass).then(|| [xs[k_b], xs[k_b + 2]]),
    });

    report.worst_margin = m_a.max(m_b);
    if a_pass || b_pass {
        report.verdict = Verdict::Pass;
    } else {
        report.verdict = Verdict::Fail;
        report.witness = report.checks[1].witness;
        report.note("neither sufficient condition holds; subadditivity may still hold");
    }
    report
}

/// `g(x) = 1 / (-log F(x))` strictly increasing, concave, and vanishing
/// at 0.
pub fn check_super_frechet(dist: &Distribution, grid: &Grid, tol: f64) -> MembershipReport {
    let mut report = MembershipReport::new(Criterion::SuperFrechet, dist, grid, tol);
    let Some(h) = Recentred::new(dist, &mut report) else {
        return report;
    };
    if !dist.is_continuous() {
        report.note("distribution is not continuous");
    }
    let mut xs = Vec::new();
    let mut gs = Vec::new();
    for x in grid.values() {
        let l = h.log_cdf(x);
        if l.is_finite() && l < 0.0 {
            xs.push(x);
            gs.push(-1.0 / l);
        } else {
            report.truncated = true;
        }
    }
    if report.truncated {
        report.note("CDF is 0 or 1 on part of the grid; interior sub-grid used");
    }
    if xs.len() < 3 {
        report.verdict = Verdict::Inconclusive;
        report.note("fewer than three interior grid points");
        return report;
    }
    report.tested = xs.len();

    // strict increase: g[k+1] - g[k] > 0
    let mut inc = (f64::INFINITY, 0);
    for k in 0..xs.len() - 1 {
        let m = (gs[k + 1] - gs[k]) / gs[k].abs().max(1.0);
        if m < inc.0 {
            inc = (m, k);
        }
    }
    let inc_pass = inc.0 > 0.0;
    report.checks.push(SubCheck {
        name: "strictly-increasing",
        verdict: if inc_pass { Verdict::Pass } else { Verdict::Fail },
        worst_margin: inc.0,
        witness: (!inc_pass).then(|| [xs[inc.1], xs[inc.1 + 1]]),
    });

    let slopes: Vec<f64> = (0..xs.len() - 1)
        .map(|k| (gs[k + 1] - gs[k]) / (xs[k + 1] - xs[k]))
        .collect();
    let (m_c, k_c) = worst_nonincrease(&slopes);
    let c_pass = m_c >= -tol;
    report.checks.push(SubCheck {
        name: "concave",
        verdict: if c_pass { Verdict::Pass } else { Verdict::Fail },
        worst_margin: m_c,
        witness: (!c_pass).then(|| [xs[k_c], xs[k_c + 2]]),
    });

    // g(0+) = 0 needs F(0) = 0 after recentring; g must also be shrinking
    // towards the left end of the grid.
    let atom = h.cdf(0.0);
    let lim_pass = atom == 0.0 && gs[0] < gs[1];
    report.checks.push(SubCheck {
        name: "vanishes-at-zero",
        verdict: if lim_pass { Verdict::Pass } else { Verdict::Fail },
        worst_margin: -atom,
        witness: (!lim_pass).then(|| [0.0, xs[0]]),
    });

    report.worst_margin = inc.0.min(m_c);
    report.verdict = if inc_pass && c_pass && lim_pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    report.witness = report.checks.iter().find_map(|c| c.witness);
    report
}

/// `f(x) = Q(1 - 1/(x+1))` with `f(0) = 0`, non-decreasing, non-constant
/// and midpoint convex on all grid pairs.
pub fn check_super_pareto(dist: &Distribution, grid: &Grid, tol: f64) -> MembershipReport {
    let mut report = MembershipReport::new(Criterion::SuperPareto, dist, grid, tol);
    let Some(h) = Recentred::new(dist, &mut report) else {
        return report;
    };
    let f = |x: f64| {
        if x == 0.0 {
            0.0
        } else {
            h.quantile_upper(1.0 / (x + 1.0))
        }
    };
    let mut xs = alloc::vec![0.0];
    xs.extend(grid.values());
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    if fs.iter().any(|v| v.is_nan()) {
        report.verdict = Verdict::Inconclusive;
        report.note("quantile evaluation failed on the grid");
        return report;
    }
    if fs.iter().any(|v| v.is_infinite()) {
        report.truncated = true;
        report.note("f is infinite on part of the grid; those pairs are skipped");
    }

    let mut mono = (f64::INFINITY, 0);
    for k in 0..xs.len() - 1 {
        if fs[k + 1].is_infinite() {
            continue;
        }
        let m = (fs[k + 1] - fs[k]) / fs[k].abs().max(1.0);
        if m < mono.0 {
            mono = (m, k);
        }
    }
    let mono_pass = mono.0 >= -tol;
    report.checks.push(SubCheck {
        name: "non-decreasing",
        verdict: if mono_pass { Verdict::Pass } else { Verdict::Fail },
        worst_margin: mono.0,
        witness: (!mono_pass).then(|| [xs[mono.1], xs[mono.1 + 1]]),
    });

    let top = fs[fs.len() - 1];
    let nonconst = top > 0.0;
    report.checks.push(SubCheck {
        name: "non-constant",
        verdict: if nonconst { Verdict::Pass } else { Verdict::Fail },
        worst_margin: top,
        witness: None,
    });

    let mut worst = Worst::new();
    let mut tested = 0;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let rhs = 0.5 * (fs[i] + fs[j]);
            if !rhs.is_finite() {
                continue;
            }
            let lhs = f(0.5 * (xs[i] + xs[j]));
            tested += 1;
            let margin = (rhs - lhs) / rhs.abs().max(1.0);
            worst.offer(margin, xs[i], xs[j]);
        }
    }
    let conv_pass = worst.margin >= -tol;
    report.checks.push(SubCheck {
        name: "midpoint-convex",
        verdict: if conv_pass { Verdict::Pass } else { Verdict::Fail },
        worst_margin: worst.margin,
        witness: if conv_pass { None } else { worst.at },
    });
    report.tested = tested;
    report.worst_margin = mono.0.min(worst.margin);
    report.verdict = if mono_pass && nonconst && conv_pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    report.witness = report.checks.iter().find_map(|c| c.witness);
    report
}
