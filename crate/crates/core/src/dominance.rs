//! Checks of `X <=_st θ1 X1 + ... + θn Xn`: the exact product bound,
//! independent-sum probabilities by quadrature, Monte Carlo dominance with
//! DKW bands, Value-at-Risk superadditivity and its asymptotic ratio, the
//! random-weight bound, a majorization experiment and deadly risks.

use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::dependence::{self, DependenceModel, NlodReport, NlodStatus};
use crate::dist::{Distribution, Family, Level};
use crate::ecdf::{dkw_one_sided, dkw_two_sided, Ecdf};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::math;
use crate::membership::Verdict;
use crate::quadrature::{self, GaussLegendre, Integral, Settings};
use crate::rng;
use crate::serde_ext::ext_f64;
use crate::weights::WeightVector;

/// Default confidence parameter for statistical verdicts.
pub const DEFAULT_DELTA: f64 = 1e-3;

/// Rounding allowance of the analytic product bound.
pub const PRODUCT_BOUND_ROUNDING: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    AnalyticBound,
    Quadrature,
    Empirical,
    Var,
    RandomWeights,
    Majorize,
    Deadly,
}

/// One evaluation point. For `var` reports `x` is the probability level
/// and the CDF columns hold quantiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarginPoint {
    #[serde(serialize_with = "ext_f64")]
    pub x: f64,
    #[serde(serialize_with = "ext_f64")]
    pub f_target: f64,
    #[serde(serialize_with = "ext_f64")]
    pub f_sum: f64,
    #[serde(serialize_with = "ext_f64")]
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarRow {
    pub p: f64,
    #[serde(serialize_with = "ext_f64")]
    pub var_single: f64,
    /// `sum θi VaR_p(X)`, equal to `VaR_p(X)` for weights on the simplex.
    #[serde(serialize_with = "ext_f64")]
    pub var_weighted: f64,
    #[serde(serialize_with = "ext_f64")]
    pub var_sum_empirical: f64,
    /// Upper confidence bound for `VaR_p` of the weighted sum.
    #[serde(serialize_with = "ext_f64")]
    pub var_sum_upper: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub p: f64,
    #[serde(serialize_with = "ext_f64")]
    pub var_single: f64,
    #[serde(serialize_with = "ext_f64")]
    pub var_sum: f64,
    /// `VaR_p(X1 + ... + Xn) / (n VaR_p(X1))`
    #[serde(serialize_with = "ext_f64")]
    pub ratio: f64,
    /// Rows with `p < 0.99` are pre-asymptotic and carry no claim.
    pub asymptotic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeadlyStats {
    pub n: usize,
    pub p: f64,
    pub count_sum_infinite: u64,
    pub count_first_infinite: u64,
    pub observed: f64,
    pub expected: Option<f64>,
    pub binomial_sd: Option<f64>,
    /// `count(sum = inf) >= count(X1 = inf)` holds row by row.
    pub counts_identity: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingCheck {
    pub pairs: usize,
    #[serde(serialize_with = "ext_f64")]
    pub worst_margin: f64,
    /// Estimate of `E(sum ξi)`.
    pub mean_weight_sum: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Extras {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_table: Option<Vec<VarRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_table: Option<Vec<RatioRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nlod: Option<NlodReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deadly: Option<DeadlyStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominanceReport {
    pub mode: Mode,
    /// Dominated candidate.
    pub dist: String,
    pub marginals: Vec<String>,
    pub weights: Vec<f64>,
    pub dep: Option<String>,
    pub m: Option<usize>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub grid: Grid,
    #[serde(serialize_with = "ext_f64")]
    pub min_margin: f64,
    pub epsilon: f64,
    pub verdict: Verdict,
    /// No theorem backs this configuration; evidence only.
    pub exploratory: bool,
    pub notes: Vec<String>,
    pub extras: Extras,
    pub points: Vec<MarginPoint>,
}

impl DominanceReport {
    fn new(mode: Mode, target: &Distribution, marginals: &[Distribution], weights: &[f64], grid: &Grid) -> Self {
        DominanceReport {
            mode,
            dist: target.expression(),
            marginals: marginals.iter().map(|d| d.expression()).collect(),
            weights: weights.to_vec(),
            dep: None,
            m: None,
            delta: None,
            seed: None,
            grid: *grid,
            min_margin: f64::INFINITY,
            epsilon: 0.0,
            verdict: Verdict::Pass,
            exploratory: false,
            notes: Vec::new(),
            extras: Extras::default(),
            points: Vec::new(),
        }
    }

    fn note(&mut self, s: &str) {
        self.notes.push(String::from(s));
    }

    fn finish(&mut self) {
        self.min_margin = self
            .points
            .iter()
            .map(|p| p.margin)
            .fold(f64::INFINITY, f64::min);
        if self.min_margin < -self.epsilon {
            self.verdict = self.verdict.and(Verdict::Fail);
        }
    }
}

/// `prod F(x/θi) <= F(x)` on the grid. By NLOD the left side bounds
/// `P(sum θi Xi <= x)`, so passing certifies dominance for every NLOD
/// joint law with these marginals.
pub fn check_product_bound(dist: &Distribution, weights: &WeightVector, grid: &Grid) -> DominanceReport {
    let marginals = alloc::vec![dist.clone(); weights.len()];
    let mut report = DominanceReport::new(Mode::AnalyticBound, dist, &marginals, weights.as_slice(), grid);
    let shift = dist.essinf();
    if shift != 0.0 {
        report.note("distribution recentred to essential infimum 0");
    }
    report.epsilon = PRODUCT_BOUND_ROUNDING;
    for x in grid.values() {
        let l = dist.log_cdf(x + shift);
        let l_sum: f64 = weights.iter().map(|t| dist.log_cdf(x / t + shift)).sum();
        let f = math::exp(l);
        let margin = if l == f64::NEG_INFINITY {
            -math::exp(l_sum)
        } else if l_sum == f64::NEG_INFINITY {
            f
        } else {
            -f * math::expm1(l_sum - l)
        };
        report.points.push(MarginPoint {
            x,
            f_target: f,
            f_sum: math::exp(l_sum),
            margin,
        });
    }
    report.finish();
    report
}

/// Which tail of the sum to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Cdf,
    Survival,
}

/// `P(sum ci Xi <= x)` or `P(sum ci Xi > x)` for independent continuous
/// `Xi` and positive coefficients `ci`, with its error estimate.
///
/// Recursion on the first coordinate in upper-level space: with
/// `q* = P(c1 X1 > x)`,
/// `P(S <= x) = int_{q*}^1 P(S' <= x - c1 Q1(1 - q)) dq`, and the survival
/// adds `q*` to the analogous integral of the survival of the rest `S'`.
pub fn sum_probability(
    dists: &[Distribution],
    coeffs: &[f64],
    x: f64,
    side: Side,
    settings: &Settings,
) -> Result<Integral> {
    if dists.len() != coeffs.len() {
        return Err(Error::DimensionMismatch {
            expected: dists.len(),
            found: coeffs.len(),
        });
    }
    if dists.is_empty() {
        return Err(Error::TooFewComponents { min: 1, found: 0 });
    }
    for (i, d) in dists.iter().enumerate() {
        if !d.is_continuous() {
            return Err(Error::DiscontinuousMarginal(i));
        }
    }
    for (index, &value) in coeffs.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositiveWeight { index, value });
        }
    }
    let rule = GaussLegendre::new(settings.nodes);
    sum_rec(&rule, dists, coeffs, x, side, settings)
}

fn sum_rec(
    rule: &GaussLegendre,
    dists: &[Distribution],
    coeffs: &[f64],
    x: f64,
    side: Side,
    settings: &Settings,
) -> Result<Integral> {
    let pick = |cdf: f64, sf: f64| match side {
        Side::Cdf => cdf,
        Side::Survival => sf,
    };
    if x < 0.0 {
        return Ok(Integral {
            value: pick(0.0, 1.0),
            error: 0.0,
        });
    }
    let (d0, c0) = (&dists[0], coeffs[0]);
    let t = d0.tail(x / c0);
    if dists.len() == 1 {
        return Ok(Integral {
            value: pick(t.cdf, t.sf),
            error: 0.0,
        });
    }
    let q_star = t.sf;
    let (rest, rest_c) = (&dists[1..], &coeffs[1..]);
    let mut inner_err: f64 = 0.0;
    let mut failure = None;
    let integrand = |q: f64| {
        let y = x - c0 * d0.quantile_level(Level::Upper(q));
        match sum_rec(rule, rest, rest_c, y, side, settings) {
            Ok(r) => {
                inner_err = inner_err.max(r.error);
                r.value
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let outer = quadrature::integrate_with(rule, integrand, q_star, 1.0, settings);
    if let Some(e) = failure {
        return Err(e);
    }
    let outer = outer?;
    let value = match side {
        Side::Cdf => outer.value,
        Side::Survival => outer.value + q_star,
    };
    Ok(Integral {
        value: value.clamp(0.0, 1.0),
        error: outer.error + inner_err,
    })
}

/// `P(θ1 X1 + ... + θn Xn <= x)` for independent continuous marginals.
pub fn sum_cdf_independent(dists: &[Distribution], weights: &WeightVector, x: f64) -> Result<f64> {
    check_min_two(dists)?;
    sum_probability(dists, weights.as_slice(), x, Side::Cdf, &Settings::default()).map(|r| r.value)
}

/// `P(θ1 X1 + ... + θn Xn > x)`, computed directly for tail accuracy.
pub fn sum_survival_independent(dists: &[Distribution], weights: &WeightVector, x: f64) -> Result<f64> {
    check_min_two(dists)?;
    sum_probability(dists, weights.as_slice(), x, Side::Survival, &Settings::default())
        .map(|r| r.value)
}

fn check_min_two(dists: &[Distribution]) -> Result<()> {
    if dists.len() < 2 {
        Err(Error::TooFewComponents {
            min: 2,
            found: dists.len(),
        })
    } else {
        Ok(())
    }
}

/// Deterministic dominance check for independent marginals: the margin
/// `F_target(x) - P(sum θi Xi <= x)` with the sum CDF by quadrature. The
/// tolerance is the largest quadrature error estimate on the grid.
pub fn check_dominance_quadrature(
    target: &Distribution,
    marginals: &[Distribution],
    weights: &WeightVector,
    grid: &Grid,
) -> Result<DominanceReport> {
    check_min_two(marginals)?;
    let mut report = DominanceReport::new(Mode::Quadrature, target, marginals, weights.as_slice(), grid);
    report.dep = Some(alloc::format!("{}", DependenceModel::Independent));
    let settings = Settings::default();
    let mut err: f64 = 0.0;
    for x in grid.values() {
        let s = sum_probability(marginals, weights.as_slice(), x, Side::Cdf, &settings)?;
        err = err.max(s.error);
        let f_target = target.cdf(x);
        report.points.push(MarginPoint {
            x,
            f_target,
            f_sum: s.value,
            margin: f_target - s.value,
        });
    }
    report.epsilon = err.max(settings.target);
    report.finish();
    Ok(report)
}

/// Settings of a Monte Carlo check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    pub seed: u64,
    pub m: usize,
    pub delta: f64,
}

impl McConfig {
    pub fn new(seed: u64, m: usize) -> Self {
        McConfig {
            seed,
            m,
            delta: DEFAULT_DELTA,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::EmptySample);
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::ProbabilityOutOfRange(self.delta));
        }
        Ok(())
    }
}

fn stamp(report: &mut DominanceReport, dep: Option<&DependenceModel>, mc: &McConfig) {
    report.dep = dep.map(|d| alloc::format!("{d}"));
    report.m = Some(mc.m);
    report.delta = Some(mc.delta);
    report.seed = Some(mc.seed);
}

/// Evaluation points: the grid plus the finite deciles of the sample.
fn margin_points(grid: &Grid, ecdf: &Ecdf) -> Vec<f64> {
    let mut xs = grid.values();
    xs.extend(ecdf.deciles());
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

fn label_dependence(report: &mut DominanceReport, dep: &DependenceModel) {
    match dep.nlod_status() {
        NlodStatus::Positive => {
            report.exploratory = true;
            report.note("positively dependent model: exploratory run, no theorem applies");
        }
        NlodStatus::NotNlod => {
            report.exploratory = true;
            report.note("positive correlation present: exploratory run, no theorem applies");
        }
        NlodStatus::EmpiricallyChecked => {
            report.note("NLOD of this model is checked empirically, not guaranteed");
        }
        NlodStatus::Guaranteed | NlodStatus::Independent => {}
    }
}

/// Clayton samples must look NLOD before any dominance claim is made.
fn gate_nlod(report: &mut DominanceReport, dep: &DependenceModel, sample: &dependence::JointSample, delta: f64) -> Result<()> {
    if dep.nlod_status() == NlodStatus::EmpiricallyChecked {
        let nlod = dependence::verify_nlod_empirical(sample, &dependence::NLOD_LEVELS, delta)?;
        if nlod.verdict != Verdict::Pass {
            report.verdict = Verdict::Inconclusive;
            report.note("NLOD verification of the joint sample failed");
        }
        report.extras.nlod = Some(nlod);
    }
    Ok(())
}

/// Monte Carlo check of `F_target(x) >= F_sum(x) - eps` with the one-sided
/// DKW half-width `eps = sqrt(ln(1/δ) / (2m))`.
pub fn check_dominance_empirical(
    target: &Distribution,
    marginals: &[Distribution],
    weights: &WeightVector,
    dep: &DependenceModel,
    mc: &McConfig,
    grid: &Grid,
) -> Result<DominanceReport> {
    mc.validate()?;
    if marginals.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: marginals.len(),
            found: weights.len(),
        });
    }
    let mut report = DominanceReport::new(Mode::Empirical, target, marginals, weights.as_slice(), grid);
    stamp(&mut report, Some(dep), mc);
    label_dependence(&mut report, dep);
    let sample = dependence::sample_joint(dep, marginals, mc.seed, mc.m)?;
    gate_nlod(&mut report, dep, &sample, mc.delta)?;
    let ecdf = Ecdf::new(sample.weighted_sums(weights.as_slice()))?;
    report.epsilon = dkw_one_sided(mc.m, mc.delta);
    for x in margin_points(grid, &ecdf) {
        let f_target = target.cdf(x);
        let f_sum = ecdf.cdf(x);
        report.points.push(MarginPoint {
            x,
            f_target,
            f_sum,
            margin: f_target - f_sum,
        });
    }
    report.finish();
    Ok(report)
}

/// `VaR_p(X)`, the generalized inverse at `p`.
pub fn var(dist: &Distribution, p: f64) -> Result<f64> {
    dist.quantile(p)
}

/// For each `p`, checks `VaR_p(X) <= VaR_p(sum θi Xi)` against an upper
/// confidence bound for the empirical quantile of the sum: the order
/// statistic of rank `ceil(m (p + eps))`, `eps` the one-sided DKW width.
pub fn check_var_superadditivity(
    dist: &Distribution,
    weights: &WeightVector,
    p_grid: &[f64],
    dep: &DependenceModel,
    mc: &McConfig,
) -> Result<DominanceReport> {
    mc.validate()?;
    for &p in p_grid {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
    }
    let marginals = alloc::vec![dist.clone(); weights.len()];
    let grid = Grid::default();
    let mut report = DominanceReport::new(Mode::Var, dist, &marginals, weights.as_slice(), &grid);
    stamp(&mut report, Some(dep), mc);
    label_dependence(&mut report, dep);
    let sample = dependence::sample_joint(dep, &marginals, mc.seed, mc.m)?;
    gate_nlod(&mut report, dep, &sample, mc.delta)?;
    let ecdf = Ecdf::new(sample.weighted_sums(weights.as_slice()))?;
    let eps = dkw_one_sided(mc.m, mc.delta);
    let mut rows = Vec::new();
    for &p in p_grid {
        let v = var(dist, p)?;
        let weighted: f64 = weights.iter().map(|t| t * v).sum();
        let emp = ecdf.quantile(p);
        let rank = math::ceil(mc.m as f64 * (p + eps));
        let upper = if rank > mc.m as f64 {
            f64::INFINITY
        } else {
            ecdf.order_stat(rank as usize)
        };
        let ok = v <= upper;
        rows.push(VarRow {
            p,
            var_single: v,
            var_weighted: weighted,
            var_sum_empirical: emp,
            var_sum_upper: upper,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        });
        let margin = if v == upper { 0.0 } else { upper - v };
        report.points.push(MarginPoint {
            x: p,
            f_target: v,
            f_sum: emp,
            margin,
        });
    }
    report.epsilon = 0.0;
    report.extras.var_table = Some(rows);
    report.note("points hold (p, VaR_p(X), empirical VaR_p(sum), upper bound - VaR_p(X))");
    report.finish();
    Ok(report)
}

/// How to compute the quantile of an independent sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RatioMethod {
    Quadrature,
    MonteCarlo(McConfig),
}

/// Regular-variation index of the right tail, when known from the family.
pub fn tail_index(dist: &Distribution) -> Option<f64> {
    match *dist.as_family()? {
        Family::Frechet { alpha } | Family::Pareto { alpha } | Family::Stoppa { alpha, .. } => {
            Some(alpha)
        }
        Family::GeneralizedPareto { xi, .. } if xi > 0.0 => Some(1.0 / xi),
        Family::Burr { alpha, tau } => Some(alpha * tau),
        Family::InverseBurr { tau, .. } => Some(tau),
        _ => None,
    }
}

/// `VaR_p(X1 + ... + Xn) / (n VaR_p(X1))` for iid `Xi`. With tail index
/// `α < 1` the ratio tends to `n^(1/α - 1)` as `p -> 1`.
pub fn asymptotic_var_ratio(
    dist: &Distribution,
    n: usize,
    ps: &[f64],
    method: RatioMethod,
) -> Result<Vec<RatioRow>> {
    if n < 2 {
        return Err(Error::TooFewComponents { min: 2, found: n });
    }
    let parts = alloc::vec![dist.clone(); n];
    let ones = alloc::vec![1.0; n];
    let mc_sums = match method {
        RatioMethod::MonteCarlo(mc) => {
            mc.validate()?;
            let s = dependence::sample_joint(&DependenceModel::Independent, &parts, mc.seed, mc.m)?;
            Some(Ecdf::new(s.weighted_sums(&ones))?)
        }
        RatioMethod::Quadrature => None,
    };
    let mut rows = Vec::new();
    for &p in ps {
        let single = dist.quantile(p)?;
        let var_sum = match &mc_sums {
            Some(e) => e.quantile(p),
            None => sum_quantile_upper(&parts, &ones, 1.0 - p, single)?,
        };
        rows.push(RatioRow {
            p,
            var_single: single,
            var_sum,
            ratio: var_sum / (n as f64 * single),
            asymptotic: p >= 0.99,
        });
    }
    Ok(rows)
}

/// Smallest `t` with `P(S > t) <= q` for an independent sum, by bisection
/// in `log t` on a bracket derived from single-risk quantiles.
fn sum_quantile_upper(parts: &[Distribution], coeffs: &[f64], q: f64, lower: f64) -> Result<f64> {
    let n = parts.len() as f64;
    let settings = Settings::default();
    let sf = |t: f64| sum_probability(parts, coeffs, t, Side::Survival, &settings).map(|r| r.value);
    // P(S > t) >= P(X1 > t) and P(S > t) <= n P(X1 > t / n).
    let mut lo = lower;
    let mut hi = n * parts[0].quantile_upper(q / n)?;
    if !(lo > 0.0 && hi.is_finite()) {
        return Ok(hi);
    }
    for _ in 0..200 {
        if hi / lo - 1.0 <= 1e-10 {
            break;
        }
        let mid = math::sqrt(lo * hi);
        if sf(mid)? <= q {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Random weights `ξ` independent of the risks.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSampler {
    Constant(Vec<f64>),
    /// `ξi = θi 1{Ai}` with independent events, `P(Ai) = probs[i]`.
    TriggeringEvents { theta: Vec<f64>, probs: Vec<f64> },
}

impl WeightSampler {
    fn validate(&self) -> Result<usize> {
        let theta = match self {
            WeightSampler::Constant(t) => t,
            WeightSampler::TriggeringEvents { theta, probs } => {
                if probs.len() != theta.len() {
                    return Err(Error::DimensionMismatch {
                        expected: theta.len(),
                        found: probs.len(),
                    });
                }
                for &p in probs {
                    if !(p > 0.0 && p <= 1.0) {
                        return Err(Error::ProbabilityOutOfRange(p));
                    }
                }
                theta
            }
        };
        for (index, &value) in theta.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        let sum: f64 = theta.iter().sum();
        if sum > 1.0 + WeightVector::SUM_TOLERANCE {
            return Err(Error::WeightsNotNormalized { sum });
        }
        Ok(theta.len())
    }

    fn theta(&self) -> &[f64] {
        match self {
            WeightSampler::Constant(t) => t,
            WeightSampler::TriggeringEvents { theta, .. } => theta,
        }
    }

    /// `E(sum ξi)`.
    pub fn mean_sum(&self) -> f64 {
        match self {
            WeightSampler::Constant(t) => t.iter().sum(),
            WeightSampler::TriggeringEvents { theta, probs } => {
                theta.iter().zip(probs).map(|(t, p)| t * p).sum()
            }
        }
    }
}

/// Number of `c` values and `t` values in the scaling pre-check.
const SCALING_C: usize = 20;
const SCALING_T: usize = 50;

/// `P(cX > t) >= c P(X > t)` on a `(c, t)` grid; returns the worst
/// normalized margin, or the failing pair.
pub fn check_scaling_hypothesis(dist: &Distribution, grid: &Grid) -> Result<ScalingCheck> {
    let ts = Grid::log(grid.min.max(f64::MIN_POSITIVE), grid.max, SCALING_T)?.values();
    let mut worst = f64::INFINITY;
    for k in 1..=SCALING_C {
        let c = k as f64 / SCALING_C as f64;
        for &t in &ts {
            let lhs = dist.survival(t / c);
            let rhs = c * dist.survival(t);
            let margin = (lhs - rhs) / rhs.max(f64::MIN_POSITIVE);
            worst = worst.min(margin);
            if lhs < rhs * (1.0 - 1e-12) {
                return Err(Error::ScalingHypothesis { c, t });
            }
        }
    }
    Ok(ScalingCheck {
        pairs: SCALING_C * SCALING_T,
        worst_margin: worst,
        mean_weight_sum: f64::NAN,
    })
}

/// Monte Carlo check of `P(sum ξi Xi > x) >= E(sum ξi) P(X > x)` for iid
/// `Xi ~ dist` independent of `ξ`. The band combines a two-sided DKW width
/// for the survival estimate and a Hoeffding width for the weight mean.
pub fn check_random_weight_bound(
    dist: &Distribution,
    sampler: &WeightSampler,
    mc: &McConfig,
    grid: &Grid,
) -> Result<DominanceReport> {
    mc.validate()?;
    let n = sampler.validate()?;
    let mut scaling = check_scaling_hypothesis(dist, grid)?;
    let marginals = alloc::vec![dist.clone(); n];
    let mut report = DominanceReport::new(Mode::RandomWeights, dist, &marginals, sampler.theta(), grid);
    stamp(&mut report, Some(&DependenceModel::Independent), mc);
    let theta = sampler.theta();
    let blocks = rng::map_blocks(mc.seed, mc.m, |_, rows, rng| {
        let mut sums = Vec::with_capacity(rows);
        let mut wsum = 0.0;
        for _ in 0..rows {
            let mut s = 0.0;
            let mut w_row = 0.0;
            for i in 0..n {
                let x = dist.quantile_level(Level::Lower(rng::open01(rng)));
                let w = match sampler {
                    WeightSampler::Constant(_) => theta[i],
                    WeightSampler::TriggeringEvents { probs, .. } => {
                        if rng::open01(rng) < probs[i] {
                            theta[i]
                        } else {
                            0.0
                        }
                    }
                };
                if w > 0.0 {
                    s += w * x;
                }
                w_row += w;
            }
            sums.push(s);
            wsum += w_row;
        }
        (sums, wsum)
    });
    let mut sums = Vec::with_capacity(mc.m);
    let mut wsum = 0.0;
    for (s, w) in blocks {
        sums.extend(s);
        wsum += w;
    }
    let mean_w = wsum / mc.m as f64;
    scaling.mean_weight_sum = mean_w;
    report.extras.scaling = Some(scaling);
    let ecdf = Ecdf::new(sums)?;
    report.epsilon = 2.0 * dkw_two_sided(mc.m, mc.delta);
    for x in grid.values() {
        let lhs = 1.0 - ecdf.cdf(x);
        let rhs = mean_w * dist.survival(x);
        report.points.push(MarginPoint {
            x,
            f_target: rhs,
            f_sum: lhs,
            margin: lhs - rhs,
        });
    }
    if matches!(sampler, WeightSampler::TriggeringEvents { .. }) {
        report.note("with equal event probabilities this is X 1_A <=_st sum θi Xi 1_Ai");
    }
    report.note("points hold (x, E(sum ξ) P(X > x), empirical P(sum ξi Xi > x), difference)");
    report.finish();
    Ok(report)
}

/// `gamma` is majorized by `eta`: equal sums and every partial sum of the
/// decreasingly sorted `eta` dominates that of `gamma`.
pub fn check_majorization(eta: &[f64], gamma: &[f64]) -> Result<()> {
    if eta.len() != gamma.len() {
        return Err(Error::DimensionMismatch {
            expected: eta.len(),
            found: gamma.len(),
        });
    }
    let sort = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let (e, g) = (sort(eta), sort(gamma));
    let (mut se, mut sg) = (0.0, 0.0);
    for k in 0..e.len() {
        se += e[k];
        sg += g[k];
        if se < sg - 1e-12 {
            return Err(Error::NotMajorized { k: k + 1 });
        }
    }
    if (se - sg).abs() > 1e-12 {
        return Err(Error::NotMajorized { k: e.len() });
    }
    Ok(())
}

/// Compares `sum ηi Xi` and `sum γi Xi` on common random numbers. A pass
/// means `F_eta >= F_gamma - eps` everywhere on the grid, i.e. the more
/// balanced weights never look stochastically smaller. Exploratory only.
pub fn majorization_experiment(
    dist: &Distribution,
    eta: &WeightVector,
    gamma: &WeightVector,
    dep: &DependenceModel,
    mc: &McConfig,
    grid: &Grid,
) -> Result<DominanceReport> {
    mc.validate()?;
    check_majorization(eta.as_slice(), gamma.as_slice())?;
    let marginals = alloc::vec![dist.clone(); eta.len()];
    let mut report = DominanceReport::new(Mode::Majorize, dist, &marginals, gamma.as_slice(), grid);
    stamp(&mut report, Some(dep), mc);
    label_dependence(&mut report, dep);
    report.exploratory = true;
    report.extras.compare_weights = Some(eta.as_slice().to_vec());
    let sample = dependence::sample_joint(dep, &marginals, mc.seed, mc.m)?;
    gate_nlod(&mut report, dep, &sample, mc.delta)?;
    let e_eta = Ecdf::new(sample.weighted_sums(eta.as_slice()))?;
    let e_gamma = Ecdf::new(sample.weighted_sums(gamma.as_slice()))?;
    report.epsilon = 2.0 * dkw_two_sided(mc.m, mc.delta / 2.0);
    for x in margin_points(grid, &e_gamma) {
        let fe = e_eta.cdf(x);
        let fg = e_gamma.cdf(x);
        report.points.push(MarginPoint {
            x,
            f_target: fe,
            f_sum: fg,
            margin: fe - fg,
        });
    }
    report.finish();
    report.note(if report.verdict == Verdict::Pass {
        "consistent with the majorization inequality (open question; evidence only)"
    } else {
        "violation candidate (open question; evidence only)"
    });
    Ok(report)
}

/// Deadly risks `P(X = inf) = p`: observed `P(sum = inf)` against the
/// exact value for independent (`1 - (1-p)^n`), comonotone (`p`) and
/// counter-monotone (`min(1, 2p)`) couplings, within three binomial
/// standard deviations, plus the row-wise count identity.
pub fn deadly_experiment(p: f64, n: usize, dep: &DependenceModel, mc: &McConfig) -> Result<DominanceReport> {
    mc.validate()?;
    let dist = Distribution::deadly(p)?;
    let marginals = alloc::vec![dist.clone(); n];
    let weights = WeightVector::uniform(n)?;
    let grid = Grid::default();
    let mut report = DominanceReport::new(Mode::Deadly, &dist, &marginals, weights.as_slice(), &grid);
    stamp(&mut report, Some(dep), mc);
    label_dependence(&mut report, dep);
    let sample = dependence::sample_joint(dep, &marginals, mc.seed, mc.m)?;
    let sums = sample.weighted_sums(weights.as_slice());
    let mut inf_sum = 0u64;
    let mut inf_first = 0u64;
    let mut identity = true;
    for (row, s) in sample.rows().zip(&sums) {
        let first = row[0].is_infinite();
        let total = s.is_infinite();
        inf_first += first as u64;
        inf_sum += total as u64;
        identity &= total || !first;
    }
    let observed = inf_sum as f64 / mc.m as f64;
    let expected = match dep {
        DependenceModel::Independent => Some(-math::expm1(n as f64 * math::log1p(-p))),
        DependenceModel::Comonotone => Some(p),
        DependenceModel::CounterMonotone => Some((2.0 * p).min(1.0)),
        _ => None,
    };
    let sd = expected.map(|e| math::sqrt(e * (1.0 - e) / mc.m as f64));
    let verdict = if identity && inf_sum >= inf_first {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    if let (Some(e), Some(sd)) = (expected, sd) {
        report.epsilon = 3.0 * sd;
        report.points.push(MarginPoint {
            x: f64::INFINITY,
            f_target: e,
            f_sum: observed,
            margin: -(observed - e).abs(),
        });
    } else {
        report.note("no closed form for this coupling; only the count identity is checked");
    }
    report.verdict = verdict;
    report.extras.deadly = Some(DeadlyStats {
        n,
        p,
        count_sum_infinite: inf_sum,
        count_first_infinite: inf_first,
        observed,
        expected,
        binomial_sd: sd,
        counts_identity: identity,
    });
    report.finish();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pareto(a: f64) -> Distribution {
        Distribution::pareto(a).unwrap()
    }

    fn half() -> WeightVector {
        WeightVector::uniform(2).unwrap()
    }

    #[test]
    fn product_bound_examples() {
        let r = check_product_bound(&pareto(1.0), &half(), &Grid::default());
        assert_eq!(r.verdict, Verdict::Pass);
        // F(2)^2 = 4/9 <= F(1) = 1/2
        let one = Grid::linear(1.0, 2.0, 2).unwrap();
        let r = check_product_bound(&pareto(1.0), &half(), &one);
        assert_relative_eq!(r.points[0].f_sum, 4.0 / 9.0, max_relative = 1e-14);
        assert_relative_eq!(r.points[0].margin, 0.5 - 4.0 / 9.0, max_relative = 1e-12);
        let fr = Distribution::frechet(1.0).unwrap();
        let w = WeightVector::new(alloc::vec![0.7, 0.2, 0.1]).unwrap();
        let r = check_product_bound(&fr, &w, &Grid::default());
        assert!(r.min_margin.abs() <= 1e-12 && r.verdict == Verdict::Pass);
        let r = check_product_bound(&Distribution::frechet(2.0).unwrap(), &half(), &one);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_relative_eq!(r.points[0].f_sum, (-0.5f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn quadrature_basics() {
        let d = [pareto(1.0), pareto(1.0)];
        assert_eq!(sum_cdf_independent(&d, &half(), -1.0).unwrap(), 0.0);
        let v = sum_cdf_independent(&d, &half(), 1.0).unwrap();
        assert!(v > 0.0 && v <= 4.0 / 9.0);
        let s = sum_survival_independent(&d, &half(), 1.0).unwrap();
        assert!((v + s - 1.0).abs() < 1e-9);
        // Exponential(1) x 2 with weights 1/2: sum is Gamma(2, 1/2).
        let e = [
            Distribution::generalized_pareto(0.0, 1.0).unwrap(),
            Distribution::generalized_pareto(0.0, 1.0).unwrap(),
        ];
        for x in [0.1f64, 0.5, 1.0, 3.0] {
            let exact = 1.0 - (-2.0 * x).exp() * (1.0 + 2.0 * x);
            assert_relative_eq!(sum_cdf_independent(&e, &half(), x).unwrap(), exact, max_relative = 1e-9);
        }
        assert!(matches!(
            sum_cdf_independent(&[Distribution::deadly(0.2).unwrap(), pareto(1.0)], &half(), 1.0),
            Err(Error::DiscontinuousMarginal(0))
        ));
    }

    #[test]
    fn var_examples() {
        let v = var(&pareto(1.0), 0.99).unwrap();
        assert_relative_eq!(v, 99.0, max_relative = 1e-12);
        assert_eq!(var(&Distribution::deadly(0.3).unwrap(), 0.8).unwrap(), f64::INFINITY);
        assert!(var(&pareto(1.0), 1.0).is_err());
    }

    #[test]
    fn majorization_precondition() {
        assert!(check_majorization(&[0.7, 0.3], &[0.5, 0.5]).is_ok());
        assert!(check_majorization(&[0.5, 0.5], &[0.5, 0.5]).is_ok());
        assert!(matches!(
            check_majorization(&[0.5, 0.5], &[0.7, 0.3]),
            Err(Error::NotMajorized { k: 1 })
        ));
    }

    #[test]
    fn scaling_precheck() {
        let s = check_scaling_hypothesis(&pareto(1.0), &Grid::default()).unwrap();
        assert_eq!(s.pairs, 1000);
        // Pareto(2): P(cX > t) = (1 + t/c)^-2 < c (1 + t)^-2 for small t.
        assert!(matches!(
            check_scaling_hypothesis(&pareto(2.0), &Grid::default()),
            Err(Error::ScalingHypothesis { .. })
        ));
    }

    #[test]
    fn tail_indices() {
        assert_eq!(tail_index(&pareto(0.5)), Some(0.5));
        assert_eq!(tail_index(&Distribution::burr(0.8, 0.5).unwrap()), Some(0.4));
        assert_eq!(tail_index(&Distribution::log_pareto(0.5).unwrap()), None);
    }
}
