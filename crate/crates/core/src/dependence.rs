//! Joint samplers with prescribed marginals and an empirical check of
//! negative lower orthant dependence (NLOD).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::dist::{Distribution, Level};
use crate::ecdf::dkw_two_sided;
use crate::error::{Error, Result};
use crate::math;
use crate::membership::Verdict;
use crate::rng;
use crate::serde_ext::ext_f64;

/// Correlation structure of a Gaussian copula.
#[derive(Clone, Debug, PartialEq)]
pub enum Correlation {
    /// All off-diagonal entries equal `rho`.
    Equicorrelated(f64),
    /// Full matrix, row-major `n x n`.
    Matrix(Vec<Vec<f64>>),
}

/// What is known about the sign of dependence of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NlodStatus {
    /// Independent coordinates (NLOD with equality).
    Independent,
    /// NLOD holds analytically.
    Guaranteed,
    /// No analytic guarantee; samples must pass [`verify_nlod_empirical`].
    EmpiricallyChecked,
    /// Positively dependent (PLOD); used for exploratory runs only.
    Positive,
    /// Gaussian copula with some positive correlation.
    NotNlod,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DependenceModel {
    Independent,
    /// `(U, 1 - U)`, two coordinates only.
    CounterMonotone,
    Gaussian(Correlation),
    /// Clayton copula with `theta in [-1, 0)`, two coordinates only.
    ClaytonNegative { theta: f64 },
    /// `(U, ..., U)`.
    Comonotone,
}

impl DependenceModel {
    pub fn gaussian(rho: f64) -> Self {
        DependenceModel::Gaussian(Correlation::Equicorrelated(rho))
    }

    pub fn clayton(theta: f64) -> Self {
        DependenceModel::ClaytonNegative { theta }
    }

    pub fn nlod_status(&self) -> NlodStatus {
        match self {
            DependenceModel::Independent => NlodStatus::Independent,
            DependenceModel::CounterMonotone => NlodStatus::Guaranteed,
            DependenceModel::Gaussian(c) => {
                let nonpositive = match c {
                    Correlation::Equicorrelated(rho) => *rho <= 0.0,
                    Correlation::Matrix(m) => m
                        .iter()
                        .enumerate()
                        .all(|(i, row)| row.iter().enumerate().all(|(j, v)| i == j || *v <= 0.0)),
                };
                if nonpositive {
                    NlodStatus::Guaranteed
                } else {
                    NlodStatus::NotNlod
                }
            }
            DependenceModel::ClaytonNegative { .. } => NlodStatus::EmpiricallyChecked,
            DependenceModel::Comonotone => NlodStatus::Positive,
        }
    }

    /// Checks parameters against dimension `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::TooFewComponents { min: 1, found: 0 });
        }
        match self {
            DependenceModel::Independent | DependenceModel::Comonotone => Ok(()),
            DependenceModel::CounterMonotone => two_only(n, "countermono"),
            DependenceModel::ClaytonNegative { theta } => {
                two_only(n, "clayton")?;
                if *theta >= -1.0 && *theta < 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        family: "clayton",
                        name: "theta",
                        value: *theta,
                    })
                }
            }
            DependenceModel::Gaussian(c) => cholesky(&correlation_matrix(c, n)?).map(|_| ()),
        }
    }
}

fn two_only(n: usize, name: &str) -> Result<()> {
    if n == 2 {
        Ok(())
    } else {
        Err(Error::InvalidDependence(alloc::format!(
            "{name} is defined for two coordinates, got {n}"
        )))
    }
}

impl fmt::Display for DependenceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DependenceModel::Independent => f.write_str("indep"),
            DependenceModel::CounterMonotone => f.write_str("countermono"),
            DependenceModel::Gaussian(Correlation::Equicorrelated(rho)) => {
                write!(f, "gauss(rho={rho})")
            }
            DependenceModel::Gaussian(Correlation::Matrix(m)) => {
                f.write_str("gauss(matrix=")?;
                for (i, row) in m.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    for (j, v) in row.iter().enumerate() {
                        if j > 0 {
                            f.write_str(" ")?;
                        }
                        write!(f, "{v}")?;
                    }
                }
                f.write_str(")")
            }
            DependenceModel::ClaytonNegative { theta } => write!(f, "clayton(theta={theta})"),
            DependenceModel::Comonotone => f.write_str("comono"),
        }
    }
}

fn correlation_matrix(c: &Correlation, n: usize) -> Result<Vec<Vec<f64>>> {
    match c {
        Correlation::Equicorrelated(rho) => {
            if !(rho.is_finite() && *rho <= 1.0) {
                return Err(Error::InvalidParameter {
                    family: "gauss",
                    name: "rho",
                    value: *rho,
                });
            }
            if n >= 2 {
                let bound = -1.0 / (n - 1) as f64;
                if *rho < bound {
                    return Err(Error::InfeasibleCorrelation { rho: *rho, bound, n });
                }
            }
            Ok((0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { *rho }).collect())
                .collect())
        }
        Correlation::Matrix(m) => {
            if m.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.len(),
                });
            }
            for (i, row) in m.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::MalformedCorrelation);
                }
                if row[i] != 1.0 {
                    return Err(Error::MalformedCorrelation);
                }
                for j in 0..n {
                    if !row[j].is_finite() || row[j] != m[j][i] || row[j].abs() > 1.0 {
                        return Err(Error::MalformedCorrelation);
                    }
                }
            }
            Ok(m.clone())
        }
    }
}

const CHOLESKY_JITTER: f64 = 1e-12;

/// Lower Cholesky factor; retried once with diagonal jitter for matrices on
/// the semi-definite boundary.
fn cholesky(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    fn attempt(a: &[Vec<f64>], jitter: f64) -> Option<Vec<Vec<f64>>> {
        let n = a.len();
        let mut l = alloc::vec![alloc::vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i][j];
                s -= l[i][..j].iter().zip(&l[j][..j]).map(|(a, b)| a * b).sum::<f64>();
                if i == j {
                    s += jitter;
                    if s <= 0.0 {
                        return None;
                    }
                    l[i][j] = math::sqrt(s);
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        Some(l)
    }
    attempt(a, 0.0)
        .or_else(|| attempt(a, CHOLESKY_JITTER))
        .ok_or(Error::NotPositiveSemidefinite)
}

/// `m x n` sample, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct JointSample {
    pub n: usize,
    pub m: usize,
    pub data: Vec<f64>,
}

impl JointSample {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.n)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// `sum_j w_j X_j` per row, with `0 * inf = 0` and any `+inf` term
    /// making the sum `+inf`.
    pub fn weighted_sums(&self, weights: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|r| {
                r.iter()
                    .zip(weights)
                    .map(|(x, w)| if *w == 0.0 { 0.0 } else { w * x })
                    .sum()
            })
            .collect()
    }
}

/// Per-row copula draw as probability levels.
fn draw_levels(
    model: &DependenceModel,
    chol: Option<&[Vec<f64>]>,
    n: usize,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<Level>,
) {
    out.clear();
    match model {
        DependenceModel::Independent => {
            out.extend((0..n).map(|_| Level::Lower(rng::open01(rng))));
        }
        DependenceModel::Comonotone => {
            let u = rng::open01(rng);
            out.extend((0..n).map(|_| Level::Lower(u)));
        }
        DependenceModel::CounterMonotone => {
            let u = rng::open01(rng);
            out.push(Level::Lower(u));
            out.push(Level::Upper(u));
        }
        DependenceModel::ClaytonNegative { theta } => {
            let u = rng::open01(rng);
            let w = rng::open01(rng);
            out.push(Level::Lower(u));
            if *theta == -1.0 {
                out.push(Level::Upper(u));
            } else {
                // Conditional inverse of C(u, v) = (u^-t + v^-t - 1)^(-1/t).
                let t = *theta;
                let a = math::powf(u, -t) * (math::powf(w, -t / (1.0 + t)) - 1.0);
                let v = math::powf((1.0 + a).max(0.0), -1.0 / t);
                out.push(Level::Lower(v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)));
            }
        }
        DependenceModel::Gaussian(_) => {
            let chol = chol.expect("gaussian model without factor");
            let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            for row in chol.iter().take(n) {
                let y: f64 = row.iter().zip(&z).map(|(l, z)| l * z).sum();
                out.push(if y > 0.0 {
                    Level::Upper(math::norm_cdf(-y))
                } else {
                    Level::Lower(math::norm_cdf(y))
                });
            }
        }
    }
}

fn valid_level(l: Level) -> Level {
    // Guard against Phi underflow in the far tails.
    match l {
        Level::Lower(p) if p <= 0.0 => Level::Lower(f64::MIN_POSITIVE),
        Level::Upper(q) if q <= 0.0 => Level::Upper(f64::MIN_POSITIVE),
        other => other,
    }
}

/// Draws `m` rows of `(X_1, ..., X_n)`, `X_j ~ marginals[j]`, coupled by
/// `model`. Rows are generated in blocks of [`rng::BLOCK_ROWS`] with one
/// seeded stream per block.
pub fn sample_joint(
    model: &DependenceModel,
    marginals: &[Distribution],
    seed: u64,
    m: usize,
) -> Result<JointSample> {
    let n = marginals.len();
    model.validate(n)?;
    if m == 0 {
        return Err(Error::EmptySample);
    }
    let chol = match model {
        DependenceModel::Gaussian(c) => Some(cholesky(&correlation_matrix(c, n)?)?),
        _ => None,
    };
    let blocks = rng::map_blocks(seed, m, |_, rows, rng| {
        let mut data = Vec::with_capacity(rows * n);
        let mut levels = Vec::with_capacity(n);
        for _ in 0..rows {
            draw_levels(model, chol.as_deref(), n, rng, &mut levels);
            for (d, l) in marginals.iter().zip(&levels) {
                data.push(d.quantile_level(valid_level(*l)));
            }
        }
        data
    });
    let mut data = Vec::with_capacity(m * n);
    for b in blocks {
        data.extend(b);
    }
    Ok(JointSample { n, m, data })
}

/// Result of [`verify_nlod_empirical`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NlodReport {
    pub verdict: Verdict,
    /// Largest `H(x) - prod F_j(x_j)` over the tested corners (empirical).
    #[serde(serialize_with = "ext_f64")]
    pub max_excess: f64,
    pub epsilon: f64,
    pub corners: usize,
    pub witness: Option<Vec<f64>>,
    pub m: usize,
    pub delta: f64,
    pub note: String,
}

/// Quantile levels defining the default corner grid.
pub const NLOD_LEVELS: [f64; 19] = [
    0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75,
    0.80, 0.85, 0.90, 0.95,
];

/// Checks `H(x) <= prod F_j(x_j) + eps` at all corners built from the
/// per-column empirical quantiles at `levels`.
///
/// `eps` adds a DKW-type band for the joint CDF over the finite corner set
/// (union bound) and the propagated per-marginal bands.
pub fn verify_nlod_empirical(sample: &JointSample, levels: &[f64], delta: f64) -> Result<NlodReport> {
    let (n, m) = (sample.n, sample.m);
    if m == 0 || n == 0 {
        return Err(Error::EmptySample);
    }
    let k = levels.len();
    // Corner coordinates per column and the empirical marginal at them.
    let mut cuts = alloc::vec![Vec::with_capacity(k); n];
    let mut marg = alloc::vec![Vec::with_capacity(k); n];
    for j in 0..n {
        let e = crate::ecdf::Ecdf::new(sample.column(j))?;
        for &p in levels {
            let c = e.quantile(p);
            cuts[j].push(c);
            marg[j].push(e.cdf(c));
        }
    }
    // Bucket each row by the first cut index it falls under per column
    // (k = above all cuts), then accumulate counts into a cumulative grid.
    let size = (k + 1).pow(n as u32);
    let mut counts = alloc::vec![0u64; size];
    for row in sample.rows() {
        let mut idx = 0;
        for j in 0..n {
            let b = cuts[j].partition_point(|&c| c < row[j]);
            idx = idx * (k + 1) + b;
        }
        counts[idx] += 1;
    }
    // Prefix sums along every axis.
    let mut stride = 1;
    for _ in 0..n {
        for i in 0..size {
            if (i / stride) % (k + 1) != 0 {
                counts[i] += counts[i - stride];
            }
        }
        stride *= k + 1;
    }
    let corners = k.pow(n as u32);
    let mut worst = (f64::NEG_INFINITY, Vec::new());
    let mut digits = alloc::vec![0usize; n];
    for _ in 0..corners {
        let mut idx = 0;
        let mut prod = 1.0;
        for j in 0..n {
            idx = idx * (k + 1) + digits[j];
            prod *= marg[j][digits[j]];
        }
        let joint = counts[idx] as f64 / m as f64;
        let excess = joint - prod;
        if excess > worst.0 {
            worst = (excess, (0..n).map(|j| cuts[j][digits[j]]).collect());
        }
        for j in (0..n).rev() {
            digits[j] += 1;
            if digits[j] < k {
                break;
            }
            digits[j] = 0;
        }
    }
    let joint_eps = math::sqrt(math::ln(2.0 * corners as f64 / delta) / (2.0 * m as f64));
    let marginal_eps = n as f64 * dkw_two_sided(m, delta / (2.0 * n as f64));
    let epsilon = joint_eps + marginal_eps;
    let verdict = if worst.0 <= epsilon {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(NlodReport {
        verdict,
        max_excess: worst.0,
        epsilon,
        corners,
        witness: (verdict == Verdict::Fail).then_some(worst.1),
        m,
        delta,
        note: String::from("empirical check at quantile corners; not a proof of NLOD"),
    })
}
