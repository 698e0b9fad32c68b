//! Distribution catalog and the evaluation machinery shared by every
//! combinator: CDF, survival, log-CDF, generalized inverse, `h_F` and
//! inverse-transform sampling on the extended non-negative reals.
//!
//! Values live in `[0, +inf]`. `+inf` is an ordinary value here: deadly
//! risks put mass on it and the inverse-geometric law has an atom there.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::Serialize;

use crate::combinators::ConvexFn;
use crate::error::{Error, Result};
use crate::math;
use crate::rng;
use crate::weights::WeightVector;

/// Analytic infinite-mean flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InfiniteMean {
    Yes,
    No,
    Unknown,
}

/// Closed-form families and their parameters.
///
/// Construction only checks that the formula is a distribution function.
/// Membership in the subadditive class is reported separately by
/// [`Family::h_valid`] so that counterexamples stay constructible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// `F(x) = exp(-x^-alpha)`
    Frechet { alpha: f64 },
    /// `F(x) = 1 - (x + 1)^-alpha`
    Pareto { alpha: f64 },
    /// `F(x) = 1 - (1 + xi x / beta)^(-1/xi)`, exponential at `xi = 0`
    GeneralizedPareto { xi: f64, beta: f64 },
    /// `F(x) = 1 - (x^tau + 1)^-alpha`
    Burr { alpha: f64, tau: f64 },
    /// `F(x) = (x^tau / (x^tau + 1))^alpha`
    InverseBurr { alpha: f64, tau: f64 },
    /// `F(x) = 1 - (log(x + 1) + 1)^-alpha`
    LogPareto { alpha: f64 },
    /// `F(x) = (1 - (x + 1)^-alpha)^beta`
    Stoppa { alpha: f64, beta: f64 },
    /// `F(x) = exp(-c ceil(1/x))` on `(0, inf)`, `F(inf) = 1`
    InverseGeometric { c: f64 },
    /// `P(X = 0) = 1 - p`, `P(X = inf) = p`
    Deadly { p: f64 },
}

fn positive(family: &'static str, name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            family,
            name,
            value,
        })
    }
}

impl Family {
    /// Name used by the expression grammar.
    pub fn name(&self) -> &'static str {
        match self {
            Family::Frechet { .. } => "frechet",
            Family::Pareto { .. } => "pareto",
            Family::GeneralizedPareto { .. } => "gpd",
            Family::Burr { .. } => "burr",
            Family::InverseBurr { .. } => "inverse_burr",
            Family::LogPareto { .. } => "log_pareto",
            Family::Stoppa { .. } => "stoppa",
            Family::InverseGeometric { .. } => "inverse_geometric",
            Family::Deadly { .. } => "deadly",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let name = self.name();
        match *self {
            Family::Frechet { alpha } | Family::Pareto { alpha } | Family::LogPareto { alpha } => {
                positive(name, "alpha", alpha)
            }
            Family::GeneralizedPareto { xi, beta } => {
                if !xi.is_finite() {
                    return Err(Error::InvalidParameter {
                        family: name,
                        name: "xi",
                        value: xi,
                    });
                }
                positive(name, "beta", beta)
            }
            Family::Burr { alpha, tau } | Family::InverseBurr { alpha, tau } => {
                positive(name, "alpha", alpha)?;
                positive(name, "tau", tau)
            }
            Family::Stoppa { alpha, beta } => {
                positive(name, "alpha", alpha)?;
                positive(name, "beta", beta)
            }
            Family::InverseGeometric { c } => positive(name, "c", c),
            Family::Deadly { p } => {
                if p > 0.0 && p < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        family: name,
                        name: "p",
                        value: p,
                    })
                }
            }
        }
    }

    /// Whether the parameters fall in the range where the family is known
    /// to have a subadditive `h_F`.
    pub fn h_valid(&self) -> bool {
        match *self {
            Family::Frechet { alpha } | Family::Pareto { alpha } | Family::LogPareto { alpha } => {
                alpha <= 1.0
            }
            Family::GeneralizedPareto { xi, .. } => xi >= 1.0,
            Family::Burr { alpha, tau } => alpha <= 1.0 && tau <= 1.0,
            Family::InverseBurr { tau, .. } => tau <= 1.0,
            Family::Stoppa { alpha, .. } => alpha <= 1.0,
            Family::InverseGeometric { .. } | Family::Deadly { .. } => true,
        }
    }

    /// Strict subadditivity is known analytically for these parameter
    /// ranges; `None` when no claim is made.
    pub fn h_strict(&self) -> Option<bool> {
        match *self {
            Family::Frechet { alpha } => Some(alpha < 1.0),
            Family::Pareto { alpha } => Some(alpha <= 1.0),
            _ => None,
        }
    }

    pub fn infinite_mean(&self) -> InfiniteMean {
        let yes = |b: bool| if b { InfiniteMean::Yes } else { InfiniteMean::No };
        match *self {
            Family::Frechet { alpha } | Family::Pareto { alpha } => yes(alpha <= 1.0),
            Family::GeneralizedPareto { xi, .. } => yes(xi >= 1.0),
            Family::Burr { alpha, tau } => yes(alpha * tau <= 1.0),
            Family::InverseBurr { tau, .. } => yes(tau <= 1.0),
            Family::LogPareto { .. } => InfiniteMean::Yes,
            Family::Stoppa { alpha, .. } => yes(alpha <= 1.0),
            Family::InverseGeometric { .. } | Family::Deadly { .. } => InfiniteMean::Yes,
        }
    }

    fn mass_at_infinity(&self) -> f64 {
        match *self {
            Family::InverseGeometric { c } => -math::expm1(-c),
            Family::Deadly { p } => p,
            _ => 0.0,
        }
    }

    fn is_continuous(&self) -> bool {
        !matches!(self, Family::InverseGeometric { .. } | Family::Deadly { .. })
    }

    fn esssup(&self) -> f64 {
        match *self {
            Family::GeneralizedPareto { xi, beta } if xi < 0.0 => -beta / xi,
            _ => f64::INFINITY,
        }
    }

    fn tail(&self, x: f64) -> Tail {
        if x == f64::INFINITY {
            return Tail::ONE;
        }
        if let Family::Deadly { p } = *self {
            return if x < 0.0 {
                Tail::ZERO
            } else {
                Tail::from_cdf_sf(1.0 - p, p)
            };
        }
        if x <= 0.0 {
            return Tail::ZERO;
        }
        match *self {
            Family::Frechet { alpha } => Tail::from_ln_cdf(-math::powf(x, -alpha)),
            Family::Pareto { alpha } => Tail::from_sf_exponent(alpha * math::log1p(x)),
            Family::GeneralizedPareto { xi, beta } => {
                if xi == 0.0 {
                    Tail::from_sf_exponent(x / beta)
                } else if xi < 0.0 && x >= -beta / xi {
                    Tail::ONE
                } else {
                    Tail::from_sf_exponent(math::log1p(xi * x / beta) / xi)
                }
            }
            Family::Burr { alpha, tau } => {
                Tail::from_sf_exponent(alpha * math::log1p(math::powf(x, tau)))
            }
            Family::InverseBurr { alpha, tau } => {
                Tail::from_ln_cdf(-alpha * math::log1p(math::powf(x, -tau)))
            }
            Family::LogPareto { alpha } => {
                Tail::from_sf_exponent(alpha * math::log1p(math::log1p(x)))
            }
            Family::Stoppa { alpha, beta } => {
                let pareto = Tail::from_sf_exponent(alpha * math::log1p(x));
                Tail::from_ln_cdf(beta * pareto.ln_cdf)
            }
            Family::InverseGeometric { c } => Tail::from_ln_cdf(-c * math::ceil_recip(x)),
            Family::Deadly { .. } => unreachable!(),
        }
    }

    fn quantile(&self, level: Level) -> f64 {
        match *self {
            Family::Frechet { alpha } => math::powf(-level.ln_p(), -1.0 / alpha),
            Family::Pareto { alpha } => math::expm1(-level.ln_q() / alpha),
            Family::GeneralizedPareto { xi, beta } => {
                if xi == 0.0 {
                    -beta * level.ln_q()
                } else {
                    beta / xi * math::expm1(-xi * level.ln_q())
                }
            }
            Family::Burr { alpha, tau } => {
                math::powf(math::expm1(-level.ln_q() / alpha), 1.0 / tau)
            }
            Family::InverseBurr { alpha, tau } => {
                math::powf(math::expm1(-level.ln_p() / alpha), -1.0 / tau)
            }
            Family::LogPareto { alpha } => math::expm1(math::expm1(-level.ln_q() / alpha)),
            Family::Stoppa { alpha, beta } => {
                // Underlying Pareto survival level: 1 - p^(1/beta).
                let q = -math::expm1(level.ln_p() / beta);
                math::expm1(-math::ln(q) / alpha)
            }
            Family::InverseGeometric { c } => {
                // F(1/k) = exp(-c k); find the largest k with F(1/k) reaching
                // the level, then Q = 1/k (or +inf when no finite k works).
                let reached = |k: f64| level.reached(&Tail::from_ln_cdf(-c * k));
                let mut k = math::floor(-level.ln_p() / c);
                if !k.is_finite() {
                    return 0.0;
                }
                while reached(k + 1.0) {
                    k += 1.0;
                }
                while k >= 1.0 && !reached(k) {
                    k -= 1.0;
                }
                if k < 1.0 {
                    f64::INFINITY
                } else {
                    1.0 / k
                }
            }
            Family::Deadly { p } => {
                if level.reached(&Tail::from_cdf_sf(1.0 - p, p)) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.name();
        match *self {
            Family::Frechet { alpha } | Family::Pareto { alpha } | Family::LogPareto { alpha } => {
                write!(f, "{name}(alpha={alpha})")
            }
            Family::GeneralizedPareto { xi, beta } => write!(f, "{name}(xi={xi},beta={beta})"),
            Family::Burr { alpha, tau } | Family::InverseBurr { alpha, tau } => {
                write!(f, "{name}(alpha={alpha},tau={tau})")
            }
            Family::Stoppa { alpha, beta } => write!(f, "{name}(alpha={alpha},beta={beta})"),
            Family::InverseGeometric { c } => write!(f, "{name}(c={c})"),
            Family::Deadly { p } => write!(f, "{name}(p={p})"),
        }
    }
}

/// CDF, survival and log-CDF at one point, each computed in its most
/// accurate form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Tail {
    pub cdf: f64,
    pub sf: f64,
    pub ln_cdf: f64,
}

impl Tail {
    pub const ZERO: Tail = Tail {
        cdf: 0.0,
        sf: 1.0,
        ln_cdf: f64::NEG_INFINITY,
    };
    pub const ONE: Tail = Tail {
        cdf: 1.0,
        sf: 0.0,
        ln_cdf: 0.0,
    };

    pub fn from_ln_cdf(ln_cdf: f64) -> Tail {
        let l = ln_cdf.min(0.0);
        Tail {
            cdf: math::exp(l),
            sf: -math::expm1(l),
            ln_cdf: l,
        }
    }

    /// Survival `exp(-t)`, CDF `1 - exp(-t)`.
    pub fn from_sf_exponent(t: f64) -> Tail {
        let t = t.max(0.0);
        Tail::from_cdf_sf(-math::expm1(-t), math::exp(-t))
    }

    pub fn from_cdf_sf(cdf: f64, sf: f64) -> Tail {
        let cdf = cdf.clamp(0.0, 1.0);
        let sf = sf.clamp(0.0, 1.0);
        let ln_cdf = if sf < 0.5 {
            math::log1p(-sf)
        } else {
            math::ln(cdf)
        };
        Tail { cdf, sf, ln_cdf }
    }
}

/// A probability level given either from below (`p`) or from above
/// (`q = 1 - p`), so tail quantiles keep full relative precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Level {
    Lower(f64),
    Upper(f64),
}

impl Level {
    pub fn ln_p(self) -> f64 {
        match self {
            Level::Lower(p) => math::ln(p),
            Level::Upper(q) => math::log1p(-q),
        }
    }

    pub fn ln_q(self) -> f64 {
        match self {
            Level::Lower(p) => math::log1p(-p),
            Level::Upper(q) => math::ln(q),
        }
    }

    /// Whether `F(t) >= p` at a point with tail values `t`.
    pub fn reached(self, t: &Tail) -> bool {
        match self {
            Level::Lower(p) => t.cdf >= p,
            Level::Upper(q) => t.sf <= q,
        }
    }

    /// The level `p^(1/beta)`, expressed on whichever side keeps precision.
    fn root(self, beta: f64) -> Level {
        let l = self.ln_p() / beta;
        if l > -core::f64::consts::LN_2 {
            Level::Upper(-math::expm1(l))
        } else {
            Level::Lower(math::exp(l))
        }
    }
}

pub(crate) enum Node {
    Family(Family),
    ScaleShift {
        inner: Distribution,
        a: f64,
        b: f64,
    },
    Power {
        inner: Distribution,
        beta: f64,
    },
    Max(Distribution, Distribution),
    Convex {
        inner: Distribution,
        f: ConvexFn,
    },
    Mixture {
        parts: Vec<Distribution>,
        weights: WeightVector,
    },
    GeneralizedMean {
        parts: Vec<Distribution>,
        weights: WeightVector,
        r: f64,
    },
}

/// A distribution on `[0, +inf]`: a catalog family or a combinator tree.
///
/// Cloning is cheap and values are immutable, so a `Distribution` can be
/// shared freely across threads.
#[derive(Clone)]
pub struct Distribution(Arc<Node>);

const BRACKET_CAP: f64 = 1.0e301; // ~2^1000
const BISECTION_STEPS: usize = 200;
const BISECTION_REL_WIDTH: f64 = 1e-12;

impl Distribution {
    pub(crate) fn from_node(node: Node) -> Self {
        Distribution(Arc::new(node))
    }

    pub(crate) fn node(&self) -> &Node {
        &self.0
    }

    pub fn family(family: Family) -> Result<Self> {
        family.validate()?;
        Ok(Self::from_node(Node::Family(family)))
    }

    pub fn frechet(alpha: f64) -> Result<Self> {
        Self::family(Family::Frechet { alpha })
    }

    pub fn pareto(alpha: f64) -> Result<Self> {
        Self::family(Family::Pareto { alpha })
    }

    pub fn generalized_pareto(xi: f64, beta: f64) -> Result<Self> {
        Self::family(Family::GeneralizedPareto { xi, beta })
    }

    pub fn burr(alpha: f64, tau: f64) -> Result<Self> {
        Self::family(Family::Burr { alpha, tau })
    }

    /// Burr with `alpha = tau`.
    pub fn paralogistic(alpha: f64) -> Result<Self> {
        Self::burr(alpha, alpha)
    }

    /// Burr with `alpha = 1`.
    pub fn log_logistic(tau: f64) -> Result<Self> {
        Self::burr(1.0, tau)
    }

    pub fn inverse_burr(alpha: f64, tau: f64) -> Result<Self> {
        Self::family(Family::InverseBurr { alpha, tau })
    }

    pub fn log_pareto(alpha: f64) -> Result<Self> {
        Self::family(Family::LogPareto { alpha })
    }

    pub fn stoppa(alpha: f64, beta: f64) -> Result<Self> {
        Self::family(Family::Stoppa { alpha, beta })
    }

    pub fn inverse_geometric(c: f64) -> Result<Self> {
        Self::family(Family::InverseGeometric { c })
    }

    pub fn deadly(p: f64) -> Result<Self> {
        Self::family(Family::Deadly { p })
    }

    pub fn as_family(&self) -> Option<&Family> {
        match self.node() {
            Node::Family(f) => Some(f),
            _ => None,
        }
    }

    pub(crate) fn tail(&self, x: f64) -> Tail {
        if x.is_nan() {
            return Tail {
                cdf: f64::NAN,
                sf: f64::NAN,
                ln_cdf: f64::NAN,
            };
        }
        match self.node() {
            Node::Family(f) => f.tail(x),
            Node::ScaleShift { inner, a, b } => {
                if x < *b {
                    Tail::ZERO
                } else if *a == 0.0 {
                    Tail::ONE
                } else {
                    inner.tail((x - b) / a)
                }
            }
            Node::Power { inner, beta } => Tail::from_ln_cdf(beta * inner.tail(x).ln_cdf),
            Node::Max(l, r) => Tail::from_ln_cdf(l.tail(x).ln_cdf + r.tail(x).ln_cdf),
            Node::Convex { inner, f } => {
                if x < 0.0 {
                    Tail::ZERO
                } else {
                    inner.tail(f.inverse_right(x))
                }
            }
            Node::Mixture { parts, weights } => {
                let (mut c, mut s) = (0.0, 0.0);
                for (d, w) in parts.iter().zip(weights.iter()) {
                    let t = d.tail(x);
                    c += w * t.cdf;
                    s += w * t.sf;
                }
                Tail::from_cdf_sf(c, s)
            }
            Node::GeneralizedMean { parts, weights, r } => {
                let lns = parts.iter().map(|d| d.tail(x).ln_cdf);
                let ln = if *r == 0.0 {
                    lns.zip(weights.iter()).map(|(l, w)| w * l).sum::<f64>()
                } else {
                    // (sum w F^r)^(1/r) with sum w = 1, written around 1 so
                    // that CDF values near one keep their survival precision.
                    let s: f64 = lns
                        .zip(weights.iter())
                        .map(|(l, w)| w * math::expm1(r * l))
                        .sum();
                    math::log1p(s.max(-1.0)) / r
                };
                Tail::from_ln_cdf(ln)
            }
        }
    }

    /// `P(X <= x)`; `x` may be `+inf`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.tail(x).cdf
    }

    /// `P(X > x)`, accurate in the far tail.
    pub fn survival(&self, x: f64) -> f64 {
        self.tail(x).sf
    }

    /// `log P(X <= x)`, accurate when the CDF is close to one.
    pub fn log_cdf(&self, x: f64) -> f64 {
        self.tail(x).ln_cdf
    }

    /// `h_F(x) = -log F(1/x)` for `x > 0`. Returns `+inf` when `F(1/x) = 0`.
    pub fn h_f(&self, x: f64) -> f64 {
        if let Node::Family(fam) = self.node() {
            match *fam {
                Family::Frechet { alpha } => return math::powf(x, alpha),
                Family::InverseGeometric { c } => return c * math::ceil(x),
                _ => {}
            }
        }
        let h = -self.log_cdf(1.0 / x);
        if h == 0.0 {
            0.0
        } else {
            h
        }
    }

    /// Generalized inverse `inf{t : F(t) >= p}` for `p` in `(0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        Ok(self.quantile_level(Level::Lower(p)))
    }

    /// `inf{t : P(X > t) <= q}`, i.e. the quantile at `1 - q` without
    /// forming `1 - q`.
    pub fn quantile_upper(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::ProbabilityOutOfRange(q));
        }
        Ok(self.quantile_level(Level::Upper(q)))
    }

    pub(crate) fn quantile_level(&self, level: Level) -> f64 {
        match self.node() {
            Node::Family(f) => f.quantile(level),
            Node::ScaleShift { inner, a, b } => {
                if *a == 0.0 {
                    *b
                } else {
                    a * inner.quantile_level(level) + b
                }
            }
            Node::Power { inner, beta } => inner.quantile_level(level.root(*beta)),
            Node::Convex { inner, f } => f.apply(inner.quantile_level(level)),
            Node::Max(..) | Node::Mixture { .. } | Node::GeneralizedMean { .. } => {
                self.quantile_search(level)
            }
        }
    }

    /// Bisection fallback: bracket `[0, hi]` with `hi` doubling from 1.
    /// Mass that escapes the bracket cap is reported as `+inf`.
    fn quantile_search(&self, level: Level) -> f64 {
        let reached = |t: f64| level.reached(&self.tail(t));
        if reached(0.0) {
            return 0.0;
        }
        let mut hi = 1.0;
        while !reached(hi) {
            hi *= 2.0;
            if hi > BRACKET_CAP {
                return f64::INFINITY;
            }
        }
        let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
        for _ in 0..BISECTION_STEPS {
            if hi - lo <= BISECTION_REL_WIDTH * hi {
                break;
            }
            let mid = lo + (hi - lo) / 2.0;
            if reached(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    pub fn essinf(&self) -> f64 {
        match self.node() {
            Node::Family(_) => 0.0,
            Node::ScaleShift { inner, a, b } => {
                if *a == 0.0 {
                    *b
                } else {
                    a * inner.essinf() + b
                }
            }
            Node::Power { inner, .. } => inner.essinf(),
            Node::Convex { inner, f } => f.apply(inner.essinf()),
            Node::Max(l, r) => l.essinf().max(r.essinf()),
            Node::Mixture { parts, .. } => {
                parts.iter().map(|d| d.essinf()).fold(f64::INFINITY, f64::min)
            }
            Node::GeneralizedMean { parts, r, .. } => {
                let it = parts.iter().map(|d| d.essinf());
                if *r == 0.0 {
                    it.fold(0.0, f64::max)
                } else {
                    it.fold(f64::INFINITY, f64::min)
                }
            }
        }
    }

    pub fn esssup(&self) -> f64 {
        if self.mass_at_infinity() > 0.0 {
            return f64::INFINITY;
        }
        match self.node() {
            Node::Family(f) => f.esssup(),
            Node::ScaleShift { inner, a, b } => {
                if *a == 0.0 {
                    *b
                } else {
                    a * inner.esssup() + b
                }
            }
            Node::Power { inner, .. } => inner.esssup(),
            Node::Convex { inner, f } => f.apply(inner.esssup()),
            Node::Max(l, r) => l.esssup().max(r.esssup()),
            Node::Mixture { parts, .. } | Node::GeneralizedMean { parts, .. } => {
                parts.iter().map(|d| d.esssup()).fold(0.0, f64::max)
            }
        }
    }

    /// `P(X = +inf)`.
    pub fn mass_at_infinity(&self) -> f64 {
        match self.node() {
            Node::Family(f) => f.mass_at_infinity(),
            Node::ScaleShift { inner, a, .. } => {
                if *a == 0.0 {
                    0.0
                } else {
                    inner.mass_at_infinity()
                }
            }
            Node::Power { inner, beta } => {
                -math::expm1(beta * math::log1p(-inner.mass_at_infinity()))
            }
            Node::Max(l, r) => {
                1.0 - (1.0 - l.mass_at_infinity()) * (1.0 - r.mass_at_infinity())
            }
            Node::Convex { inner, .. } => inner.mass_at_infinity(),
            Node::Mixture { parts, weights } => parts
                .iter()
                .zip(weights.iter())
                .map(|(d, w)| w * d.mass_at_infinity())
                .sum(),
            Node::GeneralizedMean { parts, weights, r } => {
                let finite: Vec<f64> = parts.iter().map(|d| 1.0 - d.mass_at_infinity()).collect();
                let m = if *r == 0.0 {
                    finite
                        .iter()
                        .zip(weights.iter())
                        .map(|(f, w)| math::powf(*f, *w))
                        .product()
                } else {
                    let s: f64 = finite
                        .iter()
                        .zip(weights.iter())
                        .map(|(f, w)| w * math::powf(*f, *r))
                        .sum();
                    math::powf(s, 1.0 / r)
                };
                1.0 - m
            }
        }
    }

    /// Whether the CDF has no jumps on `[0, +inf]`.
    pub fn is_continuous(&self) -> bool {
        match self.node() {
            Node::Family(f) => f.is_continuous(),
            Node::ScaleShift { inner, a, .. } => *a > 0.0 && inner.is_continuous(),
            Node::Power { inner, .. } => inner.is_continuous(),
            Node::Max(l, r) => l.is_continuous() && r.is_continuous(),
            Node::Convex { inner, f } => inner.is_continuous() && f.is_strictly_increasing(),
            Node::Mixture { parts, .. } | Node::GeneralizedMean { parts, .. } => {
                parts.iter().all(|d| d.is_continuous())
            }
        }
    }

    pub fn infinite_mean(&self) -> InfiniteMean {
        fn any_yes<'a>(it: impl Iterator<Item = &'a Distribution>) -> InfiniteMean {
            let mut all_no = true;
            for d in it {
                match d.infinite_mean() {
                    InfiniteMean::Yes => return InfiniteMean::Yes,
                    InfiniteMean::Unknown => all_no = false,
                    InfiniteMean::No => {}
                }
            }
            if all_no {
                InfiniteMean::No
            } else {
                InfiniteMean::Unknown
            }
        }
        match self.node() {
            Node::Family(f) => f.infinite_mean(),
            Node::ScaleShift { inner, a, .. } => {
                if *a == 0.0 {
                    InfiniteMean::No
                } else {
                    inner.infinite_mean()
                }
            }
            Node::Power { inner, .. } => inner.infinite_mean(),
            Node::Max(l, r) => any_yes([l, r].into_iter()),
            Node::Convex { inner, .. } => match inner.infinite_mean() {
                InfiniteMean::Yes => InfiniteMean::Yes,
                _ => InfiniteMean::Unknown,
            },
            Node::Mixture { parts, .. } | Node::GeneralizedMean { parts, .. } => {
                any_yes(parts.iter())
            }
        }
    }

    /// Advisory class membership propagated through the closure rules that
    /// need no extra hypotheses. `None` when nothing is known analytically.
    pub fn h_valid(&self) -> Option<bool> {
        match self.node() {
            Node::Family(f) => Some(f.h_valid()),
            Node::ScaleShift { inner, .. } | Node::Power { inner, .. } => inner.h_valid(),
            Node::Convex { inner, .. } => inner.h_valid().filter(|v| *v),
            Node::Max(l, r) => match (l.h_valid(), r.h_valid()) {
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Node::Mixture { .. } | Node::GeneralizedMean { .. } => None,
        }
    }

    /// Inverse-transform draws `quantile(U)`, `U ~ Uniform(0, 1)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, m: usize) -> Vec<f64> {
        (0..m)
            .map(|_| self.quantile_level(Level::Lower(rng::open01(rng))))
            .collect()
    }

    /// Deterministic draws from stream 0 of `seed`.
    pub fn sample_seeded(&self, seed: u64, m: usize) -> Vec<f64> {
        self.sample(&mut rng::stream_rng(seed, 0), m)
    }

    /// Running means `(x1 + ... + xk) / k` of one sample path.
    pub fn sample_mean_trajectory(&self, seed: u64, m: usize) -> Result<Vec<f64>> {
        let atom = self.mass_at_infinity();
        if atom > 0.0 {
            return Err(Error::InfiniteAtom(atom));
        }
        if m == 0 {
            return Err(Error::EmptySample);
        }
        let mut sum = 0.0;
        Ok(self
            .sample_seeded(seed, m)
            .into_iter()
            .enumerate()
            .map(|(i, x)| {
                sum += x;
                sum / (i + 1) as f64
            })
            .collect())
    }

    /// Canonical expression string in the configuration grammar.
    pub fn expression(&self) -> String {
        alloc::format!("{self}")
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn weighted(
            f: &mut fmt::Formatter<'_>,
            parts: &[Distribution],
            weights: &WeightVector,
        ) -> fmt::Result {
            for (i, (d, w)) in parts.iter().zip(weights.iter()).enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{w}:{d}")?;
            }
            Ok(())
        }
        match self.node() {
            Node::Family(fam) => write!(f, "{fam}"),
            Node::ScaleShift { inner, a, b } => write!(f, "scale({inner},a={a},b={b})"),
            Node::Power { inner, beta } => write!(f, "power({inner},beta={beta})"),
            Node::Max(l, r) => write!(f, "max({l},{r})"),
            Node::Convex { inner, f: func } => write!(f, "convex({inner},f={})", func.label()),
            Node::Mixture { parts, weights } => {
                f.write_str("mix(")?;
                weighted(f, parts, weights)?;
                f.write_str(")")
            }
            Node::GeneralizedMean { parts, weights, r } => {
                write!(f, "gmean(r={r},")?;
                weighted(f, parts, weights)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Distribution({self})")
    }
}
