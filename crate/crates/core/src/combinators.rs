//! Closure operations: affine maps, powers of the CDF, independent maxima,
//! convex transforms, mixtures and generalized r-means.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;

use crate::dist::{Distribution, Node};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::math;
use crate::weights::WeightVector;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A non-decreasing convex map `f: [0, inf) -> [0, inf)` with `f(0) = 0`,
/// optionally paired with a closed-form right-continuous inverse.
#[derive(Clone)]
pub struct ConvexFn {
    label: String,
    f: RealFn,
    inverse: Option<RealFn>,
    strictly_increasing: bool,
}

const CONVEXITY_REL_TOL: f64 = 1e-9;

impl ConvexFn {
    /// Wraps an arbitrary callable. Nothing is checked until the function
    /// is handed to [`convex_transform`].
    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ConvexFn {
            label: label.into(),
            f: Arc::new(f),
            inverse: None,
            strictly_increasing: false,
        }
    }

    /// Supplies `f^{-1+}` in closed form. The function is then assumed
    /// strictly increasing.
    pub fn with_inverse(mut self, inv: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.inverse = Some(Arc::new(inv));
        self.strictly_increasing = true;
        self
    }

    pub fn identity() -> Self {
        Self::custom("identity", |x| x).with_inverse(|y| y)
    }

    pub fn square() -> Self {
        Self::custom("square", |x| x * x).with_inverse(math::sqrt)
    }

    /// `x^k` for `k >= 1`.
    pub fn pow(k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 1.0) {
            return Err(Error::InvalidParameter {
                family: "pow",
                name: "k",
                value: k,
            });
        }
        Ok(
            Self::custom(alloc::format!("pow,k={k}"), move |x| math::powf(x, k))
                .with_inverse(move |y| math::powf(y, 1.0 / k)),
        )
    }

    /// `exp(x) - 1`.
    pub fn expm1() -> Self {
        Self::custom("expm1", math::expm1).with_inverse(math::log1p)
    }

    /// `(x + 1)^(1/alpha) - 1` for `alpha in (0, 1]`; maps Pareto(1) to
    /// Pareto(alpha).
    pub fn pareto_reshape(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter {
                family: "pareto_reshape",
                name: "alpha",
                value: alpha,
            });
        }
        Ok(Self::custom(alloc::format!("pareto_reshape,alpha={alpha}"), move |x| {
            math::expm1(math::log1p(x) / alpha)
        })
        .with_inverse(move |y| math::expm1(alpha * math::log1p(y))))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.strictly_increasing
    }

    pub fn apply(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            f64::INFINITY
        } else {
            (self.f)(x)
        }
    }

    /// `f^{-1+}(y) = inf{x >= 0 : f(x) > y}`.
    pub fn inverse_right(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        if y == f64::INFINITY {
            return f64::INFINITY;
        }
        if let Some(inv) = &self.inverse {
            return inv(y);
        }
        let above = |x: f64| self.apply(x) > y;
        if above(0.0) {
            return 0.0;
        }
        let mut hi = 1.0;
        while !above(hi) {
            hi *= 2.0;
            if hi > 1e301 {
                return f64::INFINITY;
            }
        }
        let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
        for _ in 0..200 {
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            let mid = lo + (hi - lo) / 2.0;
            if above(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Numerical gate: `f(0) = 0`, monotone, non-constant and midpoint
    /// convex on all pairs of the default log grid. Necessary, not
    /// sufficient.
    pub fn validate(&self) -> Result<()> {
        let f0 = self.apply(0.0);
        if f0 != 0.0 {
            return Err(Error::NotAnchored(f0));
        }
        let xs = Grid::default().values();
        let fs: Vec<f64> = xs.iter().map(|&x| self.apply(x)).collect();
        for i in 1..xs.len() {
            if fs[i].is_nan() || fs[i] < fs[i - 1] {
                return Err(Error::NotMonotone {
                    x: xs[i - 1],
                    y: xs[i],
                });
            }
        }
        if fs[fs.len() - 1] <= 0.0 {
            return Err(Error::ConstantTransform);
        }
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                let rhs = 0.5 * (fs[i] + fs[j]);
                if !rhs.is_finite() {
                    continue;
                }
                let lhs = self.apply(0.5 * (xs[i] + xs[j]));
                let gap = lhs - rhs;
                if gap > CONVEXITY_REL_TOL * rhs.abs().max(1.0) {
                    return Err(Error::NotConvex {
                        x: xs[i],
                        y: xs[j],
                        gap,
                    });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ConvexFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConvexFn({})", self.label)
    }
}

/// Distribution of `aX + b`; `a = 0` gives the point mass at `b`.
pub fn scale_shift(dist: &Distribution, a: f64, b: f64) -> Result<Distribution> {
    for (name, v) in [("a", a), ("b", b)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParameter {
                family: "scale",
                name,
                value: v,
            });
        }
    }
    Ok(Distribution::from_node(Node::ScaleShift {
        inner: dist.clone(),
        a,
        b,
    }))
}

/// CDF `F^beta`.
pub fn power(dist: &Distribution, beta: f64) -> Result<Distribution> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter {
            family: "power",
            name: "beta",
            value: beta,
        });
    }
    Ok(Distribution::from_node(Node::Power {
        inner: dist.clone(),
        beta,
    }))
}

/// Law of the maximum of independent draws: CDF `F1 F2`.
pub fn max_of(left: &Distribution, right: &Distribution) -> Distribution {
    Distribution::from_node(Node::Max(left.clone(), right.clone()))
}

/// Law of `f(X)`: CDF `F(f^{-1+}(x))`. `f` is validated first.
pub fn convex_transform(dist: &Distribution, f: ConvexFn) -> Result<Distribution> {
    f.validate()?;
    Ok(Distribution::from_node(Node::Convex {
        inner: dist.clone(),
        f,
    }))
}

fn check_parts(parts: &[Distribution], weights: &WeightVector) -> Result<()> {
    if parts.len() < 2 {
        return Err(Error::TooFewComponents {
            min: 2,
            found: parts.len(),
        });
    }
    if parts.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: parts.len(),
            found: weights.len(),
        });
    }
    Ok(())
}

/// CDF `sum theta_i F_i`.
pub fn mixture(parts: &[Distribution], weights: &WeightVector) -> Result<Distribution> {
    check_parts(parts, weights)?;
    Ok(Distribution::from_node(Node::Mixture {
        parts: parts.to_vec(),
        weights: weights.clone(),
    }))
}

/// CDF `(sum w_i F_i^r)^(1/r)`, or `prod F_i^(w_i)` at `r = 0`.
pub fn generalized_r_mean(
    parts: &[Distribution],
    weights: &WeightVector,
    r: f64,
) -> Result<Distribution> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::NegativePower(r));
    }
    check_parts(parts, weights)?;
    Ok(Distribution::from_node(Node::GeneralizedMean {
        parts: parts.to_vec(),
        weights: weights.clone(),
        r,
    }))
}

/// Outcome of [`check_stochastic_ordering`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum OrderingVerdict {
    /// `permutation[0] <=_st permutation[1] <=_st ...`
    Ordered { permutation: Vec<usize> },
    /// CDFs of components `first` and `second` cross: `first` lies below
    /// at `below` and above at `above`.
    NotOrdered {
        first: usize,
        second: usize,
        below: f64,
        above: f64,
    },
}

impl OrderingVerdict {
    pub fn is_ordered(&self) -> bool {
        matches!(self, OrderingVerdict::Ordered { .. })
    }
}

const ORDERING_TOL: f64 = 1e-12;

/// Looks for a stochastic order of the components on `grid`.
///
/// `X <=_st Y` means `F_X >= F_Y` pointwise, so the permutation lists the
/// components by decreasing CDF.
pub fn check_stochastic_ordering(parts: &[Distribution], grid: &Grid) -> Result<OrderingVerdict> {
    if parts.len() < 2 {
        return Err(Error::TooFewComponents {
            min: 2,
            found: parts.len(),
        });
    }
    let xs = grid.values();
    let cdfs: Vec<Vec<f64>> = parts
        .iter()
        .map(|d| xs.iter().map(|&x| d.cdf(x)).collect())
        .collect();
    // Any valid order must agree with the order of CDF sums.
    let sums: Vec<f64> = cdfs.iter().map(|c| c.iter().sum()).collect();
    let mut perm: Vec<usize> = (0..parts.len()).collect();
    perm.sort_by(|&i, &j| sums[j].total_cmp(&sums[i]).then(i.cmp(&j)));
    for w in perm.windows(2) {
        let (hi, lo) = (&cdfs[w[0]], &cdfs[w[1]]);
        if let Some(k) = (0..xs.len()).find(|&k| hi[k] < lo[k] - ORDERING_TOL) {
            // Sum order says hi >= lo on average, so a point with the
            // reverse strict inequality also exists.
            let above = (0..xs.len())
                .find(|&k| hi[k] > lo[k] + ORDERING_TOL)
                .map_or(f64::NAN, |k| xs[k]);
            return Ok(OrderingVerdict::NotOrdered {
                first: w[0],
                second: w[1],
                below: xs[k],
                above,
            });
        }
    }
    Ok(OrderingVerdict::Ordered { permutation: perm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pareto(a: f64) -> Distribution {
        Distribution::pareto(a).unwrap()
    }

    fn grid() -> Vec<f64> {
        Grid::default().values()
    }

    #[test]
    fn scale_shift_examples() {
        let d = scale_shift(&pareto(1.0), 2.0, 0.0).unwrap();
        assert_relative_eq!(d.quantile(0.5).unwrap(), 2.0, max_relative = 1e-15);
        let point = scale_shift(&pareto(1.0), 0.0, 5.0).unwrap();
        assert_eq!(point.cdf(4.9), 0.0);
        assert_eq!(point.cdf(5.0), 1.0);
        assert_eq!(point.quantile(0.3).unwrap(), 5.0);
        let id = scale_shift(&pareto(1.0), 1.0, 0.0).unwrap();
        for x in grid() {
            assert_eq!(id.cdf(x), pareto(1.0).cdf(x));
        }
        assert!(scale_shift(&pareto(1.0), -1.0, 0.0).is_err());
        assert!(scale_shift(&pareto(1.0), 1.0, -0.5).is_err());
        let zero = scale_shift(&pareto(1.0), 0.0, 0.0).unwrap();
        assert!(zero.sample_mean_trajectory(3, 100).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn power_examples() {
        assert_relative_eq!(
            power(&pareto(1.0), 2.0).unwrap().cdf(1.0),
            0.25,
            max_relative = 1e-15
        );
        let id = power(&pareto(0.7), 1.0).unwrap();
        let st = Distribution::stoppa(0.8, 1.5).unwrap();
        let pw = power(&pareto(0.8), 1.5).unwrap();
        for x in grid() {
            assert_relative_eq!(id.cdf(x), pareto(0.7).cdf(x), max_relative = 1e-15);
            assert_relative_eq!(pw.cdf(x), st.cdf(x), max_relative = 1e-12);
        }
        assert!(power(&pareto(1.0), 0.0).is_err());
        for p in [0.01, 0.5, 0.99, 0.999999] {
            assert_relative_eq!(
                pw.quantile(p).unwrap(),
                st.quantile(p).unwrap(),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn max_examples() {
        let f = Distribution::burr(0.8, 0.9).unwrap();
        let m = max_of(&f, &f);
        for x in grid() {
            assert_relative_eq!(m.cdf(x), f.cdf(x) * f.cdf(x), max_relative = 1e-13);
        }
        let fr = Distribution::frechet(1.0).unwrap();
        let mm = max_of(&fr, &fr);
        let scaled = scale_shift(&fr, 2.0, 0.0).unwrap();
        for x in grid() {
            assert_relative_eq!(mm.cdf(x), (-2.0 / x).exp(), max_relative = 1e-12);
            assert_relative_eq!(mm.cdf(x), scaled.cdf(x), max_relative = 1e-12);
        }
        let dd = max_of(
            &Distribution::deadly(0.3).unwrap(),
            &Distribution::deadly(0.2).unwrap(),
        );
        assert_relative_eq!(dd.cdf(10.0), 0.7 * 0.8, max_relative = 1e-15);
        assert_relative_eq!(dd.mass_at_infinity(), 1.0 - 0.7 * 0.8, max_relative = 1e-15);
        let q = mm.quantile(0.5).unwrap();
        assert_relative_eq!(q, 2.0 / 2f64.ln(), max_relative = 1e-10);
    }

    #[test]
    fn convex_examples() {
        let sq = convex_transform(&pareto(1.0), ConvexFn::square()).unwrap();
        assert_relative_eq!(sq.cdf(4.0), 2.0 / 3.0, max_relative = 1e-15);
        let reshaped = convex_transform(&pareto(1.0), ConvexFn::pareto_reshape(0.5).unwrap()).unwrap();
        let lp = convex_transform(&pareto(0.9), ConvexFn::expm1()).unwrap();
        let log_pareto = Distribution::log_pareto(0.9).unwrap();
        let id = convex_transform(&pareto(0.9), ConvexFn::identity()).unwrap();
        for x in grid() {
            assert_relative_eq!(reshaped.cdf(x), pareto(0.5).cdf(x), max_relative = 1e-12);
            assert_relative_eq!(lp.cdf(x), log_pareto.cdf(x), max_relative = 1e-12);
            assert_relative_eq!(id.cdf(x), pareto(0.9).cdf(x), max_relative = 1e-12);
        }
    }

    #[test]
    fn convexity_gate_rejects_concave_maps() {
        let err = convex_transform(&pareto(1.0), ConvexFn::custom("sqrt", math::sqrt)).unwrap_err();
        match err {
            Error::NotConvex { x, y, gap } => {
                assert!(x < y && gap > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            ConvexFn::custom("shifted", |x| x + 1.0).validate(),
            Err(Error::NotAnchored(_))
        ));
        assert!(matches!(
            ConvexFn::custom("zero", |_| 0.0).validate(),
            Err(Error::ConstantTransform)
        ));
        assert!(matches!(
            ConvexFn::custom("neg", |x| -x).validate(),
            Err(Error::NotMonotone { .. })
        ));
    }

    #[test]
    fn bisection_inverse_matches_closed_form() {
        let cases = [
            (ConvexFn::custom("square", |x| x * x), ConvexFn::square()),
            (ConvexFn::custom("expm1", math::expm1), ConvexFn::expm1()),
        ];
        for (bis, closed) in cases {
            for y in grid() {
                let a = bis.inverse_right(y);
                assert_relative_eq!(a, closed.inverse_right(y), max_relative = 1e-12);
                assert_relative_eq!(bis.apply(a), y, max_relative = 1e-9);
            }
        }
        // Flat piece: inf{x : f(x) > 0} is where f leaves zero.
        let hinge = ConvexFn::custom("hinge", |x: f64| (x - 2.0).max(0.0));
        assert_relative_eq!(hinge.inverse_right(0.0), 2.0, max_relative = 1e-12);
        assert_eq!(hinge.inverse_right(-1.0), 0.0);
    }

    #[test]
    fn mixture_examples() {
        let w = WeightVector::uniform(2).unwrap();
        let m = mixture(&[pareto(1.0), pareto(1.0)], &w).unwrap();
        for x in grid() {
            assert_relative_eq!(m.cdf(x), pareto(1.0).cdf(x), max_relative = 1e-15);
        }
        let w = WeightVector::new(alloc::vec![0.3, 0.7]).unwrap();
        let m = mixture(&[pareto(1.0), pareto(0.5)], &w).unwrap();
        let expected = 0.3 * 0.5 + 0.7 * (1.0 - 2f64.powf(-0.5));
        assert_relative_eq!(m.cdf(1.0), expected, max_relative = 1e-15);
        assert_relative_eq!(m.cdf(1.0), 0.355025, max_relative = 1e-6);
        assert!(WeightVector::new(alloc::vec![1.0, 0.0]).is_err());
        let q = m.quantile(0.6).unwrap();
        assert_relative_eq!(m.cdf(q), 0.6, max_relative = 1e-10);
        assert!(mixture(&[pareto(1.0)], &WeightVector::uniform(1).unwrap()).is_err());
    }

    #[test]
    fn ordering_examples() {
        let g = Grid::default();
        let v = check_stochastic_ordering(&[pareto(0.5), pareto(1.0)], &g).unwrap();
        assert_eq!(v, OrderingVerdict::Ordered { permutation: alloc::vec![1, 0] });
        let v = check_stochastic_ordering(&[pareto(1.0), pareto(1.0)], &g).unwrap();
        assert!(v.is_ordered());
        // exp(-t) <= 1/(1+t) with t = 1/x, so Pareto(1) <=_st Frechet(1).
        let fr = Distribution::frechet(1.0).unwrap();
        let v = check_stochastic_ordering(&[fr.clone(), pareto(1.0)], &g).unwrap();
        assert_eq!(v, OrderingVerdict::Ordered { permutation: alloc::vec![1, 0] });
        // Frechet(2) and Pareto(1) cross.
        let v = check_stochastic_ordering(&[Distribution::frechet(2.0).unwrap(), pareto(1.0)], &g)
            .unwrap();
        match v {
            OrderingVerdict::NotOrdered { below, above, .. } => {
                assert!(below.is_finite() && above.is_finite())
            }
            other => panic!("expected crossing, got {other:?}"),
        }
    }

    #[test]
    fn r_mean_examples() {
        let w = WeightVector::uniform(2).unwrap();
        let a = pareto(0.7);
        let b = Distribution::burr(0.8, 0.9).unwrap();
        let parts = [a.clone(), b.clone()];
        let m0 = generalized_r_mean(&parts, &w, 0.0).unwrap();
        let m1 = generalized_r_mean(&parts, &w, 1.0).unwrap();
        let m2 = generalized_r_mean(&parts, &w, 2.0).unwrap();
        let mix = mixture(&parts, &w).unwrap();
        let same = generalized_r_mean(&[a.clone(), a.clone()], &w, 0.0).unwrap();
        for x in grid() {
            assert_relative_eq!(m1.cdf(x), mix.cdf(x), max_relative = 1e-12);
            assert_relative_eq!(same.cdf(x), a.cdf(x), max_relative = 1e-12);
            assert!(m0.cdf(x) <= m1.cdf(x) * (1.0 + 1e-12));
            assert!(m1.cdf(x) <= m2.cdf(x) * (1.0 + 1e-12));
            let geo = (a.cdf(x) * b.cdf(x)).sqrt();
            assert_relative_eq!(m0.cdf(x), geo, max_relative = 1e-12);
        }
        assert!(generalized_r_mean(&parts, &w, -1.0).is_err());
    }

    #[test]
    fn display_round_trips_through_grammar_shape() {
        let w = WeightVector::new(alloc::vec![0.3, 0.7]).unwrap();
        let m = mixture(&[pareto(1.0), pareto(0.5)], &w).unwrap();
        assert_eq!(m.to_string(), "mix(0.3:pareto(alpha=1),0.7:pareto(alpha=0.5))");
        let p = power(&pareto(1.0), 2.0).unwrap();
        assert_eq!(p.to_string(), "power(pareto(alpha=1),beta=2)");
        let c = convex_transform(&pareto(1.0), ConvexFn::pow(3.0).unwrap()).unwrap();
        assert_eq!(c.to_string(), "convex(pareto(alpha=1),f=pow,k=3)");
    }
}
