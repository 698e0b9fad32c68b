//! Adaptive Gauss-Legendre quadrature on bounded intervals.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule; nodes are roots of `P_n` found by Newton iteration
    /// from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Single-panel estimate of `int_a^b f`.
    pub fn panel<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = a + half;
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Settings for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    pub nodes: usize,
    /// Refine a panel while its halving error estimate exceeds this value
    /// times the panel's share of the full interval.
    pub panel_tol: f64,
    pub max_depth: u32,
    /// Fail when the summed error estimate exceeds this.
    pub target: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            nodes: 64,
            panel_tol: 1e-7,
            max_depth: 20,
            target: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Adaptive integration of `f` over `[a, b]` by recursive panel bisection.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, settings: &Settings) -> Result<Integral> {
    let rule = GaussLegendre::new(settings.nodes);
    integrate_with(&rule, f, a, b, settings)
}

pub(crate) fn integrate_with<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    mut f: F,
    a: f64,
    b: f64,
    settings: &Settings,
) -> Result<Integral> {
    if b <= a {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
        });
    }
    let whole = rule.panel(&mut f, a, b);
    let mut out = Integral {
        value: 0.0,
        error: 0.0,
    };
    // Explicit stack keeps the panel order deterministic and avoids deep
    // recursion.
    let mut stack = alloc::vec![(a, b, whole, 0u32)];
    let total = b - a;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = lo + 0.5 * (hi - lo);
        let left = rule.panel(&mut f, lo, mid);
        let right = rule.panel(&mut f, mid, hi);
        let refined = left + right;
        let err = (refined - est).abs();
        let allowed = settings.panel_tol * (hi - lo) / total;
        if err <= allowed || depth >= settings.max_depth || mid <= lo || mid >= hi {
            out.value += refined;
            out.error += err;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    if !out.value.is_finite() || out.error > settings.target {
        return Err(Error::Quadrature {
            estimate: out.value,
            error: out.error,
        });
    }
    Ok(out)
}
