use heavysum_core::combinators::{self, ConvexFn};
use heavysum_core::{Distribution, Grid, WeightVector};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (0.1..1.0f64).prop_map(|a| Distribution::frechet(a).unwrap()),
        (0.1..1.0f64).prop_map(|a| Distribution::pareto(a).unwrap()),
        (1.0..3.0f64, 0.2..5.0f64).prop_map(|(x, b)| Distribution::generalized_pareto(x, b).unwrap()),
        (0.2..1.0f64, 0.2..1.0f64).prop_map(|(a, t)| Distribution::burr(a, t).unwrap()),
        (0.2..3.0f64, 0.2..1.0f64).prop_map(|(a, t)| Distribution::inverse_burr(a, t).unwrap()),
        (0.2..1.0f64).prop_map(|a| Distribution::log_pareto(a).unwrap()),
        (0.2..1.0f64, 0.2..3.0f64).prop_map(|(a, b)| Distribution::stoppa(a, b).unwrap()),
    ]
}

fn positive_x() -> impl Strategy<Value = f64> {
    (-6.0..6.0f64).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cdf_monotone_and_bounded(d in family(), x in positive_x(), k in 1.0..10.0f64) {
        let (a, b) = (d.cdf(x), d.cdf(x * k));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(a <= b);
        prop_assert_eq!(d.cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn survival_complements_cdf(d in family(), x in positive_x()) {
        let (f, s) = (d.cdf(x), d.survival(x));
        if f > 1e-300 && s > 1e-300 {
            prop_assert!((f + s - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn frechet_h_is_power(alpha in 0.1..2.0f64, x in positive_x()) {
        let d = Distribution::frechet(alpha).unwrap();
        let exact = x.powf(alpha);
        prop_assert!((d.h_f(x) - exact).abs() <= 1e-12 * exact);
    }

    #[test]
    fn quantile_is_generalized_inverse(d in family(), p in 1e-6..(1.0 - 1e-6)) {
        let t = d.quantile(p).unwrap();
        prop_assert!(d.cdf(t) >= p * (1.0 - 1e-12));
        if t > 0.0 && t.is_finite() {
            prop_assert!(d.cdf(t * (1.0 - 1e-9)) < p * (1.0 + 1e-12));
        }
    }

    #[test]
    fn h_nondecreasing(d in family(), x in positive_x(), k in 1.0..10.0f64) {
        prop_assert!(d.h_f(x) >= 0.0);
        prop_assert!(d.h_f(x) <= d.h_f(x * k));
    }

    #[test]
    fn sampling_determinism(seed in any::<u64>()) {
        let d = Distribution::burr(0.8, 0.9).unwrap();
        prop_assert_eq!(d.sample_seeded(seed, 64), d.sample_seeded(seed, 64));
    }

    #[test]
    fn convex_identity_is_identity(d in family(), x in positive_x()) {
        let t = combinators::convex_transform(&d, ConvexFn::identity()).unwrap();
        let (a, b) = (t.cdf(x), d.cdf(x));
        prop_assert!((a - b).abs() <= 1e-12 * b.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn right_inverse_round_trip(k in 1.0..4.0f64, y in positive_x()) {
        let closed = ConvexFn::pow(k).unwrap();
        let bisected = ConvexFn::custom("pow", move |x: f64| x.powf(k));
        for f in [closed, bisected] {
            let back = f.apply(f.inverse_right(y));
            prop_assert!((back - y).abs() <= 1e-9 * y, "{} {}", back, y);
        }
    }

    #[test]
    fn gmean_is_a_cdf(r in 0.0..4.0f64, w in 0.05..0.95f64, a in family(), b in family()) {
        let g = combinators::generalized_r_mean(
            &[a, b],
            &WeightVector::new(vec![w, 1.0 - w]).unwrap(),
            r,
        )
        .unwrap();
        let mut prev = 0.0;
        for x in Grid::default().values() {
            let f = g.cdf(x);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!(f >= prev * (1.0 - 1e-12));
            prev = f;
        }
        prop_assert_eq!(g.cdf(0.0), 0.0);
        prop_assert_eq!(g.cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn gmean_monotone_in_r(x in positive_x(), w in 0.05..0.95f64) {
        let parts = [Distribution::pareto(0.7).unwrap(), Distribution::burr(0.8, 0.9).unwrap()];
        let wv = WeightVector::new(vec![w, 1.0 - w]).unwrap();
        let at = |r: f64| combinators::generalized_r_mean(&parts, &wv, r).unwrap().cdf(x);
        prop_assert!(at(0.0) <= at(1.0) + 1e-12);
        prop_assert!(at(1.0) <= at(2.0) + 1e-12);
    }

    #[test]
    fn mixture_quantile_inverts_cdf(p in 0.01..0.99f64) {
        let m = combinators::mixture(
            &[Distribution::pareto(1.0).unwrap(), Distribution::pareto(0.5).unwrap()],
            &WeightVector::new(vec![0.3, 0.7]).unwrap(),
        )
        .unwrap();
        let t = m.quantile(p).unwrap();
        prop_assert!((m.cdf(t) - p).abs() <= 1e-9);
    }
}

#[test]
fn stoppa_is_powered_pareto() {
    let via_power = combinators::power(&Distribution::pareto(0.8).unwrap(), 1.5).unwrap();
    let stoppa = Distribution::stoppa(0.8, 1.5).unwrap();
    for x in Grid::default().values() {
        let (a, b) = (via_power.cdf(x), stoppa.cdf(x));
        assert!((a - b).abs() <= 1e-12 * b.max(1e-300), "{x}: {a} vs {b}");
    }
}

#[test]
fn convex_transforms_match_closed_forms() {
    let p1 = Distribution::pareto(1.0).unwrap();
    let reshaped = combinators::convex_transform(&p1, ConvexFn::pareto_reshape(0.5).unwrap()).unwrap();
    let p05 = Distribution::pareto(0.5).unwrap();
    let p07 = Distribution::pareto(0.7).unwrap();
    let logp = combinators::convex_transform(&p07, ConvexFn::expm1()).unwrap();
    let lp07 = Distribution::log_pareto(0.7).unwrap();
    for x in Grid::default().values() {
        assert!((reshaped.cdf(x) - p05.cdf(x)).abs() <= 1e-12, "{x}");
        assert!((reshaped.survival(x) / p05.survival(x) - 1.0).abs() <= 1e-10, "{x}");
        assert!((logp.cdf(x) - lp07.cdf(x)).abs() <= 1e-12, "{x}");
    }
}

#[test]
fn max_of_frechet_is_rescaled_frechet() {
    let f1 = Distribution::frechet(1.0).unwrap();
    let mx = combinators::max_of(&f1, &f1);
    let scaled = combinators::scale_shift(&f1, 2.0, 0.0).unwrap();
    for x in Grid::default().values() {
        let exact = (-2.0 / x).exp();
        assert!((mx.cdf(x) - exact).abs() <= 1e-15 + 1e-12 * exact);
        assert!((scaled.cdf(x) - exact).abs() <= 1e-15 + 1e-12 * exact);
    }
}
