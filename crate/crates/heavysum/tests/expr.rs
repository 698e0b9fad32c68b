use heavysum::expr::{parse_dependence, parse_dist};
use heavysum_core::combinators::{self, ConvexFn};
use heavysum_core::{DependenceModel, Distribution, WeightVector};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (0.05..3.0f64).prop_map(|a| Distribution::frechet(a).unwrap()),
        (0.05..3.0f64).prop_map(|a| Distribution::pareto(a).unwrap()),
        (0.1..3.0f64, 0.1..3.0f64).prop_map(|(x, b)| Distribution::generalized_pareto(x, b).unwrap()),
        (0.1..2.0f64, 0.1..2.0f64).prop_map(|(a, t)| Distribution::burr(a, t).unwrap()),
        (0.1..3.0f64, 0.1..1.0f64).prop_map(|(a, t)| Distribution::inverse_burr(a, t).unwrap()),
        (0.1..1.0f64).prop_map(|a| Distribution::log_pareto(a).unwrap()),
        (0.1..1.0f64, 0.1..3.0f64).prop_map(|(a, b)| Distribution::stoppa(a, b).unwrap()),
        (0.1..3.0f64).prop_map(|c| Distribution::inverse_geometric(c).unwrap()),
        (0.01..0.99f64).prop_map(|p| Distribution::deadly(p).unwrap()),
    ]
}

fn tree() -> impl Strategy<Value = Distribution> {
    leaf().prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (inner.clone(), 0.1..5.0f64, 0.0..2.0f64)
                .prop_map(|(d, a, b)| combinators::scale_shift(&d, a, b).unwrap()),
            (inner.clone(), 0.1..4.0f64).prop_map(|(d, b)| combinators::power(&d, b).unwrap()),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| combinators::max_of(&l, &r)),
            (inner.clone(), 1.0..4.0f64).prop_map(|(d, k)| {
                combinators::convex_transform(&d, ConvexFn::pow(k).unwrap()).unwrap()
            }),
            inner.clone().prop_map(|d| combinators::convex_transform(&d, ConvexFn::expm1()).unwrap()),
            (inner.clone(), inner.clone(), 0.05..0.95f64).prop_map(|(a, b, w)| {
                combinators::mixture(&[a, b], &WeightVector::new(vec![w, 1.0 - w]).unwrap()).unwrap()
            }),
            (inner.clone(), inner, 0.0..3.0f64).prop_map(|(a, b, r)| {
                combinators::generalized_r_mean(&[a, b], &WeightVector::uniform(2).unwrap(), r).unwrap()
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn display_round_trips(d in tree(), x in 1e-3..1e3f64) {
        let s = d.expression();
        let back = parse_dist(&s).unwrap();
        prop_assert_eq!(back.expression(), s);
        prop_assert_eq!(back.cdf(x), d.cdf(x));
    }

    #[test]
    fn dependence_round_trips(rho in -1.0..1.0f64, theta in -1.0..-1e-9f64) {
        for m in [DependenceModel::gaussian(rho), DependenceModel::clayton(theta)] {
            prop_assert_eq!(parse_dependence(&m.to_string()).unwrap(), m);
        }
    }

    #[test]
    fn garbage_is_rejected_not_panicking(s in "[a-z_()=,:.0-9 -]{0,40}") {
        let _ = parse_dist(&s);
        let _ = parse_dependence(&s);
    }
}
