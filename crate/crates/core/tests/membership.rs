use heavysum_core::combinators::{self, ConvexFn};
use heavysum_core::membership::{
    check_subadditive, check_super_frechet, check_super_pareto, DEFAULT_TOL,
};
use heavysum_core::{Distribution, Grid, Verdict, WeightVector};

fn h_valid_catalog() -> Vec<Distribution> {
    vec![
        Distribution::frechet(0.5).unwrap(),
        Distribution::frechet(1.0).unwrap(),
        Distribution::pareto(0.5).unwrap(),
        Distribution::pareto(1.0).unwrap(),
        Distribution::generalized_pareto(1.0, 1.0).unwrap(),
        Distribution::generalized_pareto(2.0, 1.0).unwrap(),
        Distribution::burr(0.8, 0.9).unwrap(),
        Distribution::inverse_burr(2.0, 0.8).unwrap(),
        Distribution::log_pareto(0.9).unwrap(),
        Distribution::stoppa(0.9, 2.0).unwrap(),
        Distribution::inverse_geometric(1.0).unwrap(),
    ]
}

#[test]
fn catalog_members_are_subadditive() {
    let grid = Grid::default();
    for d in h_valid_catalog() {
        assert_eq!(d.h_valid(), Some(true));
        let r = check_subadditive(&d, &grid, DEFAULT_TOL);
        assert_eq!(r.verdict, Verdict::Pass, "{d}: {:?}", r.worst_margin);
        assert_eq!(r.tested, 40_000);
    }
}

#[test]
fn invalid_parameters_fail_with_witness() {
    let grid = Grid::default();
    for d in [
        Distribution::frechet(1.5).unwrap(),
        Distribution::pareto(2.0).unwrap(),
        Distribution::burr(1.2, 1.0).unwrap(),
    ] {
        assert_eq!(d.h_valid(), Some(false));
        let r = check_subadditive(&d, &grid, DEFAULT_TOL);
        assert_eq!(r.verdict, Verdict::Fail, "{d}");
        let [x, y] = r.witness.expect("witness");
        let lhs = d.h_f(x + y);
        let rhs = d.h_f(x) + d.h_f(y);
        assert!(lhs > rhs, "{d}: witness ({x}, {y}) does not violate");
        assert!(r.worst_margin < -DEFAULT_TOL);
    }
}

#[test]
fn closure_outputs_stay_subadditive() {
    let grid = Grid::default();
    let p08 = Distribution::pareto(0.8).unwrap();
    let p1 = Distribution::pareto(1.0).unwrap();
    let p05 = Distribution::pareto(0.5).unwrap();
    let outputs = vec![
        combinators::power(&p08, 0.5).unwrap(),
        combinators::power(&p08, 2.0).unwrap(),
        combinators::max_of(&p1, &Distribution::frechet(0.8).unwrap()),
        combinators::convex_transform(&p1, ConvexFn::square()).unwrap(),
        combinators::mixture(
            &[p1.clone(), p05.clone()],
            &WeightVector::new(vec![0.3, 0.7]).unwrap(),
        )
        .unwrap(),
    ];
    for d in outputs {
        let r = check_subadditive(&d, &grid, DEFAULT_TOL);
        assert_eq!(r.verdict, Verdict::Pass, "{d}: {}", r.worst_margin);
    }
    let order = combinators::check_stochastic_ordering(&[p1, p05], &grid).unwrap();
    assert!(order.is_ordered());
}

#[test]
fn shape_classes() {
    let grid = Grid::default();
    for d in [
        Distribution::pareto(1.0).unwrap(),
        Distribution::frechet(0.9).unwrap(),
        Distribution::burr(0.9, 0.9).unwrap(),
    ] {
        let r = check_super_frechet(&d, &grid, DEFAULT_TOL);
        assert_eq!(r.verdict, Verdict::Pass, "{d}: {:?}", r.checks);
        assert_eq!(check_subadditive(&d, &grid, DEFAULT_TOL).verdict, Verdict::Pass);
    }
    for d in [
        Distribution::pareto(0.8).unwrap(),
        Distribution::burr(0.8, 0.9).unwrap(),
        Distribution::log_pareto(0.9).unwrap(),
    ] {
        let r = check_super_pareto(&d, &grid, DEFAULT_TOL);
        assert_eq!(r.verdict, Verdict::Pass, "{d}: {:?}", r.checks);
        assert_eq!(check_subadditive(&d, &grid, DEFAULT_TOL).verdict, Verdict::Pass);
    }
    let ig = Distribution::inverse_geometric(1.0).unwrap();
    assert_eq!(check_super_frechet(&ig, &grid, DEFAULT_TOL).verdict, Verdict::Fail);
    assert_eq!(check_subadditive(&ig, &grid, DEFAULT_TOL).verdict, Verdict::Pass);
}

/// Regression baseline: Frechet(0.5) as f(Y), Y ~ Pareto(1), has
/// f(x) = (-log(1 - 1/(x+1)))^-2 = log1p(1/x)^-2, which is concave near 0.
#[test]
fn frechet_half_super_pareto_baseline() {
    let d = Distribution::frechet(0.5).unwrap();
    let r = check_super_pareto(&d, &Grid::default(), DEFAULT_TOL);
    let f = |x: f64| (1.0 / x).ln_1p().powi(-2);
    let (a, b) = (1e-3, 1e-1);
    let independent = f((a + b) / 2.0) > (f(a) + f(b)) / 2.0;
    assert!(independent);
    assert_eq!(r.verdict, Verdict::Fail);
}
