mod common;

use medpath::gcopula::MarginalSpec;
use medpath::vine::{
    fit_dag_vine, fit_pair_copula, pathway_independence_test, pseudo_observations, DVineSpec, DagPairs,
    DagVineSpec, PairCopula, PairFamily, Pathway, VineEdge,
};
use proptest::prelude::*;

fn pairs() -> DagPairs<f64> {
    DagPairs {
        sz: PairCopula::gaussian(0.4).unwrap(),
        zm: PairCopula::clayton(1.5).unwrap(),
        my: PairCopula::gaussian(-0.3).unwrap(),
        sm_given_z: PairCopula::clayton(0.8).unwrap(),
        zy_given_m: PairCopula::gaussian(0.2).unwrap(),
        sy_given_zm: PairCopula::gaussian(0.5).unwrap(),
    }
}

#[test]
fn conditional_density_integrates_to_one() {
    let vine = pairs().to_dvine();
    let u = [0.2, 0.7, 0.4];
    let mass: f64 = common::gauss_legendre(200, 0.0, 1.0)
        .into_iter()
        .map(|(v, w)| w * vine.conditional_density(v, &u).unwrap())
        .sum();
    assert!((mass - 1.0).abs() < 1e-3, "{mass}");
}

#[test]
fn conditional_quantile_is_monotone_and_inverts() {
    let spec = DagVineSpec::new(
        pairs(),
        [
            MarginalSpec::gaussian(0.0, 1.0),
            MarginalSpec::gaussian(1.0, 2.0),
            MarginalSpec::gaussian(-1.0, 0.5),
            MarginalSpec::gaussian(3.0, 1.5),
        ],
    )
    .unwrap();
    let vine = spec.pairs.to_dvine();
    let u = [0.3, 0.6, 0.5];
    let mut last = 0.0;
    for a in [0.05, 0.25, 0.5, 0.75, 0.95] {
        let q = vine.conditional_quantile_uniform(a, &u).unwrap();
        assert!(q > last);
        last = q;
    }
    let median = vine.conditional_quantile_uniform(0.5, &u).unwrap();
    let cdf: f64 = common::gauss_legendre(200, 0.0, median)
        .into_iter()
        .map(|(v, w)| w * vine.conditional_density(v, &u).unwrap())
        .sum();
    assert!((cdf - 0.5).abs() < 1e-4, "{cdf}");
}

#[test]
fn sequential_fit_recovers_every_edge() {
    let mut p = DagPairs::<f64>::independence();
    for (e, r) in VineEdge::ALL.iter().zip([0.5, 0.3, -0.4, 0.35, 0.25, -0.3]) {
        p.set(*e, PairCopula::gaussian(r).unwrap());
    }
    let data = DagVineSpec::standard(p).simulate(20_000, 3).unwrap();
    let fit = fit_dag_vine(&data, PairFamily::Gaussian).unwrap();
    for e in VineEdge::ALL {
        let got = fit.edge(e).copula.parameter();
        let want = p.get(e).parameter();
        assert!((got - want).abs() < 0.03, "{}: {got} vs {want}", e.label());
    }
}

#[test]
fn clayton_fit_recovers_theta() {
    let mut p = DagPairs::<f64>::independence();
    p.zm = PairCopula::clayton(2.0).unwrap();
    let data = DagVineSpec::standard(p).simulate(5000, 4).unwrap();
    let fit = fit_pair_copula(&pseudo_observations(&data.z), &pseudo_observations(&data.m), PairFamily::Clayton).unwrap();
    assert!((fit.copula.parameter() - 2.0).abs() < 4.0 * fit.std_error + 0.05);
}

#[test]
fn pathway_test_is_seeded() {
    let data = DagVineSpec::standard(pairs()).simulate(150, 5).unwrap();
    let a = pathway_independence_test(&data, Pathway::CompositeSZY, 49, 6).unwrap();
    let b = pathway_independence_test(&data, Pathway::CompositeSZY, 49, 6).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.tests.iter().map(|t| t.edge.as_str()).collect::<Vec<_>>(), ["S-Z", "Z-Y|M"]);
}

#[test]
fn malformed_vines_rejected() {
    assert!(DVineSpec::<f64>::new(vec!["a".into(), "b".into()], vec![vec![]]).is_err());
    assert!(PairCopula::gaussian(1.0).is_err());
    assert!(PairCopula::clayton(-1.0).is_err());
}

proptest! {
    #[test]
    fn h_inverse_round_trips(w in 0.001..0.999f64, v in 0.001..0.999f64, rho in -0.95..0.95f64, theta in 0.05..15.0f64) {
        for c in [PairCopula::gaussian(rho).unwrap(), PairCopula::clayton(theta).unwrap()] {
            let u = c.h_inverse(w, v).unwrap();
            if u > 1e-12 && u < 1.0 - 1e-12 {
                prop_assert!((c.h(u, v).unwrap() - w).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn h_is_a_distribution_function(u1 in 0.001..0.999f64, u2 in 0.001..0.999f64, v in 0.001..0.999f64, theta in 0.05..10.0f64) {
        let c = PairCopula::clayton(theta).unwrap();
        let (lo, hi) = if u1 < u2 { (u1, u2) } else { (u2, u1) };
        let (a, b) = (c.h(lo, v).unwrap(), c.h(hi, v).unwrap());
        prop_assert!(a <= b + 1e-15 && a >= 0.0 && b <= 1.0);
    }

    #[test]
    fn pseudo_observations_are_in_open_unit_interval(x in proptest::collection::vec(-100.0..100.0f64, 1..60)) {
        let u = pseudo_observations(&x);
        prop_assert!(u.iter().all(|&v| v > 0.0 && v < 1.0));
        let total: f64 = u.iter().sum();
        prop_assert!((total - x.len() as f64 / 2.0).abs() < 1e-9);
    }
}
