use proptest::prelude::*;
use tjdiv::robustness::{boundedness_sweep, influence_analytic, influence_empirical, Growth, POINTS_PER_DECADE};
use tjdiv::{Generator, InfluenceQuery};

proptest! {
    #[test]
    fn influence_vanishes_at_inlier(p in 0.05f64..10.0) {
        for g in [Generator::<f64>::shannon(1).unwrap(), Generator::burg(1).unwrap(), Generator::squared_euclidean(1).unwrap()] {
            prop_assert_eq!(influence_analytic(&g, p, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn burg_influence_is_bounded(p in 0.1f64..5.0, y in 0.0f64..1e12) {
        let g = Generator::<f64>::burg(1).unwrap();
        prop_assume!(y > 0.0);
        prop_assert!(influence_analytic(&g, p, y).unwrap().abs() <= 2.0 * p + 1e-12);
    }
}

#[test]
fn empirical_error_shrinks_with_epsilon() {
    for (g, p, y) in [(Generator::<f64>::shannon(1).unwrap(), 1.0, 3.0), (Generator::burg(1).unwrap(), 1.0, 5.0)] {
        let e3 = influence_empirical(&g, &InfluenceQuery::new(p, y, 1e-3).unwrap()).unwrap();
        let e4 = influence_empirical(&g, &InfluenceQuery::new(p, y, 1e-4).unwrap()).unwrap();
        let r = (e3.z_empirical - e3.z_analytic).abs() / (e4.z_empirical - e4.z_analytic).abs();
        // First-order agreement: the error tracks the tenfold change of eps within a factor 5.
        assert!((2.0..=50.0).contains(&r), "{}: ratio {r}", g.name());
    }
}

#[test]
fn sweeps_classify_growth() {
    let s = boundedness_sweep(&Generator::<f64>::shannon(1).unwrap(), 1.0, 1e9, POINTS_PER_DECADE).unwrap();
    let b = boundedness_sweep(&Generator::<f64>::burg(1).unwrap(), 1.0, 1e9, POINTS_PER_DECADE).unwrap();
    assert_eq!(s.growth, Growth::Unbounded);
    assert!(!s.bounded_estimate());
    assert_eq!(b.growth, Growth::Bounded);
    assert!(b.sup_abs_z <= 2.0 + 1e-3);
    assert_eq!(s.rows.len(), 9 * POINTS_PER_DECADE + 1);
}
