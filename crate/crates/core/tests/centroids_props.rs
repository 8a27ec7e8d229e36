use proptest::prelude::*;
use tjdiv::centroids::{cccp_steps, jensen_centroid_cccp, total_jensen_centroid, total_jensen_loss};
use tjdiv::{CentroidConfig, Generator, Generator64, Skew, WeightedPointSet};

fn grid_minimum(g: &Generator64, alpha: Skew<f64>, data: &WeightedPointSet<f64>, lo: f64, hi: f64) -> (f64, f64) {
    let mut best = (f64::INFINITY, lo);
    let steps = ((hi - lo) / 1e-5).round() as usize;
    for i in 0..=steps {
        let x = lo + i as f64 * 1e-5;
        let l = total_jensen_loss(g, alpha, data, &[x]).unwrap();
        if l < best.0 {
            best = (l, x);
        }
    }
    best
}

#[test]
fn one_dimensional_centroids_match_grid_oracle() {
    let sets: [&[f64]; 3] = [&[0.5, 2.0, 8.0], &[1.0, 1.5, 3.0, 6.0], &[0.2, 0.9, 4.0, 4.5, 9.0]];
    for g in [Generator::<f64>::shannon(1).unwrap(), Generator::burg(1).unwrap()] {
        for (i, pts) in sets.iter().enumerate() {
            let data = WeightedPointSet::uniform(pts.iter().map(|&x| vec![x]).collect()).unwrap();
            let alpha = Skew::new(if i == 1 { 0.3 } else { 0.5 });
            let r = total_jensen_centroid(&g, &data, &CentroidConfig::new(alpha)).unwrap();
            let lo = pts.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = pts.iter().cloned().fold(0.0, f64::max);
            let (best, at) = grid_minimum(&g, alpha, &data, lo, hi);
            assert!(r.loss <= best + 1e-4, "{} set {i}: loss {} vs grid {}", g.name(), r.loss, best);
            assert!((r.center[0] - at).abs() < 1e-3, "{} set {i}: {} vs {}", g.name(), r.center[0], at);
            let bary = total_jensen_loss(&g, alpha, &data, &data.barycenter()).unwrap();
            assert!(r.loss <= bary + 1e-10);
            for w in &r.stage_weights_trace {
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn squared_euclidean_improves_on_barycenter() {
    let g = Generator::<f64>::squared_euclidean(2).unwrap();
    let data = WeightedPointSet::uniform(vec![vec![0.0, 0.0], vec![3.0, 1.0], vec![-1.0, 4.0]]).unwrap();
    let r = total_jensen_centroid(&g, &data, &CentroidConfig::new(Skew::half())).unwrap();
    let bary = total_jensen_loss(&g, Skew::half(), &data, &data.barycenter()).unwrap();
    assert!(r.loss <= bary);
    assert!(r.two_stage_loss >= r.loss);
}

fn generators() -> Vec<Generator64> {
    vec![
        Generator::shannon(2).unwrap(),
        Generator::burg(2).unwrap(),
        Generator::bit(2).unwrap(),
        Generator::squared_euclidean(2).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inner_cccp_is_monotone(
        pts in prop::collection::vec(prop::collection::vec(0.02f64..0.98, 2), 1..6),
        ws in prop::collection::vec(0.1f64..2.0, 6),
        a in 0.05f64..0.95,
        start in prop::collection::vec(0.05f64..0.95, 2),
    ) {
        let weights: Vec<f64> = ws[..pts.len()].to_vec();
        let total: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        for g in generators() {
            let t = cccp_steps(&g, Skew::new(a), &pts, &weights, &start, 30, None).unwrap();
            for w in t.losses.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{}: {:?}", g.name(), w);
            }
        }
    }

    #[test]
    fn plain_centroid_translation_equivariance(
        pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 1..6),
        shift in prop::collection::vec(-3.0f64..3.0, 2),
        a in 0.05f64..0.95,
    ) {
        let g = Generator::<f64>::squared_euclidean(2).unwrap();
        let data = WeightedPointSet::uniform(pts.clone()).unwrap();
        let moved: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] + shift[0], p[1] + shift[1]]).collect();
        let moved = WeightedPointSet::uniform(moved).unwrap();
        let c = jensen_centroid_cccp(&g, Skew::new(a), &data, None, 10).unwrap();
        let d = jensen_centroid_cccp(&g, Skew::new(a), &moved, None, 10).unwrap();
        for i in 0..2 {
            prop_assert!((d[i] - c[i] - shift[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_normalise(ws in prop::collection::vec(0.0f64..10.0, 1..8)) {
        prop_assume!(ws.iter().sum::<f64>() > 0.0);
        let pts = (0..ws.len()).map(|i| vec![i as f64]).collect();
        let set = WeightedPointSet::new(pts, ws).unwrap();
        prop_assert!((set.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
