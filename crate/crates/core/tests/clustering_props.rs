use proptest::prelude::*;
use tjdiv::clustering::{
    assign, brute_force_discrete_optimum, estimate_bound_constants, lloyd_cluster, potential, seed, seed_with_rng,
    seeding_bound_experiment, symmetry_surrogate, trial_rng, triangle_surrogate,
};
use tjdiv::divergences::{jensen_scaled, total_jensen};
use tjdiv::{CentroidConfig, Generator, SeedingConfig, Skew};

fn line(xs: &[f64]) -> Vec<Vec<f64>> {
    xs.iter().map(|&x| vec![x]).collect()
}

/// Exact probability that each row is among the two seeds.
fn two_seed_inclusion(d: &[Vec<f64>]) -> Vec<f64> {
    let n = d.len();
    let mut prob = vec![0.0; n];
    for first in 0..n {
        let total: f64 = (0..n).filter(|&i| i != first).map(|i| d[first][i]).sum();
        prob[first] += 1.0 / n as f64;
        for i in (0..n).filter(|&i| i != first) {
            prob[i] += d[first][i] / total / n as f64;
        }
    }
    prob
}

#[test]
fn seeding_frequencies_match_exact_distribution() {
    let g = Generator::<f64>::shannon(1).unwrap();
    let a = Skew::new(0.4);
    let data = line(&[0.3, 1.0, 1.4, 3.0, 7.5]);
    // d[c][i] = tJ(x_i : x_c)
    let d: Vec<Vec<f64>> =
        data.iter().map(|c| data.iter().map(|x| total_jensen(&g, a, x, c).unwrap().value).collect()).collect();
    let exact = two_seed_inclusion(&d);
    let trials = 100_000u64;
    let mut counts = vec![0usize; data.len()];
    for t in 0..trials {
        for r in seed_with_rng(&g, &data, 2, a, &mut trial_rng(5, t)).unwrap() {
            counts[r] += 1;
        }
    }
    for (i, (&c, &p)) in counts.iter().zip(&exact).enumerate() {
        let freq = c as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() <= 4.0 * sigma, "row {i}: {freq} vs {p}");
    }
}

#[test]
fn first_seed_is_uniform() {
    let g = Generator::<f64>::burg(1).unwrap();
    let data = line(&[1.0, 2.0, 3.0, 4.0]);
    let trials = 100_000u64;
    let mut counts = [0usize; 4];
    for t in 0..trials {
        counts[seed_with_rng(&g, &data, 1, Skew::half(), &mut trial_rng(1, t)).unwrap()[0]] += 1;
    }
    let sigma = (0.25f64 * 0.75 / trials as f64).sqrt();
    for c in counts {
        assert!((c as f64 / trials as f64 - 0.25).abs() <= 3.0 * sigma);
    }
}

#[test]
fn far_outlier_is_picked_second() {
    let g = Generator::<f64>::shannon(1).unwrap();
    let data = line(&[1.0, 1.1, 1.2, 0.9, 1.05, 50.0]);
    let trials = 10_000u64;
    let hits = (0..trials)
        .filter(|&t| seed_with_rng(&g, &data, 2, Skew::half(), &mut trial_rng(3, t)).unwrap().contains(&5))
        .count();
    assert!(hits as f64 / trials as f64 > 0.9);
}

#[test]
fn lloyd_separates_blobs() {
    let g = Generator::<f64>::shannon(1).unwrap();
    let mut rng = trial_rng(17, 0);
    use rand::Rng;
    let mut data = Vec::new();
    for i in 0..40 {
        let center = if i < 20 { 2.0 } else { 8.0 };
        // Uniform noise of standard deviation 0.1 keeps the blobs 6 sigma apart and positive.
        data.push(vec![center + 0.1 * 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0)]);
    }
    let model =
        lloyd_cluster(&g, &data, &SeedingConfig::new(2, Skew::half(), 4), &CentroidConfig::new(Skew::half()), 100)
            .unwrap();
    assert!(model.converged);
    let l0 = model.assignments[0];
    assert!(model.assignments[..20].iter().all(|&l| l == l0));
    assert!(model.assignments[20..].iter().all(|&l| l != l0));
    for (before, after) in &model.assignment_log {
        assert!(after <= before);
    }
    let (again, pot) = assign(&g, Skew::half(), &data, &model.centers).unwrap();
    assert_eq!(again, model.assignments);
    assert!((pot - model.potential).abs() <= 1e-12);
}

#[test]
fn brute_force_separates_clusters() {
    let g = Generator::<f64>::burg(1).unwrap();
    let data = line(&[1.0, 1.2, 1.1, 0.9, 9.0, 9.5, 10.0, 8.7]);
    let m = brute_force_discrete_optimum(&g, Skew::half(), &data, 2).unwrap();
    let l = m.assignments[0];
    assert!(m.assignments[..4].iter().all(|&x| x == l));
    assert!(m.assignments[4..].iter().all(|&x| x != l));
    let rows = m.center_rows.unwrap();
    assert!(rows[0] < 4 && rows[1] >= 4);
}

#[test]
fn experiment_on_distinct_points_is_trivial() {
    let g = Generator::<f64>::shannon(1).unwrap();
    let data = line(&[1.0, 2.0, 3.0]);
    let mut cfg = SeedingConfig::new(3, Skew::half(), 9);
    cfg.trials = 20;
    let e = seeding_bound_experiment(&g, &data, &cfg, 0.5, 100).unwrap();
    assert_eq!(e.mean_potential, 0.0);
    assert_eq!(e.ratio, 0.0);
}

#[test]
fn squared_euclidean_ratio_within_plug_in_bound() {
    let g = Generator::<f64>::squared_euclidean(1).unwrap();
    let data = line(&[0.0, 0.4, 0.9, 1.3, 5.0, 5.2, 6.1, 6.3, 9.0, 9.9]);
    let mut cfg = SeedingConfig::new(2, Skew::half(), 21);
    cfg.trials = 2000;
    let e = seeding_bound_experiment(&g, &data, &cfg, 1.0, 1000).unwrap();
    assert_eq!(e.constants.k1_hat, 1.0);
    assert!(e.ratio >= 1.0);
    assert!(e.ratio <= e.multiplier);
    assert_eq!(e.bound_holds, Some(true));
}

#[test]
fn seeding_determinism() {
    let g = Generator::<f64>::bit(1).unwrap();
    let data = line(&[0.1, 0.2, 0.5, 0.7, 0.95]);
    let cfg = SeedingConfig::new(3, Skew::new(0.3), 123);
    assert_eq!(seed(&g, &data, &cfg).unwrap(), seed(&g, &data, &cfg).unwrap());
    let mut c2 = cfg;
    c2.trials = 50;
    let a = seeding_bound_experiment(&g, &data, &c2, 0.5, 200).unwrap();
    let b = seeding_bound_experiment(&g, &data, &c2, 0.5, 200).unwrap();
    assert_eq!(a.mean_potential.to_bits(), b.mean_potential.to_bits());
}

#[test]
fn surrogates_on_compact_closure() {
    let g = Generator::<f64>::burg(1).unwrap();
    let data = line(&[0.5, 1.0, 2.0, 4.0]);
    let m = triangle_surrogate(&g, Skew::new(0.3), &data, 10_000, 2).unwrap();
    let s = symmetry_surrogate(&g, Skew::new(0.3), &data, 10_000, 2).unwrap();
    assert!(m.is_finite());
    assert!(s.is_finite());
    let c = estimate_bound_constants(&g, &data, 1000, 2).unwrap();
    // Some eps in (0, 1) admits the sampled asymmetry.
    assert!(EPS.iter().any(|&e| s <= c.v(e)));
}

const EPS: [f64; 9] = tjdiv::clustering::EPSILON_GRID;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rho_bounds_sandwich_total_jensen(xs in prop::collection::vec(0.05f64..10.0, 2..6), a in 0.05f64..0.95, seed_v in 0u64..1000) {
        use rand::Rng;
        for g in [Generator::<f64>::shannon(1).unwrap(), Generator::burg(1).unwrap(), Generator::squared_euclidean(1).unwrap()] {
            let data = line(&xs);
            let c = estimate_bound_constants(&g, &data, 200, seed_v).unwrap();
            prop_assert!(c.rho_min > 0.0 && c.rho_min <= c.rho_max && c.rho_max <= 1.0);
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(0.0, f64::max);
            let mut rng = trial_rng(seed_v, 1);
            for _ in 0..100 {
                let p = lo + (hi - lo) * rng.random::<f64>();
                let q = lo + (hi - lo) * rng.random::<f64>();
                let al = Skew::new(a);
                let j = jensen_scaled(&g, al, &[p], &[q]).unwrap().value;
                let t = total_jensen(&g, al, &[p], &[q]).unwrap().value;
                prop_assert!(t >= c.rho_min * j - 1e-12 * j.max(1e-300));
                prop_assert!(t <= c.rho_max * j + 1e-12 * j.max(1e-300));
            }
        }
    }

    #[test]
    fn potential_is_zero_on_data(xs in prop::collection::vec(0.05f64..10.0, 1..6)) {
        let g = Generator::<f64>::shannon(1).unwrap();
        let data = line(&xs);
        prop_assert_eq!(potential(&g, Skew::new(0.2), &data, &data).unwrap(), 0.0);
    }
}
