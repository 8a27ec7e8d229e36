use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tjdiv::divergences::kl_gaussian;

fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(d, d) * 0.5
}

fn random_rotation(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let mut q = a.qr().q();
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

fn kl(m1: &DVector<f64>, s1: &DMatrix<f64>, m2: &DVector<f64>, s2: &DMatrix<f64>) -> f64 {
    let flat = |s: &DMatrix<f64>| s.transpose().iter().copied().collect::<Vec<_>>();
    kl_gaussian(m1.as_slice(), &flat(s1), m2.as_slice(), &flat(s2)).unwrap().value
}

#[test]
fn kl_is_invariant_under_rigid_motions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..100 {
        let d = 1 + case % 5;
        let m1 = DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
        let m2 = DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
        let s1 = random_spd(&mut rng, d);
        let s2 = random_spd(&mut rng, d);
        let r = random_rotation(&mut rng, d);
        let t = DVector::from_fn(d, |_, _| rng.random_range(-5.0..5.0));
        let before = kl(&m1, &s1, &m2, &s2);
        let move_mean = |m: &DVector<f64>| &r * m + &t;
        let move_cov = |s: &DMatrix<f64>| {
            let c = &r * s * r.transpose();
            (&c + c.transpose()) * 0.5
        };
        let after = kl(&move_mean(&m1), &move_cov(&s1), &move_mean(&m2), &move_cov(&s2));
        assert!((before - after).abs() < 1e-9, "d={d}: {before} vs {after}");
    }
}

#[test]
fn unit_variance_shift() {
    let v: f64 = kl_gaussian(&[0.0], &[1.0], &[1.0], &[1.0]).unwrap().value;
    assert!((v - 0.5).abs() < 1e-12);
}
