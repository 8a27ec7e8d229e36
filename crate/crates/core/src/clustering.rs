//! Total Jensen k-means++ seeding, Lloyd iterations, exhaustive discrete
//! optima and plug-in estimates of the constants in the seeding bound.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(rng_seed)`; trial
//! `t` of an experiment uses stream `t` of that generator, so trials are
//! reproducible independently of how they are scheduled.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::centroids::{total_jensen_centroid, CentroidConfig, WeightedPointSet};
use crate::divergences::{total_jensen, Skew};
use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::scalar::{lit, norm_sq, sub, to_f64, to_f64_vec, Scalar};

/// Largest number of k-subsets [`brute_force_discrete_optimum`] will scan.
pub const BRUTE_FORCE_BUDGET: u128 = 1_000_000;

/// Stream reserved for sampling in [`estimate_bound_constants`].
const CONSTANTS_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedingConfig<T> {
    pub k: usize,
    pub alpha: Skew<T>,
    pub rng_seed: u64,
    pub trials: usize,
}

impl<T: Scalar> SeedingConfig<T> {
    pub fn new(k: usize, alpha: Skew<T>, rng_seed: u64) -> Self {
        Self { k, alpha, rng_seed, trials: 1 }
    }

    fn validate(&self, n: usize) -> Result<()> {
        self.alpha.require_proper()?;
        if self.k == 0 {
            return Err(Error::ParameterRange { name: "k", value: 0.0, range: "[1, n]" });
        }
        if n < self.k {
            return Err(Error::TooFewPoints { n, k: self.k });
        }
        if self.trials == 0 {
            return Err(Error::ParameterRange { name: "trials", value: 0.0, range: "[1, inf)" });
        }
        Ok(())
    }
}

/// Random generator of trial `trial` for `rng_seed`.
pub fn trial_rng(rng_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel<T> {
    pub centers: Vec<Vec<T>>,
    /// Data row of each center when centers are data points.
    pub center_rows: Option<Vec<usize>>,
    pub assignments: Vec<usize>,
    /// `sum_x min_c tJ_alpha(x : c)`.
    pub potential: T,
    /// Lloyd rounds run; 0 for seedings and discrete optima.
    pub rounds: usize,
    pub converged: bool,
    /// Potential under the same centers before and after each reassignment.
    pub assignment_log: Vec<(T, T)>,
    /// Empty clusters re-seeded on the farthest point.
    pub repairs: usize,
}

fn check_data<T: Scalar>(g: &Generator<T>, data: &[Vec<T>]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    for p in data {
        if p.len() != g.dim() {
            return Err(Error::DimensionMismatch { expected: g.dim(), got: p.len() });
        }
        g.check_point(p, false)?;
    }
    Ok(())
}

fn div<T: Scalar>(g: &Generator<T>, alpha: Skew<T>, x: &[T], c: &[T]) -> Result<T> {
    Ok(total_jensen(g, alpha, x, c)?.value)
}

/// Seeds `cfg.k` centers with trial 0 of `cfg.rng_seed`; returns data rows.
pub fn seed<T: Scalar>(g: &Generator<T>, data: &[Vec<T>], cfg: &SeedingConfig<T>) -> Result<Vec<usize>> {
    cfg.validate(data.len())?;
    check_data(g, data)?;
    seed_with_rng(g, data, cfg.k, cfg.alpha, &mut trial_rng(cfg.rng_seed, 0))
}

/// k-means++ style seeding: the first row is uniform, every next row is
/// drawn among the unpicked rows with probability proportional to
/// `min_c tJ_alpha(x : c)`. Falls back to uniform when all of those vanish.
pub fn seed_with_rng<T: Scalar, R: Rng + ?Sized>(
    g: &Generator<T>,
    data: &[Vec<T>],
    k: usize,
    alpha: Skew<T>,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = data.len();
    if n < k {
        return Err(Error::TooFewPoints { n, k });
    }
    let mut picked = vec![false; n];
    let mut rows = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    picked[first] = true;
    rows.push(first);
    let mut nearest = vec![0.0f64; n];
    for (i, x) in data.iter().enumerate() {
        nearest[i] = to_f64(div(g, alpha, x, &data[first])?);
    }
    while rows.len() < k {
        let total: f64 = (0..n).filter(|&i| !picked[i]).map(|i| nearest[i]).sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            let mut last_positive = None;
            for i in (0..n).filter(|&i| !picked[i]) {
                if nearest[i] <= 0.0 {
                    continue;
                }
                acc += nearest[i];
                last_positive = Some(i);
                if target < acc {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.or(last_positive).expect("positive total has a positive term")
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !picked[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        picked[next] = true;
        rows.push(next);
        for (i, x) in data.iter().enumerate() {
            nearest[i] = nearest[i].min(to_f64(div(g, alpha, x, &data[next])?));
        }
    }
    Ok(rows)
}

/// Assigns each point to its closest center (lowest index on ties) and
/// returns the assignment with its potential.
pub fn assign<T: Scalar>(
    g: &Generator<T>,
    alpha: Skew<T>,
    data: &[Vec<T>],
    centers: &[Vec<T>],
) -> Result<(Vec<usize>, T)> {
    if centers.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut labels = Vec::with_capacity(data.len());
    let mut total = T::zero();
    for x in data {
        let mut best = (0, div(g, alpha, x, &centers[0])?);
        for (j, c) in centers.iter().enumerate().skip(1) {
            let d = div(g, alpha, x, c)?;
            if d < best.1 {
                best = (j, d);
            }
        }
        labels.push(best.0);
        total = total + best.1;
    }
    Ok((labels, total))
}

/// `sum_x min_c tJ_alpha(x : c)`.
pub fn potential<T: Scalar>(g: &Generator<T>, alpha: Skew<T>, data: &[Vec<T>], centers: &[Vec<T>]) -> Result<T> {
    Ok(assign(g, alpha, data, centers)?.1)
}

fn cost_of<T: Scalar>(
    g: &Generator<T>,
    alpha: Skew<T>,
    data: &[Vec<T>],
    centers: &[Vec<T>],
    labels: &[usize],
) -> Result<T> {
    let mut total = T::zero();
    for (x, &j) in data.iter().zip(labels) {
        total = total + div(g, alpha, x, &centers[j])?;
    }
    Ok(total)
}

/// Model whose centers are the given data rows.
pub fn model_from_rows<T: Scalar>(
    g: &Generator<T>,
    alpha: Skew<T>,
    data: &[Vec<T>],
    rows: &[usize],
) -> Result<ClusterModel<T>> {
    let centers: Vec<Vec<T>> = rows.iter().map(|&r| data[r].clone()).collect();
    let (assignments, potential) = assign(g, alpha, data, &centers)?;
    Ok(ClusterModel {
        centers,
        center_rows: Some(rows.to_vec()),
        assignments,
        potential,
        rounds: 0,
        converged: true,
        assignment_log: Vec::new(),
        repairs: 0,
    })
}

/// `n choose k`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Exact minimiser of the potential over all k-subsets of the data rows;
/// the lexicographically first subset wins ties.
pub fn brute_force_discrete_optimum<T: Scalar>(
    g: &Generator<T>,
    alpha: Skew<T>,
    data: &[Vec<T>],
    k: usize,
) -> Result<ClusterModel<T>> {
    alpha.require_proper()?;
    check_data(g, data)?;
    let n = data.len();
    if k == 0 {
        return Err(Error::ParameterRange { name: "k", value: 0.0, range: "[1, n]" });
    }
    if n < k {
        return Err(Error::TooFewPoints { n, k });
    }
    let count = binomial(n, k);
    if count > BRUTE_FORCE_BUDGET {
        return Err(Error::CombinatorialBudget { count, budget: BRUTE_FORCE_BUDGET });
    }
    // table[j][i] = tJ(x_i : x_j)
    let mut table = vec![vec![T::zero(); n]; n];
    for (j, row) in table.iter_mut().enumerate() {
        for (i, cell) in row.iter_mut().enumerate() {
            *cell = div(g, alpha, &data[i], &data[j])?;
        }
    }
    let mut subset: Vec<usize> = (0..k).collect();
    let mut best: Option<(T, Vec<usize>)> = None;
    let mut nearest = vec![T::zero(); n];
    loop {
        nearest.copy_from_slice(&table[subset[0]]);
        for &j in &subset[1..] {
            for (m, &d) in nearest.iter_mut().zip(&table[j]) {
                if d < *m {
                    *m = d;
                }
            }
        }
        let total = nearest.iter().fold(T::zero(), |a, &d| a + d);
        if best.as_ref().map(|b| total < b.0).unwrap_or(true) {
            best = Some((total, subset.clone()));
        }
        // Next combination in lexicographic order.
        let mut i = k;
        while i > 0 && subset[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        subset[i - 1] += 1;
        for j in i..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    let (_, rows) = best.expect("at least one subset");
    model_from_rows(g, alpha, data, &rows)
}

/// Lloyd iterations: seed, then alternate nearest-center assignment and
/// total Jensen centroid updates until the assignment is stable.
///
/// `cfg.alpha` overrides the skew of `centroid_cfg`. An empty cluster is
/// re-seeded on the point farthest from its nearest center.
pub fn lloyd_cluster<T: Scalar>(
    g: &Generator<T>,
    data: &[Vec<T>],
    cfg: &SeedingConfig<T>,
    centroid_cfg: &CentroidConfig<T>,
    max_rounds: usize,
) -> Result<ClusterModel<T>> {
    cfg.validate(data.len())?;
    check_data(g, data)?;
    let alpha = cfg.alpha;
    let mut ccfg = centroid_cfg.clone();
    ccfg.alpha = alpha;
    let rows = seed(g, data, cfg)?;
    let mut centers: Vec<Vec<T>> = rows.iter().map(|&r| data[r].clone()).collect();
    let mut labels: Option<Vec<usize>> = None;
    let mut log = Vec::new();
    let mut converged = false;
    let mut rounds = 0;
    let mut repairs = 0;
    while rounds < max_rounds {
        let (next, after) = assign(g, alpha, data, &centers)?;
        if let Some(prev) = &labels {
            log.push((cost_of(g, alpha, data, &centers, prev)?, after));
            if *prev == next {
                converged = true;
                break;
            }
        }
        rounds += 1;
        for j in 0..centers.len() {
            let members: Vec<Vec<T>> =
                data.iter().zip(&next).filter(|(_, &l)| l == j).map(|(x, _)| x.clone()).collect();
            if members.is_empty() {
                centers[j] = farthest_point(g, alpha, data, &centers)?;
                repairs += 1;
            } else {
                let set = WeightedPointSet::uniform(members)?;
                centers[j] = total_jensen_centroid(g, &set, &ccfg)?.center;
            }
        }
        labels = Some(next);
    }
    let (assignments, potential) = assign(g, alpha, data, &centers)?;
    Ok(ClusterModel {
        centers,
        center_rows: None,
        assignments,
        potential,
        rounds,
        converged,
        assignment_log: log,
        repairs,
    })
}

fn farthest_point<T: Scalar>(g: &Generator<T>, alpha: Skew<T>, data: &[Vec<T>], centers: &[Vec<T>]) -> Result<Vec<T>> {
    let mut best = (T::neg_infinity(), 0);
    for (i, x) in data.iter().enumerate() {
        let mut d = T::infinity();
        for c in centers {
            d = d.min(div(g, alpha, x, c)?);
        }
        if d > best.0 {
            best = (d, i);
        }
    }
    Ok(data[best.1].clone())
}

/// Plug-in estimates of the regularity constants of a generator over the
/// convex closure of a data set.
///
/// `k1_hat` bounds the Hessian condition number, `k2_hat` the squared chord
/// slope `Delta_F^2 / <Delta, Delta>`, and `rho_min, rho_max` the factor
/// `1 / sqrt(1 + |grad F|^2)`. The remaining constant `eps` of the seeding
/// bound is not constructive and stays a parameter of [`Self::u`],
/// [`Self::v`] and [`Self::multiplier`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundConstants<T> {
    pub k1_hat: T,
    pub k2_hat: T,
    pub rho_min: T,
    pub rho_max: T,
    /// `rho_min, rho_max` come from the bounding box rather than sampling.
    pub rho_exact: bool,
    pub samples: usize,
    /// A sample where the gradient or Hessian blew up, if any.
    pub unbounded_at: Option<Vec<f64>>,
    /// Always true: `eps` is not estimated.
    pub epsilon_unestimated: bool,
}

/// Values of `eps` used for reported bound curves.
pub const EPSILON_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

impl<T: Scalar> BoundConstants<T> {
    pub fn u(&self, eps: T) -> T {
        lit::<T>(2.0) * (T::one() + self.k2_hat) * self.k1_hat * self.k1_hat / eps
    }

    pub fn v(&self, eps: T) -> T {
        self.k1_hat * self.k1_hat * (T::one() + self.k2_hat) / eps
    }

    /// `2 U^2 (1 + V) (2 + ln k)`.
    pub fn multiplier(&self, eps: T, k: usize) -> T {
        let u = self.u(eps);
        lit::<T>(2.0) * u * u * (T::one() + self.v(eps)) * (lit::<T>(2.0) + lit::<T>(k as f64).ln())
    }

    /// `(eps, multiplier)` over [`EPSILON_GRID`].
    pub fn bound_curve(&self, k: usize) -> Vec<(T, T)> {
        EPSILON_GRID.iter().map(|&e| (lit(e), self.multiplier(lit(e), k))).collect()
    }
}

/// Random point on the triangle spanned by three random data rows.
fn closure_sample<T: Scalar, R: Rng + ?Sized>(data: &[Vec<T>], rng: &mut R) -> Vec<T> {
    let n = data.len();
    let idx = [rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n)];
    let e: Vec<f64> = (0..3).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    let mut x = vec![T::zero(); data[0].len()];
    for (w, &i) in e.iter().zip(&idx) {
        let w = lit::<T>(w / s);
        for (xi, &pi) in x.iter_mut().zip(&data[i]) {
            *xi = *xi + w * pi;
        }
    }
    x
}

fn bounding_box<T: Scalar>(data: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
    let mut lo = data[0].clone();
    let mut hi = data[0].clone();
    for p in &data[1..] {
        for i in 0..p.len() {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (lo, hi)
}

/// Samples `samples` points and pairs from the convex closure of `data`.
///
/// For separable generators the conformal extremes are taken exactly over the
/// bounding box (using monotonicity of each partial derivative), which also
/// bounds `k2_hat` by mean-value. Otherwise they are sampled extremes.
/// Blow-ups at the domain boundary are reported through `unbounded_at`.
pub fn estimate_bound_constants<T: Scalar>(
    g: &Generator<T>,
    data: &[Vec<T>],
    samples: usize,
    rng_seed: u64,
) -> Result<BoundConstants<T>> {
    check_data(g, data)?;
    if !g.has_hessian() {
        return Err(Error::MissingHessian(g.name().to_string()));
    }
    let mut rng = trial_rng(rng_seed, CONSTANTS_STREAM);
    let mut unbounded_at: Option<Vec<f64>> = None;
    let mut k1 = T::one();
    let mut k2 = T::zero();
    let mut grad_sq_min = T::infinity();
    let mut grad_sq_max = T::zero();

    let mut probe = |x: &[T], unbounded_at: &mut Option<Vec<f64>>| -> Result<()> {
        match g.grad(x) {
            Ok(gr) => {
                let s = norm_sq(&gr);
                grad_sq_min = grad_sq_min.min(s);
                grad_sq_max = grad_sq_max.max(s);
                let c = g.hessian_condition(x)?;
                if c.is_finite() {
                    k1 = k1.max(lit(c));
                } else {
                    k1 = T::infinity();
                    unbounded_at.get_or_insert_with(|| to_f64_vec(x));
                }
            }
            Err(Error::BoundaryGradient { .. }) => {
                grad_sq_max = T::infinity();
                k1 = T::infinity();
                unbounded_at.get_or_insert_with(|| to_f64_vec(x));
            }
            Err(e) => return Err(e),
        }
        Ok(())
    };
    for p in data {
        probe(p, &mut unbounded_at)?;
    }
    for _ in 0..samples {
        let x = closure_sample(data, &mut rng);
        probe(&x, &mut unbounded_at)?;
    }
    for _ in 0..samples {
        let x = closure_sample(data, &mut rng);
        let y = closure_sample(data, &mut rng);
        let n2 = norm_sq(&sub(&x, &y));
        if n2 > T::zero() {
            let df = g.eval(&x)? - g.eval(&y)?;
            k2 = k2.max(df * df / n2);
        }
    }

    let mut rho_exact = false;
    if g.is_separable() {
        let (lo, hi) = bounding_box(data);
        let dom = g.domain();
        if lo.iter().chain(&hi).all(|&v| dom.contains_interior(v)) {
            let glo = g.grad(&lo)?;
            let ghi = g.grad(&hi)?;
            let mut smin = T::zero();
            let mut smax = T::zero();
            for (&a, &b) in glo.iter().zip(&ghi) {
                let (a2, b2) = (a * a, b * b);
                smax = smax + a2.max(b2);
                // The partial derivative is monotone, so a sign change means a zero inside.
                if a * b > T::zero() {
                    smin = smin + a2.min(b2);
                }
            }
            grad_sq_min = grad_sq_min.min(smin);
            grad_sq_max = grad_sq_max.max(smax);
            k2 = k2.max(smax);
            rho_exact = true;
        } else {
            grad_sq_max = T::infinity();
            k2 = T::infinity();
            if unbounded_at.is_none() {
                let edge = lo.iter().position(|&v| !dom.contains_interior(v)).map(|_| &lo).unwrap_or(&hi);
                unbounded_at = Some(to_f64_vec(edge));
            }
        }
    }
    let rho = |s: T| T::one() / (T::one() + s).sqrt();
    Ok(BoundConstants {
        k1_hat: k1,
        k2_hat: k2,
        rho_min: rho(grad_sq_max),
        rho_max: rho(grad_sq_min),
        rho_exact,
        samples,
        unbounded_at,
        epsilon_unestimated: true,
    })
}

/// Largest `tJ(p:r) / (tJ(p:q) + tJ(q:r))` over random triples of the
/// convex closure.
pub fn triangle_surrogate<T: Scalar>(
    g: &Generator<T>,
    alpha: Skew<T>,
    data: &[Vec<T>],
    samples: usize,
    rng_seed: u64,
) -> Result<T> {
    check_data(g, data)?;
    let mut rng = trial_rng(rng_seed, CONSTANTS_STREAM - 1);
    let mut worst = T::zero();
    for _ in 0..samples {
        let p = closure_sample(data, &mut rng);
        let q = closure_sample(data, &mut rng);
        let r = closure_sample(data, &mut rng);
        let den = div(g, alpha, &p, &q)? + div(g, alpha, &q, &r)?;
        if den > T::zero() {
            worst = worst.max(div(g, alpha, &p, &r)? / den);
        }
    }
    Ok(worst)
}

/// Largest `tJ(x:z) / tJ(z:x)` over random pairs of the convex closure.
pub fn symmetry_surrogate<T: Scalar>(
    g: &Generator<T>,
    alpha: Skew<T>,
    data: &[Vec<T>],
    samples: usize,
    rng_seed: u64,
) -> Result<T> {
    check_data(g, data)?;
    let mut rng = trial_rng(rng_seed, CONSTANTS_STREAM - 2);
    let mut worst = T::zero();
    for _ in 0..samples {
        let x = closure_sample(data, &mut rng);
        let z = closure_sample(data, &mut rng);
        let den = div(g, alpha, &z, &x)?;
        if den > T::zero() {
            worst = worst.max(div(g, alpha, &x, &z)? / den);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedingExperiment<T> {
    pub trials: usize,
    pub mean_potential: T,
    pub optimum: ClusterModel<T>,
    /// Mean potential over the discrete optimum; 0 when both vanish.
    pub ratio: T,
    pub constants: BoundConstants<T>,
    pub epsilon: T,
    pub multiplier: T,
    /// `ratio <= multiplier`, when the multiplier is finite.
    pub bound_holds: Option<bool>,
    pub bound_curve: Vec<(T, T)>,
}

/// Runs `cfg.trials` independent seedings (trial `t` on stream `t`) and
/// compares their mean potential with the discrete optimum and with the
/// plug-in multiplier at `epsilon`.
pub fn seeding_bound_experiment<T: Scalar>(
    g: &Generator<T>,
    data: &[Vec<T>],
    cfg: &SeedingConfig<T>,
    epsilon: T,
    constant_samples: usize,
) -> Result<SeedingExperiment<T>> {
    cfg.validate(data.len())?;
    check_data(g, data)?;
    if !(epsilon > T::zero() && epsilon <= T::one()) {
        return Err(Error::ParameterRange { name: "epsilon", value: to_f64(epsilon), range: "(0, 1]" });
    }
    let optimum = brute_force_discrete_optimum(g, cfg.alpha, data, cfg.k)?;
    let potentials: Vec<T> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let rows = seed_with_rng(g, data, cfg.k, cfg.alpha, &mut trial_rng(cfg.rng_seed, t))?;
            let centers: Vec<Vec<T>> = rows.iter().map(|&r| data[r].clone()).collect();
            potential(g, cfg.alpha, data, &centers)
        })
        .collect::<Result<_>>()?;
    let mean_potential = potentials.iter().fold(T::zero(), |a, &p| a + p) / lit(cfg.trials as f64);
    let ratio = if optimum.potential > T::zero() {
        mean_potential / optimum.potential
    } else if mean_potential == T::zero() {
        T::zero()
    } else {
        T::infinity()
    };
    let constants = estimate_bound_constants(g, data, constant_samples, cfg.rng_seed)?;
    let multiplier = constants.multiplier(epsilon, cfg.k);
    let bound_holds = multiplier.is_finite().then(|| ratio <= multiplier);
    let bound_curve = constants.bound_curve(cfg.k);
    Ok(SeedingExperiment {
        trials: cfg.trials,
        mean_potential,
        optimum,
        ratio,
        constants,
        epsilon,
        multiplier,
        bound_holds,
        bound_curve,
    })
}
