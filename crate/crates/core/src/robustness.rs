//! Influence functions of symmetric Jensen centroids.
//!
//! Contaminating a point `p` by an outlier `y` with weight `eps` moves the
//! centroid to `p + eps z(y) + O(eps^2)`. The analytic influence `z` follows
//! from a first-order expansion of the centroid condition; the empirical
//! harness recomputes the contaminated centroid with CCCP to check it.

use crate::centroids::{cccp_steps, total_jensen_centroid, CentroidConfig, Init, WeightedPointSet};
use crate::divergences::{rho_j, Skew};
use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::scalar::{lit, to_f64, Scalar};

/// Step tolerance of the contaminated-centroid solve.
pub const EMPIRICAL_TOL: f64 = 1e-14;
pub const EMPIRICAL_MAX_ITERS: usize = 500;
/// Default density of the boundedness sweep grid.
pub const POINTS_PER_DECADE: usize = 40;

fn require_scalar<T: Scalar>(g: &Generator<T>) -> Result<()> {
    if g.is_scalar() {
        Ok(())
    } else {
        Err(Error::NotScalar(g.dim()))
    }
}

/// `z(y) = 2 (f'((p + y) / 2) - f'(p)) / f''(p)`.
pub fn influence_analytic<T: Scalar>(g: &Generator<T>, p: T, y: T) -> Result<T> {
    require_scalar(g)?;
    g.check_point(&[p], true)?;
    g.check_point(&[y], false)?;
    let curvature = g.second_deriv(p)?;
    if !(curvature > T::zero()) || !curvature.is_finite() {
        return Err(Error::NonFinite("second derivative at p"));
    }
    let two = lit::<T>(2.0);
    let mid = (p + y) / two;
    let num = g.grad(&[mid])?[0] - g.grad(&[p])?[0];
    Ok(two * num / curvature)
}

/// Contamination of the inlier `p` by the outlier `y` with weight `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfluenceQuery<T> {
    pub p: T,
    pub y: T,
    pub epsilon: T,
}

impl<T: Scalar> InfluenceQuery<T> {
    pub fn new(p: T, y: T, epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero() && epsilon < lit(0.5)) {
            return Err(Error::ParameterRange { name: "epsilon", value: to_f64(epsilon), range: "(0, 0.5)" });
        }
        Ok(Self { p, y, epsilon })
    }

    fn weighted(&self) -> Result<WeightedPointSet<T>> {
        WeightedPointSet::new(vec![vec![self.p], vec![self.y]], vec![T::one(), self.epsilon])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfluenceResult<T> {
    pub z_analytic: T,
    /// `(x~ - p) / eps` from the contaminated centroid `x~`.
    pub z_empirical: T,
    pub contaminated_center: T,
    pub cccp_iterations: usize,
}

/// Solves for the symmetric Jensen centroid of `{p: 1, y: eps}` (weights
/// normalised) and compares its displacement with [`influence_analytic`].
pub fn influence_empirical<T: Scalar>(g: &Generator<T>, q: &InfluenceQuery<T>) -> Result<InfluenceResult<T>> {
    let z_analytic = influence_analytic(g, q.p, q.y)?;
    let data = q.weighted()?;
    let trace = cccp_steps(
        g,
        Skew::half(),
        data.points(),
        data.weights(),
        &[q.p],
        EMPIRICAL_MAX_ITERS,
        Some(lit(EMPIRICAL_TOL)),
    )?;
    if !trace.converged {
        return Err(Error::NotConverged { iterations: EMPIRICAL_MAX_ITERS });
    }
    let x = trace.center[0];
    Ok(InfluenceResult {
        z_analytic,
        z_empirical: (x - q.p) / q.epsilon,
        contaminated_center: x,
        cccp_iterations: trace.losses.len() - 1,
    })
}

/// Empirical influence `(x~ - p) / eps` of the symmetric total Jensen
/// centroid. There is no analytic counterpart.
pub fn influence_empirical_total<T: Scalar>(g: &Generator<T>, q: &InfluenceQuery<T>) -> Result<T> {
    require_scalar(g)?;
    let data = q.weighted()?;
    let mut cfg = CentroidConfig::new(Skew::half());
    cfg.init = Init::Point(vec![q.p]);
    let r = total_jensen_centroid(g, &data, &cfg)?;
    Ok((r.center[0] - q.p) / q.epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    /// Per-decade increments of `|z|` die out.
    Bounded,
    /// `|z|` keeps gaining a comparable amount every decade.
    Unbounded,
    /// Fewer than two decades were swept.
    Undetermined,
}

impl Growth {
    pub fn as_str(self) -> &'static str {
        match self {
            Growth::Bounded => "bounded",
            Growth::Unbounded => "unbounded",
            Growth::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub y: T,
    pub z: T,
    pub rho_j: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport<T> {
    pub p: T,
    pub rows: Vec<SweepRow<T>>,
    pub sup_abs_z: T,
    /// `|z|` at `y = p 10^d` for `d = 0, 1, ...`.
    pub decade_abs_z: Vec<T>,
    pub growth: Growth,
    /// `rho_J(p, y) ln y` at the last grid point; tends to one for Shannon.
    pub rho_log_y_last: T,
}

impl<T: Scalar> SweepReport<T> {
    pub fn bounded_estimate(&self) -> bool {
        self.growth == Growth::Bounded
    }
}

/// Evaluates `z(y)` and `rho_J(p, y)` on the geometric grid
/// `y = p 10^(i / per_decade)` up to `y_max`.
pub fn boundedness_sweep<T: Scalar>(g: &Generator<T>, p: T, y_max: T, per_decade: usize) -> Result<SweepReport<T>> {
    require_scalar(g)?;
    if per_decade == 0 {
        return Err(Error::ParameterRange { name: "per_decade", value: 0.0, range: "[1, inf)" });
    }
    if !(y_max > p) {
        return Err(Error::ParameterRange { name: "y_max", value: to_f64(y_max), range: "(p, inf)" });
    }
    g.check_point(&[y_max], false)?;
    let steps = (to_f64(y_max / p).log10() * per_decade as f64).floor() as usize;
    let ten = lit::<T>(10.0);
    let mut rows = Vec::with_capacity(steps + 2);
    let mut decade_abs_z = Vec::new();
    for i in 0..=steps {
        let y = p * ten.powf(lit::<T>(i as f64) / lit::<T>(per_decade as f64));
        let row = sweep_row(g, p, y)?;
        if i % per_decade == 0 {
            decade_abs_z.push(row.z.abs());
        }
        rows.push(row);
    }
    if rows.last().map(|r| r.y < y_max).unwrap_or(true) {
        rows.push(sweep_row(g, p, y_max)?);
    }
    let sup_abs_z = rows.iter().fold(T::zero(), |m, r| m.max(r.z.abs()));
    let last = rows[rows.len() - 1];
    let rho_log_y_last = last.rho_j * last.y.ln();
    let growth = classify(&decade_abs_z);
    Ok(SweepReport { p, rows, sup_abs_z, decade_abs_z, growth, rho_log_y_last })
}

fn sweep_row<T: Scalar>(g: &Generator<T>, p: T, y: T) -> Result<SweepRow<T>> {
    let z = influence_analytic(g, p, y)?;
    let rho = if y == p { T::one() } else { rho_j(g, &[p], &[y])? };
    Ok(SweepRow { y, z, rho_j: rho })
}

fn classify<T: Scalar>(decades: &[T]) -> Growth {
    if decades.len() < 3 {
        return Growth::Undetermined;
    }
    let increments: Vec<T> = decades.windows(2).map(|w| w[1] - w[0]).collect();
    let largest = increments.iter().fold(T::zero(), |m, &d| m.max(d.abs()));
    let last = increments[increments.len() - 1];
    if largest > T::zero() && last > lit::<T>(0.5) * largest {
        Growth::Unbounded
    } else {
        Growth::Bounded
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_forms() {
        let s = Generator::<f64>::shannon(1).unwrap();
        let b = Generator::<f64>::burg(1).unwrap();
        for &(p, y) in &[(1.0, 3.0), (0.3, 7.0), (2.0, 0.1), (5.0, 5.0)] {
            let zs = influence_analytic(&s, p, y).unwrap();
            assert_relative_eq!(zs, 2.0 * p * ((p + y) / (2.0 * p)).ln(), epsilon = 1e-12);
            let zb = influence_analytic(&b, p, y).unwrap();
            assert_relative_eq!(zb, 2.0 * p * p * (1.0 / p - 2.0 / (p + y)), epsilon = 1e-12);
        }
        assert_eq!(influence_analytic(&s, 2.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn analytic_errors() {
        let s = Generator::<f64>::shannon(1).unwrap();
        assert!(influence_analytic(&s, 0.0, 1.0).is_err());
        assert!(influence_analytic(&Generator::<f64>::shannon(2).unwrap(), 1.0, 1.0).is_err());
        assert!(InfluenceQuery::new(1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn empirical_shannon_example() {
        let s = Generator::<f64>::shannon(1).unwrap();
        let r = influence_empirical(&s, &InfluenceQuery::new(1.0, 3.0, 1e-4).unwrap()).unwrap();
        assert!((r.z_empirical - 2.0 * 2f64.ln()).abs() < 1e-2);
        let same = influence_empirical(&s, &InfluenceQuery::new(1.0, 1.0, 1e-4).unwrap()).unwrap();
        assert!(same.z_empirical.abs() < 1e-9);
    }

    #[test]
    fn empirical_burg_outlier_is_bounded() {
        let b = Generator::<f64>::burg(1).unwrap();
        let r = influence_empirical(&b, &InfluenceQuery::new(1.0, 1e6, 1e-4).unwrap()).unwrap();
        assert!(r.z_empirical.abs() < 2.01, "{}", r.z_empirical);
    }

    #[test]
    fn sweeps() {
        let b = Generator::<f64>::burg(1).unwrap();
        let rb = boundedness_sweep(&b, 1.0, 1e9, POINTS_PER_DECADE).unwrap();
        assert!(rb.sup_abs_z <= 2.0);
        assert_eq!(rb.growth, Growth::Bounded);
        assert_eq!(rb.decade_abs_z.len(), 10);
        let s = Generator::<f64>::shannon(1).unwrap();
        let rs = boundedness_sweep(&s, 1.0, 1e9, POINTS_PER_DECADE).unwrap();
        assert_eq!(rs.growth, Growth::Unbounded);
        let at_1e3 = rs.decade_abs_z[3];
        let ratio = rs.rows.last().unwrap().z.abs() / at_1e3;
        assert_relative_eq!(ratio, ((1.0 + 1e9) / 2.0f64).ln() / 500.5f64.ln(), max_relative = 1e-12);
        assert!(rs.decade_abs_z.windows(2).all(|w| w[1] > w[0]));
        let rho = rho_j(&s, &[1.0], &[1e6]).unwrap();
        assert!((0.5..=2.0).contains(&(rho * 1e6f64.ln())));
    }

    #[test]
    fn total_variant_runs() {
        let s = Generator::<f64>::shannon(1).unwrap();
        let q = InfluenceQuery::new(1.0, 3.0, 1e-3).unwrap();
        let z = influence_empirical_total(&s, &q).unwrap();
        assert!(z.is_finite() && z > 0.0);
    }
}
