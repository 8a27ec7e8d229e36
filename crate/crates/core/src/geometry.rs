//! Orthogonal projection construction in the vertical cross-section.
//!
//! All computations take place in the plane through `(p, F(p))` and
//! `(q, F(q))`: the abscissa is the arc length from `q` along `p - q`, the
//! ordinate is the generator value. The point `(q + a (p - q), F(...))` thus
//! sits at `(a ||p - q||, F(...))`.

use crate::divergences::Skew;
use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::scalar::{interpolate, lit, norm_sq, sub, Scalar};

/// Orthogonal projection of the graph point at `alpha` onto the chord line.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult<T> {
    /// Chord parameter of the foot; may lie outside `[0, 1]`.
    pub beta: T,
    /// `(pq)_beta = q + beta (p - q)`.
    pub foot_point: Vec<T>,
    /// `(F(p)F(q))_beta = F(q) + beta (F(p) - F(q))`.
    pub foot_value: T,
    /// Unscaled total Jensen divergence `tJ'_alpha(p : q)`.
    pub distance: T,
    /// Unscaled skew Jensen gap `J'_alpha(p : q)`.
    pub j_raw: T,
    pub rho_j: T,
    /// `|l^2 + tJ'^2 - J'^2| / J'^2` with `l = |alpha - beta| sqrt(delta^2 + delta_f^2)`.
    pub pythagoras_residual: T,
    /// Cosine of the angle between the chord and the residual segment.
    pub orthogonality_residual: T,
}

struct Section<T> {
    /// `||p - q||^2`.
    n2: T,
    /// `F(p) - F(q)`.
    df: T,
    fq: T,
    /// `F(q + alpha (p - q)) - F(q)`.
    dm: T,
}

/// Values are kept relative to `F(q)` so that every derived quantity shares
/// the same two rounded differences.
fn section<T: Scalar>(g: &Generator<T>, alpha: Skew<T>, p: &[T], q: &[T]) -> Result<Section<T>> {
    alpha.require_proper()?;
    g.check_point(p, false)?;
    g.check_point(q, false)?;
    if p == q {
        return Err(Error::CoincidentPoints);
    }
    let fp = g.eval(p)?;
    let fq = g.eval(q)?;
    let fm = g.eval(&interpolate(p, q, alpha.value()))?;
    Ok(Section { n2: norm_sq(&sub(p, q)), df: fp - fq, fq, dm: fm - fq })
}

/// Solves the orthogonality constraint for `beta` and measures the
/// projection.
pub fn project_beta<T: Scalar>(g: &Generator<T>, alpha: Skew<T>, p: &[T], q: &[T]) -> Result<ProjectionResult<T>> {
    let s = section(g, alpha, p, q)?;
    let a = alpha.value();
    let chord_sq = s.n2 + s.df * s.df;
    let beta = (s.df * s.dm + a * s.n2) / chord_sq;
    let foot_value = s.fq + beta * s.df;
    let da = a - beta;
    let dv = beta * s.df - s.dm;
    let distance = (da * da * s.n2 + dv * dv).sqrt();
    let j_raw = a * s.df - s.dm;
    let l_sq = da * da * chord_sq;
    let tiny = T::min_positive_value();
    let pythagoras_residual = (l_sq + distance * distance - j_raw * j_raw).abs() / (j_raw * j_raw).max(tiny);
    // chord direction (||d||, df) against residual (alpha - beta) (||d||, F(m) - foot)
    let dot = da * s.n2 - s.df * dv;
    let orthogonality_residual = dot.abs() / (chord_sq.sqrt() * distance).max(tiny);
    Ok(ProjectionResult {
        beta,
        foot_point: interpolate(p, q, beta),
        foot_value,
        distance,
        j_raw,
        rho_j: (s.n2 / chord_sq).sqrt(),
        pythagoras_residual,
        orthogonality_residual,
    })
}

/// Cross-section coordinates relative to `(q, F(q))`.
fn planar_points<T: Scalar>(s: &Section<T>, alpha: T) -> [(T, T); 3] {
    let len = s.n2.sqrt();
    [(T::zero(), T::zero()), (len, s.df), (alpha * len, s.dm)]
}

fn point_line_distance<T: Scalar>(pts: [(T, T); 3]) -> T {
    let [(qx, qy), (px, py), (mx, my)] = pts;
    let (ux, uy) = (px - qx, py - qy);
    let (vx, vy) = (mx - qx, my - qy);
    (ux * vy - uy * vx).abs() / ux.hypot(uy)
}

/// `tJ'_alpha(p : q)` as the Euclidean distance from the graph point to the
/// chord line, computed from planar coordinates only.
pub fn geometric_oracle_tj<T: Scalar>(g: &Generator<T>, alpha: Skew<T>, p: &[T], q: &[T]) -> Result<T> {
    let s = section(g, alpha, p, q)?;
    Ok(point_line_distance(planar_points(&s, alpha.value())))
}

/// Same as [`geometric_oracle_tj`] after rotating the cross-section by
/// `theta` radians about `(q, F(q))`.
pub fn geometric_oracle_tj_rotated<T: Scalar>(
    g: &Generator<T>,
    alpha: Skew<T>,
    p: &[T],
    q: &[T],
    theta: T,
) -> Result<T> {
    let s = section(g, alpha, p, q)?;
    let (sin, cos) = theta.sin_cos();
    let rotated = planar_points(&s, alpha.value()).map(|(x, y)| (cos * x - sin * y, sin * x + cos * y));
    Ok(point_line_distance(rotated))
}

/// Cosine of the chord angle, `||delta|| / sqrt(<delta, delta> + delta_f^2)`.
pub fn chord_cosine<T: Scalar>(g: &Generator<T>, p: &[T], q: &[T]) -> Result<T> {
    let s = section(g, Skew::half(), p, q)?;
    Ok(s.n2.sqrt() / (s.n2 + s.df * s.df).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondKind<T> {
    /// Graph parameter solving the orthogonality constraint.
    pub alpha: T,
    /// `tJ^(2)_beta(p : q)`.
    pub value: T,
}

/// Second-kind total Jensen divergence: fix the chord point at `beta` and
/// find the graph point whose residual is orthogonal to the chord.
///
/// The residual `delta_f F(q + a delta) + a delta^2 - beta (delta^2 + delta_f^2)
/// - delta_f F(q)` is `-beta (..) < 0` at `a = 0` and `(1 - beta) (..) > 0` at
/// `a = 1`, so bisection on `[0, 1]` always brackets a root.
pub fn second_kind_tj<T: Scalar>(g: &Generator<T>, beta: T, p: &[T], q: &[T], tol: T) -> Result<SecondKind<T>> {
    if !(beta > T::zero() && beta < T::one()) {
        return Err(Error::ParameterRange { name: "beta", value: crate::scalar::to_f64(beta), range: "(0, 1)" });
    }
    g.check_point(p, false)?;
    g.check_point(q, false)?;
    if p == q {
        return Ok(SecondKind { alpha: beta, value: T::zero() });
    }
    let fp = g.eval(p)?;
    let fq = g.eval(q)?;
    let n2 = norm_sq(&sub(p, q));
    let df = fp - fq;
    let a_coef = beta * (n2 + df * df) + df * fq;
    let residual = |a: T| -> Result<(T, T)> {
        let fm = g.eval(&interpolate(p, q, a))?;
        Ok((df * fm + a * n2 - a_coef, fm))
    };
    let (mut lo, mut hi) = (T::zero(), T::one());
    let (r_lo, _) = residual(lo)?;
    let (r_hi, _) = residual(hi)?;
    if !(r_lo < T::zero() && r_hi > T::zero()) {
        return Err(Error::NoRoot);
    }
    let two = lit::<T>(2.0);
    let mut root = (lo + hi) / two;
    let mut f_root = residual(root)?;
    for _ in 0..200 {
        if f_root.0 == T::zero() || hi - lo <= tol {
            break;
        }
        if f_root.0 < T::zero() {
            lo = root;
        } else {
            hi = root;
        }
        let next = (lo + hi) / two;
        if next == root {
            break;
        }
        root = next;
        f_root = residual(root)?;
    }
    if !f_root.0.is_finite() {
        return Err(Error::NoRoot);
    }
    let fm = f_root.1;
    let da = root - beta;
    let dv = fm - (fq + beta * df);
    let value = (da * da * n2 + dv * dv).sqrt() / (beta * (T::one() - beta));
    Ok(SecondKind { alpha: root, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::{jensen_raw, rho_j, total_jensen_raw};
    use approx::assert_relative_eq;

    #[test]
    fn squared_euclidean_projection() {
        let g = Generator::<f64>::squared_euclidean(1).unwrap();
        let r = project_beta(&g, Skew::half(), &[0.0], &[1.0]).unwrap();
        assert_relative_eq!(r.beta, 0.55, epsilon = 1e-15);
        assert_relative_eq!(r.foot_point[0], 0.45, epsilon = 1e-15);
        assert_relative_eq!(r.foot_value, 0.225, epsilon = 1e-15);
        assert_relative_eq!(r.distance, 0.0125f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(r.distance, 0.1118034, epsilon = 1e-7);
        assert!(r.pythagoras_residual < 1e-12);
        assert!(r.orthogonality_residual < 1e-12);
        let oracle = geometric_oracle_tj(&g, Skew::half(), &[0.0], &[1.0]).unwrap();
        assert_relative_eq!(oracle, 0.0125f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn beta_outside_unit_interval() {
        let g = Generator::<f64>::shannon(1).unwrap();
        let r = project_beta(&g, Skew::new(0.05), &[10.0], &[0.001]).unwrap();
        assert!(r.beta < 0.0);
        assert!(r.pythagoras_residual < 1e-10);
        let r = project_beta(&g, Skew::new(0.95), &[0.001], &[10.0]).unwrap();
        assert!(r.beta > 1.0);
    }

    #[test]
    fn alpha_minus_beta_identity() {
        let g = Generator::<f64>::burg(1).unwrap();
        let (a, p, q) = (0.3, [0.4], [2.5]);
        let r = project_beta(&g, Skew::new(a), &p, &q).unwrap();
        let df = g.eval(&p).unwrap() - g.eval(&q).unwrap();
        let n2 = (p[0] - q[0]) * (p[0] - q[0]);
        let j = jensen_raw(&g, Skew::new(a), &p, &q).unwrap().value;
        assert!((a - r.beta - df / (n2 + df * df) * j).abs() < 1e-12);
    }

    #[test]
    fn oracle_matches_rho_formula_and_rotation() {
        let g = Generator::<f64>::bit(1).unwrap();
        let (a, p, q) = (Skew::new(0.7), [0.15], [0.8]);
        let oracle = geometric_oracle_tj(&g, a, &p, &q).unwrap();
        let formula = total_jensen_raw(&g, a, &p, &q).unwrap().value;
        assert_relative_eq!(oracle, formula, max_relative = 1e-12);
        for theta in [0.3, 1.9, -2.7] {
            let rot = geometric_oracle_tj_rotated(&g, a, &p, &q, theta).unwrap();
            assert_relative_eq!(rot, oracle, max_relative = 1e-12);
        }
    }

    #[test]
    fn chord_cosine_is_rho_j() {
        let g = Generator::<f64>::shannon(2).unwrap();
        let (p, q) = ([0.3, 2.0], [1.4, 0.2]);
        assert_relative_eq!(chord_cosine(&g, &p, &q).unwrap(), rho_j(&g, &p, &q).unwrap(), max_relative = 1e-15);
    }

    #[test]
    fn projection_errors() {
        let g = Generator::<f64>::squared_euclidean(1).unwrap();
        assert_eq!(project_beta(&g, Skew::half(), &[1.0], &[1.0]).unwrap_err(), Error::CoincidentPoints);
        assert!(project_beta(&g, Skew::new(1.0), &[0.0], &[1.0]).is_err());
        assert!(second_kind_tj(&g, 1.0, &[0.0], &[1.0], 1e-14).is_err());
        assert!(second_kind_tj(&g, -0.1, &[0.0], &[1.0], 1e-14).is_err());
    }

    #[test]
    fn second_kind_coincident_limit() {
        let g = Generator::<f64>::shannon(1).unwrap();
        let v = second_kind_tj(&g, 0.5, &[1.0], &[1.0 + 1e-9], 1e-15).unwrap().value;
        assert!(v < 1e-8);
    }
}
