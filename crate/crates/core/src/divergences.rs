//! Skew Jensen, Bregman and their total (conformally scaled) variants.
//!
//! Sign convention: `delta = p - q` and `delta_f = F(p) - F(q)` everywhere.
//! Conformal factors depend only on squares of these, so the convention is
//! only observable in [`crate::geometry`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::linalg::Cholesky;
use crate::scalar::{dot, interpolate, lit, norm_sq, sub, to_f64, xlogx, Scalar};

/// Skew parameter `alpha`. Any real is accepted; `0` and `1` are the
/// Bregman limits of the scaled family.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Skew<T>(T);

impl<T: Scalar> Skew<T> {
    pub fn new(alpha: T) -> Self {
        Self(alpha)
    }

    pub fn half() -> Self {
        Self(lit(0.5))
    }

    pub fn value(self) -> T {
        self.0
    }

    /// `1 - alpha`.
    pub fn complement(self) -> Self {
        Self(T::one() - self.0)
    }

    pub fn is_limit(self) -> bool {
        self.0 == T::zero() || self.0 == T::one()
    }

    /// `alpha` in the open unit interval.
    pub fn is_proper(self) -> bool {
        self.0 > T::zero() && self.0 < T::one()
    }

    pub(crate) fn require_proper(self) -> Result<()> {
        if self.is_proper() {
            Ok(())
        } else {
            Err(Error::ParameterRange { name: "alpha", value: to_f64(self.0), range: "(0, 1)" })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DivergenceKind {
    JensenRaw,
    JensenScaled,
    Bregman,
    TotalBregman,
    TotalJensen,
    TotalJensenRaw,
    JensenShannon,
    TotalJensenShannon,
    KlGaussian,
}

impl DivergenceKind {
    pub const ALL: [DivergenceKind; 9] = [
        Self::JensenRaw,
        Self::JensenScaled,
        Self::Bregman,
        Self::TotalBregman,
        Self::TotalJensen,
        Self::TotalJensenRaw,
        Self::JensenShannon,
        Self::TotalJensenShannon,
        Self::KlGaussian,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::JensenRaw => "jensen-raw",
            Self::JensenScaled => "jensen-scaled",
            Self::Bregman => "bregman",
            Self::TotalBregman => "total-bregman",
            Self::TotalJensen => "total-jensen",
            Self::TotalJensenRaw => "total-jensen-raw",
            Self::JensenShannon => "jensen-shannon",
            Self::TotalJensenShannon => "total-jensen-shannon",
            Self::KlGaussian => "kl-gaussian",
        }
    }
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DivergenceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL.iter().copied().find(|k| k.as_str() == s).ok_or_else(|| format!("unknown divergence kind `{s}`"))
    }
}

/// Chord quantities between two distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactors<T> {
    /// `p - q`.
    pub delta: Vec<T>,
    /// `F(p) - F(q)`.
    pub delta_f: T,
    /// `<delta, delta>`.
    pub delta_sq: T,
    /// Squared chord slope `delta_f^2 / <delta, delta>`.
    pub slope_sq: T,
    /// `1 / sqrt(1 + slope_sq)`, symmetric in `(p, q)`.
    pub rho_j: T,
    /// `rho_B(p)`, `None` when the gradient is undefined at `p`.
    pub rho_b_p: Option<T>,
    /// `rho_B(q)`, `None` when the gradient is undefined at `q`.
    pub rho_b_q: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceValue<T> {
    pub kind: DivergenceKind,
    pub value: T,
    pub factors: Option<ConformalFactors<T>>,
}

impl<T> DivergenceValue<T> {
    fn plain(kind: DivergenceKind, value: T) -> Self {
        Self { kind, value, factors: None }
    }
}

fn check_pair<T: Scalar>(g: &Generator<T>, p: &[T], q: &[T]) -> Result<()> {
    g.check_point(p, false)?;
    g.check_point(q, false)
}

/// `rho_J(p, q)` from squared quantities only, so it is exactly symmetric.
fn rho_from_squares<T: Scalar>(delta_sq: T, delta_f: T) -> T {
    (delta_sq / (delta_sq + delta_f * delta_f)).sqrt()
}

/// `rho_J(p, q) = 1 / sqrt(1 + (F(p) - F(q))^2 / <p - q, p - q>)`.
pub fn rho_j<T: Scalar>(g: &Generator<T>, p: &[T], q: &[T]) -> Result<T> {
    check_pair(g, p, q)?;
    if p == q {
        return Err(Error::CoincidentPoints);
    }
    let delta_sq = norm_sq(&sub(p, q));
    let delta_f = g.eval(p)? - g.eval(q)?;
    Ok(rho_from_squares(delta_sq, delta_f))
}

pub fn conformal_factors<T: Scalar>(g: &Generator<T>, p: &[T], q: &[T]) -> Result<ConformalFactors<T>> {
    check_pair(g, p, q)?;
    if p == q {
        return Err(Error::CoincidentPoints);
    }
    let delta = sub(p, q);
    let delta_sq = norm_sq(&delta);
    let delta_f = g.eval(p)? - g.eval(q)?;
    Ok(ConformalFactors {
        slope_sq: delta_f * delta_f / delta_sq,
        rho_j: rho_from_squares(delta_sq, delta_f),
        rho_b_p: g.rho_b(p).ok(),
        rho_b_q: g.rho_b(q).ok(),
        delta,
        delta_f,
        delta_sq,
    })
}

/// Jensen gap `alpha F(p) + (1 - alpha) F(q) - F(alpha p + (1 - alpha) q)`
/// without the `1 / (alpha (1 - alpha))` normalisation.
pub fn jensen_raw<T: Scalar>(g: &Generator<T>, alpha: Skew<T>, p: &[T], q: &[T]) -> Result<DivergenceValue<T>> {
    if alpha.is_limit() {
        return Err(Error::DegenerateAlpha(to_f64(alpha.value())));
    }
    check_pair(g, p, q)?;
    Ok(DivergenceValue::plain(DivergenceKind::JensenRaw, raw_gap(g, alpha, p, q)?))
}

fn raw_gap<T: Scalar>(g: &Generator<T>, alpha: Skew<T>, p: &[T], q: &[T]) -> Result<T> {
    if p == q {
        return Ok(T::zero());
    }
    let a = alpha.value();
    let mid = interpolate(p, q, a);
    // Differences against F(q) are exact for nearby points, unlike the
    // three-term sum.
    let fq = g.eval(q)?;
    let gap = a * (g.eval(p)? - fq) - (g.eval(&mid)? - fq);
    // Rounding can push the gap of nearby points slightly below zero.
    Ok(if alpha.is_proper() { gap.max(T::zero()) } else { gap })
}

/// `B(p : q) = F(p) - F(q) - <p - q, grad F(q)>`.
pub fn bregman<T: Scalar>(g: &Generator<T>, p: &[T], q: &[T]) -> Result<DivergenceValue<T>> {
    g.check_point(p, false)?;
    Ok(DivergenceValue::plain(DivergenceKind::Bregman, bregman_value(g, p, q)?))
}

fn bregman_value<T: Scalar>(g: &Generator<T>, p: &[T], q: &[T]) -> Result<T> {
    let grad_q = g.grad(q)?;
    if p == q {
        return Ok(T::zero());
    }
    let b = g.eval(p)? - g.eval(q)? - dot(&sub(p, q), &grad_q);
    Ok(b.max(T::zero()))
}

fn scaled_value<T: Scalar>(g: &Generator<T>, alpha: Skew<T>, p: &[T], q: &[T]) -> Result<T> {
    let a = alpha.value();
    if a == T::zero() {
        bregman_value(g, p, q)
    } else if a == T::one() {
        bregman_value(g, q, p)
    } else {
        Ok(raw_gap(g, alpha, p, q)? / (a * (T::one() - a)))
    }
}

/// Scaled skew Jensen divergence `J_alpha`, defined for every real alpha,
/// with `J_0(p : q) = B(p : q)` and `J_1(p : q) = B(q : p)`.
pub fn jensen_scaled<T: Scalar>(g: &Generator<T>, alpha: Skew<T>, p: &[T], q: &[T]) -> Result<DivergenceValue<T>> {
    check_pair(g, p, q)?;
    Ok(DivergenceValue::plain(DivergenceKind::JensenScaled, scaled_value(g, alpha, p, q)?))
}

/// `tB(p : q) = rho_B(q) B(p : q)`.
pub fn total_bregman<T: Scalar>(g: &Generator<T>, p: &[T], q: &[T]) -> Result<DivergenceValue<T>> {
    g.check_point(p, false)?;
    let b = bregman_value(g, p, q)?;
    let rho = g.rho_b(q)?;
    let factors = if p == q { None } else { conformal_factors(g, p, q).ok() };
    Ok(DivergenceValue { kind: DivergenceKind::TotalBregman, value: rho * b, factors })
}

fn total_generic<T: Scalar>(
    kind: DivergenceKind,
    g: &Generator<T>,
    alpha: Skew<T>,
    p: &[T],
    q: &[T],
) -> Result<DivergenceValue<T>> {
    check_pair(g, p, q)?;
    if p == q {
        return Ok(DivergenceValue::plain(kind, T::zero()));
    }
    let base = match kind {
        DivergenceKind::TotalJensenRaw => {
            if alpha.is_limit() {
                return Err(Error::DegenerateAlpha(to_f64(alpha.value())));
            }
            raw_gap(g, alpha, p, q)?
        }
        _ => scaled_value(g, alpha, p, q)?,
    };
    let factors = conformal_factors(g, p, q)?;
    Ok(DivergenceValue { kind, value: factors.rho_j * base, factors: Some(factors) })
}

/// Total Jensen divergence `tJ_alpha(p : q) = rho_J(p, q) J_alpha(p : q)`.
///
/// Coincident points give `0` without evaluating the (undefined) factor. At
/// `alpha = 0` / `1` this is `rho_J B(p : q)` / `rho_J B(q : p)`, which is not
/// the total Bregman divergence.
pub fn total_jensen<T: Scalar>(g: &Generator<T>, alpha: Skew<T>, p: &[T], q: &[T]) -> Result<DivergenceValue<T>> {
    total_generic(DivergenceKind::TotalJensen, g, alpha, p, q)
}

/// Unnormalised total Jensen divergence `rho_J(p, q) J'_alpha(p : q)`.
pub fn total_jensen_raw<T: Scalar>(g: &Generator<T>, alpha: Skew<T>, p: &[T], q: &[T]) -> Result<DivergenceValue<T>> {
    total_generic(DivergenceKind::TotalJensenRaw, g, alpha, p, q)
}

/// Default residual tolerance of the dichotomic search.
pub const BISECTION_TOL: f64 = 1e-12;
/// Maximal number of bisection steps.
pub const BISECTION_MAX_STEPS: usize = 200;

fn scalar_chord<T: Scalar>(g: &Generator<T>, p: T, q: T) -> Result<T> {
    if !g.is_scalar() {
        return Err(Error::NotScalar(g.dim()));
    }
    g.check_point(&[p], false)?;
    g.check_point(&[q], false)?;
    if p == q {
        return Err(Error::CoincidentPoints);
    }
    Ok((g.eval(&[p])? - g.eval(&[q])?) / (p - q))
}

/// Stolarsky mean point `eps` in `[p, q]` with `F'(eps) = (F(p) - F(q)) / (p - q)`.
///
/// Uses the closed form `(F')^{-1}` when available, the dichotomic search
/// otherwise. Scalar generators only.
pub fn stolarsky_epsilon<T: Scalar>(g: &Generator<T>, p: T, q: T, tol: T) -> Result<T> {
    let slope = scalar_chord(g, p, q)?;
    if g.has_grad_inverse() {
        if let Ok(eps) = g.grad_inverse(&[slope]) {
            let (lo, hi) = (p.min(q), p.max(q));
            return Ok(eps[0].max(lo).min(hi));
        }
    }
    bisect_gradient(g, p, q, slope, tol, BISECTION_MAX_STEPS)
}

/// Dichotomic search for the Stolarsky point, regardless of whether a closed
/// form exists.
pub fn stolarsky_epsilon_bisect<T: Scalar>(g: &Generator<T>, p: T, q: T, tol: T, max_steps: usize) -> Result<T> {
    let slope = scalar_chord(g, p, q)?;
    bisect_gradient(g, p, q, slope, tol, max_steps)
}

fn bisect_gradient<T: Scalar>(g: &Generator<T>, p: T, q: T, target: T, tol: T, max_steps: usize) -> Result<T> {
    let (mut lo, mut hi) = (p.min(q), p.max(q));
    let two = lit::<T>(2.0);
    let mut mid = (lo + hi) / two;
    for _ in 0..max_steps {
        mid = (lo + hi) / two;
        let r = g.grad(&[mid])?[0] - target;
        if r.abs() <= tol {
            break;
        }
        if r < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= two * T::epsilon() * mid.abs().max(T::min_positive_value()) {
            mid = (lo + hi) / two;
            break;
        }
    }
    Ok(mid)
}

fn check_nonnegative<T: Scalar>(p: &[T]) -> Result<()> {
    for (index, &v) in p.iter().enumerate() {
        if !(v >= T::zero()) || !v.is_finite() {
            return Err(Error::NegativeComponent { index, value: to_f64(v) });
        }
    }
    Ok(())
}

fn js_value<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    check_nonnegative(p)?;
    check_nonnegative(q)?;
    if p == q {
        return Ok(T::zero());
    }
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let term = |a: T, b: T| if a == T::zero() { T::zero() } else { a * (two * a / (a + b)).ln() };
    let left = p.iter().zip(q).fold(T::zero(), |acc, (&a, &b)| acc + term(a, b));
    let right = p.iter().zip(q).fold(T::zero(), |acc, (&a, &b)| acc + term(b, a));
    Ok((half * left + half * right).max(T::zero()))
}

/// Jensen-Shannon divergence (natural logarithm, `0 ln 0 = 0`).
pub fn jensen_shannon<T: Scalar>(p: &[T], q: &[T]) -> Result<DivergenceValue<T>> {
    Ok(DivergenceValue::plain(DivergenceKind::JensenShannon, js_value(p, q)?))
}

/// `rho_J(p, q) JS(p, q)` with the separable Shannon generator
/// `F(x) = sum x_i ln x_i - x_i` supplying `delta_f`.
pub fn total_jensen_shannon<T: Scalar>(p: &[T], q: &[T]) -> Result<DivergenceValue<T>> {
    let js = js_value(p, q)?;
    if p == q {
        return Ok(DivergenceValue::plain(DivergenceKind::TotalJensenShannon, T::zero()));
    }
    let shannon = |x: &[T]| x.iter().fold(T::zero(), |acc, &v| acc + xlogx(v) - v);
    let delta_sq = norm_sq(&sub(p, q));
    let delta_f = shannon(p) - shannon(q);
    let rho = rho_from_squares(delta_sq, delta_f);
    let factors = ConformalFactors {
        delta: sub(p, q),
        delta_f,
        delta_sq,
        slope_sq: delta_f * delta_f / delta_sq,
        rho_j: rho,
        rho_b_p: None,
        rho_b_q: None,
    };
    Ok(DivergenceValue { kind: DivergenceKind::TotalJensenShannon, value: rho * js, factors: Some(factors) })
}

/// Kullback-Leibler divergence between `N(mu1, sigma1)` and `N(mu2, sigma2)`.
///
/// Covariances are row-major `d x d` symmetric positive-definite matrices.
pub fn kl_gaussian<T: Scalar>(mu1: &[T], sigma1: &[T], mu2: &[T], sigma2: &[T]) -> Result<DivergenceValue<T>> {
    let d = mu1.len();
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if mu2.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: mu2.len() });
    }
    for s in [sigma1, sigma2] {
        if s.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: s.len() });
        }
    }
    let c1 = Cholesky::new(sigma1, d)?;
    let c2 = Cholesky::new(sigma2, d)?;
    let mut trace = T::zero();
    for j in 0..d {
        let col: Vec<T> = (0..d).map(|i| sigma1[i * d + j]).collect();
        trace = trace + c2.solve(&col)[j];
    }
    let dmu = sub(mu1, mu2);
    let quad = dot(&dmu, &c2.solve(&dmu));
    let dim = T::from_usize(d).ok_or(Error::NonFinite("dimension"))?;
    let kl = (trace + quad - (c1.log_det() - c2.log_det()) - dim) / lit(2.0);
    Ok(DivergenceValue::plain(DivergenceKind::KlGaussian, kl.max(T::zero())))
}
