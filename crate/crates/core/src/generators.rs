//! Strictly convex generators `F` and their derivatives.
//!
//! Every divergence in the crate is induced by a [`Generator`]. The builtin
//! generators are the separable Shannon, Burg and bit (binary entropy)
//! generators and the quadratic (squared Mahalanobis / squared Euclidean)
//! generators. Arbitrary generators can be supplied through
//! [`CustomGenerator`]; those may lack an inverse gradient, in which case the
//! centroid routines refuse them.
//!
//! Domain boundaries follow the `0 ln 0 = 0` convention: evaluation on a
//! closed boundary returns the limit value, gradients there are an error.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{condition_number, mat_vec, Cholesky};
use crate::scalar::{lit, to_f64, xlogx, Scalar};

/// Per-coordinate domain of a generator, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<T: Scalar> Interval<T> {
    pub fn real() -> Self {
        Self { lo: T::neg_infinity(), hi: T::infinity(), lo_closed: false, hi_closed: false }
    }

    /// `[0, inf)`.
    pub fn nonnegative() -> Self {
        Self { lo: T::zero(), hi: T::infinity(), lo_closed: true, hi_closed: false }
    }

    /// `(0, inf)`.
    pub fn positive() -> Self {
        Self { lo: T::zero(), hi: T::infinity(), lo_closed: false, hi_closed: false }
    }

    /// `[0, 1]`.
    pub fn unit() -> Self {
        Self { lo: T::zero(), hi: T::one(), lo_closed: true, hi_closed: true }
    }

    pub fn contains(&self, x: T) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn contains_interior(&self, x: T) -> bool {
        x > self.lo && x < self.hi
    }

    /// `{x : a x in self}`.
    pub fn preimage(&self, a: T) -> Self {
        if a > T::zero() {
            Self { lo: self.lo / a, hi: self.hi / a, ..*self }
        } else {
            Self { lo: self.hi / a, hi: self.lo / a, lo_closed: self.hi_closed, hi_closed: self.lo_closed }
        }
    }

    /// Moves `x` inside the open interval, at distance `margin` from an
    /// offending bound.
    pub fn clamp_interior(&self, x: T, margin: T) -> T {
        if x <= self.lo {
            self.lo + margin
        } else if x >= self.hi {
            self.hi - margin
        } else {
            x
        }
    }
}

/// Builtin scalar generators (rows of the conformal factor table).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarFamily {
    /// `x ln x - x` on `[0, inf)`.
    Shannon,
    /// `-ln x` on `(0, inf)`.
    Burg,
    /// `x ln x + (1 - x) ln(1 - x)` on `[0, 1]`.
    Bit,
    /// `x^2 / 2` on the real line.
    HalfSquare,
}

impl ScalarFamily {
    fn domain<T: Scalar>(self) -> Interval<T> {
        match self {
            Self::Shannon => Interval::nonnegative(),
            Self::Burg => Interval::positive(),
            Self::Bit => Interval::unit(),
            Self::HalfSquare => Interval::real(),
        }
    }

    fn f<T: Scalar>(self, u: T) -> T {
        match self {
            Self::Shannon => xlogx(u) - u,
            Self::Burg => -u.ln(),
            Self::Bit => xlogx(u) + xlogx(T::one() - u),
            Self::HalfSquare => u * u / lit(2.0),
        }
    }

    fn df<T: Scalar>(self, u: T) -> T {
        match self {
            Self::Shannon => u.ln(),
            Self::Burg => -u.recip(),
            Self::Bit => (u / (T::one() - u)).ln(),
            Self::HalfSquare => u,
        }
    }

    fn d2f<T: Scalar>(self, u: T) -> T {
        match self {
            Self::Shannon => u.recip(),
            Self::Burg => (u * u).recip(),
            Self::Bit => (u * (T::one() - u)).recip(),
            Self::HalfSquare => T::one(),
        }
    }

    fn inv_df<T: Scalar>(self, g: T) -> Option<T> {
        match self {
            Self::Shannon => Some(g.exp()),
            Self::Burg => (g < T::zero()).then(|| -g.recip()),
            Self::Bit => Some(logistic(g)),
            Self::HalfSquare => Some(g),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Shannon => "shannon",
            Self::Burg => "burg",
            Self::Bit => "bit",
            Self::HalfSquare => "squared-euclidean",
        }
    }
}

fn logistic<T: Scalar>(g: T) -> T {
    if g >= T::zero() {
        (T::one() + (-g).exp()).recip()
    } else {
        let e = g.exp();
        e / (T::one() + e)
    }
}

pub type ScalarFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
pub type VectorFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

/// User-supplied generator given by callbacks.
///
/// `hessian` returns a row-major `dim x dim` matrix.
#[derive(Clone)]
pub struct CustomGenerator<T> {
    name: String,
    dim: usize,
    domain: Interval<T>,
    eval: ScalarFn<T>,
    grad: VectorFn<T>,
    grad_inverse: Option<VectorFn<T>>,
    hessian: Option<VectorFn<T>>,
}

impl<T: Scalar> CustomGenerator<T> {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        domain: Interval<T>,
        eval: impl Fn(&[T]) -> T + Send + Sync + 'static,
        grad: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            domain,
            eval: Arc::new(eval),
            grad: Arc::new(grad),
            grad_inverse: None,
            hessian: None,
        }
    }

    pub fn with_grad_inverse(mut self, f: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.grad_inverse = Some(Arc::new(f));
        self
    }

    pub fn with_hessian(mut self, f: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(f));
        self
    }

    pub fn build(self) -> Result<Generator<T>> {
        if self.dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Generator {
            name: self.name.clone(),
            dim: self.dim,
            shape: Shape::Custom(Arc::new(self)),
            scale: T::one(),
            offset: T::zero(),
        })
    }
}

#[derive(Clone)]
enum Shape<T: Scalar> {
    Family(ScalarFamily),
    Lifted(Arc<Generator<T>>),
    Quadratic { q: Vec<T>, chol: Cholesky<T>, cond: f64 },
    Custom(Arc<CustomGenerator<T>>),
}

/// A strictly convex differentiable generator `G(x) = F(a x) + b`.
///
/// The affine parameters default to `a = 1, b = 0`; see
/// [`Generator::affine_precompose`]. Generators are immutable and cheap to
/// clone.
#[derive(Clone)]
pub struct Generator<T: Scalar> {
    name: String,
    dim: usize,
    shape: Shape<T>,
    scale: T,
    offset: T,
}

impl<T: Scalar> fmt::Debug for Generator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("scale", &self.scale)
            .field("offset", &self.offset)
            .finish()
    }
}

/// Builtin generator names accepted by [`make_builtin`].
pub const BUILTIN_NAMES: [&str; 5] = ["shannon", "burg", "bit", "squared-mahalanobis", "squared-euclidean"];

/// Builds a builtin generator by name.
///
/// `matrix` is the row-major `dim x dim` positive-definite matrix of the
/// squared Mahalanobis generator and is ignored by the other names.
pub fn make_builtin<T: Scalar>(name: &str, dim: usize, matrix: Option<&[T]>) -> Result<Generator<T>> {
    match name {
        "shannon" => Generator::family(ScalarFamily::Shannon, dim),
        "burg" => Generator::family(ScalarFamily::Burg, dim),
        "bit" => Generator::family(ScalarFamily::Bit, dim),
        "squared-euclidean" => Generator::squared_euclidean(dim),
        "squared-mahalanobis" => {
            let q = matrix.ok_or(Error::MissingMatrix)?;
            Generator::squared_mahalanobis(q.to_vec(), dim)
        }
        other => Err(Error::UnknownGenerator(other.to_string())),
    }
}

impl<T: Scalar> Generator<T> {
    /// Separable builtin `F(x) = sum_i f(x_i)`.
    pub fn family(family: ScalarFamily, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let name = if family == ScalarFamily::HalfSquare { "squared-euclidean" } else { family.name() };
        Ok(Self { name: name.to_string(), dim, shape: Shape::Family(family), scale: T::one(), offset: T::zero() })
    }

    pub fn shannon(dim: usize) -> Result<Self> {
        Self::family(ScalarFamily::Shannon, dim)
    }

    pub fn burg(dim: usize) -> Result<Self> {
        Self::family(ScalarFamily::Burg, dim)
    }

    pub fn bit(dim: usize) -> Result<Self> {
        Self::family(ScalarFamily::Bit, dim)
    }

    /// `F(x) = <x, x> / 2`, i.e. the squared Mahalanobis generator with `Q = I`.
    pub fn squared_euclidean(dim: usize) -> Result<Self> {
        Self::family(ScalarFamily::HalfSquare, dim)
    }

    /// `F(x) = x^T Q x / 2` with `Q` row-major and positive-definite.
    pub fn squared_mahalanobis(q: Vec<T>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let chol = Cholesky::new(&q, dim)?;
        let cond = condition_number(&q, dim);
        Ok(Self {
            name: "squared-mahalanobis".to_string(),
            dim,
            shape: Shape::Quadratic { q, chol, cond },
            scale: T::one(),
            offset: T::zero(),
        })
    }

    /// Lifts a scalar generator to `F(x) = sum_i base(x_i)` in `dim` dimensions.
    pub fn separable(base: Generator<T>, dim: usize) -> Result<Self> {
        if base.dim != 1 {
            return Err(Error::NotScalar(base.dim));
        }
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            name: format!("separable({})", base.name),
            dim,
            shape: Shape::Lifted(Arc::new(base)),
            scale: T::one(),
            offset: T::zero(),
        })
    }

    /// `G(x) = F(a x) + b`. Strict convexity is preserved since `G'' = a^2 F''(a x)`.
    pub fn affine_precompose(&self, a: T, b: T) -> Result<Self> {
        if a == T::zero() || !a.is_finite() {
            return Err(Error::ZeroScale);
        }
        let mut g = self.clone();
        g.scale = self.scale * a;
        g.offset = self.offset + b;
        Ok(g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_scalar(&self) -> bool {
        self.dim == 1
    }

    pub fn is_separable(&self) -> bool {
        self.dim == 1 || matches!(self.shape, Shape::Family(_) | Shape::Lifted(_))
    }

    pub fn has_grad_inverse(&self) -> bool {
        match &self.shape {
            Shape::Family(_) | Shape::Quadratic { .. } => true,
            Shape::Lifted(base) => base.has_grad_inverse(),
            Shape::Custom(c) => c.grad_inverse.is_some(),
        }
    }

    pub fn has_hessian(&self) -> bool {
        match &self.shape {
            Shape::Family(_) | Shape::Quadratic { .. } => true,
            Shape::Lifted(base) => base.has_hessian(),
            Shape::Custom(c) => c.hessian.is_some(),
        }
    }

    /// Builtin family, if this generator is a (possibly affinely transformed)
    /// separable builtin.
    pub fn family_kind(&self) -> Option<ScalarFamily> {
        match self.shape {
            Shape::Family(f) => Some(f),
            _ => None,
        }
    }

    fn base_domain(&self) -> Interval<T> {
        match &self.shape {
            Shape::Family(f) => f.domain(),
            Shape::Lifted(base) => base.domain(),
            Shape::Quadratic { .. } => Interval::real(),
            Shape::Custom(c) => c.domain,
        }
    }

    /// Per-coordinate domain of `x`.
    pub fn domain(&self) -> Interval<T> {
        self.base_domain().preimage(self.scale)
    }

    fn check_dim(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// Validates that `x` is in the closed domain, or in its interior when
    /// `interior` is set.
    pub fn check_point(&self, x: &[T], interior: bool) -> Result<()> {
        self.check_dim(x)?;
        let dom = self.domain();
        for (index, &v) in x.iter().enumerate() {
            if !dom.contains(v) {
                return Err(Error::OutOfDomain { generator: self.name.clone(), index, value: to_f64(v) });
            }
            if interior && !dom.contains_interior(v) {
                return Err(Error::BoundaryGradient { generator: self.name.clone(), index, value: to_f64(v) });
            }
        }
        Ok(())
    }

    fn scaled(&self, x: &[T]) -> Vec<T> {
        x.iter().map(|&v| self.scale * v).collect()
    }

    /// `F(x)`.
    pub fn eval(&self, x: &[T]) -> Result<T> {
        self.check_point(x, false)?;
        Ok(self.base_eval(&self.scaled(x))? + self.offset)
    }

    fn base_eval(&self, u: &[T]) -> Result<T> {
        Ok(match &self.shape {
            Shape::Family(f) => u.iter().fold(T::zero(), |acc, &v| acc + f.f(v)),
            Shape::Lifted(base) => {
                let mut acc = T::zero();
                for &v in u {
                    acc = acc + base.eval(&[v])?;
                }
                acc
            }
            Shape::Quadratic { q, .. } => {
                let qu = mat_vec(q, u);
                u.iter().zip(&qu).fold(T::zero(), |acc, (&a, &b)| acc + a * b) / lit(2.0)
            }
            Shape::Custom(c) => (c.eval)(u),
        })
    }

    /// `grad F(x)`; `x` must lie in the interior of the domain.
    pub fn grad(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_point(x, true)?;
        let u = self.scaled(x);
        let g = match &self.shape {
            Shape::Family(f) => u.iter().map(|&v| f.df(v)).collect(),
            Shape::Lifted(base) => {
                let mut out = Vec::with_capacity(u.len());
                for &v in &u {
                    out.push(base.grad(&[v])?[0]);
                }
                out
            }
            Shape::Quadratic { q, .. } => mat_vec(q, &u),
            Shape::Custom(c) => (c.grad)(&u),
        };
        Ok(g.into_iter().map(|v| v * self.scale).collect())
    }

    /// `(grad F)^{-1}(g)`.
    pub fn grad_inverse(&self, g: &[T]) -> Result<Vec<T>> {
        self.check_dim(g)?;
        let v: Vec<T> = g.iter().map(|&x| x / self.scale).collect();
        let u = match &self.shape {
            Shape::Family(f) => {
                let mut out = Vec::with_capacity(v.len());
                for &gv in &v {
                    let u = f
                        .inv_df(gv)
                        .ok_or_else(|| Error::GradientOutOfRange { generator: self.name.clone(), value: to_f64(gv) })?;
                    out.push(u);
                }
                out
            }
            Shape::Lifted(base) => {
                let mut out = Vec::with_capacity(v.len());
                for &gv in &v {
                    out.push(base.grad_inverse(&[gv])?[0]);
                }
                out
            }
            Shape::Quadratic { chol, .. } => chol.solve(&v),
            Shape::Custom(c) => match &c.grad_inverse {
                Some(f) => f(&v),
                None => return Err(Error::MissingGradInverse(self.name.clone())),
            },
        };
        Ok(u.into_iter().map(|x| x / self.scale).collect())
    }

    /// Row-major Hessian at an interior point.
    pub fn hessian(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_point(x, true)?;
        let n = self.dim;
        let u = self.scaled(x);
        let a2 = self.scale * self.scale;
        let mut h = match &self.shape {
            Shape::Family(f) => diag(u.iter().map(|&v| f.d2f(v)), n),
            Shape::Lifted(base) => {
                let mut d = Vec::with_capacity(n);
                for &v in &u {
                    d.push(base.second_deriv(v)?);
                }
                diag(d.into_iter(), n)
            }
            Shape::Quadratic { q, .. } => q.clone(),
            Shape::Custom(c) => match &c.hessian {
                Some(f) => f(&u),
                None => return Err(Error::MissingHessian(self.name.clone())),
            },
        };
        h.iter_mut().for_each(|v| *v = *v * a2);
        Ok(h)
    }

    /// `f''(x)` of a scalar generator.
    pub fn second_deriv(&self, x: T) -> Result<T> {
        if self.dim != 1 {
            return Err(Error::NotScalar(self.dim));
        }
        Ok(self.hessian(&[x])?[0])
    }

    /// Ratio of extreme Hessian eigenvalues at `x` (always `1` in one dimension).
    pub fn hessian_condition(&self, x: &[T]) -> Result<f64> {
        match &self.shape {
            Shape::Quadratic { cond, .. } => {
                self.check_point(x, true)?;
                Ok(*cond)
            }
            Shape::Family(_) | Shape::Lifted(_) => {
                let h = self.hessian(x)?;
                let n = self.dim;
                let d: Vec<f64> = (0..n).map(|i| to_f64(h[i * n + i])).collect();
                let max = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
                Ok(if min > 0.0 { max / min } else { f64::INFINITY })
            }
            Shape::Custom(_) => {
                let h = self.hessian(x)?;
                Ok(condition_number(&h, self.dim))
            }
        }
    }

    /// `rho_B(x) = 1 / sqrt(1 + <grad F(x), grad F(x)>)`.
    pub fn rho_b(&self, x: &[T]) -> Result<T> {
        let g = self.grad(x)?;
        let gg = g.iter().fold(T::zero(), |acc, &v| acc + v * v);
        Ok((T::one() + gg).sqrt().recip())
    }
}

fn diag<T: Scalar>(d: impl Iterator<Item = T>, n: usize) -> Vec<T> {
    let mut h = vec![T::zero(); n * n];
    for (i, v) in d.enumerate() {
        h[i * n + i] = v;
    }
    h
}
