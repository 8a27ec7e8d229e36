//! Jensen centroids by the concave-convex procedure and total Jensen
//! centroids by alternating weight renormalisation and CCCP.
//!
//! The right-sided total Jensen centroid minimises
//! `L(x; w) = sum_i w_i tJ_alpha(p_i : x)`. Each outer stage freezes the
//! conformal factors at the current center, which turns the problem into a
//! weighted skew Jensen centroid solved by a fixed number of CCCP steps.
//! Freezing the factors makes the stage fixed point differ from the true
//! minimiser of `L`, so by default the result is polished by a projected
//! gradient descent on `L` itself.

use crate::divergences::{jensen_scaled, total_jensen, Skew};
use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::scalar::{lit, norm_sq, sub, to_f64_vec, Scalar};

/// Points with normalised nonnegative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPointSet<T> {
    points: Vec<Vec<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> WeightedPointSet<T> {
    /// Builds a point set; weights are normalised to sum to one.
    pub fn new(points: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if weights.len() != points.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: weights.len() });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
        if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidWeights);
        }
        let total = weights.iter().fold(T::zero(), |acc, &w| acc + w);
        if !(total > T::zero()) {
            return Err(Error::InvalidWeights);
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { points, weights })
    }

    pub fn uniform(points: Vec<Vec<T>>) -> Result<Self> {
        let n = points.len();
        let w = vec![T::one(); n];
        Self::new(points, w)
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn barycenter(&self) -> Vec<T> {
        weighted_mean(&self.points, &self.weights)
    }

    /// Checks every point against the generator domain.
    pub fn check_domain(&self, g: &Generator<T>) -> Result<()> {
        self.points.iter().try_for_each(|p| g.check_point(p, false))
    }
}

fn weighted_mean<T: Scalar>(points: &[Vec<T>], weights: &[T]) -> Vec<T> {
    let dim = points[0].len();
    let mut c = vec![T::zero(); dim];
    for (p, &w) in points.iter().zip(weights) {
        for (ci, &pi) in c.iter_mut().zip(p) {
            *ci = *ci + w * pi;
        }
    }
    c
}

/// Starting point of the outer loop.
#[derive(Debug, Clone, PartialEq)]
pub enum Init<T> {
    Barycenter,
    Point(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidConfig<T> {
    pub alpha: Skew<T>,
    /// CCCP steps per outer stage.
    pub inner_iters: usize,
    /// Stop once the loss changes by less than this between stages.
    pub outer_tol: T,
    pub outer_max_iters: usize,
    pub init: Init<T>,
    /// Give up after this many consecutive loss increases.
    pub max_consecutive_increases: usize,
    /// Polish the two-stage result by descending `L` directly.
    pub refine: bool,
    pub refine_max_iters: usize,
}

impl<T: Scalar> CentroidConfig<T> {
    pub fn new(alpha: Skew<T>) -> Self {
        Self {
            alpha,
            inner_iters: 20,
            outer_tol: lit(1e-10),
            outer_max_iters: 1000,
            init: Init::Barycenter,
            max_consecutive_increases: 5,
            refine: true,
            refine_max_iters: 5000,
        }
    }

    fn validate(&self) -> Result<()> {
        self.alpha.require_proper()?;
        if !(self.outer_tol > T::zero()) {
            return Err(Error::ParameterRange {
                name: "outer_tol",
                value: crate::scalar::to_f64(self.outer_tol),
                range: "(0, inf)",
            });
        }
        if self.inner_iters == 0 || self.outer_max_iters == 0 {
            return Err(Error::ParameterRange { name: "iterations", value: 0.0, range: "[1, inf)" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidResult<T> {
    pub center: Vec<T>,
    /// `L(center; w)`.
    pub loss: T,
    /// `L(c^(t); w)` for the initial center and after every outer stage.
    pub loss_trace: Vec<T>,
    /// Renormalised weights `w^(t)` used by every outer stage.
    pub stage_weights_trace: Vec<Vec<T>>,
    /// The outer loop met `outer_tol` before the iteration or increase limits.
    pub converged: bool,
    /// Number of outer stages run.
    pub iterations: usize,
    /// Best center of the two-stage scheme, before refinement.
    pub two_stage_center: Vec<T>,
    pub two_stage_loss: T,
    pub refine_iterations: usize,
    /// Some CCCP iterate had to be pulled back inside the domain.
    pub clamped: bool,
}

/// Trace of a run of CCCP steps.
#[derive(Debug, Clone, PartialEq)]
pub struct CccpTrace<T> {
    pub center: Vec<T>,
    /// `sum_i w_i J_alpha(p_i : c)` for the start and after each step.
    pub losses: Vec<T>,
    pub clamped: bool,
    /// The step tolerance was met.
    pub converged: bool,
}

const CLAMP_MARGIN: f64 = 1e-12;

/// Weighted skew Jensen loss `sum_i w_i J_alpha(p_i : x)`.
pub fn jensen_loss<T: Scalar>(
    g: &Generator<T>,
    alpha: Skew<T>,
    points: &[Vec<T>],
    weights: &[T],
    x: &[T],
) -> Result<T> {
    let mut acc = T::zero();
    for (p, &w) in points.iter().zip(weights) {
        acc = acc + w * jensen_scaled(g, alpha, p, x)?.value;
    }
    Ok(acc)
}

/// Total Jensen loss `L(x; w) = sum_i w_i tJ_alpha(p_i : x)`.
pub fn total_jensen_loss<T: Scalar>(
    g: &Generator<T>,
    alpha: Skew<T>,
    data: &WeightedPointSet<T>,
    x: &[T],
) -> Result<T> {
    let mut acc = T::zero();
    for (p, &w) in data.points.iter().zip(&data.weights) {
        acc = acc + w * total_jensen(g, alpha, p, x)?.value;
    }
    Ok(acc)
}

/// Runs `iters` CCCP steps
/// `c <- (grad F)^{-1}( sum_i w_i grad F(alpha p_i + (1 - alpha) c) )`,
/// each of which does not increase `sum_i w_i J_alpha(p_i : c)`.
///
/// With `tol`, stops early once a step moves the center by less than
/// `tol * max(1, ||c||)`.
pub fn cccp_steps<T: Scalar>(
    g: &Generator<T>,
    alpha: Skew<T>,
    points: &[Vec<T>],
    weights: &[T],
    start: &[T],
    iters: usize,
    tol: Option<T>,
) -> Result<CccpTrace<T>> {
    alpha.require_proper()?;
    if !g.has_grad_inverse() {
        return Err(Error::MissingGradInverse(g.name().to_string()));
    }
    let a = alpha.value();
    let dom = g.domain();
    let margin = lit::<T>(CLAMP_MARGIN);
    let mut c = start.to_vec();
    let mut clamped = false;
    let mut converged = false;
    let mut losses = vec![jensen_loss(g, alpha, points, weights, &c)?];
    for _ in 0..iters {
        let mut acc = vec![T::zero(); c.len()];
        for (p, &w) in points.iter().zip(weights) {
            if w == T::zero() {
                continue;
            }
            let m: Vec<T> = p.iter().zip(&c).map(|(&pi, &ci)| a * pi + (T::one() - a) * ci).collect();
            for (s, gi) in acc.iter_mut().zip(g.grad(&m)?) {
                *s = *s + w * gi;
            }
        }
        let mut next = g.grad_inverse(&acc).map_err(|_| Error::IterateLeftDomain { last_valid: to_f64_vec(&c) })?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::IterateLeftDomain { last_valid: to_f64_vec(&c) });
        }
        for v in next.iter_mut() {
            if !dom.contains_interior(*v) {
                *v = dom.clamp_interior(*v, margin);
                clamped = true;
            }
        }
        let step = norm_sq(&sub(&next, &c)).sqrt();
        c = next;
        losses.push(jensen_loss(g, alpha, points, weights, &c)?);
        if let Some(tol) = tol {
            if step <= tol * norm_sq(&c).sqrt().max(T::one()) {
                converged = true;
                break;
            }
        }
    }
    Ok(CccpTrace { center: c, losses, clamped, converged })
}

/// Skew Jensen centroid by `iters` CCCP steps from the barycenter.
///
/// `weights_override` replaces the weights of `data` (normalised first).
pub fn jensen_centroid_cccp<T: Scalar>(
    g: &Generator<T>,
    alpha: Skew<T>,
    data: &WeightedPointSet<T>,
    weights_override: Option<&[T]>,
    iters: usize,
) -> Result<Vec<T>> {
    prepare(g, data)?;
    let data = match weights_override {
        Some(w) => WeightedPointSet::new(data.points.clone(), w.to_vec())?,
        None => data.clone(),
    };
    let start = data.barycenter();
    Ok(cccp_steps(g, alpha, &data.points, &data.weights, &start, iters, None)?.center)
}

fn prepare<T: Scalar>(g: &Generator<T>, data: &WeightedPointSet<T>) -> Result<()> {
    if data.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: data.dim() });
    }
    if !g.has_grad_inverse() {
        return Err(Error::MissingGradInverse(g.name().to_string()));
    }
    data.check_domain(g)
}

fn stage_weights<T: Scalar>(g: &Generator<T>, data: &WeightedPointSet<T>, c: &[T]) -> Result<Vec<T>> {
    let mut raw = Vec::with_capacity(data.len());
    for (p, &w) in data.points.iter().zip(&data.weights) {
        let rho = if p.as_slice() == c { T::one() } else { crate::divergences::rho_j(g, p, c)? };
        raw.push(w * rho);
    }
    let total = raw.iter().fold(T::zero(), |acc, &v| acc + v);
    Ok(raw.into_iter().map(|v| v / total).collect())
}

/// Right-sided total Jensen centroid.
///
/// Never fails for lack of convergence: `converged` reports whether the
/// outer loop met `outer_tol`. The returned center is the best one visited.
pub fn total_jensen_centroid<T: Scalar>(
    g: &Generator<T>,
    data: &WeightedPointSet<T>,
    cfg: &CentroidConfig<T>,
) -> Result<CentroidResult<T>> {
    cfg.validate()?;
    prepare(g, data)?;
    let alpha = cfg.alpha;
    let mut c = match &cfg.init {
        Init::Barycenter => data.barycenter(),
        Init::Point(x) => {
            g.check_point(x, true)?;
            x.clone()
        }
    };
    let mut loss = total_jensen_loss(g, alpha, data, &c)?;
    let mut loss_trace = vec![loss];
    let mut stage_weights_trace = Vec::new();
    let mut best = (loss, c.clone());
    let mut converged = false;
    let mut clamped = false;
    let mut increases = 0;
    let mut iterations = 0;

    for t in 1..=cfg.outer_max_iters {
        iterations = t;
        let w = stage_weights(g, data, &c)?;
        let trace = cccp_steps(g, alpha, &data.points, &w, &c, cfg.inner_iters, None)?;
        stage_weights_trace.push(w);
        clamped |= trace.clamped;
        c = trace.center;
        let next = total_jensen_loss(g, alpha, data, &c)?;
        loss_trace.push(next);
        if next < best.0 {
            best = (next, c.clone());
        }
        let improvement = loss - next;
        loss = next;
        if improvement.abs() < cfg.outer_tol {
            converged = true;
            break;
        }
        if improvement < T::zero() {
            increases += 1;
            if increases >= cfg.max_consecutive_increases {
                break;
            }
        } else {
            increases = 0;
        }
    }

    let (two_stage_loss, two_stage_center) = best.clone();
    let (mut final_loss, mut center) = best;
    let mut refine_iterations = 0;
    if cfg.refine && data.len() > 1 {
        let (x, l, its) = descend_total_loss(g, alpha, data, &center, final_loss, cfg.refine_max_iters)?;
        refine_iterations = its;
        if l < final_loss {
            final_loss = l;
            center = x;
        }
    }
    Ok(CentroidResult {
        center,
        loss: final_loss,
        loss_trace,
        stage_weights_trace,
        converged,
        iterations,
        two_stage_center,
        two_stage_loss,
        refine_iterations,
        clamped,
    })
}

/// Left-sided centroid, minimising `sum_i w_i tJ_alpha(x : p_i)`; equal to
/// the right-sided centroid for `1 - alpha`.
pub fn left_sided_centroid<T: Scalar>(
    g: &Generator<T>,
    data: &WeightedPointSet<T>,
    cfg: &CentroidConfig<T>,
) -> Result<CentroidResult<T>> {
    let mut flipped = cfg.clone();
    flipped.alpha = cfg.alpha.complement();
    total_jensen_centroid(g, data, &flipped)
}

/// Gradient of `L(x; w)` with respect to `x`.
pub fn total_jensen_loss_grad<T: Scalar>(
    g: &Generator<T>,
    alpha: Skew<T>,
    data: &WeightedPointSet<T>,
    x: &[T],
) -> Result<Vec<T>> {
    let a = alpha.value();
    let fx = g.eval(x)?;
    let gx = g.grad(x)?;
    let tiny = T::min_positive_value().sqrt();
    let mut out = vec![T::zero(); x.len()];
    for (p, &w) in data.points.iter().zip(&data.weights) {
        let diff = sub(x, p);
        let n2 = norm_sq(&diff);
        if w == T::zero() || n2 <= tiny {
            continue;
        }
        let df = g.eval(p)? - fx;
        let chord = n2 + df * df;
        let rho = (n2 / chord).sqrt();
        let m: Vec<T> = p.iter().zip(x).map(|(&pi, &xi)| a * pi + (T::one() - a) * xi).collect();
        let gm = g.grad(&m)?;
        let j = jensen_scaled(g, alpha, p, x)?.value;
        for i in 0..x.len() {
            let dj = (gx[i] - gm[i]) / a;
            let drho = rho * (diff[i] / n2 - (diff[i] - df * gx[i]) / chord);
            out[i] = out[i] + w * (rho * dj + j * drho);
        }
    }
    Ok(out)
}

/// Monotone gradient descent with Barzilai-Borwein trial steps and Armijo
/// backtracking, staying in the domain interior.
fn descend_total_loss<T: Scalar>(
    g: &Generator<T>,
    alpha: Skew<T>,
    data: &WeightedPointSet<T>,
    start: &[T],
    start_loss: T,
    max_iters: usize,
) -> Result<(Vec<T>, T, usize)> {
    let dom = g.domain();
    let armijo = lit::<T>(1e-4);
    let half = lit::<T>(0.5);
    let eps = T::epsilon();
    let mut x = start.to_vec();
    let mut lx = start_loss;
    let mut grad = total_jensen_loss_grad(g, alpha, data, &x)?;
    let scale = norm_sq(&x).sqrt().max(T::one());
    let mut step = {
        let gn = norm_sq(&grad).sqrt();
        if gn > T::zero() {
            lit::<T>(1e-3) * scale / gn
        } else {
            T::zero()
        }
    };
    let mut iters = 0;
    while iters < max_iters {
        let gn2 = norm_sq(&grad);
        if gn2 == T::zero() || !gn2.is_finite() {
            break;
        }
        let mut t = step;
        let accepted = loop {
            if t * gn2.sqrt() <= eps * scale {
                break None;
            }
            let cand: Vec<T> = x.iter().zip(&grad).map(|(&xi, &gi)| xi - t * gi).collect();
            if cand.iter().all(|&v| dom.contains_interior(v)) {
                if let Ok(lc) = total_jensen_loss(g, alpha, data, &cand) {
                    if lc <= lx - armijo * t * gn2 {
                        break Some((cand, lc));
                    }
                }
            }
            t = t * half;
        };
        let Some((cand, lc)) = accepted else { break };
        iters += 1;
        let g_new = total_jensen_loss_grad(g, alpha, data, &cand)?;
        let s = sub(&cand, &x);
        let y = sub(&g_new, &grad);
        let sy = s.iter().zip(&y).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        step = if sy > T::zero() { norm_sq(&s) / sy } else { t * lit(2.0) };
        let improvement = lx - lc;
        x = cand;
        lx = lc;
        grad = g_new;
        if improvement <= eps * lx.abs() {
            break;
        }
    }
    Ok((x, lx, iters))
}
