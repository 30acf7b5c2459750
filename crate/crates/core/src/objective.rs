//! Smooth convex objectives and analytic test problems.
//!
//! A [`SmoothProblem`] wraps an [`Objective`] (value and gradient oracle)
//! together with whatever ground truth is known about it: the global
//! smoothness constant `L`, the strong-convexity modulus `mu`, a minimizer
//! and the optimal value. Problems are immutable once built and can be
//! shared across threads.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::schedule::Profile;
use crate::solver::{run_adaagm, StopCriteria};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is indefinite (smallest eigenvalue {0:.3e})")]
    Indefinite(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(
        "offset is not in the column space of the matrix (residual {0:.3e}); no minimizer exists"
    )]
    NoMinimizer(f64),
    #[error("objective has zero curvature everywhere; smoothness constant must be positive")]
    ZeroCurvature,
    #[error("row matrix is empty")]
    EmptyRows,
    #[error("temperature must be positive, got {0}")]
    BadTemperature(f64),
    #[error("label at index {index} is {value}; labels must be -1 or +1")]
    BadLabel { index: usize, value: f64 },
    #[error("ridge must be nonnegative, got {0}")]
    BadRidge(f64),
    #[error("point is not stationary (gradient norm {0:.3e})")]
    NotStationary(f64),
    #[error("reference solve failed: {0}")]
    ReferenceSolve(String),
    #[error("non-finite entry in input data")]
    NonFinite,
}

/// Value and gradient oracle of a smooth convex function.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> f64;

    fn gradient(&self, x: &Vector) -> Vector;

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        (self.value(x), self.gradient(x))
    }

    /// Bregman divergence `f(a) - f(b) - <grad f(b), a - b>`.
    ///
    /// `f_a`, `f_b` and `grad_b` are the already evaluated oracle outputs.
    /// The default subtracts function values directly; implementations with
    /// structure override it with a cancellation-free formula, since the
    /// smoothness estimator divides by this quantity once iterates are close.
    fn bregman(&self, a: &Vector, b: &Vector, f_a: f64, f_b: f64, grad_b: &Vector) -> f64 {
        let _ = b;
        f_a - f_b - grad_b.dot(&(a - b))
    }

    /// `grad f(a) - grad f(b)`.
    ///
    /// The default subtracts the evaluated gradients, whose rounding floor
    /// scales with the terms summed inside them rather than with the result.
    /// Structured implementations work from `a - b` instead, so the
    /// difference stays accurate after the gradients themselves are noise.
    fn gradient_difference(
        &self,
        a: &Vector,
        b: &Vector,
        grad_a: &Vector,
        grad_b: &Vector,
    ) -> Vector {
        let _ = (a, b);
        grad_a - grad_b
    }
}

/// Where the minimizer stored on a problem came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimizerSource {
    /// Closed form, exact up to rounding.
    Exact,
    /// Numerical reference solve; carries the solver residual.
    Reference,
}

/// A smooth convex problem plus known ground truth.
#[derive(Clone)]
pub struct SmoothProblem {
    name: String,
    objective: Arc<dyn Objective>,
    l_known: Option<f64>,
    mu_known: Option<f64>,
    x_star: Option<Vector>,
    f_star: Option<f64>,
    grad_star: Option<Vector>,
    source: Option<MinimizerSource>,
}

impl fmt::Debug for SmoothProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothProblem")
            .field("name", &self.name)
            .field("dimension", &self.dimension())
            .field("l_known", &self.l_known)
            .field("mu_known", &self.mu_known)
            .field("f_star", &self.f_star)
            .field("source", &self.source)
            .finish()
    }
}

impl SmoothProblem {
    /// Wrap an arbitrary objective with no known constants.
    pub fn new(name: impl Into<String>, objective: impl Objective + 'static) -> Self {
        SmoothProblem {
            name: name.into(),
            objective: Arc::new(objective),
            l_known: None,
            mu_known: None,
            x_star: None,
            f_star: None,
            grad_star: None,
            source: None,
        }
    }

    pub fn with_smoothness(mut self, l: f64) -> Self {
        self.l_known = Some(l);
        self
    }

    pub fn with_strong_convexity(mut self, mu: f64) -> Self {
        self.mu_known = Some(mu);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Record `x_star` as a known minimizer after checking stationarity.
    pub fn with_known_minimizer(self, x_star: Vector) -> Result<Self, ProblemError> {
        self.with_minimizer(x_star, MinimizerSource::Exact, 1e-8)
    }

    fn with_minimizer(
        mut self,
        x_star: Vector,
        source: MinimizerSource,
        tol: f64,
    ) -> Result<Self, ProblemError> {
        if x_star.len() != self.dimension() {
            return Err(ProblemError::DimensionMismatch {
                expected: self.dimension(),
                got: x_star.len(),
            });
        }
        let (f, g) = self.objective.value_and_gradient(&x_star);
        let gn = g.norm();
        if gn > tol * (1.0 + f.abs()) {
            return Err(ProblemError::NotStationary(gn));
        }
        self.f_star = Some(f);
        self.grad_star = Some(g);
        self.x_star = Some(x_star);
        self.source = Some(source);
        Ok(self)
    }

    /// Compute a minimizer by running AdaAGM to gradient norm `1e-12` and
    /// freeze it on the problem.
    pub fn with_reference_solution(self, x0: &Vector) -> Result<Self, ProblemError> {
        let mut params = if self.mu_known.is_some_and(|mu| mu > 0.0) {
            Profile::StronglyConvexGammaOne.params()
        } else {
            Profile::ConvexGammaOne.params()
        };
        if let Some(l) = self.l_known {
            params.s0 = Some(params.floor_q().unwrap_or(0.2) / l);
        }
        let stop = StopCriteria {
            max_iters: 1_000_000,
            grad_tol: 1e-12,
            gap_tol: 0.0,
        };
        let trace = run_adaagm(&self, &params, &stop, x0)
            .map_err(|e| ProblemError::ReferenceSolve(e.to_string()))?;
        let x = trace.final_x.clone();
        self.with_minimizer(x, MinimizerSource::Reference, 1e-8)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.objective.dim()
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.objective.value(x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        self.objective.gradient(x)
    }

    pub fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        self.objective.value_and_gradient(x)
    }

    pub fn bregman(&self, a: &Vector, b: &Vector, f_a: f64, f_b: f64, grad_b: &Vector) -> f64 {
        self.objective.bregman(a, b, f_a, f_b, grad_b)
    }

    pub fn gradient_difference(
        &self,
        a: &Vector,
        b: &Vector,
        grad_a: &Vector,
        grad_b: &Vector,
    ) -> Vector {
        self.objective.gradient_difference(a, b, grad_a, grad_b)
    }

    pub fn l_known(&self) -> Option<f64> {
        self.l_known
    }

    pub fn mu_known(&self) -> Option<f64> {
        self.mu_known
    }

    pub fn x_star(&self) -> Option<&Vector> {
        self.x_star.as_ref()
    }

    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    pub fn minimizer_source(&self) -> Option<MinimizerSource> {
        self.source
    }

    /// `f(x) - f*` through `D_f(x, x*) + <grad f(x*), x - x*>`, which avoids
    /// subtracting two nearly equal values when the objective supplies a
    /// structured divergence.
    pub fn gap(&self, x: &Vector, f_x: f64) -> Option<f64> {
        let (xs, fs, gs) = (
            self.x_star.as_ref()?,
            self.f_star?,
            self.grad_star.as_ref()?,
        );
        let d = self.objective.bregman(x, xs, f_x, fs, gs);
        Some(d + gs.dot(&(x - xs)))
    }

    // ---- constructors for the shipped test problems ----

    /// `f(x) = 1/2 x^T A x - b^T x` with `L = lambda_max(A)`, `mu = lambda_min(A)`
    /// and `x* = A^+ b`.
    pub fn quadratic(matrix: Matrix, offset: Vector) -> Result<Self, ProblemError> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(ProblemError::NotSquare {
                rows: n,
                cols: matrix.ncols(),
            });
        }
        if offset.len() != n {
            return Err(ProblemError::DimensionMismatch {
                expected: n,
                got: offset.len(),
            });
        }
        if matrix.iter().chain(offset.iter()).any(|v| !v.is_finite()) {
            return Err(ProblemError::NonFinite);
        }
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(ProblemError::NotSymmetric(asym));
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let lmax = eig.eigenvalues.max();
        let lmin = eig.eigenvalues.min();
        if lmax <= 0.0 {
            return Err(ProblemError::ZeroCurvature);
        }
        let cutoff = 1e-12 * lmax.max(scale);
        if lmin < -cutoff {
            return Err(ProblemError::Indefinite(lmin));
        }

        // pseudo-inverse solve through the eigendecomposition
        let coords = eig.eigenvectors.transpose() * &offset;
        let scaled = DVector::from_iterator(
            n,
            coords
                .iter()
                .zip(eig.eigenvalues.iter())
                .map(|(c, &lam)| if lam > cutoff { c / lam } else { 0.0 }),
        );
        let x_star = &eig.eigenvectors * scaled;
        let residual = (&sym * &x_star - &offset).norm();
        if residual > 1e-9 * (1.0 + offset.norm()) {
            return Err(ProblemError::NoMinimizer(residual));
        }

        let mu = if lmin > cutoff { lmin } else { 0.0 };
        let objective = Quadratic {
            matrix: sym,
            offset,
        };
        let (f_star, grad_star) = objective.value_and_gradient(&x_star);
        Ok(SmoothProblem {
            name: format!("quadratic{n}"),
            objective: Arc::new(objective),
            l_known: Some(lmax),
            mu_known: Some(mu),
            x_star: Some(x_star),
            f_star: Some(f_star),
            grad_star: Some(grad_star),
            source: Some(MinimizerSource::Exact),
        })
    }

    /// `f(x) = t log sum_i exp((a_i^T x + b_i) / t)` with `L = sigma_max(A)^2 / t`.
    ///
    /// No minimizer is recorded; use [`SmoothProblem::with_known_minimizer`]
    /// or [`SmoothProblem::with_reference_solution`] when one exists.
    pub fn log_sum_exp(
        rows: Matrix,
        shifts: Vector,
        temperature: f64,
    ) -> Result<Self, ProblemError> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(ProblemError::EmptyRows);
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(ProblemError::BadTemperature(temperature));
        }
        if shifts.len() != rows.nrows() {
            return Err(ProblemError::DimensionMismatch {
                expected: rows.nrows(),
                got: shifts.len(),
            });
        }
        if rows.iter().chain(shifts.iter()).any(|v| !v.is_finite()) {
            return Err(ProblemError::NonFinite);
        }
        let sigma = spectral_norm(&rows);
        if sigma == 0.0 {
            return Err(ProblemError::ZeroCurvature);
        }
        let dim = rows.ncols();
        Ok(SmoothProblem {
            name: format!("logsumexp{dim}"),
            objective: Arc::new(LogSumExp {
                rows,
                shifts,
                temperature,
            }),
            l_known: Some(sigma * sigma / temperature),
            mu_known: Some(0.0),
            x_star: None,
            f_star: None,
            grad_star: None,
            source: None,
        })
    }

    /// Ridge-regularized logistic loss
    /// `f(x) = sum_i log(1 + exp(-y_i a_i^T x)) + ridge/2 |x|^2`
    /// with `L = sigma_max(A)^2 / 4 + ridge` and `mu = ridge`.
    ///
    /// With `ridge > 0` the minimizer is found by a reference solve from the
    /// origin and frozen on the problem.
    pub fn logistic(features: Matrix, labels: Vector, ridge: f64) -> Result<Self, ProblemError> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(ProblemError::EmptyRows);
        }
        if labels.len() != features.nrows() {
            return Err(ProblemError::DimensionMismatch {
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        if let Some((index, &value)) = labels
            .iter()
            .enumerate()
            .find(|(_, &y)| y != 1.0 && y != -1.0)
        {
            return Err(ProblemError::BadLabel { index, value });
        }
        if !(ridge >= 0.0) || !ridge.is_finite() {
            return Err(ProblemError::BadRidge(ridge));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::NonFinite);
        }
        let sigma = spectral_norm(&features);
        let l = 0.25 * sigma * sigma + ridge;
        if l == 0.0 {
            return Err(ProblemError::ZeroCurvature);
        }
        let dim = features.ncols();
        // rows pre-multiplied by their label: margin_i = (y_i a_i)^T x
        let mut signed = features;
        for (mut row, &y) in signed.row_iter_mut().zip(labels.iter()) {
            row *= y;
        }
        let problem = SmoothProblem {
            name: format!("logistic{dim}"),
            objective: Arc::new(Logistic {
                signed_rows: signed,
                ridge,
            }),
            l_known: Some(l),
            mu_known: Some(ridge),
            x_star: None,
            f_star: None,
            grad_star: None,
            source: None,
        };
        if ridge > 0.0 {
            problem.with_reference_solution(&DVector::zeros(dim))
        } else {
            Ok(problem)
        }
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    let gram = m.transpose() * m;
    SymmetricEigen::new(gram).eigenvalues.max().max(0.0).sqrt()
}

/// Maximum coordinate-wise relative error between the analytic gradient and
/// a central finite-difference quotient with spacing `step`.
///
/// The error on coordinate `i` is `|g_i - fd_i| / max(1, |g_i|, |fd_i|)`.
pub fn check_grad_fd(problem: &SmoothProblem, point: &Vector, step: f64) -> f64 {
    let g = problem.gradient(point);
    let mut probe = point.clone();
    let mut worst = 0.0_f64;
    for i in 0..point.len() {
        let xi = point[i];
        probe[i] = xi + step;
        let fp = problem.value(&probe);
        probe[i] = xi - step;
        let fm = problem.value(&probe);
        probe[i] = xi;
        let fd = (fp - fm) / (2.0 * step);
        let denom = 1.0_f64.max(g[i].abs()).max(fd.abs());
        worst = worst.max((g[i] - fd).abs() / denom);
    }
    worst
}

struct Quadratic {
    matrix: Matrix,
    offset: Vector,
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.offset.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.matrix * x)) - self.offset.dot(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        &self.matrix * x - &self.offset
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let ax = &self.matrix * x;
        let f = 0.5 * x.dot(&ax) - self.offset.dot(x);
        (f, ax - &self.offset)
    }

    fn bregman(&self, a: &Vector, b: &Vector, _f_a: f64, _f_b: f64, _grad_b: &Vector) -> f64 {
        let d = a - b;
        0.5 * d.dot(&(&self.matrix * &d))
    }

    fn gradient_difference(&self, a: &Vector, b: &Vector, _ga: &Vector, _gb: &Vector) -> Vector {
        &self.matrix * (a - b)
    }
}

struct LogSumExp {
    rows: Matrix,
    shifts: Vector,
    temperature: f64,
}

impl LogSumExp {
    fn scaled_logits(&self, x: &Vector) -> Vector {
        (&self.rows * x + &self.shifts) / self.temperature
    }
}

impl Objective for LogSumExp {
    fn dim(&self) -> usize {
        self.rows.ncols()
    }

    fn value(&self, x: &Vector) -> f64 {
        self.temperature * logsumexp(&self.scaled_logits(x))
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.value_and_gradient(x).1
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let u = self.scaled_logits(x);
        let lse = logsumexp(&u);
        let p = u.map(|ui| (ui - lse).exp());
        (self.temperature * lse, self.rows.transpose() * p)
    }

    fn bregman(&self, a: &Vector, b: &Vector, _f_a: f64, _f_b: f64, _grad_b: &Vector) -> f64 {
        let ub = self.scaled_logits(b);
        let lse = logsumexp(&ub);
        let log_p = ub.map(|ui| ui - lse);
        let du = (&self.rows * (a - b)) / self.temperature;
        self.temperature * softmax_divergence(log_p.iter().copied(), du.iter().copied())
    }

    fn gradient_difference(
        &self,
        a: &Vector,
        b: &Vector,
        grad_a: &Vector,
        grad_b: &Vector,
    ) -> Vector {
        let ub = self.scaled_logits(b);
        let lse = logsumexp(&ub);
        let p = ub.map(|ui| (ui - lse).exp());
        let du = (&self.rows * (a - b)) / self.temperature;
        let c = p.dot(&du);
        let d = du.map(|di| di - c);
        if d.amax() > 1.0 {
            // far apart: the plain difference has no cancellation to speak of
            return grad_a - grad_b;
        }
        // softmax(u + du) - softmax(u) = p (e^d - S) / S with S = sum p e^d
        let e = d.map(f64::exp_m1);
        let s_minus_one = p.dot(&e);
        let dp = p.zip_map(&e, |pi, ei| pi * (ei - s_minus_one)) / (1.0 + s_minus_one);
        self.rows.transpose() * dp
    }
}

struct Logistic {
    signed_rows: Matrix,
    ridge: f64,
}

impl Objective for Logistic {
    fn dim(&self) -> usize {
        self.signed_rows.ncols()
    }

    fn value(&self, x: &Vector) -> f64 {
        let margins = &self.signed_rows * x;
        margins.iter().map(|&z| softplus(-z)).sum::<f64>() + 0.5 * self.ridge * x.norm_squared()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.value_and_gradient(x).1
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let margins = &self.signed_rows * x;
        let f = margins.iter().map(|&z| softplus(-z)).sum::<f64>()
            + 0.5 * self.ridge * x.norm_squared();
        // d/dz softplus(-z) = -sigmoid(-z)
        let weights = margins.map(|z| -sigmoid(-z));
        let g = self.signed_rows.transpose() * weights + x * self.ridge;
        (f, g)
    }

    fn bregman(&self, a: &Vector, b: &Vector, _f_a: f64, _f_b: f64, _grad_b: &Vector) -> f64 {
        let d = a - b;
        let zb = &self.signed_rows * b;
        let dz = &self.signed_rows * &d;
        // softplus(-z) is a two-point log-sum-exp over (0, -z)
        let loss: f64 = zb
            .iter()
            .zip(dz.iter())
            .map(|(&z, &dzi)| {
                softmax_divergence(
                    [-softplus(-z), -softplus(z)].into_iter(),
                    [0.0, -dzi].into_iter(),
                )
            })
            .sum();
        loss + 0.5 * self.ridge * d.norm_squared()
    }

    fn gradient_difference(&self, a: &Vector, b: &Vector, _ga: &Vector, _gb: &Vector) -> Vector {
        let d = a - b;
        let zb = &self.signed_rows * b;
        let dz = &self.signed_rows * &d;
        // sigmoid(z + h) - sigmoid(z) = sigmoid(z + h) sigmoid(-z) (1 - e^{-h})
        let dw = zb.zip_map(&dz, |z, h| -sigmoid(z + h) * sigmoid(-z) * (-h).exp_m1());
        self.signed_rows.transpose() * dw + d * self.ridge
    }
}

fn logsumexp(u: &Vector) -> f64 {
    let m = u.max();
    if !m.is_finite() {
        return m;
    }
    m + u.iter().map(|&ui| (ui - m).exp()).sum::<f64>().ln()
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `lse(u + du) - lse(u) - <softmax(u), du>` given `log p = log softmax(u)`.
///
/// The divergence is unchanged by shifting every `du_i` by a constant, so
/// `du` is first centred at its `p`-weighted mean `c`. It then equals
/// `log1p(sum p_i (e^{d_i} - 1 - d_i))` with `d_i = du_i - c`; every summand
/// is nonnegative and the near-zero remainder uses a series, so nothing
/// cancels at either scale. Log-probabilities keep entries whose `p_i`
/// underflows but whose `p_i e^{d_i}` does not.
fn softmax_divergence(log_p: impl Iterator<Item = f64>, du: impl Iterator<Item = f64>) -> f64 {
    let pairs: Vec<(f64, f64)> = log_p.zip(du).collect();
    let c = pairs.iter().map(|(lp, di)| lp.exp() * di).sum::<f64>();
    let peak = pairs
        .iter()
        .map(|(lp, di)| lp + (di - c))
        .fold(f64::NEG_INFINITY, f64::max);
    if peak > 700.0 {
        let logits = Vector::from_iterator(pairs.len(), pairs.iter().map(|(lp, di)| lp + di - c));
        return logsumexp(&logits).max(0.0);
    }
    let w: f64 = pairs
        .iter()
        .map(|&(lp, di)| {
            let d = di - c;
            if d > 1.0 {
                (lp + d).exp() - lp.exp() * (1.0 + d)
            } else {
                lp.exp() * exp_remainder(d)
            }
        })
        .sum();
    w.max(0.0).ln_1p()
}

/// `e^x - 1 - x`.
fn exp_remainder(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let mut term = x * x / 2.0;
        let mut sum = term;
        for n in 3..12 {
            term *= x / n as f64;
            sum += term;
        }
        sum
    } else {
        x.exp_m1() - x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn diag(d: &[f64]) -> Matrix {
        Matrix::from_diagonal(&DVector::from_column_slice(d))
    }

    #[test]
    fn identity_quadratic() {
        let p = SmoothProblem::quadratic(Matrix::identity(2, 2), DVector::zeros(2)).unwrap();
        assert_eq!(p.x_star().unwrap(), &dvector![0.0, 0.0]);
        assert_eq!(p.f_star(), Some(0.0));
        assert!((p.l_known().unwrap() - 1.0).abs() < 1e-15);
        assert!((p.mu_known().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ill_conditioned_quadratic() {
        let p = SmoothProblem::quadratic(diag(&[1.0, 100.0]), dvector![1.0, 100.0]).unwrap();
        let xs = p.x_star().unwrap();
        assert!((xs[0] - 1.0).abs() < 1e-14 && (xs[1] - 1.0).abs() < 1e-14);
        assert!((p.l_known().unwrap() - 100.0).abs() < 1e-12);
        assert!((p.mu_known().unwrap() - 1.0).abs() < 1e-12);
        // f* = -1/2 b^T x* = -50.5
        assert!((p.f_star().unwrap() + 50.5).abs() < 1e-12);
    }

    #[test]
    fn offset_outside_range_is_rejected() {
        let err = SmoothProblem::quadratic(diag(&[1.0, 0.0]), dvector![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, ProblemError::NoMinimizer(_)));
    }

    #[test]
    fn singular_quadratic_with_consistent_offset() {
        let p = SmoothProblem::quadratic(diag(&[2.0, 0.0]), dvector![4.0, 0.0]).unwrap();
        assert_eq!(p.mu_known(), Some(0.0));
        assert!((p.x_star().unwrap()[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn bad_matrices_are_rejected() {
        let nonsym = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(
            SmoothProblem::quadratic(nonsym, DVector::zeros(2)),
            Err(ProblemError::NotSymmetric(_))
        ));
        assert!(matches!(
            SmoothProblem::quadratic(diag(&[1.0, -1.0]), DVector::zeros(2)),
            Err(ProblemError::Indefinite(_))
        ));
        assert!(matches!(
            SmoothProblem::quadratic(Matrix::zeros(2, 3), DVector::zeros(2)),
            Err(ProblemError::NotSquare { .. })
        ));
    }

    #[test]
    fn single_row_lse_is_linear_and_unbounded() {
        let p = SmoothProblem::log_sum_exp(Matrix::from_element(1, 1, 1.0), dvector![0.0], 1.0)
            .unwrap();
        assert!(p.x_star().is_none() && p.f_star().is_none());
        assert!((p.value(&dvector![-3.0]) + 3.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_two_row_lse() {
        let rows = Matrix::from_column_slice(2, 1, &[1.0, -1.0]);
        let p = SmoothProblem::log_sum_exp(rows, DVector::zeros(2), 1.0)
            .unwrap()
            .with_known_minimizer(dvector![0.0])
            .unwrap();
        assert!((p.f_star().unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((p.l_known().unwrap() - 2.0).abs() < 1e-12);
        assert!(check_grad_fd(&p, &dvector![0.0], 1e-5) <= 1e-6);
    }

    #[test]
    fn lse_rejects_bad_input() {
        assert_eq!(
            SmoothProblem::log_sum_exp(Matrix::zeros(0, 2), DVector::zeros(0), 1.0).unwrap_err(),
            ProblemError::EmptyRows
        );
        assert!(matches!(
            SmoothProblem::log_sum_exp(Matrix::identity(2, 2), DVector::zeros(2), 0.0),
            Err(ProblemError::BadTemperature(_))
        ));
    }

    #[test]
    fn logistic_with_zero_features() {
        let p =
            SmoothProblem::logistic(Matrix::zeros(3, 2), dvector![1.0, -1.0, 1.0], 1.0).unwrap();
        let xs = p.x_star().unwrap();
        assert!(xs.norm() < 1e-14);
        assert!((p.f_star().unwrap() - 3.0 * 2f64.ln()).abs() < 1e-14);
        assert_eq!(p.minimizer_source(), Some(MinimizerSource::Reference));
    }

    #[test]
    fn separable_logistic_has_no_minimizer() {
        let p =
            SmoothProblem::logistic(Matrix::from_element(1, 1, 1.0), dvector![1.0], 0.0).unwrap();
        assert!(p.x_star().is_none());
        assert_eq!(p.mu_known(), Some(0.0));
        assert!((p.l_known().unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn logistic_rejects_bad_label() {
        let err =
            SmoothProblem::logistic(Matrix::identity(2, 2), dvector![1.0, 0.5], 0.1).unwrap_err();
        assert_eq!(
            err,
            ProblemError::BadLabel {
                index: 1,
                value: 0.5
            }
        );
    }

    #[test]
    fn fd_check_on_quadratic_is_tight() {
        let p = SmoothProblem::quadratic(Matrix::identity(2, 2), DVector::zeros(2)).unwrap();
        assert!(check_grad_fd(&p, &dvector![3.0, 4.0], 1e-5) <= 1e-8);
    }

    #[test]
    fn stable_bregman_matches_direct_formula() {
        let rows = Matrix::from_row_slice(3, 2, &[1.0, 0.5, -0.3, 2.0, 0.7, -1.1]);
        let lse = SmoothProblem::log_sum_exp(rows.clone(), dvector![0.1, -0.2, 0.3], 0.7).unwrap();
        let logi = SmoothProblem::logistic(rows, dvector![1.0, -1.0, 1.0], 0.0).unwrap();
        // far-apart points exercise large logit differences (and overflow)
        let pairs = [
            (dvector![0.4, -0.9], dvector![-0.2, 0.3]),
            (dvector![12.0, -30.0], dvector![-8.0, 15.0]),
            (dvector![400.0, -900.0], dvector![-300.0, 500.0]),
        ];
        for (a, b) in &pairs {
            for p in [&lse, &logi] {
                let (fa, _) = p.value_and_gradient(a);
                let (fb, gb) = p.value_and_gradient(b);
                let direct = fa - fb - gb.dot(&(a - b));
                let stable = p.bregman(a, b, fa, fb, &gb);
                assert!(
                    (direct - stable).abs() <= 1e-12 * (1.0 + direct.abs()),
                    "{direct} {stable}"
                );
            }
        }
    }

    #[test]
    fn stable_bregman_keeps_precision_for_close_points() {
        // second-order behaviour: D(b + h d, b) ~ h^2/2 d^T H d
        let rows = Matrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let p = SmoothProblem::log_sum_exp(rows, DVector::zeros(2), 1.0).unwrap();
        let b = dvector![0.0];
        let (fb, gb) = p.value_and_gradient(&b);
        for h in [1e-3, 1e-6, 1e-9] {
            let a = dvector![h];
            let fa = p.value(&a);
            // f = log(2 cosh x), f'' (0) = 1
            let d = p.bregman(&a, &b, fa, fb, &gb);
            assert!((d / (0.5 * h * h) - 1.0).abs() < 1e-6, "h={h} d={d}");
        }
    }

    #[test]
    fn structured_gradient_difference_matches_subtraction() {
        let rows = Matrix::from_row_slice(3, 2, &[1.0, 0.5, -0.3, 2.0, 0.7, -1.1]);
        let quad = SmoothProblem::quadratic(
            Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
            dvector![1.0, -1.0],
        )
        .unwrap();
        let lse = SmoothProblem::log_sum_exp(rows.clone(), dvector![0.1, -0.2, 0.3], 0.7).unwrap();
        let logi = SmoothProblem::logistic(rows, dvector![1.0, -1.0, 1.0], 0.3).unwrap();
        let pairs = [
            (dvector![0.4, -0.9], dvector![-0.2, 0.3]),
            (dvector![0.41, -0.9], dvector![0.4, -0.905]),
            (dvector![12.0, -30.0], dvector![-8.0, 15.0]),
        ];
        for (a, b) in &pairs {
            for p in [&quad, &lse, &logi] {
                let (ga, gb) = (p.gradient(a), p.gradient(b));
                let direct = &ga - &gb;
                let stable = p.gradient_difference(a, b, &ga, &gb);
                assert!(
                    (&direct - &stable).norm() <= 1e-12 * (1.0 + direct.norm()),
                    "{} {direct} {stable}",
                    p.name()
                );
            }
        }
    }

    #[test]
    fn structured_gradient_difference_is_exact_to_first_order() {
        // H d for the Hessian at b, recovered from steps far below the
        // rounding floor of the gradients themselves
        let rows = Matrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let lse = SmoothProblem::log_sum_exp(rows.clone(), DVector::zeros(2), 1.0).unwrap();
        let logi = SmoothProblem::logistic(rows, dvector![1.0, -1.0], 0.5).unwrap();
        let b = dvector![0.0];
        // f = log(2 cosh x): f''(0) = 1; logistic: 2 * 1/4 + ridge = 1
        for p in [&lse, &logi] {
            let gb = p.gradient(&b);
            for h in [1e-6, 1e-12, 1e-20] {
                let a = dvector![h];
                let ga = p.gradient(&a);
                let dg = p.gradient_difference(&a, &b, &ga, &gb);
                assert!(
                    (dg[0] / h - 1.0).abs() < 1e-6,
                    "{} h={h} dg={}",
                    p.name(),
                    dg[0]
                );
            }
        }
    }

    #[test]
    fn remainders_are_continuous_at_switch() {
        for x in [0.0099999_f64, 0.0100001, -0.0099999, -0.0100001] {
            let direct_e = x.exp_m1() - x;
            assert!((exp_remainder(x) - direct_e).abs() < 1e-15);
        }
    }
}
