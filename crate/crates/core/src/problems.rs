//! Seeded generators for the standard test instances.

use nalgebra::linalg::QR;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::objective::{Matrix, ProblemError, SmoothProblem, Vector};

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    Vector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// Haar-ish orthogonal matrix from the QR factor of a Gaussian matrix.
fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let qr = QR::new(gaussian_matrix(n, n, rng));
    let (q, r) = qr.unpack();
    let signs = Vector::from_fn(n, |i, _| if r[(i, i)] < 0.0 { -1.0 } else { 1.0 });
    q * Matrix::from_diagonal(&signs)
}

fn quadratic_from_spectrum<R: Rng + ?Sized>(
    eigs: &Vector,
    rng: &mut R,
) -> Result<SmoothProblem, ProblemError> {
    let n = eigs.len();
    let q = random_orthogonal(n, rng);
    let a = &q * Matrix::from_diagonal(eigs) * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    // offset in the range of A so a minimizer exists
    let b = &a * gaussian_vector(n, rng);
    SmoothProblem::quadratic(a, b)
}

/// PSD quadratic with `rank` eigenvalues uniform in `[0, l]` (the largest
/// pinned to `l`) and the rest exactly zero.
pub fn random_psd_quadratic<R: Rng + ?Sized>(
    n: usize,
    rank: usize,
    l: f64,
    rng: &mut R,
) -> Result<SmoothProblem, ProblemError> {
    let rank = rank.clamp(1, n);
    let mut eigs = Vector::zeros(n);
    for i in 0..rank {
        eigs[i] = if i == 0 { l } else { l * rng.random::<f64>() };
    }
    quadratic_from_spectrum(&eigs, rng).map(|p| p.with_name("random_psd_quadratic"))
}

/// Strongly convex quadratic with eigenvalues log-spaced over `[mu, l]`.
pub fn random_sc_quadratic<R: Rng + ?Sized>(
    n: usize,
    mu: f64,
    l: f64,
    rng: &mut R,
) -> Result<SmoothProblem, ProblemError> {
    let eigs = Vector::from_fn(n, |i, _| {
        if n == 1 {
            l
        } else {
            mu * (l / mu).powf(i as f64 / (n - 1) as f64)
        }
    });
    quadratic_from_spectrum(&eigs, rng).map(|p| p.with_name("random_sc_quadratic"))
}

/// Log-sum-exp over the rows `{a_i, -a_i}` with zero shifts, so the
/// minimizer is `x* = 0` with `f* = temperature log(2 n_rows)`.
pub fn symmetric_log_sum_exp<R: Rng + ?Sized>(
    n_rows: usize,
    dim: usize,
    temperature: f64,
    rng: &mut R,
) -> Result<SmoothProblem, ProblemError> {
    let half = gaussian_matrix(n_rows, dim, rng);
    let rows = Matrix::from_fn(2 * n_rows, dim, |i, j| {
        if i < n_rows {
            half[(i, j)]
        } else {
            -half[(i - n_rows, j)]
        }
    });
    SmoothProblem::log_sum_exp(rows, Vector::zeros(2 * n_rows), temperature)?
        .with_name("symmetric_log_sum_exp")
        .with_known_minimizer(Vector::zeros(dim))
}

/// Log-sum-exp with Gaussian rows and shifts; no minimizer attached.
pub fn random_log_sum_exp<R: Rng + ?Sized>(
    n_rows: usize,
    dim: usize,
    temperature: f64,
    rng: &mut R,
) -> Result<SmoothProblem, ProblemError> {
    let rows = gaussian_matrix(n_rows, dim, rng);
    let shifts = gaussian_vector(n_rows, rng);
    SmoothProblem::log_sum_exp(rows, shifts, temperature).map(|p| p.with_name("random_log_sum_exp"))
}

/// Ridge-logistic regression on Gaussian features with labels drawn from a
/// planted linear model; `flip` is the label-noise probability.
pub fn random_logistic<R: Rng + ?Sized>(
    n_samples: usize,
    dim: usize,
    ridge: f64,
    flip: f64,
    rng: &mut R,
) -> Result<SmoothProblem, ProblemError> {
    let features = gaussian_matrix(n_samples, dim, rng);
    let w = gaussian_vector(dim, rng);
    let margins = &features * &w;
    let labels = Vector::from_fn(n_samples, |i, _| {
        let y = if margins[i] >= 0.0 { 1.0 } else { -1.0 };
        if rng.random::<f64>() < flip {
            -y
        } else {
            y
        }
    });
    SmoothProblem::logistic(features, labels, ridge).map(|p| p.with_name("random_logistic"))
}
