//! AdaAGM main loop and the two fixed-step baselines.
//!
//! Every run produces a [`Trace`]: one [`TraceRecord`] per (kept) iteration,
//! starting at `k = 0`.

use std::fmt;

use thiserror::Error;

use crate::objective::{SmoothProblem, Vector};
use crate::schedule::{
    advance_step, floor_q, local_smoothness, next_t, smoothness_ratio, AlgoParams, ScheduleError,
    ScheduleState, Smoothness,
};

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("iterate diverged at k = {k} (non-finite value or gradient)")]
    Divergence { k: usize },
    #[error("starting point has dimension {got}, problem has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("starting point is not finite")]
    NonFiniteStart,
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("at k = {k}: {source}")]
    Schedule {
        k: usize,
        #[source]
        source: ScheduleError,
    },
}

/// Iterate pair and cached oracle output at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: Vector,
    pub y: Vector,
    pub grad_x: Vector,
    pub f_x: f64,
    pub k: usize,
}

impl SolverState {
    /// `x_0 = y_0 = x0`.
    pub fn start(problem: &SmoothProblem, x0: &Vector) -> Self {
        let (f_x, grad_x) = problem.value_and_gradient(x0);
        SolverState {
            x: x0.clone(),
            y: x0.clone(),
            grad_x,
            f_x,
            k: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriteria {
    pub max_iters: usize,
    /// Stop once `|grad f(x_k)| <= grad_tol`; inactive when zero.
    pub grad_tol: f64,
    /// Stop once `f(x_k) - f* <= gap_tol`; inactive when zero or `f*` unknown.
    pub gap_tol: f64,
}

impl StopCriteria {
    /// Iteration budget only.
    pub fn budget(max_iters: usize) -> Self {
        StopCriteria {
            max_iters,
            grad_tol: 0.0,
            gap_tol: 0.0,
        }
    }

    /// `max_iters = 1e5`, `grad_tol = 1e-10 (1 + |grad f(x0)|)`.
    pub fn default_for(problem: &SmoothProblem, x0: &Vector) -> Self {
        StopCriteria {
            max_iters: 100_000,
            grad_tol: 1e-10 * (1.0 + problem.gradient(x0).norm()),
            gap_tol: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    Adaptive,
    /// Hold `s_k` at the given value; the inertial sequence still advances.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub step: StepPolicy,
    /// Keep every `thin`-th record (the last one is always kept).
    pub thin: usize,
    /// Compute the energy column when the problem has a minimizer.
    pub record_energy: bool,
    /// Store the iterates `x_k` alongside the kept records.
    pub keep_iterates: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            step: StepPolicy::Adaptive,
            thin: 1,
            record_energy: true,
            keep_iterates: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    AdaAgm,
    GradientDescent,
    Nesterov,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::AdaAgm => "adaagm",
            Algorithm::GradientDescent => "gd",
            Algorithm::Nesterov => "nesterov",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    GradTol,
    GapTol,
}

/// One row of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub value: f64,
    /// `f(x_k) - f*`, when `f*` is known.
    pub gap: Option<f64>,
    pub grad_norm: f64,
    /// `s_k`
    pub s: f64,
    /// `t_k` (the momentum sequence; 1 for gradient descent)
    pub t: f64,
    /// `L_k`; absent at `k = 0` and for the baselines.
    pub l_est: Option<f64>,
    /// `E_k`
    pub energy: Option<f64>,
    pub x_norm: f64,
    pub y_norm: f64,
    /// `|x_k - y_k|`
    pub xy_dist: f64,
    /// Running sum over all `j <= k` (thinned or not) of `t_j^2 s_j^2 |grad f(x_j)|^2`.
    pub weighted_grad_sum: f64,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub algorithm: Algorithm,
    pub params: Option<AlgoParams>,
    pub records: Vec<TraceRecord>,
    pub x0: Vector,
    pub final_x: Vector,
    pub final_y: Vector,
    /// Number of completed iterations (index of the last record).
    pub iterations: usize,
    pub stop: StopReason,
    /// `(k, x_k)` for kept records when requested.
    pub iterates: Vec<(usize, Vector)>,
    /// Initial step actually used.
    pub s0: f64,
    /// Iterations whose curvature ratio was at rounding level and replaced.
    pub degenerate_estimates: usize,
    pub warnings: Vec<String>,
}

impl Trace {
    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace always holds k = 0")
    }
}

/// One AdaAGM iteration: `y_{k+1}`, `x_{k+1}`, `L_{k+1}`, then `s_{k+1}`.
pub fn adaagm_step(
    state: &SolverState,
    sched: &ScheduleState,
    params: &AlgoParams,
    problem: &SmoothProblem,
) -> Result<(SolverState, ScheduleState), SolverError> {
    adaagm_step_with(state, sched, params, problem, StepPolicy::Adaptive).map(|(s, c, _)| (s, c))
}

fn adaagm_step_with(
    state: &SolverState,
    sched: &ScheduleState,
    params: &AlgoParams,
    problem: &SmoothProblem,
    policy: StepPolicy,
) -> Result<(SolverState, ScheduleState, bool), SolverError> {
    let k1 = state.k + 1;
    let t = sched.t_curr;
    let t1 = sched.t_next;

    let y1 = &state.x - &state.grad_x * sched.s_curr;
    let momentum = (t - 1.0) / t1;
    let correction = (params.gamma - 1.0) * t / t1;
    let mut x1 = y1.clone();
    x1 += (&y1 - &state.y) * momentum;
    if correction != 0.0 {
        x1 += (&y1 - &state.x) * correction;
    }

    let (f1, g1) = problem.value_and_gradient(&x1);
    if !f1.is_finite() || g1.iter().any(|v| !v.is_finite()) || x1.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::Divergence { k: k1 });
    }

    let denom = problem.bregman(&state.x, &x1, state.f_x, f1, &g1);
    let scale = f1.abs() + state.f_x.abs() + 1.0;
    let grad_diff = problem.gradient_difference(&x1, &state.x, &g1, &state.grad_x);
    let estimate = smoothness_ratio(&grad_diff, g1.norm(), denom, scale)
        .map_err(|source| SolverError::Schedule { k: k1, source })?;
    let degenerate = estimate == Smoothness::Degenerate;
    let fallback = problem.l_known().unwrap_or(sched.l_max);
    let l1 = estimate.resolve(fallback);

    let mut current = *sched;
    current.l_next = l1;
    let mut next = advance_step(&current, params);
    if let StepPolicy::Fixed(s) = policy {
        next.s_curr = s;
    }

    Ok((
        SolverState {
            x: x1,
            y: y1,
            grad_x: g1,
            f_x: f1,
            k: k1,
        },
        next,
        degenerate,
    ))
}

/// Run AdaAGM from `x0 = y0` with default options.
pub fn run_adaagm(
    problem: &SmoothProblem,
    params: &AlgoParams,
    stop: &StopCriteria,
    x0: &Vector,
) -> Result<Trace, SolverError> {
    run_adaagm_with(problem, params, stop, x0, &SolverOptions::default())
}

pub fn run_adaagm_with(
    problem: &SmoothProblem,
    params: &AlgoParams,
    stop: &StopCriteria,
    x0: &Vector,
    options: &SolverOptions,
) -> Result<Trace, SolverError> {
    check_start(problem, x0)?;
    let mut warnings = Vec::new();
    match options.step {
        StepPolicy::Adaptive => {
            let report = params.validate(problem.l_known());
            if !report.is_usable() {
                let msg = report
                    .failures()
                    .map(|c| format!("{} ({})", c.clause, c.detail))
                    .collect::<Vec<_>>()
                    .join("; ");
                return Err(SolverError::InvalidParams(msg));
            }
            warnings.extend(report.warnings);
        }
        StepPolicy::Fixed(s) => {
            if !(s > 0.0 && s.is_finite()) {
                return Err(SolverError::BadStep(s));
            }
            if !(params.m > 0.0 && params.m <= 1.0 && params.t0 >= 1.0 && params.gamma > 0.0) {
                return Err(SolverError::InvalidParams(
                    "fixed-step mode needs m in (0,1], t0 >= 1, gamma > 0".into(),
                ));
            }
        }
    }

    let mut state = SolverState::start(problem, x0);
    if !state.f_x.is_finite() || state.grad_x.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::Divergence { k: 0 });
    }
    let s0 = match options.step {
        StepPolicy::Fixed(s) => s,
        StepPolicy::Adaptive => initial_step(problem, params, &state)?,
    };
    let mut sched = ScheduleState::initial(params, s0);

    let x_star = problem.x_star().filter(|_| options.record_energy);

    let mut log = TraceLog::new(options, stop);
    let mut l_curr: Option<f64> = None;
    let mut degenerate_estimates = 0;
    loop {
        let gap = problem.gap(&state.x, state.f_x);
        let energy = x_star
            .zip(gap)
            .map(|(xs, gap)| energy_at(&state, &sched, params, xs, gap));
        let weighted = sched.t_curr.powi(2) * sched.s_curr.powi(2);
        let done = log.push(
            &state,
            gap,
            sched.s_curr,
            sched.t_curr,
            l_curr,
            energy,
            weighted,
        );
        if let Some(reason) = done {
            return Ok(log.finish(
                Algorithm::AdaAgm,
                Some(*params),
                x0,
                state,
                reason,
                s0,
                degenerate_estimates,
                warnings,
            ));
        }
        let (next_state, next_sched, degenerate) =
            adaagm_step_with(&state, &sched, params, problem, options.step)?;
        if degenerate {
            degenerate_estimates += 1;
        }
        l_curr = Some(next_sched.l_curr);
        state = next_state;
        sched = next_sched;
    }
}

/// `E_k` from the state at index `k`, using
/// `phi_k = (t_k - 1)(x_k - y_k) - gamma t_k s_k grad f(x_k) + (x_k - x*)`.
fn energy_at(
    state: &SolverState,
    sched: &ScheduleState,
    params: &AlgoParams,
    x_star: &Vector,
    gap: f64,
) -> f64 {
    let t = sched.t_curr;
    let s = sched.s_curr;
    let g = params.gamma;
    let phi = (&state.x - &state.y) * (t - 1.0) - &state.grad_x * (g * t * s) + (&state.x - x_star);
    0.5 * phi.norm_squared()
        + 0.5 * params.beta * (g * t * s).powi(2) * state.grad_x.norm_squared()
        + g * t * t * s * gap
}

/// `s0` from the parameters, or `q/L` when `L` is known, or by a single probe.
fn initial_step(
    problem: &SmoothProblem,
    params: &AlgoParams,
    state: &SolverState,
) -> Result<f64, SolverError> {
    if let Some(s0) = params.s0 {
        return Ok(s0);
    }
    let q = floor_q(params).map_err(|source| SolverError::Schedule { k: 0, source })?;
    if let Some(l) = problem.l_known() {
        return Ok(q / l);
    }
    let gn = state.grad_x.norm();
    if gn == 0.0 {
        return Ok(q);
    }
    let eps = 1e-4 * (1.0 + state.x.norm());
    let x1 = &state.x - &state.grad_x * (eps / gn);
    let (f1, g1) = problem.value_and_gradient(&x1);
    let estimate = local_smoothness(&g1, &state.grad_x, f1, state.f_x, &x1, &state.x)
        .map_err(|source| SolverError::Schedule { k: 0, source })?;
    match estimate.value() {
        Some(l) if l > 0.0 && l.is_finite() => Ok(q / l),
        _ => Ok(q),
    }
}

/// Fixed-step gradient descent `x_{k+1} = x_k - s grad f(x_k)`.
pub fn run_gd(
    problem: &SmoothProblem,
    step: f64,
    stop: &StopCriteria,
    x0: &Vector,
) -> Result<Trace, SolverError> {
    run_gd_with(problem, step, stop, x0, &SolverOptions::default())
}

pub fn run_gd_with(
    problem: &SmoothProblem,
    step: f64,
    stop: &StopCriteria,
    x0: &Vector,
    options: &SolverOptions,
) -> Result<Trace, SolverError> {
    check_start(problem, x0)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(SolverError::BadStep(step));
    }
    let mut warnings = Vec::new();
    if let Some(l) = problem.l_known() {
        if step >= 2.0 / l {
            warnings.push(format!(
                "step {step} >= 2/L = {}; gradient descent may diverge",
                2.0 / l
            ));
        }
    }
    let mut log = TraceLog::new(options, stop);
    let mut state = SolverState::start(problem, x0);
    loop {
        if !state.f_x.is_finite() || state.grad_x.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::Divergence { k: state.k });
        }
        if let Some(reason) = log.push(
            &state,
            problem.gap(&state.x, state.f_x),
            step,
            1.0,
            None,
            None,
            step * step,
        ) {
            return Ok(log.finish(
                Algorithm::GradientDescent,
                None,
                x0,
                state,
                reason,
                step,
                0,
                warnings,
            ));
        }
        let x1 = &state.x - &state.grad_x * step;
        let (f1, g1) = problem.value_and_gradient(&x1);
        state = SolverState {
            y: x1.clone(),
            x: x1,
            grad_x: g1,
            f_x: f1,
            k: state.k + 1,
        };
    }
}

/// Nesterov's method with fixed step and `theta_0 = 1`,
/// `theta_{k+1} = (1 + sqrt(1 + 4 theta_k^2)) / 2`.
pub fn run_nesterov(
    problem: &SmoothProblem,
    step: f64,
    stop: &StopCriteria,
    x0: &Vector,
) -> Result<Trace, SolverError> {
    run_nesterov_with(problem, step, stop, x0, &SolverOptions::default())
}

pub fn run_nesterov_with(
    problem: &SmoothProblem,
    step: f64,
    stop: &StopCriteria,
    x0: &Vector,
    options: &SolverOptions,
) -> Result<Trace, SolverError> {
    check_start(problem, x0)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(SolverError::BadStep(step));
    }
    let mut warnings = Vec::new();
    if let Some(l) = problem.l_known() {
        if step > 1.0 / l {
            warnings.push(format!(
                "step {step} > 1/L = {}; no rate guarantee",
                1.0 / l
            ));
        }
    }
    let mut log = TraceLog::new(options, stop);
    let mut state = SolverState::start(problem, x0);
    let mut theta = 1.0;
    loop {
        if !state.f_x.is_finite() || state.grad_x.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::Divergence { k: state.k });
        }
        let weighted = theta * theta * step * step;
        if let Some(reason) = log.push(
            &state,
            problem.gap(&state.x, state.f_x),
            step,
            theta,
            None,
            None,
            weighted,
        ) {
            return Ok(log.finish(
                Algorithm::Nesterov,
                None,
                x0,
                state,
                reason,
                step,
                0,
                warnings,
            ));
        }
        let theta1 = next_t(theta, 1.0);
        let y1 = &state.x - &state.grad_x * step;
        let x1 = &y1 + (&y1 - &state.y) * ((theta - 1.0) / theta1);
        let (f1, g1) = problem.value_and_gradient(&x1);
        state = SolverState {
            x: x1,
            y: y1,
            grad_x: g1,
            f_x: f1,
            k: state.k + 1,
        };
        theta = theta1;
    }
}

fn check_start(problem: &SmoothProblem, x0: &Vector) -> Result<(), SolverError> {
    if x0.len() != problem.dimension() {
        return Err(SolverError::DimensionMismatch {
            expected: problem.dimension(),
            got: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFiniteStart);
    }
    Ok(())
}

/// Accumulates records, applies thinning and evaluates the stop rule.
struct TraceLog {
    stop: StopCriteria,
    thin: usize,
    keep_iterates: bool,
    records: Vec<TraceRecord>,
    iterates: Vec<(usize, Vector)>,
    grad_sum: f64,
}

impl TraceLog {
    fn new(options: &SolverOptions, stop: &StopCriteria) -> Self {
        TraceLog {
            stop: *stop,
            thin: options.thin.max(1),
            keep_iterates: options.keep_iterates,
            records: Vec::new(),
            iterates: Vec::new(),
            grad_sum: 0.0,
        }
    }

    /// Log iteration `state.k`; returns the stop reason if the run ends here.
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        state: &SolverState,
        gap: Option<f64>,
        s: f64,
        t: f64,
        l_est: Option<f64>,
        energy: Option<f64>,
        grad_weight: f64,
    ) -> Option<StopReason> {
        let grad_norm = state.grad_x.norm();
        self.grad_sum += grad_weight * grad_norm * grad_norm;
        let reason = if self.stop.grad_tol > 0.0 && grad_norm <= self.stop.grad_tol {
            Some(StopReason::GradTol)
        } else if self.stop.gap_tol > 0.0 && gap.is_some_and(|g| g <= self.stop.gap_tol) {
            Some(StopReason::GapTol)
        } else if state.k >= self.stop.max_iters {
            Some(StopReason::MaxIters)
        } else {
            None
        };
        if state.k.is_multiple_of(self.thin) || reason.is_some() {
            self.records.push(TraceRecord {
                k: state.k,
                value: state.f_x,
                gap,
                grad_norm,
                s,
                t,
                l_est,
                energy,
                x_norm: state.x.norm(),
                y_norm: state.y.norm(),
                xy_dist: (&state.x - &state.y).norm(),
                weighted_grad_sum: self.grad_sum,
            });
            if self.keep_iterates {
                self.iterates.push((state.k, state.x.clone()));
            }
        }
        reason
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        self,
        algorithm: Algorithm,
        params: Option<AlgoParams>,
        x0: &Vector,
        state: SolverState,
        stop: StopReason,
        s0: f64,
        degenerate_estimates: usize,
        warnings: Vec<String>,
    ) -> Trace {
        Trace {
            algorithm,
            params,
            records: self.records,
            x0: x0.clone(),
            iterations: state.k,
            final_x: state.x,
            final_y: state.y,
            stop,
            iterates: self.iterates,
            s0,
            degenerate_estimates,
            warnings,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Matrix;
    use crate::schedule::Profile;
    use nalgebra::dvector;

    fn half_square() -> SmoothProblem {
        SmoothProblem::quadratic(Matrix::identity(1, 1), dvector![0.0]).unwrap()
    }

    fn ill2() -> SmoothProblem {
        SmoothProblem::quadratic(
            Matrix::from_diagonal(&dvector![1.0, 100.0]),
            dvector![1.0, 100.0],
        )
        .unwrap()
    }

    #[test]
    fn one_step_by_hand() {
        // f = x^2/2, x0 = y0 = 1, s0 = 1/4, gamma = 1, beta = 1/3, t0 = 3, m = 0.99
        let p = half_square();
        let params = Profile::ConvexGammaOne.params().with_s0(0.25);
        let st = SolverState::start(&p, &dvector![1.0]);
        let sc = ScheduleState::initial(&params, 0.25);
        let (st1, _) = adaagm_step(&st, &sc, &params, &p).unwrap();
        assert_eq!(st1.y[0], 0.75);
        let t1 = (0.99 + (0.99f64 * 0.99 + 36.0).sqrt()) / 2.0;
        // gamma = 1 drops the correction term; y0 = x0 = 1
        let x1 = 0.75 + (3.0 - 1.0) / t1 * (0.75 - 1.0);
        assert!((st1.x[0] - x1).abs() < 1e-12);
        assert!((st1.f_x - 0.5 * x1 * x1).abs() < 1e-15);
    }

    #[test]
    fn stationary_point_is_fixed() {
        let p = ill2();
        let xs = p.x_star().unwrap().clone();
        let params = Profile::ConvexGammaHalf.params();
        let st = SolverState::start(&p, &xs);
        let sc = ScheduleState::initial(&params, 0.01);
        let (st1, _) = adaagm_step(&st, &sc, &params, &p).unwrap();
        assert_eq!(st1.y, xs);
        assert_eq!(st1.x, xs);
    }

    #[test]
    fn budget_only_stop_gives_n_plus_one_records() {
        let p = ill2();
        let params = Profile::ConvexGammaOne.params();
        let tr = run_adaagm(&p, &params, &StopCriteria::budget(37), &dvector![3.0, -2.0]).unwrap();
        assert_eq!(tr.records.len(), 38);
        assert_eq!(tr.iterations, 37);
        assert_eq!(tr.stop, StopReason::MaxIters);
        assert!(tr.records.iter().enumerate().all(|(i, r)| r.k == i));
        assert!(tr.records[0].l_est.is_none() && tr.records[1].l_est.is_some());
    }

    #[test]
    fn thinning_keeps_every_kth_and_last() {
        let p = ill2();
        let params = Profile::ConvexGammaOne.params();
        let opts = SolverOptions {
            thin: 10,
            ..Default::default()
        };
        let tr = run_adaagm_with(
            &p,
            &params,
            &StopCriteria::budget(95),
            &dvector![1.0, 1.0],
            &opts,
        )
        .unwrap();
        let ks: Vec<usize> = tr.records.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 95]);
    }

    #[test]
    fn invalid_params_rejected_before_iterating() {
        let p = ill2();
        let params = AlgoParams {
            gamma: 1.9,
            beta: 1.0,
            t0: 2.0,
            ..Profile::ConvexGammaHalf.params()
        };
        let err =
            run_adaagm(&p, &params, &StopCriteria::budget(5), &dvector![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, SolverError::InvalidParams(_)));
    }

    #[test]
    fn gradient_tolerance_stops_early() {
        let p = ill2();
        let x0 = dvector![0.0, 0.0];
        let stop = StopCriteria::default_for(&p, &x0);
        let tr = run_adaagm(&p, &Profile::ConvexGammaOne.params(), &stop, &x0).unwrap();
        assert_eq!(tr.stop, StopReason::GradTol);
        assert!(tr.last().grad_norm <= stop.grad_tol);
    }

    #[test]
    fn unknown_l_probes_initial_step() {
        let p = SmoothProblem::new("q", Iso(4.0));
        let params = Profile::ConvexGammaOne.params();
        let tr = run_adaagm(&p, &params, &StopCriteria::budget(3), &dvector![1.0, -2.0]).unwrap();
        // probe recovers L = 4 exactly on an isotropic quadratic
        assert!((tr.s0 - 0.2 / 4.0).abs() < 1e-10);
    }

    struct Iso(f64);
    impl crate::objective::Objective for Iso {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, x: &Vector) -> f64 {
            0.5 * self.0 * x.norm_squared()
        }
        fn gradient(&self, x: &Vector) -> Vector {
            x * self.0
        }
    }

    #[test]
    fn gd_exact_one_step() {
        let tr = run_gd(
            &half_square(),
            1.0,
            &StopCriteria::budget(3),
            &dvector![1.0],
        )
        .unwrap();
        assert_eq!(tr.records[1].value, 0.0);
        assert!(tr.warnings.is_empty());
    }

    #[test]
    fn gd_large_step_grows_and_warns() {
        let tr = run_gd(
            &half_square(),
            2.5,
            &StopCriteria::budget(20),
            &dvector![1.0],
        )
        .unwrap();
        assert_eq!(tr.warnings.len(), 1);
        // |1 - 2.5| = 1.5 per step
        assert!((tr.final_x[0].abs() - 1.5f64.powi(20)).abs() < 1e-6);
        let err = run_gd(
            &half_square(),
            2.5,
            &StopCriteria::budget(5000),
            &dvector![1.0],
        )
        .unwrap_err();
        assert!(matches!(err, SolverError::Divergence { .. }));
    }

    #[test]
    fn gd_monotone_on_ill_conditioned_quadratic() {
        let tr = run_gd(
            &ill2(),
            0.01,
            &StopCriteria::budget(500),
            &dvector![3.0, -1.0],
        )
        .unwrap();
        for w in tr.records.windows(2) {
            assert!(w[1].gap.unwrap() <= w[0].gap.unwrap());
        }
    }

    #[test]
    fn nesterov_hits_minimizer_in_one_step() {
        let tr = run_nesterov(
            &half_square(),
            1.0,
            &StopCriteria::budget(10),
            &dvector![1.0],
        )
        .unwrap();
        assert!(tr.records[1..]
            .iter()
            .all(|r| r.value == 0.0 && r.x_norm == 0.0 && r.y_norm == 0.0));
    }

    #[test]
    fn nesterov_within_classical_envelope() {
        let p = ill2();
        let x0 = dvector![-2.0, 3.0];
        let s = 0.01;
        let r0 = (&x0 - p.x_star().unwrap()).norm_squared();
        let tr = run_nesterov(&p, s, &StopCriteria::budget(3000), &x0).unwrap();
        for r in &tr.records {
            let bound = 2.0 * r0 / (s * ((r.k + 1) as f64).powi(2));
            assert!(r.gap.unwrap() <= bound * (1.0 + 1e-12) + 1e-14, "k={}", r.k);
        }
    }

    #[test]
    fn bad_start_is_rejected() {
        let p = ill2();
        let params = Profile::ConvexGammaOne.params();
        assert!(matches!(
            run_adaagm(&p, &params, &StopCriteria::budget(1), &dvector![1.0]),
            Err(SolverError::DimensionMismatch { .. })
        ));
        assert_eq!(
            run_adaagm(
                &p,
                &params,
                &StopCriteria::budget(1),
                &dvector![f64::NAN, 0.0]
            )
            .unwrap_err(),
            SolverError::NonFiniteStart
        );
    }
}
