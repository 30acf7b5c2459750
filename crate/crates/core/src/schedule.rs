//! Parameter recursions driving AdaAGM: the inertial sequence `t_k`, the
//! local smoothness estimate `L_k` and the adaptive step size `s_k`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::objective::Vector;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("t0 must exceed 1 for the step floor to exist (got {0})")]
    DegenerateT0(f64),
    #[error("negative curvature estimate: denominator {denom:.3e} below tolerance {tol:.3e}; objective is not convex or inputs are inconsistent")]
    NegativeDenominator { denom: f64, tol: f64 },
    #[error("unknown parameter profile '{0}'")]
    UnknownProfile(String),
}

/// Gradient differences below `ZERO_GRAD_DIFF * (1 + |g_next|)` count as equal.
pub const ZERO_GRAD_DIFF: f64 = 1e-14;
/// Positive denominators below this are treated as degenerate.
pub const TINY_DENOMINATOR: f64 = 1e-300;
/// Relative band of negative denominators attributed to rounding.
pub const NEGATIVE_DENOMINATOR_TOL: f64 = 1e-12;

/// Tolerance used when checking the `B_k > 1` condition in floating point.
const CONDITION_SLACK: f64 = 1e-12;

/// Algorithm parameters `(m, t0, gamma, beta, omega, delta, s0)`.
///
/// `s0 = None` asks the solver to pick the initial step by probing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoParams {
    pub m: f64,
    pub t0: f64,
    pub gamma: f64,
    pub beta: f64,
    pub omega: f64,
    pub delta: f64,
    pub s0: Option<f64>,
}

impl Default for AlgoParams {
    fn default() -> Self {
        Profile::ConvexGammaOne.params()
    }
}

impl AlgoParams {
    /// Left-hand side of the growth condition `2/((1+beta) gamma) (1 - 1/t0) >= 1`.
    pub fn growth_condition(&self) -> f64 {
        2.0 / ((1.0 + self.beta) * self.gamma) * (1.0 - 1.0 / self.t0)
    }

    pub fn floor_q(&self) -> Result<f64, ScheduleError> {
        floor_q(self)
    }

    pub fn validate(&self, l_known: Option<f64>) -> ParamReport {
        validate_params(self, l_known)
    }

    pub fn with_s0(mut self, s0: f64) -> Self {
        self.s0 = Some(s0);
        self
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    /// True for the `omega = delta = 1/2` setting in which the linear rate holds.
    pub fn is_strongly_convex_setting(&self) -> bool {
        self.omega == 0.5 && self.delta == 0.5
    }
}

/// Named parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    /// `gamma = 1/2, beta = 1, t0 = 2, omega = delta = 0`; `q = 1/4`.
    ConvexGammaHalf,
    /// `gamma = 1, beta = 1/3, t0 = 3, omega = delta = 0`; `q = 1/5`.
    ConvexGammaOne,
    /// `gamma = 1/2, beta = 1, t0 = 2, omega = delta = 1/2`; `q = 1/12`.
    StronglyConvexGammaHalf,
    /// `gamma = 1, beta = 1/3, t0 = 3, omega = delta = 1/2`; `q = 1/16`.
    StronglyConvexGammaOne,
}

/// Default `m`; strictly below one so the step may grow.
pub const DEFAULT_M: f64 = 0.99;

impl Profile {
    pub const ALL: [Profile; 4] = [
        Profile::ConvexGammaHalf,
        Profile::ConvexGammaOne,
        Profile::StronglyConvexGammaHalf,
        Profile::StronglyConvexGammaOne,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Profile::ConvexGammaHalf => "cor-4.3",
            Profile::ConvexGammaOne => "cor-4.4",
            Profile::StronglyConvexGammaHalf => "sc-1",
            Profile::StronglyConvexGammaOne => "sc-2",
        }
    }

    pub fn params(self) -> AlgoParams {
        let (gamma, beta, t0, od) = match self {
            Profile::ConvexGammaHalf => (0.5, 1.0, 2.0, 0.0),
            Profile::ConvexGammaOne => (1.0, 1.0 / 3.0, 3.0, 0.0),
            Profile::StronglyConvexGammaHalf => (0.5, 1.0, 2.0, 0.5),
            Profile::StronglyConvexGammaOne => (1.0, 1.0 / 3.0, 3.0, 0.5),
        };
        AlgoParams {
            m: DEFAULT_M,
            t0,
            gamma,
            beta,
            omega: od,
            delta: od,
            s0: None,
        }
    }

    /// Default profile for convex (`strongly_convex = false`) or strongly convex runs.
    pub fn default_for(strongly_convex: bool) -> Profile {
        if strongly_convex {
            Profile::StronglyConvexGammaOne
        } else {
            Profile::ConvexGammaOne
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| ScheduleError::UnknownProfile(s.to_string()))
    }
}

/// `t_{k+1} = (m + sqrt(m^2 + 4 t_k^2)) / 2`, the positive root of
/// `t^2 - m t - t_k^2 = 0`.
pub fn next_t(t_curr: f64, m: f64) -> f64 {
    (m + (m * m + 4.0 * t_curr * t_curr).sqrt()) / 2.0
}

/// Outcome of the local smoothness ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothness {
    /// Gradients coincide; the estimate is zero.
    Zero,
    Estimate(f64),
    /// Gradients differ but the denominator is at rounding level, so the
    /// ratio carries no information. The caller substitutes a safe value.
    Degenerate,
}

impl Smoothness {
    pub fn value(self) -> Option<f64> {
        match self {
            Smoothness::Zero => Some(0.0),
            Smoothness::Estimate(l) => Some(l),
            Smoothness::Degenerate => None,
        }
    }

    /// Resolve with `fallback` for the degenerate case.
    pub fn resolve(self, fallback: f64) -> f64 {
        self.value().unwrap_or(fallback)
    }
}

/// `1/2 |g_next - g_prev|^2 / (<g_next, x_next - x_prev> - (f_next - f_prev))`
/// with the convention `0/0 = 0`.
pub fn local_smoothness(
    g_next: &Vector,
    g_prev: &Vector,
    f_next: f64,
    f_prev: f64,
    x_next: &Vector,
    x_prev: &Vector,
) -> Result<Smoothness, ScheduleError> {
    let denom = g_next.dot(&(x_next - x_prev)) - (f_next - f_prev);
    let scale = f_next.abs() + f_prev.abs() + 1.0;
    smoothness_ratio(&(g_next - g_prev), g_next.norm(), denom, scale)
}

/// Same ratio from a precomputed gradient difference `g_next - g_prev` and
/// denominator (the Bregman divergence
/// `f(x_prev) - f(x_next) - <g_next, x_prev - x_next>`). `scale` sets the
/// rounding band for negative denominators.
pub fn smoothness_ratio(
    grad_diff: &Vector,
    g_next_norm: f64,
    denom: f64,
    scale: f64,
) -> Result<Smoothness, ScheduleError> {
    let diff_sq = grad_diff.norm_squared();
    if diff_sq.sqrt() <= ZERO_GRAD_DIFF * (1.0 + g_next_norm) {
        return Ok(Smoothness::Zero);
    }
    let tol = NEGATIVE_DENOMINATOR_TOL * scale;
    if denom < -tol {
        return Err(ScheduleError::NegativeDenominator { denom, tol });
    }
    if denom < TINY_DENOMINATOR {
        return Ok(Smoothness::Degenerate);
    }
    let l = 0.5 * diff_sq / denom;
    if l.is_finite() {
        Ok(Smoothness::Estimate(l))
    } else {
        Ok(Smoothness::Degenerate)
    }
}

/// `q = (1 - omega) / ((1 + beta) gamma t0 / (t0 - 1) + 1 / (beta gamma (1 - delta)))`,
/// so that `s_k >= q / L` along every run.
pub fn floor_q(params: &AlgoParams) -> Result<f64, ScheduleError> {
    let AlgoParams {
        t0,
        gamma,
        beta,
        omega,
        delta,
        ..
    } = *params;
    if t0 <= 1.0 {
        return Err(ScheduleError::DegenerateT0(t0));
    }
    Ok((1.0 - omega)
        / ((1.0 + beta) * gamma * t0 / (t0 - 1.0) + 1.0 / (beta * gamma * (1.0 - delta))))
}

/// Step-size recursion state at index `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleState {
    /// `t_k`
    pub t_curr: f64,
    /// `t_{k+1}`
    pub t_next: f64,
    /// `s_k`
    pub s_curr: f64,
    /// `L_k`, the estimate that produced `s_k` (zero at `k = 0`).
    pub l_curr: f64,
    /// `L_{k+1}`, filled in once the next iterate is known.
    pub l_next: f64,
    /// Largest estimate seen so far.
    pub l_max: f64,
    pub coeff_a: f64,
    pub coeff_b: f64,
    pub coeff_c: f64,
}

/// `(A_k, B_k, C_k)` as functions of `t_{k+1}`.
pub fn step_coefficients(t_next: f64, params: &AlgoParams) -> (f64, f64, f64) {
    let a = (t_next - params.m) / (t_next - 1.0);
    let b = 2.0 / ((1.0 + params.beta) * params.gamma) * (1.0 - 1.0 / t_next);
    let c = (1.0 - params.omega)
        / (2.0 / b + 1.0 / (params.beta * (1.0 - params.delta) * params.gamma * a));
    (a, b, c)
}

/// The alternative form `t_k^2 / (t_{k+1} (t_{k+1} - 1))` of `A_k`.
pub fn coeff_a_alt(t_curr: f64, t_next: f64) -> f64 {
    t_curr * t_curr / (t_next * (t_next - 1.0))
}

impl ScheduleState {
    /// State at `k = 0` with step `s0`.
    pub fn initial(params: &AlgoParams, s0: f64) -> Self {
        let t_curr = params.t0;
        let t_next = next_t(t_curr, params.m);
        let (coeff_a, coeff_b, coeff_c) = step_coefficients(t_next, params);
        ScheduleState {
            t_curr,
            t_next,
            s_curr: s0,
            l_curr: 0.0,
            l_next: 0.0,
            l_max: 0.0,
            coeff_a,
            coeff_b,
            coeff_c,
        }
    }

    /// `min{A s, B s, C / L}` with the last term inactive when `L = 0`.
    pub fn next_step(&self) -> f64 {
        let grow = self.coeff_a.min(self.coeff_b) * self.s_curr;
        if self.l_next > 0.0 {
            grow.min(self.coeff_c / self.l_next)
        } else {
            grow
        }
    }
}

/// Advance from index `k` to `k + 1`: compute `s_{k+1}`, shift the inertial
/// sequence and refresh the coefficients.
pub fn advance_step(state: &ScheduleState, params: &AlgoParams) -> ScheduleState {
    let s_next = state.next_step();
    let t_curr = state.t_next;
    let t_next = next_t(t_curr, params.m);
    let (coeff_a, coeff_b, coeff_c) = step_coefficients(t_next, params);
    ScheduleState {
        t_curr,
        t_next,
        s_curr: s_next,
        l_curr: state.l_next,
        l_next: 0.0,
        l_max: state.l_max.max(state.l_next),
        coeff_a,
        coeff_b,
        coeff_c,
    }
}

/// Upper bound `s0 e^{c} k^{c}`, `c = 2(1 - m)/m`, on the step at index `k >= 1`.
pub fn step_cap(s0: f64, m: f64, k: usize) -> f64 {
    let c = 2.0 * (1.0 - m) / m;
    s0 * c.exp() * (k.max(1) as f64).powf(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// Usable, but the step cannot grow (`m = 1`).
    ValidWithWarning,
    Invalid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamCheck {
    pub clause: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamReport {
    pub checks: Vec<ParamCheck>,
    pub warnings: Vec<String>,
    /// Floor constant, when `t0 > 1`.
    pub q: Option<f64>,
    /// Required lower bound `q / L` on `s0`, when `L` is supplied.
    pub s0_floor: Option<f64>,
}

impl ParamReport {
    pub fn validity(&self) -> Validity {
        if self.checks.iter().any(|c| !c.passed) {
            Validity::Invalid
        } else if !self.warnings.is_empty() {
            Validity::ValidWithWarning
        } else {
            Validity::Valid
        }
    }

    pub fn is_usable(&self) -> bool {
        self.validity() != Validity::Invalid
    }

    pub fn failures(&self) -> impl Iterator<Item = &ParamCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ParamReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {}: {}",
                if c.passed { "ok  " } else { "FAIL" },
                c.clause,
                c.detail
            )?;
        }
        for w in &self.warnings {
            writeln!(f, "warn {w}")?;
        }
        if let Some(q) = self.q {
            write!(f, "q = {q}")?;
            if let Some(s) = self.s0_floor {
                write!(f, ", s0 >= {s}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Check every parameter clause plus the growth condition on `(beta, gamma, t0)`.
pub fn validate_params(params: &AlgoParams, l_known: Option<f64>) -> ParamReport {
    let p = params;
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    let mut check = |clause: &'static str, passed: bool, detail: String| {
        checks.push(ParamCheck {
            clause,
            passed,
            detail,
        })
    };

    check(
        "m in (0,1]",
        p.m > 0.0 && p.m <= 1.0,
        format!("m = {}", p.m),
    );
    if p.m == 1.0 {
        warnings.push("m = 1: A_k = 1, the step size cannot increase".to_string());
    }
    check("t0 >= 1", p.t0 >= 1.0, format!("t0 = {}", p.t0));
    check(
        "gamma in (0,2)",
        p.gamma > 0.0 && p.gamma < 2.0,
        format!("gamma = {}", p.gamma),
    );
    check("beta > 0", p.beta > 0.0, format!("beta = {}", p.beta));
    check(
        "omega in [0,1)",
        (0.0..1.0).contains(&p.omega),
        format!("omega = {}", p.omega),
    );
    check(
        "delta in [0,1)",
        (0.0..1.0).contains(&p.delta),
        format!("delta = {}", p.delta),
    );
    if let Some(s0) = p.s0 {
        check("s0 > 0", s0 > 0.0 && s0.is_finite(), format!("s0 = {s0}"));
    }
    let lhs = p.growth_condition();
    check(
        "growth condition 2/((1+beta)gamma)(1-1/t0) >= 1",
        lhs >= 1.0 - CONDITION_SLACK,
        format!("lhs = {lhs:.6}"),
    );
    if !p.m.is_finite()
        || !p.t0.is_finite()
        || !p.gamma.is_finite()
        || !p.beta.is_finite()
        || !p.omega.is_finite()
        || !p.delta.is_finite()
    {
        check("finite parameters", false, "non-finite entry".to_string());
    }

    let q = floor_q(p).ok().filter(|q| *q > 0.0 && q.is_finite());
    let s0_floor = q.zip(l_known).map(|(q, l)| q / l);
    if let (Some(s0), Some(floor)) = (p.s0, s0_floor) {
        if s0 < floor {
            warnings.push(format!(
                "s0 = {s0} is below q/L = {floor}; the floor becomes min(s0, q/L)"
            ));
        }
    }
    ParamReport {
        checks,
        warnings,
        q,
        s0_floor,
    }
}
