//! Lyapunov energy, closed-form rate constants, and certificates that check
//! the proved inequalities row by row along a solver trace.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::objective::{MinimizerSource, SmoothProblem, Vector};
use crate::schedule::{floor_q, step_cap, AlgoParams, ScheduleError};
use crate::solver::{Trace, TraceRecord};

/// Relative slack on every certified inequality.
pub const CERT_TOL: f64 = 1e-9;
/// Slack when the minimizer comes from a numerical reference solve.
pub const CERT_TOL_REFERENCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum CertifyError {
    #[error("problem is missing {0}")]
    Missing(&'static str),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("trace is empty")]
    EmptyTrace,
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("unknown certificate kind '{0}'")]
    UnknownKind(String),
}

/// Inputs for `phi_k` and `E_k`.
#[derive(Debug, Clone)]
pub struct EnergyInputs<'a> {
    /// `x_{k+1}`
    pub x_next: &'a Vector,
    /// `y_{k+1}`
    pub y_next: &'a Vector,
    pub x: &'a Vector,
    pub y: &'a Vector,
    pub grad_x: &'a Vector,
    pub f_x: f64,
    pub t: f64,
    pub t_next: f64,
    pub s: f64,
    pub x_star: &'a Vector,
    pub f_star: f64,
    pub params: &'a AlgoParams,
}

/// `phi_k = t_{k+1}(x_{k+1} - y_{k+1}) + (y_{k+1} - x*)`.
pub fn phi(inp: &EnergyInputs) -> Vector {
    (inp.x_next - inp.y_next) * inp.t_next + (inp.y_next - inp.x_star)
}

/// `phi_k = (t_k - 1)(x_k - y_k) + gamma t_k (y_{k+1} - x_k) + (x_k - x*)`.
pub fn phi_expanded(inp: &EnergyInputs) -> Vector {
    (inp.x - inp.y) * (inp.t - 1.0)
        + (inp.y_next - inp.x) * (inp.params.gamma * inp.t)
        + (inp.x - inp.x_star)
}

/// `E_k = 1/2 |phi_k|^2 + beta/2 gamma^2 t_k^2 s_k^2 |grad f(x_k)|^2 + gamma t_k^2 s_k (f(x_k) - f*)`.
pub fn energy(inp: &EnergyInputs) -> f64 {
    let g = inp.params.gamma;
    let ts = inp.t * inp.s;
    0.5 * phi(inp).norm_squared()
        + 0.5 * inp.params.beta * (g * ts).powi(2) * inp.grad_x.norm_squared()
        + g * inp.t * ts * (inp.f_x - inp.f_star)
}

/// `E_0` for a run started at `x0 = y0` with step `s0`.
pub fn initial_energy(
    problem: &SmoothProblem,
    params: &AlgoParams,
    x0: &Vector,
    s0: f64,
) -> Result<f64, CertifyError> {
    let x_star = problem.x_star().ok_or(CertifyError::Missing("x_star"))?;
    let f_star = problem.f_star().ok_or(CertifyError::Missing("f_star"))?;
    let (f0, g0) = problem.value_and_gradient(x0);
    let gap0 = problem.gap(x0, f0).ok_or(CertifyError::Missing("f_star"))?;
    let y1 = x0 - &g0 * s0;
    let t0 = params.t0;
    let inp = EnergyInputs {
        x_next: x0,
        y_next: &y1,
        x: x0,
        y: x0,
        grad_x: &g0,
        f_x: f0,
        t: t0,
        t_next: t0,
        s: s0,
        x_star,
        f_star,
        params,
    };
    let ts = t0 * s0;
    let gm = params.gamma;
    Ok(0.5 * phi_expanded(&inp).norm_squared()
        + 0.5 * params.beta * (gm * ts).powi(2) * g0.norm_squared()
        + gm * t0 * ts * gap0)
}

/// The rate constant `D` and its alternative bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstant {
    /// Three-term constant built from `x0`.
    pub theorem: f64,
    /// Smaller of the two single-quantity bounds, when valid
    /// (requires `(1+beta) gamma s0 t0 L >= 1`).
    pub remark: Option<f64>,
    /// Floor constant the value was divided by: `min(q, s0 L)`.
    pub q_eff: f64,
}

impl RateConstant {
    /// The constant the certificates use.
    pub fn value(&self) -> f64 {
        self.remark.map_or(self.theorem, |r| r.min(self.theorem))
    }
}

/// `D = (1/q) [ |x0 - x*|^2 / (2 gamma) + s0 t0 ((1+beta) gamma s0 t0 L - 1)/(2L) |grad f(x0)|^2
///            + s0 t0 (t0 - 1)(f(x0) - f*) ]`.
///
/// When `s0 < q/L` the floor is `s0` rather than `q/L`, and `q` is replaced
/// by `s0 L` accordingly.
pub fn initial_d(
    x0: &Vector,
    problem: &SmoothProblem,
    params: &AlgoParams,
    s0: f64,
) -> Result<RateConstant, CertifyError> {
    let x_star = problem.x_star().ok_or(CertifyError::Missing("x_star"))?;
    let f_star = problem.f_star().ok_or(CertifyError::Missing("f_star"))?;
    let l = problem.l_known().ok_or(CertifyError::Missing("L_known"))?;
    let q = floor_q(params)?;
    let q_eff = q.min(s0 * l);

    let AlgoParams {
        gamma, beta, t0, ..
    } = *params;
    let (f0, g0) = problem.value_and_gradient(x0);
    let dist_sq = (x0 - x_star).norm_squared();
    let gap0 = problem.gap(x0, f0).unwrap_or(f0 - f_star);
    let c = (1.0 + beta) * gamma * s0 * t0 * l - 1.0;

    let theorem = (dist_sq / (2.0 * gamma)
        + s0 * t0 * c / (2.0 * l) * g0.norm_squared()
        + s0 * t0 * (t0 - 1.0) * gap0)
        / q_eff;
    let remark = (c >= 0.0).then(|| {
        let via_gap = dist_sq / (2.0 * gamma)
            + s0 * t0 * (t0 * ((1.0 + beta) * gamma * s0 * l + 1.0) - 2.0) * gap0;
        let via_dist =
            (1.0 + gamma * s0 * t0 * l * c) * dist_sq / (2.0 * gamma) + s0 * t0 * (t0 - 1.0) * gap0;
        via_gap.min(via_dist) / q_eff
    });
    Ok(RateConstant {
        theorem,
        remark,
        q_eff,
    })
}

/// Linear-rate constant
/// `rho = min{ mu gamma q / (4L), mu q / (2L/(beta gamma) + (8/(beta gamma^2) + 2) mu q) }`.
pub fn rho(params: &AlgoParams, mu: f64, l: f64) -> Result<f64, CertifyError> {
    if !(mu > 0.0) {
        return Err(CertifyError::Precondition(format!(
            "mu must be positive, got {mu}"
        )));
    }
    if mu > l {
        return Err(CertifyError::Precondition(format!(
            "mu = {mu} exceeds L = {l}"
        )));
    }
    let q = floor_q(params)?;
    rho_with_q(params, mu, l, q)
}

fn rho_with_q(params: &AlgoParams, mu: f64, l: f64, q: f64) -> Result<f64, CertifyError> {
    let AlgoParams { gamma, beta, .. } = *params;
    let first = mu * gamma * q / (4.0 * l);
    let second =
        mu * q / (2.0 * l / (beta * gamma) + (8.0 / (beta * gamma * gamma) + 2.0) * mu * q);
    Ok(first.min(second))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CertificateKind {
    /// `f(x_k) - f* <= D L / t_k^2`
    Sublinear,
    /// `f(x_k) - f* <= D L / t_k^2 (1 - rho)^k`
    Linear,
    /// `s_k >= min(s0, q/L)`
    StepFloor,
    /// `s_k <= s0 e^c k^c`, `c = 2(1-m)/m`
    StepCap,
    /// `E_{k+1} <= E_k`, or `<= (1 - rho) E_k` in the strongly convex setting
    EnergyMonotone,
    /// `sum_{j<=k} beta delta gamma^2 t_j^2 s_j^2 |grad f(x_j)|^2 / 2 <= E_0`
    GradSummable,
}

impl CertificateKind {
    pub const ALL: [CertificateKind; 6] = [
        CertificateKind::Sublinear,
        CertificateKind::Linear,
        CertificateKind::StepFloor,
        CertificateKind::StepCap,
        CertificateKind::EnergyMonotone,
        CertificateKind::GradSummable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CertificateKind::Sublinear => "sublinear",
            CertificateKind::Linear => "linear",
            CertificateKind::StepFloor => "step_floor",
            CertificateKind::StepCap => "step_cap",
            CertificateKind::EnergyMonotone => "energy_monotone",
            CertificateKind::GradSummable => "grad_summable",
        }
    }

    /// Whether the kind can be checked for this problem/parameter pair.
    pub fn applicable(self, problem: &SmoothProblem, params: &AlgoParams) -> bool {
        let has_star = problem.x_star().is_some() && problem.f_star().is_some();
        let has_l = problem.l_known().is_some();
        match self {
            CertificateKind::Sublinear => has_star && has_l,
            CertificateKind::Linear => {
                has_star
                    && has_l
                    && problem.mu_known().is_some_and(|m| m > 0.0)
                    && params.is_strongly_convex_setting()
            }
            CertificateKind::StepFloor => has_l,
            CertificateKind::StepCap => true,
            CertificateKind::EnergyMonotone => has_star,
            CertificateKind::GradSummable => has_star && params.delta > 0.0,
        }
    }
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CertificateKind {
    type Err = CertifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CertificateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CertifyError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCertificate {
    pub kind: CertificateKind,
    pub constant_d: Option<f64>,
    pub constant_q: Option<f64>,
    pub constant_rho: Option<f64>,
    pub violations: Vec<Violation>,
    /// Largest `(lhs - rhs) / scale` over all checked rows; negative is margin.
    pub max_violation_rel: f64,
    pub tolerance: f64,
    /// Number of inequalities evaluated.
    pub checked: usize,
}

impl RateCertificate {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Violations as CSV rows `kind,k,lhs,rhs` (no header).
    pub fn violation_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.violations
            .iter()
            .map(move |v| format!("{},{},{:.17e},{:.17e}", self.kind, v.k, v.lhs, v.rhs))
    }
}

impl fmt::Display for RateCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"));
        write!(
            f,
            "{} D={} q={} rho={} checked={} {} worst={:.3e}",
            self.kind,
            opt(self.constant_d),
            opt(self.constant_q),
            opt(self.constant_rho),
            self.checked,
            if self.passed() { "PASS" } else { "FAIL" },
            self.max_violation_rel,
        )?;
        if !self.passed() {
            write!(f, " violations={}", self.violations.len())?;
        }
        Ok(())
    }
}

/// Default slack for a problem: looser when its minimizer is a reference solve.
pub fn default_tolerance(problem: &SmoothProblem) -> f64 {
    match problem.minimizer_source() {
        Some(MinimizerSource::Reference) => CERT_TOL_REFERENCE,
        _ => CERT_TOL,
    }
}

/// Certify `kind` along `trace` with the default tolerance.
pub fn certify(
    trace: &Trace,
    problem: &SmoothProblem,
    params: &AlgoParams,
    kind: CertificateKind,
) -> Result<RateCertificate, CertifyError> {
    certify_with_tolerance(trace, problem, params, kind, default_tolerance(problem))
}

pub fn certify_with_tolerance(
    trace: &Trace,
    problem: &SmoothProblem,
    params: &AlgoParams,
    kind: CertificateKind,
    tol: f64,
) -> Result<RateCertificate, CertifyError> {
    certify_records(&trace.records, Some(&trace.x0), problem, params, kind, tol)
}

/// Certify from bare records. `x0` is needed only for the rate kinds.
pub fn certify_records(
    records: &[TraceRecord],
    x0: Option<&Vector>,
    problem: &SmoothProblem,
    params: &AlgoParams,
    kind: CertificateKind,
    tol: f64,
) -> Result<RateCertificate, CertifyError> {
    let first = records.first().ok_or(CertifyError::EmptyTrace)?;
    let s0 = first.s;
    let mut cert = Checker::new(kind, tol);

    match kind {
        CertificateKind::Sublinear | CertificateKind::Linear => {
            let x0 = x0.ok_or(CertifyError::Missing("starting point x0"))?;
            let l = problem.l_known().ok_or(CertifyError::Missing("L_known"))?;
            let d = initial_d(x0, problem, params, s0)?;
            let decay = if kind == CertificateKind::Linear {
                let mu = problem
                    .mu_known()
                    .ok_or(CertifyError::Missing("mu_known"))?;
                if !params.is_strongly_convex_setting() {
                    return Err(CertifyError::Precondition(
                        "linear rate requires omega = delta = 1/2".into(),
                    ));
                }
                let r = rho(params, mu, l)?;
                cert.rho = Some(r);
                r
            } else {
                0.0
            };
            cert.d = Some(d.value());
            cert.q = Some(d.q_eff);
            let dl = d.value() * l;
            let log_contract = (-decay).ln_1p();
            for r in records {
                let gap = r.gap.ok_or(CertifyError::Missing("f_star"))?;
                let rhs = dl / (r.t * r.t) * (r.k as f64 * log_contract).exp();
                cert.check_abs(r.k, gap, rhs);
            }
        }
        CertificateKind::StepFloor => {
            let l = problem.l_known().ok_or(CertifyError::Missing("L_known"))?;
            let q = floor_q(params)?;
            cert.q = Some(q);
            let floor = s0.min(q / l);
            for r in records {
                // s_k >= floor, i.e. floor - s_k <= 0
                cert.check_rel(r.k, floor, r.s);
            }
        }
        CertificateKind::StepCap => {
            for r in records.iter().filter(|r| r.k >= 1) {
                cert.check_rel(r.k, r.s, step_cap(s0, params.m, r.k));
            }
        }
        CertificateKind::EnergyMonotone => {
            problem.x_star().ok_or(CertifyError::Missing("x_star"))?;
            let factor = match (problem.mu_known(), problem.l_known()) {
                (Some(mu), Some(l)) if mu > 0.0 && params.is_strongly_convex_setting() => {
                    let q_eff = floor_q(params)?.min(s0 * l);
                    let r = rho_with_q(params, mu, l, q_eff)?;
                    cert.rho = Some(r);
                    1.0 - r
                }
                _ => 1.0,
            };
            for w in records.windows(2) {
                let e_prev = w[0].energy.ok_or(CertifyError::Missing("energy column"))?;
                let e_next = w[1].energy.ok_or(CertifyError::Missing("energy column"))?;
                let steps = (w[1].k - w[0].k) as f64;
                cert.check_abs(w[1].k, e_next, e_prev * factor.powf(steps));
            }
        }
        CertificateKind::GradSummable => {
            if !(params.delta > 0.0) {
                return Err(CertifyError::Precondition(
                    "gradient summability bound requires delta > 0".into(),
                ));
            }
            let e0 = first.energy.ok_or(CertifyError::Missing("energy column"))?;
            let coeff = 0.5 * params.beta * params.delta * params.gamma * params.gamma;
            for r in records {
                cert.check_abs(r.k, coeff * r.weighted_grad_sum, e0);
            }
        }
    }
    Ok(cert.finish())
}

struct Checker {
    kind: CertificateKind,
    tol: f64,
    d: Option<f64>,
    q: Option<f64>,
    rho: Option<f64>,
    violations: Vec<Violation>,
    worst: f64,
    checked: usize,
}

impl Checker {
    fn new(kind: CertificateKind, tol: f64) -> Self {
        Checker {
            kind,
            tol,
            d: None,
            q: None,
            rho: None,
            violations: Vec::new(),
            worst: f64::NEG_INFINITY,
            checked: 0,
        }
    }

    /// `lhs <= rhs` with slack `tol (1 + |rhs|)`.
    fn check_abs(&mut self, k: usize, lhs: f64, rhs: f64) {
        self.check_scaled(k, lhs, rhs, 1.0 + rhs.abs());
    }

    /// `lhs <= rhs` with slack `tol |rhs|`; used for step sizes.
    fn check_rel(&mut self, k: usize, lhs: f64, rhs: f64) {
        self.check_scaled(k, lhs, rhs, rhs.abs().max(f64::MIN_POSITIVE));
    }

    fn check_scaled(&mut self, k: usize, lhs: f64, rhs: f64, scale: f64) {
        self.checked += 1;
        let rel = (lhs - rhs) / scale;
        if rel.is_nan() || rel > self.tol {
            self.violations.push(Violation { k, lhs, rhs });
        }
        if rel.is_nan() {
            self.worst = f64::NAN;
        } else if !self.worst.is_nan() {
            self.worst = self.worst.max(rel);
        }
    }

    fn finish(self) -> RateCertificate {
        RateCertificate {
            kind: self.kind,
            constant_d: self.d,
            constant_q: self.q,
            constant_rho: self.rho,
            violations: self.violations,
            max_violation_rel: if self.checked == 0 { 0.0 } else { self.worst },
            tolerance: self.tol,
            checked: self.checked,
        }
    }
}

/// Certify every kind applicable to the problem and parameters.
pub fn certify_all(
    trace: &Trace,
    problem: &SmoothProblem,
    params: &AlgoParams,
) -> Vec<Result<RateCertificate, CertifyError>> {
    CertificateKind::ALL
        .into_iter()
        .filter(|k| k.applicable(problem, params))
        .map(|k| certify(trace, problem, params, k))
        .collect()
}

/// Radius bounding every `|x_k|` and `|y_k|` of a convex run: with
/// `M = |x*| + sqrt(2 E_0)`, both sequences stay within
/// `max(|y_0|, (1 + 2/gamma) M)`.
pub fn iterate_radius(e0: f64, x_star: &Vector, y0: &Vector, gamma: f64) -> f64 {
    let m = x_star.norm() + (2.0 * e0.max(0.0)).sqrt();
    y0.norm().max((1.0 + 2.0 / gamma) * m)
}

/// Finite-dimensional stand-in for weak convergence of the iterates:
/// `max_{k in last fraction} |x_k - x_K| / (1 + |x_K|)`.
pub fn tail_cauchy(iterates: &[(usize, Vector)], fraction: f64) -> Option<f64> {
    let (k_last, x_last) = iterates.last()?;
    let start = (*k_last as f64 * (1.0 - fraction)).floor() as usize;
    let scale = 1.0 + x_last.norm();
    iterates
        .iter()
        .filter(|(k, _)| *k >= start)
        .map(|(_, x)| (x - x_last).norm() / scale)
        .reduce(f64::max)
}

/// Fraction of `sum_k k^2 |grad f(x_k)|^2` contributed by the second half of
/// the run. Requires an unthinned trace.
pub fn tail_gradient_fraction(records: &[TraceRecord]) -> Option<f64> {
    let last = records.last()?.k;
    let half = last / 2;
    let mut total = 0.0;
    let mut tail = 0.0;
    for r in records {
        let term = (r.k as f64).powi(2) * r.grad_norm * r.grad_norm;
        total += term;
        if r.k > half {
            tail += term;
        }
    }
    (total > 0.0).then(|| tail / total)
}

/// Geometric-mean contraction `(E_K / E_0)^{1/K}` of the energy column.
pub fn energy_contraction(records: &[TraceRecord]) -> Option<f64> {
    let first = records.first()?;
    let e0 = first.energy?;
    let (k, ek) = records
        .iter()
        .rev()
        .find_map(|r| r.energy.filter(|e| *e > 0.0).map(|e| (r.k, e)))?;
    (k > first.k && e0 > 0.0).then(|| (ek / e0).powf(1.0 / (k - first.k) as f64))
}
