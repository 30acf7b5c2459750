//! Line-search-free adaptive accelerated gradient method (AdaAGM) for smooth
//! convex minimization, with fixed-step baselines and a diagnostics layer
//! that checks the method's proved bounds along recorded traces.
//!
//! ```
//! use adaagm::{Profile, SmoothProblem, StopCriteria, run_adaagm};
//! use nalgebra::{dvector, DMatrix};
//!
//! let a = DMatrix::from_diagonal(&dvector![1.0, 100.0]);
//! let problem = SmoothProblem::quadratic(a, dvector![1.0, 100.0]).unwrap();
//! let params = Profile::ConvexGammaOne.params();
//! let x0 = dvector![0.0, 0.0];
//! let trace = run_adaagm(&problem, &params, &StopCriteria::default_for(&problem, &x0), &x0).unwrap();
//! assert!(trace.last().gap.unwrap() < 1e-12);
//! ```

pub mod diagnostics;
pub mod objective;
pub mod problems;
pub mod schedule;
pub mod solver;

pub use diagnostics::{
    certify, certify_all, certify_records, certify_with_tolerance, energy, initial_d, phi, rho,
    CertificateKind, CertifyError, EnergyInputs, RateCertificate,
};
pub use objective::{
    check_grad_fd, Matrix, MinimizerSource, Objective, ProblemError, SmoothProblem, Vector,
};
pub use schedule::{
    advance_step, floor_q, local_smoothness, next_t, validate_params, AlgoParams, ParamReport,
    Profile, ScheduleState, Validity,
};
pub use solver::{
    adaagm_step, run_adaagm, run_adaagm_with, run_gd, run_gd_with, run_nesterov, run_nesterov_with,
    Algorithm, SolverError, SolverOptions, SolverState, StepPolicy, StopCriteria, StopReason,
    Trace, TraceRecord,
};
