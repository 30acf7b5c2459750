//! Preparing and executing the (problem x solver x seed) grid.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use adaagm::problems::gaussian_vector;
use adaagm::{
    certify_all, run_adaagm_with, run_gd_with, run_nesterov_with, AlgoParams, SmoothProblem,
    SolverError, SolverOptions, Trace, Vector,
};
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::build::build_problem;
use crate::config::{ExperimentConfig, SolverKind, SolverSpec};
use crate::trace_io::{num, trace_csv, x0_csv, x0_path};

/// SplitMix64 finalizer.
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one cell: the run seed, problem index and solver index folded
/// through SplitMix64 in turn.
pub fn cell_seed(seed: u64, problem: usize, solver: usize) -> u64 {
    let h = splitmix64(seed);
    let h = splitmix64(h ^ problem as u64);
    splitmix64(h ^ solver as u64)
}

/// A config whose problems have been built and whose solvers have been
/// checked against them.
pub struct Prepared {
    pub config: ExperimentConfig,
    pub problems: Vec<SmoothProblem>,
}

impl Prepared {
    pub fn new(config: ExperimentConfig) -> Result<Self, Vec<String>> {
        let missing = config.missing_files();
        if !missing.is_empty() {
            return Err(missing
                .iter()
                .map(|p| format!("missing file {}", p.display()))
                .collect());
        }
        let mut errors = Vec::new();
        let mut problems = Vec::new();
        for spec in &config.problems {
            match build_problem(spec) {
                Ok(p) => problems.push(p),
                Err(e) => errors.push(format!("problem '{}': {e}", spec.name)),
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        for s in &config.solvers {
            let mut seen = BTreeSet::new();
            for p in &problems {
                for e in solver_errors(s, p) {
                    if seen.insert(e.clone()) {
                        errors.push(format!("solver '{}': {e}", s.name));
                    }
                }
            }
        }
        if errors.is_empty() {
            Ok(Prepared { config, problems })
        } else {
            Err(errors)
        }
    }

    /// One line per solver with the resolved profile and floor constant.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for s in &self.config.solvers {
            if s.kind != SolverKind::AdaAgm {
                let step = s.step.map_or_else(|| "1/L".to_string(), |v| v.to_string());
                lines.push(format!("solver {}: {} step={step}", s.name, s.kind.name()));
                continue;
            }
            let mut seen = BTreeSet::new();
            for p in &self.problems {
                let profile = s.profile_for(p);
                let q = s.params_for(p).floor_q().ok();
                let line = format!(
                    "solver {}: profile {profile} q={}",
                    s.name,
                    q.map_or_else(|| "-".to_string(), short)
                );
                if seen.insert(line.clone()) {
                    lines.push(line);
                }
            }
        }
        lines
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for p in 0..self.problems.len() {
            for s in 0..self.config.solvers.len() {
                for &seed in &self.config.seeds {
                    cells.push(Cell {
                        problem: p,
                        solver: s,
                        seed,
                    });
                }
            }
        }
        cells
    }
}

fn solver_errors(s: &SolverSpec, p: &SmoothProblem) -> Vec<String> {
    match s.kind {
        SolverKind::AdaAgm => s
            .params_for(p)
            .validate(p.l_known())
            .failures()
            .map(|c| format!("{} failed ({})", c.clause, c.detail))
            .collect(),
        _ => match s.step.or_else(|| p.l_known().map(|l| 1.0 / l)) {
            Some(h) if h > 0.0 && h.is_finite() => Vec::new(),
            Some(h) => vec![format!("step must be positive and finite, got {h}")],
            None => vec![format!(
                "no 'step' given and L unknown for problem '{}'",
                p.name()
            )],
        },
    }
}

/// Shortest of the 12-significant-digit forms, so `0.19999999999999998`
/// prints as `0.2`.
pub fn short(v: f64) -> String {
    let s = format!("{v:.11e}");
    let back: f64 = s.parse().unwrap_or(v);
    format!("{back}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub problem: usize,
    pub solver: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    Diverged { k: usize },
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub problem: String,
    pub solver: String,
    pub seed: u64,
    pub status: CellStatus,
    pub iterations: usize,
    pub final_gap: Option<f64>,
    pub final_grad_norm: Option<f64>,
    pub certificates_passed: usize,
    pub certificates_checked: usize,
    pub q: Option<f64>,
}

pub const SUMMARY_HEADER: &str =
    "problem,solver,seed,status,iterations,final_gap,final_grad_norm,certificates_passed,certificates_checked,q";

impl CellOutcome {
    fn status_text(&self) -> String {
        match &self.status {
            CellStatus::Ok => "ok".to_string(),
            CellStatus::Diverged { k } => format!("diverged at k={k}"),
            CellStatus::Failed(e) => format!("failed: {e}"),
        }
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        let status = self.status_text().replace(',', ";");
        format!(
            "{},{},{},{status},{},{},{},{},{},{}",
            self.problem,
            self.solver,
            self.seed,
            self.iterations,
            opt(self.final_gap),
            opt(self.final_grad_norm),
            self.certificates_passed,
            self.certificates_checked,
            self.q.map(short).unwrap_or_default()
        )
    }

    /// Human-readable line for the terminal.
    pub fn display_line(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
        let mut line = format!(
            "{} {} seed={} {} iters={} gap={} grad={} certs={}/{}",
            self.problem,
            self.solver,
            self.seed,
            self.status_text(),
            self.iterations,
            opt(self.final_gap),
            opt(self.final_grad_norm),
            self.certificates_passed,
            self.certificates_checked,
        );
        if let Some(q) = self.q {
            line.push_str(&format!(" q={}", short(q)));
        }
        line
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Worker threads; zero lets rayon decide.
    pub threads: usize,
    pub thin: usize,
}

pub fn cell_stem(problem: &str, solver: &str, seed: u64) -> String {
    format!("{problem}_{solver}_{seed}")
}

/// Create the output directory and prove it is writable.
pub fn check_output_dir(dir: &Path) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"")
        .map_err(|e| format!("output directory {} is not writable: {e}", dir.display()))?;
    let _ = fs::remove_file(probe);
    Ok(())
}

/// Run every cell and write its files, then the summary. Cells that fail
/// are reported in their outcome and do not stop the others.
pub fn run_all(prepared: &Prepared, opts: &RunOptions) -> Result<Vec<CellOutcome>, String> {
    check_output_dir(&opts.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| e.to_string())?;
    let cells = prepared.cells();
    let outcomes: Vec<CellOutcome> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| run_cell(prepared, *c, opts))
            .collect()
    });
    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    for o in &outcomes {
        summary.push_str(&o.csv_row());
        summary.push('\n');
    }
    let path = opts.out.join("summary.csv");
    fs::write(&path, summary).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(outcomes)
}

fn start_point(prepared: &Prepared, cell: Cell) -> Vector {
    if let Some(x0) = &prepared.config.problems[cell.problem].x0 {
        return x0.clone();
    }
    let mut rng =
        Xoshiro256PlusPlus::seed_from_u64(cell_seed(cell.seed, cell.problem, cell.solver));
    gaussian_vector(prepared.problems[cell.problem].dimension(), &mut rng)
        * prepared.config.x0_scale
}

pub fn run_cell(prepared: &Prepared, cell: Cell, opts: &RunOptions) -> CellOutcome {
    let problem = &prepared.problems[cell.problem];
    let spec = &prepared.config.solvers[cell.solver];
    let mut outcome = CellOutcome {
        problem: prepared.config.problems[cell.problem].name.clone(),
        solver: spec.name.clone(),
        seed: cell.seed,
        status: CellStatus::Ok,
        iterations: 0,
        final_gap: None,
        final_grad_norm: None,
        certificates_passed: 0,
        certificates_checked: 0,
        q: None,
    };
    let x0 = start_point(prepared, cell);
    let stop = spec.stop_for(problem, &x0);
    let options = SolverOptions {
        thin: opts.thin,
        ..SolverOptions::default()
    };
    let params = (spec.kind == SolverKind::AdaAgm).then(|| spec.params_for(problem));
    outcome.q = params.and_then(|p| p.floor_q().ok());
    let fixed_step = || {
        spec.step
            .or_else(|| problem.l_known().map(|l| 1.0 / l))
            .unwrap_or(f64::NAN)
    };
    let result = match spec.kind {
        SolverKind::AdaAgm => {
            run_adaagm_with(problem, params.as_ref().unwrap(), &stop, &x0, &options)
        }
        SolverKind::GradientDescent => run_gd_with(problem, fixed_step(), &stop, &x0, &options),
        SolverKind::Nesterov => run_nesterov_with(problem, fixed_step(), &stop, &x0, &options),
    };
    let trace = match result {
        Ok(t) => t,
        Err(SolverError::Divergence { k }) => {
            outcome.status = CellStatus::Diverged { k };
            outcome.iterations = k;
            return outcome;
        }
        Err(e) => {
            outcome.status = CellStatus::Failed(e.to_string());
            return outcome;
        }
    };
    let last = trace.last();
    outcome.iterations = trace.iterations;
    outcome.final_gap = last.gap;
    outcome.final_grad_norm = Some(last.grad_norm);
    if let Err(e) = write_cell_files(&opts.out, &mut outcome, &trace, problem, params.as_ref()) {
        outcome.status = CellStatus::Failed(e);
    }
    outcome
}

fn write_cell_files(
    dir: &Path,
    outcome: &mut CellOutcome,
    trace: &Trace,
    problem: &SmoothProblem,
    params: Option<&AlgoParams>,
) -> Result<(), String> {
    let stem = cell_stem(&outcome.problem, &outcome.solver, outcome.seed);
    let write = |path: PathBuf, text: String| {
        fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))
    };
    let trace_path = dir.join(format!("{stem}.csv"));
    write(x0_path(&trace_path), x0_csv(&trace.x0))?;
    write(trace_path, trace_csv(&trace.records))?;
    let Some(params) = params else {
        return Ok(());
    };
    let mut report = String::new();
    let mut violations = String::from("kind,k,lhs,rhs\n");
    for cert in certify_all(trace, problem, params) {
        match cert {
            Ok(c) => {
                outcome.certificates_checked += 1;
                outcome.certificates_passed += usize::from(c.passed());
                report.push_str(&format!("{c}\n"));
                for row in c.violation_rows() {
                    violations.push_str(&row);
                    violations.push('\n');
                }
            }
            Err(e) => report.push_str(&format!("error {e}\n")),
        }
    }
    write(dir.join(format!("{stem}.cert.txt")), report)?;
    write(dir.join(format!("{stem}.violations.csv")), violations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // first outputs of the reference SplitMix64 generator seeded with 0
        assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(splitmix64(0x9e37_79b9_7f4a_7c15), 0x6e78_9e6a_a1b9_65f4);
    }

    #[test]
    fn cell_seeds_differ_along_every_axis() {
        let base = cell_seed(0, 0, 0);
        assert_ne!(base, cell_seed(1, 0, 0));
        assert_ne!(base, cell_seed(0, 1, 0));
        assert_ne!(base, cell_seed(0, 0, 1));
        assert_ne!(cell_seed(0, 1, 0), cell_seed(0, 0, 1));
    }

    #[test]
    fn short_trims_rounding_noise() {
        assert_eq!(short(0.199_999_999_999_999_98), "0.2");
        assert_eq!(short(1.0 / 12.0), "0.0833333333333");
    }
}
