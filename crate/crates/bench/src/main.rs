use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adaagm::diagnostics::{certify_records, default_tolerance};
use adaagm::{CertificateKind, Profile, Vector};
use adaagm_bench::build::read_vector_csv;
use adaagm_bench::config::profile_names;
use adaagm_bench::trace_io::{parse_trace_csv, x0_path};
use adaagm_bench::{run_all, CellStatus, ExperimentConfig, Prepared, RunOptions};
use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

/// Exit code for configuration and input errors.
const EXIT_CONFIG: u8 = 1;
/// Exit code when a run diverged or a certificate failed.
const EXIT_RUNTIME: u8 = 2;

#[derive(Parser)]
#[command(
    name = "adaagm-bench",
    version,
    about = "Run and certify adaptive accelerated gradient experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (problem, solver, seed) cell of a config.
    Run {
        config: PathBuf,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep every n-th trace row; overrides `thinning` in the config.
        #[arg(long)]
        thin: Option<usize>,
    },
    /// Check a config without running anything.
    Validate { config: PathBuf },
    /// Check one certificate against a stored trace.
    Certify {
        trace: PathBuf,
        /// `<config.toml>#<problem name>`; the name may be omitted when the
        /// config has a single problem.
        #[arg(long)]
        problem: String,
        /// Parameter profile the trace was produced with.
        #[arg(long, conflicts_with = "solver", required_unless_present = "solver")]
        profile: Option<String>,
        /// Take parameters from this solver entry of the same config instead.
        #[arg(long)]
        solver: Option<String>,
        #[arg(long)]
        kind: String,
        /// Starting point; defaults to the `.x0.csv` file next to the trace.
        #[arg(long)]
        x0: Option<PathBuf>,
        /// Slack; defaults to 1e-9, or 1e-6 for reference-solved minimizers.
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the violations as CSV.
        #[arg(long)]
        violations: Option<PathBuf>,
    },
}

/// Error type that carries its exit code.
struct Failure(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_CONFIG, e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            threads,
            out,
            thin,
        } => run(&config, threads, out, thin),
        Command::Validate { config } => validate(&config),
        Command::Certify {
            trace,
            problem,
            profile,
            solver,
            kind,
            x0,
            tol,
            violations,
        } => certify(
            &trace,
            &problem,
            profile.as_deref(),
            solver.as_deref(),
            &kind,
            x0,
            tol,
            violations,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn prepare(path: &Path) -> Result<Prepared, Failure> {
    let config = ExperimentConfig::load(path)?;
    Prepared::new(config).map_err(|errs| anyhow!(errs.join("\n")).into())
}

fn validate(path: &Path) -> Result<(), Failure> {
    let prepared = prepare(path)?;
    println!("ok");
    for line in prepared.summary_lines() {
        println!("{line}");
    }
    Ok(())
}

fn run(
    path: &Path,
    threads: usize,
    out: Option<PathBuf>,
    thin: Option<usize>,
) -> Result<(), Failure> {
    let prepared = prepare(path)?;
    let thin = thin.unwrap_or(prepared.config.thinning);
    if thin == 0 {
        return Err(anyhow!("--thin must be positive").into());
    }
    let opts = RunOptions {
        out: out.unwrap_or_else(|| prepared.config.output_dir.clone()),
        threads,
        thin,
    };
    let outcomes = run_all(&prepared, &opts).map_err(|e| anyhow!(e))?;
    for o in &outcomes {
        println!("{}", o.display_line());
    }
    let bad = outcomes
        .iter()
        .filter(|o| o.status != CellStatus::Ok)
        .count();
    if bad > 0 {
        return Err(Failure(
            EXIT_RUNTIME,
            anyhow!("{bad} of {} cells did not finish", outcomes.len()),
        ));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn certify(
    trace: &Path,
    problem: &str,
    profile: Option<&str>,
    solver: Option<&str>,
    kind: &str,
    x0: Option<PathBuf>,
    tol: Option<f64>,
    violations: Option<PathBuf>,
) -> Result<(), Failure> {
    let kind: CertificateKind = kind.parse().with_context(|| {
        format!(
            "expected one of {}",
            CertificateKind::ALL.map(|k| k.name()).join(", ")
        )
    })?;
    let (config_path, name) = match problem.rsplit_once('#') {
        Some((path, name)) => (path, Some(name)),
        None => (problem, None),
    };
    let prepared = prepare(Path::new(config_path))?;
    let specs = &prepared.config.problems;
    let index = match name {
        Some(n) => specs
            .iter()
            .position(|p| p.name == n)
            .ok_or_else(|| anyhow!("no problem named '{n}' in {config_path}"))?,
        None if specs.len() == 1 => 0,
        None => {
            return Err(anyhow!(
                "{config_path} defines {} problems; name one with '#<name>'",
                specs.len()
            )
            .into())
        }
    };
    let problem = &prepared.problems[index];
    let params = match (profile, solver) {
        (Some(p), _) => p
            .parse::<Profile>()
            .with_context(|| format!("expected one of {}", profile_names()))?
            .params(),
        (None, Some(s)) => prepared
            .config
            .solvers
            .iter()
            .find(|spec| spec.name == s)
            .ok_or_else(|| anyhow!("no solver named '{s}' in {config_path}"))?
            .params_for(problem),
        (None, None) => return Err(anyhow!("give --profile or --solver").into()),
    };

    let text =
        std::fs::read_to_string(trace).with_context(|| format!("reading {}", trace.display()))?;
    let records = parse_trace_csv(&text).map_err(|e| anyhow!("{}: {e}", trace.display()))?;
    let x0_file = x0.unwrap_or_else(|| x0_path(trace));
    let start: Option<Vector> = if x0_file.is_file() {
        Some(read_vector_csv(&x0_file).map_err(|e| anyhow!(e))?)
    } else {
        None
    };
    let tol = tol.unwrap_or_else(|| default_tolerance(problem));
    let cert = certify_records(&records, start.as_ref(), problem, &params, kind, tol).map_err(
        |e| match e {
            adaagm::CertifyError::Missing("starting point x0") => {
                anyhow!("{e}; pass --x0 (looked for {})", x0_file.display())
            }
            e => e.into(),
        },
    )?;
    println!("{cert}");
    if let Some(path) = violations {
        let mut csv = String::from("kind,k,lhs,rhs\n");
        for row in cert.violation_rows() {
            csv.push_str(&row);
            csv.push('\n');
        }
        std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    if cert.passed() {
        Ok(())
    } else {
        Err(Failure(EXIT_RUNTIME, anyhow!("{kind} certificate failed")))
    }
}
