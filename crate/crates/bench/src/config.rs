//! Experiment configuration: a TOML file with `[[problem]]` and `[[solver]]`
//! tables plus a few top-level settings.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use adaagm::{AlgoParams, Matrix, Profile, SmoothProblem, StopCriteria, Vector};
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    Inline(Matrix),
    Diagonal(Vector),
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum VectorSource {
    Inline(Vector),
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    Quadratic {
        matrix: MatrixSource,
        offset: Option<VectorSource>,
    },
    RandomQuadratic {
        dim: usize,
        rank: usize,
        mu: f64,
        l: f64,
        seed: u64,
    },
    LogSumExp {
        rows: MatrixSource,
        shifts: Option<VectorSource>,
        temperature: f64,
    },
    RandomLogSumExp {
        n_rows: usize,
        dim: usize,
        temperature: f64,
        symmetric: bool,
        seed: u64,
    },
    Logistic {
        features: MatrixSource,
        labels: VectorSource,
        ridge: f64,
    },
    RandomLogistic {
        n_samples: usize,
        dim: usize,
        ridge: f64,
        flip: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub kind: ProblemKind,
    /// Fixed start; random per cell when absent.
    pub x0: Option<Vector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    AdaAgm,
    GradientDescent,
    Nesterov,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::AdaAgm => "adaagm",
            SolverKind::GradientDescent => "gd",
            SolverKind::Nesterov => "nesterov",
        }
    }
}

/// Per-field overrides on top of a profile.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamOverrides {
    pub m: Option<f64>,
    pub t0: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub omega: Option<f64>,
    pub delta: Option<f64>,
    pub s0: Option<f64>,
}

impl ParamOverrides {
    fn is_empty(&self) -> bool {
        *self == ParamOverrides::default()
    }

    fn apply(&self, mut p: AlgoParams) -> AlgoParams {
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.m, self.m);
        set(&mut p.t0, self.t0);
        set(&mut p.gamma, self.gamma);
        set(&mut p.beta, self.beta);
        set(&mut p.omega, self.omega);
        set(&mut p.delta, self.delta);
        if self.s0.is_some() {
            p.s0 = self.s0;
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub name: String,
    pub kind: SolverKind,
    /// `None` picks the convex or strongly convex default per problem.
    pub profile: Option<Profile>,
    pub overrides: ParamOverrides,
    /// Fixed step for the baselines; `1/L` when absent.
    pub step: Option<f64>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub gap_tol: Option<f64>,
}

impl SolverSpec {
    pub fn params_for(&self, problem: &SmoothProblem) -> AlgoParams {
        let strongly_convex = problem.mu_known().is_some_and(|mu| mu > 0.0);
        let profile = self
            .profile
            .unwrap_or(Profile::default_for(strongly_convex));
        self.overrides.apply(profile.params())
    }

    pub fn profile_for(&self, problem: &SmoothProblem) -> Profile {
        let strongly_convex = problem.mu_known().is_some_and(|mu| mu > 0.0);
        self.profile
            .unwrap_or(Profile::default_for(strongly_convex))
    }

    pub fn stop_for(&self, problem: &SmoothProblem, x0: &Vector) -> StopCriteria {
        let mut stop = StopCriteria::default_for(problem, x0);
        if let Some(n) = self.max_iters {
            stop.max_iters = n;
        }
        if let Some(g) = self.grad_tol {
            stop.grad_tol = g;
        }
        if let Some(g) = self.gap_tol {
            stop.gap_tol = g;
        }
        stop
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemSpec>,
    pub solvers: Vec<SolverSpec>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub thinning: usize,
    pub x0_scale: f64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parse `text`; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| {
            let (line, column) = e
                .span()
                .map(|s| line_column(text, s.start))
                .unwrap_or((1, 1));
            ConfigError::Parse {
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })?;
        let mut errors = Vec::new();
        let mut top = Fields::new(&table, "", base, &mut errors);
        let problem_tables = top.tables("problem");
        let solver_tables = top.tables("solver");
        let seeds = top
            .ints("seeds")
            .unwrap_or_else(|| vec![0])
            .into_iter()
            .map(|s| s as u64)
            .collect::<Vec<_>>();
        let output_dir = top.path("output_dir").unwrap_or_else(|| base.join("out"));
        let thinning = top.usize("thinning").unwrap_or(1);
        let x0_scale = top.f64("x0_scale").unwrap_or(1.0);
        top.finish();

        let problems: Vec<ProblemSpec> = problem_tables
            .iter()
            .enumerate()
            .filter_map(|(i, t)| parse_problem(t, i, base, &mut errors))
            .collect();
        let solvers: Vec<SolverSpec> = solver_tables
            .iter()
            .enumerate()
            .filter_map(|(i, t)| parse_solver(t, i, base, &mut errors))
            .collect();

        if problem_tables.is_empty() {
            errors.insert(0, "no problems defined".to_string());
        }
        if solver_tables.is_empty() {
            errors.push("no solvers defined".to_string());
        }
        if seeds.is_empty() {
            errors.push("seeds: list is empty".to_string());
        }
        if thinning == 0 {
            errors.push("thinning: must be a positive integer".to_string());
        }
        if !(x0_scale.is_finite() && x0_scale >= 0.0) {
            errors.push(format!(
                "x0_scale: must be finite and nonnegative, got {x0_scale}"
            ));
        }
        duplicates(problems.iter().map(|p| &p.name), "problem", &mut errors);
        duplicates(solvers.iter().map(|s| &s.name), "solver", &mut errors);
        let mut unique_seeds = BTreeSet::new();
        for s in &seeds {
            if !unique_seeds.insert(s) {
                errors.push(format!("seeds: {s} listed twice"));
            }
        }

        if errors.is_empty() {
            Ok(ExperimentConfig {
                problems,
                solvers,
                seeds,
                output_dir,
                thinning,
                x0_scale,
            })
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }

    /// Files referenced by problem specs that do not exist.
    pub fn missing_files(&self) -> Vec<PathBuf> {
        let mut paths = Vec::new();
        for p in &self.problems {
            let mut m = |s: &MatrixSource| {
                if let MatrixSource::Csv(path) = s {
                    paths.push(path.clone());
                }
            };
            match &p.kind {
                ProblemKind::Quadratic { matrix, .. } => m(matrix),
                ProblemKind::LogSumExp { rows, .. } => m(rows),
                ProblemKind::Logistic { features, .. } => m(features),
                _ => {}
            }
            let mut v = |s: &Option<&VectorSource>| {
                if let Some(VectorSource::Csv(path)) = s {
                    paths.push(path.clone());
                }
            };
            match &p.kind {
                ProblemKind::Quadratic { offset, .. } => v(&offset.as_ref()),
                ProblemKind::LogSumExp { shifts, .. } => v(&shifts.as_ref()),
                ProblemKind::Logistic { labels, .. } => v(&Some(labels)),
                _ => {}
            }
        }
        paths.retain(|p| !p.is_file());
        paths
    }
}

fn duplicates<'a>(names: impl Iterator<Item = &'a String>, what: &str, errors: &mut Vec<String>) {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            errors.push(format!("{what} name '{n}' is used twice"));
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Names end up in file names, so keep them to a portable alphabet.
fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '.' | '+'))
}

fn parse_problem(
    t: &Table,
    index: usize,
    base: &Path,
    errors: &mut Vec<String>,
) -> Option<ProblemSpec> {
    let label = format!("problem[{index}]");
    let mut f = Fields::new(t, &label, base, errors);
    let name = f.string("name").unwrap_or_else(|| format!("p{index}"));
    let kind_name = f.required_string("kind");
    let x0 = f.vector("x0");
    let seed = || index as u64;
    let kind = match kind_name.as_deref() {
        Some("quadratic") => {
            let matrix = f.matrix_source("matrix", "diag");
            let offset = f.vector_source("offset");
            matrix.map(|matrix| ProblemKind::Quadratic { matrix, offset })
        }
        Some("random_quadratic") => {
            let dim = f.required_usize("dim");
            let rank = f.usize("rank");
            let mu = f.f64("mu").unwrap_or(0.0);
            let l = f.f64("l").unwrap_or(1.0);
            let seed = f.int("seed").map_or_else(seed, |s| s as u64);
            dim.map(|dim| ProblemKind::RandomQuadratic {
                dim,
                rank: rank.unwrap_or(dim),
                mu,
                l,
                seed,
            })
        }
        Some("log_sum_exp") => {
            let rows = f.matrix_source("rows", "");
            let shifts = f.vector_source("shifts");
            let temperature = f.f64("temperature").unwrap_or(1.0);
            rows.map(|rows| ProblemKind::LogSumExp {
                rows,
                shifts,
                temperature,
            })
        }
        Some("random_log_sum_exp") => {
            let n_rows = f.required_usize("n_rows");
            let dim = f.required_usize("dim");
            let temperature = f.f64("temperature").unwrap_or(1.0);
            let symmetric = f.bool("symmetric").unwrap_or(false);
            let seed = f.int("seed").map_or_else(seed, |s| s as u64);
            n_rows
                .zip(dim)
                .map(|(n_rows, dim)| ProblemKind::RandomLogSumExp {
                    n_rows,
                    dim,
                    temperature,
                    symmetric,
                    seed,
                })
        }
        Some("logistic") => {
            let features = f.matrix_source("features", "");
            let labels = f.vector_source("labels");
            if labels.is_none() {
                f.error("missing 'labels' or 'labels_csv'".to_string());
            }
            let ridge = f.f64("ridge").unwrap_or(0.0);
            features
                .zip(labels)
                .map(|(features, labels)| ProblemKind::Logistic {
                    features,
                    labels,
                    ridge,
                })
        }
        Some("random_logistic") => {
            let n_samples = f.required_usize("n_samples");
            let dim = f.required_usize("dim");
            let ridge = f.f64("ridge").unwrap_or(0.0);
            let flip = f.f64("flip").unwrap_or(0.1);
            let seed = f.int("seed").map_or_else(seed, |s| s as u64);
            n_samples
                .zip(dim)
                .map(|(n_samples, dim)| ProblemKind::RandomLogistic {
                    n_samples,
                    dim,
                    ridge,
                    flip,
                    seed,
                })
        }
        Some(other) => {
            f.error(format!(
                "unknown kind '{other}' (expected quadratic, random_quadratic, log_sum_exp, \
                 random_log_sum_exp, logistic or random_logistic)"
            ));
            None
        }
        None => None,
    };
    if !valid_name(&name) {
        f.error(format!(
            "name '{name}' may only contain letters, digits, '-', '.', '+'"
        ));
    }
    f.finish();
    kind.map(|kind| ProblemSpec { name, kind, x0 })
}

fn parse_solver(
    t: &Table,
    index: usize,
    base: &Path,
    errors: &mut Vec<String>,
) -> Option<SolverSpec> {
    let label = format!("solver[{index}]");
    let mut f = Fields::new(t, &label, base, errors);
    let kind = match f.string("algorithm").as_deref().unwrap_or("adaagm") {
        "adaagm" => Some(SolverKind::AdaAgm),
        "gd" => Some(SolverKind::GradientDescent),
        "nesterov" => Some(SolverKind::Nesterov),
        other => {
            f.error(format!(
                "unknown algorithm '{other}' (expected adaagm, gd or nesterov)"
            ));
            None
        }
    };
    let profile = f
        .string("profile")
        .and_then(|p| match p.parse::<Profile>() {
            Ok(p) => Some(p),
            Err(e) => {
                f.error(format!("{e} (expected one of {})", profile_names()));
                None
            }
        });
    let overrides = ParamOverrides {
        m: f.f64("m"),
        t0: f.f64("t0"),
        gamma: f.f64("gamma"),
        beta: f.f64("beta"),
        omega: f.f64("omega"),
        delta: f.f64("delta"),
        s0: f.f64("s0"),
    };
    let step = f.f64("step");
    let max_iters = f.usize("max_iters");
    let grad_tol = f.f64("grad_tol");
    let gap_tol = f.f64("gap_tol");
    let kind = kind?;
    if kind != SolverKind::AdaAgm && (profile.is_some() || !overrides.is_empty()) {
        f.error(format!(
            "{} takes 'step' only, not a profile or method parameters",
            kind.name()
        ));
    }
    if kind == SolverKind::AdaAgm && step.is_some() {
        f.error("adaagm chooses its own steps; use 's0' for the initial one".to_string());
    }
    let name = f.string("name").unwrap_or_else(|| match (kind, profile) {
        (SolverKind::AdaAgm, Some(p)) => format!("adaagm-{p}"),
        _ => kind.name().to_string(),
    });
    if !valid_name(&name) {
        f.error(format!(
            "name '{name}' may only contain letters, digits, '-', '.', '+'"
        ));
    }
    f.finish();
    Some(SolverSpec {
        name,
        kind,
        profile,
        overrides,
        step,
        max_iters,
        grad_tol,
        gap_tol,
    })
}

pub fn profile_names() -> String {
    Profile::ALL.map(|p| p.name()).join(", ")
}

/// Typed access to one table that remembers which keys were read, so the
/// rest can be reported as unknown.
struct Fields<'a, 'e> {
    table: &'a Table,
    label: &'e str,
    base: &'e Path,
    used: BTreeSet<&'static str>,
    errors: &'e mut Vec<String>,
}

impl<'a, 'e> Fields<'a, 'e> {
    fn new(table: &'a Table, label: &'e str, base: &'e Path, errors: &'e mut Vec<String>) -> Self {
        Fields {
            table,
            label,
            base,
            used: BTreeSet::new(),
            errors,
        }
    }

    fn error(&mut self, msg: String) {
        if self.label.is_empty() {
            self.errors.push(msg);
        } else {
            self.errors.push(format!("{}: {msg}", self.label));
        }
    }

    fn key(&self, key: &str) -> String {
        if self.label.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.label)
        }
    }

    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.insert(key);
        self.table.get(key)
    }

    fn type_error(&mut self, key: &str, want: &str, got: &Value) {
        let msg = format!(
            "{}: expected {want}, found {}",
            self.key(key),
            got.type_str()
        );
        self.errors.push(msg);
    }

    fn f64(&mut self, key: &'static str) -> Option<f64> {
        match self.get(key)? {
            Value::Float(v) => Some(*v),
            Value::Integer(v) => Some(*v as f64),
            other => {
                self.type_error(key, "a number", other);
                None
            }
        }
    }

    fn int(&mut self, key: &'static str) -> Option<i64> {
        match self.get(key)? {
            Value::Integer(v) => Some(*v),
            other => {
                self.type_error(key, "an integer", other);
                None
            }
        }
    }

    fn usize(&mut self, key: &'static str) -> Option<usize> {
        let v = self.int(key)?;
        if v < 0 {
            let msg = format!("{}: must be nonnegative, got {v}", self.key(key));
            self.errors.push(msg);
            return None;
        }
        Some(v as usize)
    }

    fn required_usize(&mut self, key: &'static str) -> Option<usize> {
        if !self.table.contains_key(key) {
            self.error(format!("missing '{key}'"));
        }
        self.usize(key)
    }

    fn bool(&mut self, key: &'static str) -> Option<bool> {
        match self.get(key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                self.type_error(key, "a boolean", other);
                None
            }
        }
    }

    fn string(&mut self, key: &'static str) -> Option<String> {
        match self.get(key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                self.type_error(key, "a string", other);
                None
            }
        }
    }

    fn required_string(&mut self, key: &'static str) -> Option<String> {
        if !self.table.contains_key(key) {
            self.error(format!("missing '{key}'"));
        }
        self.string(key)
    }

    fn path(&mut self, key: &'static str) -> Option<PathBuf> {
        self.string(key).map(|s| self.base.join(s))
    }

    fn ints(&mut self, key: &'static str) -> Option<Vec<i64>> {
        let arr = match self.get(key)? {
            Value::Array(a) => a,
            other => {
                self.type_error(key, "an array of integers", other);
                return None;
            }
        };
        let mut out = Vec::new();
        for v in arr {
            match v {
                Value::Integer(i) if *i >= 0 => out.push(*i),
                _ => {
                    let msg = format!("{}: entries must be nonnegative integers", self.key(key));
                    self.errors.push(msg);
                    return None;
                }
            }
        }
        Some(out)
    }

    fn numbers(&mut self, key: &str, arr: &[Value]) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(arr.len());
        for v in arr {
            match v {
                Value::Float(x) => out.push(*x),
                Value::Integer(x) => out.push(*x as f64),
                other => {
                    self.type_error(key, "numbers", other);
                    return None;
                }
            }
        }
        Some(out)
    }

    fn vector(&mut self, key: &'static str) -> Option<Vector> {
        let arr = match self.get(key)? {
            Value::Array(a) => a,
            other => {
                self.type_error(key, "an array of numbers", other);
                return None;
            }
        };
        self.numbers(key, arr).map(Vector::from_vec)
    }

    fn matrix(&mut self, key: &'static str) -> Option<Matrix> {
        let rows = match self.get(key)? {
            Value::Array(a) => a,
            other => {
                self.type_error(key, "an array of rows", other);
                return None;
            }
        };
        let mut data = Vec::new();
        let mut ncols = None;
        for row in rows {
            let Value::Array(r) = row else {
                self.type_error(key, "an array of rows", row);
                return None;
            };
            let r = self.numbers(key, r)?;
            if *ncols.get_or_insert(r.len()) != r.len() {
                let msg = format!("{}: rows have different lengths", self.key(key));
                self.errors.push(msg);
                return None;
            }
            data.extend(r);
        }
        let ncols = ncols.unwrap_or(0);
        Some(Matrix::from_row_slice(rows.len(), ncols, &data))
    }

    /// `<key>` inline, `<key>_csv` path, or (when `diag_key` is nonempty) a diagonal.
    fn matrix_source(&mut self, key: &'static str, diag_key: &'static str) -> Option<MatrixSource> {
        let csv_key: &'static str = match key {
            "matrix" => "matrix_csv",
            "rows" => "rows_csv",
            _ => "features_csv",
        };
        let inline = self.matrix(key).map(MatrixSource::Inline);
        let csv = self.path(csv_key).map(MatrixSource::Csv);
        let diag = if diag_key.is_empty() {
            None
        } else {
            self.vector(diag_key).map(MatrixSource::Diagonal)
        };
        let given: Vec<_> = [inline, csv, diag].into_iter().flatten().collect();
        match given.len() {
            1 => given.into_iter().next(),
            0 => {
                let alts = if diag_key.is_empty() {
                    format!("'{key}' or '{csv_key}'")
                } else {
                    format!("'{key}', '{csv_key}' or '{diag_key}'")
                };
                self.error(format!("missing {alts}"));
                None
            }
            _ => {
                self.error(format!(
                    "give only one of '{key}', '{csv_key}'{}",
                    if diag_key.is_empty() {
                        String::new()
                    } else {
                        format!(", '{diag_key}'")
                    }
                ));
                None
            }
        }
    }

    fn vector_source(&mut self, key: &'static str) -> Option<VectorSource> {
        let csv_key: &'static str = match key {
            "offset" => "offset_csv",
            "shifts" => "shifts_csv",
            _ => "labels_csv",
        };
        let inline = self.vector(key).map(VectorSource::Inline);
        let csv = self.path(csv_key).map(VectorSource::Csv);
        match (inline, csv) {
            (Some(_), Some(_)) => {
                self.error(format!("give only one of '{key}', '{csv_key}'"));
                None
            }
            (a, b) => a.or(b),
        }
    }

    fn tables(&mut self, key: &'static str) -> Vec<&'a Table> {
        match self.get(key) {
            None => Vec::new(),
            Some(Value::Array(a)) => {
                let mut out = Vec::new();
                for v in a {
                    match v {
                        Value::Table(t) => out.push(t),
                        other => {
                            self.type_error(key, "tables ([[...]])", other);
                        }
                    }
                }
                out
            }
            Some(other) => {
                self.type_error(key, "an array of tables ([[...]])", other);
                Vec::new()
            }
        }
    }

    /// Report keys that were never read.
    fn finish(self) {
        for k in self.table.keys() {
            if !self.used.contains(k.as_str()) {
                let msg = format!(
                    "unknown key '{}'",
                    if self.label.is_empty() {
                        k.clone()
                    } else {
                        format!("{}.{k}", self.label)
                    }
                );
                self.errors.push(msg);
            }
        }
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            ProblemKind::Quadratic { .. } => "quadratic",
            ProblemKind::RandomQuadratic { .. } => "random_quadratic",
            ProblemKind::LogSumExp { .. } => "log_sum_exp",
            ProblemKind::RandomLogSumExp { .. } => "random_log_sum_exp",
            ProblemKind::Logistic { .. } => "logistic",
            ProblemKind::RandomLogistic { .. } => "random_logistic",
        };
        write!(f, "{} ({kind})", self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(text, Path::new("/base"))
    }

    fn errors(text: &str) -> Vec<String> {
        match parse(text) {
            Err(ConfigError::Invalid(e)) => e,
            other => panic!("expected validation errors, got {other:?}"),
        }
    }

    const MINIMAL: &str = r#"
        [[problem]]
        name = "ill"
        kind = "quadratic"
        diag = [1.0, 100.0]
        offset = [1.0, 100.0]

        [[solver]]
        profile = "cor-4.4"
    "#;

    #[test]
    fn empty_file_has_no_problems() {
        let e = errors("");
        assert_eq!(e[0], "no problems defined");
    }

    #[test]
    fn minimal_config_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.seeds, vec![0]);
        assert_eq!(c.thinning, 1);
        assert_eq!(c.output_dir, PathBuf::from("/base/out"));
        assert_eq!(c.solvers[0].name, "adaagm-cor-4.4");
        assert_eq!(c.solvers[0].profile, Some(Profile::ConvexGammaOne));
        assert!(matches!(
            c.problems[0].kind,
            ProblemKind::Quadratic {
                matrix: MatrixSource::Diagonal(_),
                offset: Some(VectorSource::Inline(_))
            }
        ));
    }

    #[test]
    fn unknown_keys_are_all_reported() {
        let text = format!("colour = 1\n{MINIMAL}\n");
        let text = text.replace("kind = \"quadratic\"", "kind = \"quadratic\"\nsize = 3");
        let e = errors(&text);
        assert!(e.contains(&"unknown key 'colour'".to_string()), "{e:?}");
        assert!(
            e.contains(&"unknown key 'problem[0].size'".to_string()),
            "{e:?}"
        );
    }

    #[test]
    fn parse_errors_carry_line_and_column() {
        let err = parse("seeds = [1, 2]\n[[problem]\n").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_profile_lists_choices() {
        let e = errors(&MINIMAL.replace("cor-4.4", "cor-9"));
        assert!(e[0].contains("cor-9") && e[0].contains("sc-2"), "{e:?}");
    }

    #[test]
    fn baselines_reject_method_parameters() {
        let text = MINIMAL.replace("profile = \"cor-4.4\"", "algorithm = \"gd\"\ngamma = 1.0");
        assert!(errors(&text)[0].contains("takes 'step' only"));
    }

    #[test]
    fn matrix_sources_are_exclusive() {
        let text = MINIMAL.replace("diag = [1.0, 100.0]", "diag = [1.0]\nmatrix = [[1.0]]");
        assert!(errors(&text)[0].contains("give only one of"));
    }

    #[test]
    fn overrides_apply_on_top_of_profile() {
        let text = MINIMAL.replace(
            "profile = \"cor-4.4\"",
            "profile = \"cor-4.3\"\nm = 0.5\ns0 = 0.01",
        );
        let c = parse(&text).unwrap();
        let p = adaagm::SmoothProblem::quadratic(Matrix::identity(1, 1), Vector::zeros(1)).unwrap();
        let params = c.solvers[0].params_for(&p);
        assert_eq!(params.m, 0.5);
        assert_eq!(params.s0, Some(0.01));
        assert_eq!(params.gamma, 0.5);
    }

    #[test]
    fn duplicate_names_rejected() {
        let text = format!("{MINIMAL}\n[[solver]]\nprofile = \"cor-4.4\"\n");
        assert!(errors(&text)[0].contains("used twice"));
    }

    #[test]
    fn csv_paths_resolve_against_base() {
        let text = MINIMAL.replace("diag = [1.0, 100.0]", "matrix_csv = \"a.csv\"");
        let c = parse(&text).unwrap();
        assert_eq!(c.missing_files(), vec![PathBuf::from("/base/a.csv")]);
    }
}
