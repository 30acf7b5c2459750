//! Turning problem specs into [`SmoothProblem`]s.

use std::path::Path;

use adaagm::problems::{
    random_log_sum_exp, random_logistic, random_psd_quadratic, random_sc_quadratic,
    symmetric_log_sum_exp,
};
use adaagm::{Matrix, SmoothProblem, Vector};
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::config::{MatrixSource, ProblemKind, ProblemSpec, VectorSource};

/// Read a comma-separated matrix, one row per line, no header. Blank lines
/// are skipped.
pub fn read_matrix_csv(path: &Path) -> Result<Matrix, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut data = Vec::new();
    let mut ncols = None;
    let mut nrows = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))?;
        if *ncols.get_or_insert(row.len()) != row.len() {
            return Err(format!(
                "{}:{}: expected {} columns, found {}",
                path.display(),
                i + 1,
                ncols.unwrap_or(0),
                row.len()
            ));
        }
        data.extend(row);
        nrows += 1;
    }
    if nrows == 0 {
        return Err(format!("{}: no rows", path.display()));
    }
    Ok(Matrix::from_row_slice(nrows, ncols.unwrap_or(0), &data))
}

/// A vector file is a matrix with a single row or a single column.
pub fn read_vector_csv(path: &Path) -> Result<Vector, String> {
    let m = read_matrix_csv(path)?;
    if m.nrows() != 1 && m.ncols() != 1 {
        return Err(format!(
            "{}: expected a single row or column, found {}x{}",
            path.display(),
            m.nrows(),
            m.ncols()
        ));
    }
    Ok(Vector::from_iterator(
        m.len(),
        m.transpose().iter().copied(),
    ))
}

fn matrix(src: &MatrixSource) -> Result<Matrix, String> {
    match src {
        MatrixSource::Inline(m) => Ok(m.clone()),
        MatrixSource::Diagonal(d) => Ok(Matrix::from_diagonal(d)),
        MatrixSource::Csv(p) => read_matrix_csv(p),
    }
}

fn vector(src: &VectorSource) -> Result<Vector, String> {
    match src {
        VectorSource::Inline(v) => Ok(v.clone()),
        VectorSource::Csv(p) => read_vector_csv(p),
    }
}

pub fn build_problem(spec: &ProblemSpec) -> Result<SmoothProblem, String> {
    let rng = |seed: u64| Xoshiro256PlusPlus::seed_from_u64(seed);
    let built = match &spec.kind {
        ProblemKind::Quadratic { matrix: m, offset } => {
            let a = matrix(m)?;
            let b = match offset {
                Some(o) => vector(o)?,
                None => Vector::zeros(a.nrows()),
            };
            SmoothProblem::quadratic(a, b)
        }
        ProblemKind::RandomQuadratic {
            dim,
            rank,
            mu,
            l,
            seed,
        } => {
            if *mu > 0.0 {
                random_sc_quadratic(*dim, *mu, *l, &mut rng(*seed))
            } else {
                random_psd_quadratic(*dim, *rank, *l, &mut rng(*seed))
            }
        }
        ProblemKind::LogSumExp {
            rows,
            shifts,
            temperature,
        } => {
            let a = matrix(rows)?;
            let b = match shifts {
                Some(s) => vector(s)?,
                None => Vector::zeros(a.nrows()),
            };
            SmoothProblem::log_sum_exp(a, b, *temperature)
        }
        ProblemKind::RandomLogSumExp {
            n_rows,
            dim,
            temperature,
            symmetric,
            seed,
        } => {
            if *symmetric {
                symmetric_log_sum_exp(*n_rows, *dim, *temperature, &mut rng(*seed))
            } else {
                random_log_sum_exp(*n_rows, *dim, *temperature, &mut rng(*seed))
            }
        }
        ProblemKind::Logistic {
            features,
            labels,
            ridge,
        } => SmoothProblem::logistic(matrix(features)?, vector(labels)?, *ridge),
        ProblemKind::RandomLogistic {
            n_samples,
            dim,
            ridge,
            flip,
            seed,
        } => random_logistic(*n_samples, *dim, *ridge, *flip, &mut rng(*seed)),
    };
    let problem = built
        .map_err(|e| e.to_string())?
        .with_name(spec.name.clone());
    if let Some(x0) = &spec.x0 {
        if x0.len() != problem.dimension() {
            return Err(format!(
                "x0 has {} entries, problem dimension is {}",
                x0.len(),
                problem.dimension()
            ));
        }
    }
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn matrix_csv_round_trip() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "1, 2,3\n\n4,5,6.5").unwrap();
        let m = read_matrix_csv(f.path()).unwrap();
        assert_eq!(
            m,
            Matrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.5])
        );
    }

    #[test]
    fn ragged_csv_names_the_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "1,2\n3").unwrap();
        let e = read_matrix_csv(f.path()).unwrap_err();
        assert!(e.contains(":2:"), "{e}");
    }

    #[test]
    fn vector_csv_accepts_row_or_column() {
        let mut row = tempfile::NamedTempFile::new().unwrap();
        writeln!(row, "1,2,3").unwrap();
        let mut col = tempfile::NamedTempFile::new().unwrap();
        writeln!(col, "1\n2\n3").unwrap();
        let want = Vector::from_vec(vec![1.0, 2.0, 3.0]);
        assert_eq!(read_vector_csv(row.path()).unwrap(), want);
        assert_eq!(read_vector_csv(col.path()).unwrap(), want);
    }

    #[test]
    fn seeded_problems_are_reproducible() {
        let spec = ProblemSpec {
            name: "q".into(),
            kind: ProblemKind::RandomQuadratic {
                dim: 5,
                rank: 5,
                mu: 0.1,
                l: 2.0,
                seed: 9,
            },
            x0: None,
        };
        let a = build_problem(&spec).unwrap();
        let b = build_problem(&spec).unwrap();
        assert_eq!(a.x_star(), b.x_star());
        assert_eq!(a.name(), "q");
    }
}
