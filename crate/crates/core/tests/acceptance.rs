//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use adaagm::diagnostics::{energy_contraction, tail_cauchy, tail_gradient_fraction};
use adaagm::problems::{
    gaussian_vector, random_log_sum_exp, random_logistic, random_psd_quadratic,
    random_sc_quadratic, symmetric_log_sum_exp,
};
use adaagm::{
    certify, certify_with_tolerance, check_grad_fd, floor_q, rho, run_adaagm_with,
    run_nesterov_with, AlgoParams, CertificateKind, Matrix, Profile, SmoothProblem, SolverOptions,
    StepPolicy, StopCriteria, Trace, Vector,
};
use nalgebra::dvector;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn ill2() -> SmoothProblem {
    SmoothProblem::quadratic(
        Matrix::from_diagonal(&dvector![1.0, 100.0]),
        dvector![1.0, 1.0],
    )
    .unwrap()
    .with_name("diag(1,100)")
}

fn run(
    problem: &SmoothProblem,
    params: &AlgoParams,
    iters: usize,
    x0: &Vector,
    keep: bool,
) -> Trace {
    let opts = SolverOptions {
        keep_iterates: keep,
        ..SolverOptions::default()
    };
    run_adaagm_with(problem, params, &StopCriteria::budget(iters), x0, &opts)
        .unwrap_or_else(|e| panic!("{}: {e}", problem.name()))
}

fn expect_cert(
    trace: &Trace,
    problem: &SmoothProblem,
    params: &AlgoParams,
    kind: CertificateKind,
    tol: Option<f64>,
) -> Result<f64, String> {
    let cert = match tol {
        Some(t) => certify_with_tolerance(trace, problem, params, kind, t),
        None => certify(trace, problem, params, kind),
    }
    .map_err(|e| format!("{}: {e}", problem.name()))?;
    if cert.passed() {
        Ok(cert.max_violation_rel)
    } else {
        let v = cert.violations[0];
        Err(format!(
            "{} {kind}: {} violations, first at k={} lhs={:e} rhs={:e}",
            problem.name(),
            cert.violations.len(),
            v.k,
            v.lhs,
            v.rhs
        ))
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("runtime {elapsed:?} exceeds {limit:?}"))
    }
}

fn step_floor() -> Outcome {
    let p = ill2();
    let params = Profile::ConvexGammaOne.params().with_s0(1.0 / 500.0);
    let start = Instant::now();
    let tr = run(&p, &params, 10_000, &dvector![-3.0, 2.0], false);
    let elapsed = start.elapsed();
    let worst = expect_cert(&tr, &p, &params, CertificateKind::StepFloor, Some(1e-12))?;
    let min_s = tr.records.iter().map(|r| r.s).fold(f64::INFINITY, f64::min);
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "{} steps, min s_k = {min_s:.6e} >= 1/500, worst rel {worst:.2e}, {elapsed:.2?}",
        tr.records.len()
    ))
}

fn step_cap() -> Outcome {
    let p = ill2();
    let params = Profile::ConvexGammaOne
        .params()
        .with_s0(1.0 / 500.0)
        .with_m(0.5);
    let tr = run(&p, &params, 10_000, &dvector![-3.0, 2.0], false);
    let worst = expect_cert(&tr, &p, &params, CertificateKind::StepCap, Some(0.0))?;
    Ok(format!(
        "{} steps checked against s0 e^2 k^2, worst rel {worst:.2e}",
        tr.records.len() - 1
    ))
}

fn convex_suite() -> Vec<SmoothProblem> {
    let mut problems = Vec::new();
    for i in 0..5u64 {
        let mut r = rng(100 + i);
        let p = random_psd_quadratic(50, 40, 1.0 + 2.0 * i as f64, &mut r).unwrap();
        problems.push(p.with_name(format!("psd_quadratic_{i}")));
    }
    let mut r = rng(200);
    problems.push(symmetric_log_sum_exp(30, 50, 1.0, &mut r).unwrap());
    problems
}

fn convex_runs() -> (Vec<(SmoothProblem, AlgoParams, Trace)>, Duration) {
    let start = Instant::now();
    let mut out = Vec::new();
    for (i, p) in convex_suite().into_iter().enumerate() {
        let x0 = gaussian_vector(p.dimension(), &mut rng(300 + i as u64)) * 3.0;
        for profile in [Profile::ConvexGammaHalf, Profile::ConvexGammaOne] {
            let params = profile.params();
            let tr = run(&p, &params, 10_000, &x0, false);
            out.push((p.clone(), params, tr));
        }
    }
    (out, start.elapsed())
}

fn sublinear(runs: &[(SmoothProblem, AlgoParams, Trace)], elapsed: Duration) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for (p, params, tr) in runs {
        worst = worst.max(expect_cert(
            tr,
            p,
            params,
            CertificateKind::Sublinear,
            Some(1e-9),
        )?);
    }
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "{} runs (5 PSD quadratics + log-sum-exp, two profiles), worst rel {worst:.2e}, {elapsed:.2?}",
        runs.len()
    ))
}

fn floor_constants() -> Outcome {
    let expected = [
        (Profile::ConvexGammaHalf, 1.0 / 4.0),
        (Profile::ConvexGammaOne, 1.0 / 5.0),
        (Profile::StronglyConvexGammaHalf, 1.0 / 12.0),
        (Profile::StronglyConvexGammaOne, 1.0 / 16.0),
    ];
    let mut parts = Vec::new();
    for (profile, want) in expected {
        let q = floor_q(&profile.params()).map_err(|e| e.to_string())?;
        if (q - want).abs() > 1e-15 {
            return Err(format!("{profile}: q = {q:e}, expected {want:e}"));
        }
        parts.push(format!("{profile}={q}"));
    }
    Ok(parts.join(" "))
}

fn linear() -> Outcome {
    let mut problems = Vec::new();
    let mut r = rng(400);
    let logistic = random_logistic(200, 10, 0.1, 0.1, &mut r).map_err(|e| e.to_string())?;
    problems.push(logistic.with_name("logistic_ridge_0.1"));
    for (j, ratio) in [1e-2, 1e-4].into_iter().enumerate() {
        let p = random_sc_quadratic(20, ratio, 1.0, &mut rng(410 + j as u64))
            .map_err(|e| e.to_string())?;
        problems.push(p.with_name(format!("sc_quadratic_{ratio:e}")));
    }
    let mut notes = Vec::new();
    for (i, p) in problems.iter().enumerate() {
        let x0 = gaussian_vector(p.dimension(), &mut rng(420 + i as u64));
        for profile in [
            Profile::StronglyConvexGammaHalf,
            Profile::StronglyConvexGammaOne,
        ] {
            let params = profile.params();
            let tr = run(p, &params, 20_000, &x0, false);
            expect_cert(&tr, p, &params, CertificateKind::Linear, None)?;
            expect_cert(&tr, p, &params, CertificateKind::EnergyMonotone, None)?;
            let r = rho(&params, p.mu_known().unwrap(), p.l_known().unwrap())
                .map_err(|e| e.to_string())?;
            let fitted = energy_contraction(&tr.records)
                .ok_or_else(|| format!("{}: energy column unusable", p.name()))?;
            if fitted > 1.0 - r {
                return Err(format!(
                    "{} {profile}: fitted contraction {fitted:.9} > 1 - rho = {:.9}",
                    p.name(),
                    1.0 - r
                ));
            }
            notes.push(format!(
                "{}/{profile}: {fitted:.6} <= {:.8}",
                p.name(),
                1.0 - r
            ));
        }
    }
    Ok(notes.join("; "))
}

fn energy_monotone(runs: &[(SmoothProblem, AlgoParams, Trace)]) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for (p, params, tr) in runs {
        worst = worst.max(expect_cert(
            tr,
            p,
            params,
            CertificateKind::EnergyMonotone,
            Some(1e-9),
        )?);
    }
    Ok(format!(
        "{} convex runs nonincreasing, worst rel {worst:.2e}",
        runs.len()
    ))
}

fn nesterov_degeneration() -> Outcome {
    let p = random_psd_quadratic(30, 30, 10.0, &mut rng(500)).map_err(|e| e.to_string())?;
    let x0 = gaussian_vector(30, &mut rng(501));
    let step = 1.0 / p.l_known().unwrap();
    let params = AlgoParams {
        m: 1.0,
        t0: 1.0,
        gamma: 1.0,
        ..Profile::ConvexGammaOne.params()
    };
    let opts = SolverOptions {
        step: StepPolicy::Fixed(step),
        keep_iterates: true,
        record_energy: false,
        ..SolverOptions::default()
    };
    let stop = StopCriteria::budget(1000);
    let a = run_adaagm_with(&p, &params, &stop, &x0, &opts).map_err(|e| e.to_string())?;
    let b = run_nesterov_with(&p, step, &stop, &x0, &opts).map_err(|e| e.to_string())?;
    if a.iterates.len() != b.iterates.len() || a.iterates.len() != 1001 {
        return Err(format!(
            "iterate counts {} vs {}",
            a.iterates.len(),
            b.iterates.len()
        ));
    }
    let mut worst = 0.0_f64;
    for ((ka, xa), (kb, xb)) in a.iterates.iter().zip(&b.iterates) {
        assert_eq!(ka, kb);
        worst = worst.max((xa - xb).norm() / (1.0 + xb.norm()));
    }
    if worst > 1e-10 {
        return Err(format!("max iterate deviation {worst:e}"));
    }
    Ok(format!("1000 iterations, max rel deviation {worst:.2e}"))
}

fn summability() -> Outcome {
    let p = random_sc_quadratic(20, 1e-2, 1.0, &mut rng(600)).map_err(|e| e.to_string())?;
    let x0 = gaussian_vector(20, &mut rng(601));
    let params = Profile::StronglyConvexGammaOne.params();
    let tr = run(&p, &params, 10_000, &x0, false);
    let frac = tail_gradient_fraction(&tr.records).ok_or("zero gradient sum")?;
    if frac >= 0.01 {
        return Err(format!("last-half share {frac:e} >= 1%"));
    }
    Ok(format!("last-half share of sum k^2 |grad|^2 = {frac:.3e}"))
}

fn tail_cauchy_surrogate() -> Outcome {
    let mut problems = vec![
        random_sc_quadratic(20, 1e-2, 1.0, &mut rng(700)).map_err(|e| e.to_string())?,
        random_logistic(200, 10, 0.1, 0.1, &mut rng(701)).map_err(|e| e.to_string())?,
        ill2(),
    ];
    problems[2] = problems[2].clone().with_strong_convexity(1.0);
    let mut notes = Vec::new();
    for (i, p) in problems.iter().enumerate() {
        let x0 = gaussian_vector(p.dimension(), &mut rng(710 + i as u64));
        for profile in [
            Profile::StronglyConvexGammaHalf,
            Profile::StronglyConvexGammaOne,
        ] {
            let tr = run(p, &profile.params(), 20_000, &x0, true);
            let c = tail_cauchy(&tr.iterates, 0.1).ok_or("no iterates")?;
            if c > 1e-6 {
                return Err(format!("{}/{profile}: tail spread {c:e} > 1e-6", p.name()));
            }
            notes.push(format!("{c:.1e}"));
        }
    }
    Ok(format!(
        "tail spreads {} (finite-dimensional surrogate)",
        notes.join(", ")
    ))
}

fn gradient_oracle() -> Outcome {
    let mut problems = convex_suite();
    problems.push(ill2());
    problems.push(random_sc_quadratic(20, 1e-4, 1.0, &mut rng(800)).map_err(|e| e.to_string())?);
    problems.push(random_log_sum_exp(40, 8, 0.3, &mut rng(801)).map_err(|e| e.to_string())?);
    problems.push(random_logistic(100, 6, 0.0, 0.1, &mut rng(802)).map_err(|e| e.to_string())?);
    problems.push(random_logistic(100, 6, 0.1, 0.1, &mut rng(803)).map_err(|e| e.to_string())?);
    let mut worst = 0.0_f64;
    let mut r = rng(810);
    for p in &problems {
        for _ in 0..20 {
            let x = gaussian_vector(p.dimension(), &mut r) * 2.0;
            let err = check_grad_fd(p, &x, 1e-6);
            if err > 1e-5 {
                return Err(format!("{}: finite-difference error {err:e}", p.name()));
            }
            worst = worst.max(err);
        }
    }
    Ok(format!(
        "{} problems x 20 points, worst {worst:.2e}",
        problems.len()
    ))
}

fn main() -> ExitCode {
    let (runs, elapsed) = convex_runs();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("step floor", Box::new(step_floor)),
        ("step cap", Box::new(step_cap)),
        (
            "sublinear certificate",
            Box::new(|| sublinear(&runs, elapsed)),
        ),
        ("floor constants", Box::new(floor_constants)),
        ("linear certificate", Box::new(linear)),
        ("energy monotonicity", Box::new(|| energy_monotone(&runs))),
        ("nesterov degeneration", Box::new(nesterov_degeneration)),
        ("gradient summability", Box::new(summability)),
        ("iterate tail-Cauchy", Box::new(tail_cauchy_surrogate)),
        ("gradient oracle", Box::new(gradient_oracle)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("acceptance {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("acceptance {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
