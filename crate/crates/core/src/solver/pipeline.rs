use serde::Serialize;
use thiserror::Error;

use super::deflation::deflated_sweep;
use super::{solve_local_min, solve_mountain_pass, sup_distance, Solution, SolverError, SolverOptions};
use crate::config::Problem;
use crate::problem::{AdmissibilityReport, Hypothesis, ProblemError};

/// At most this many extra solutions are collected by the deflated sweep.
const MAX_EXTRA: usize = 4;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("hypothesis `{hypothesis}` fails")]
    Hypothesis { hypothesis: Hypothesis, report: Box<AdmissibilityReport> },
    #[error("config is missing `{0}`")]
    Missing(&'static str),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl SolveError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SolveError::Hypothesis { .. } => 2,
            SolveError::Solver(_) => 3,
            SolveError::Missing(_) | SolveError::Problem(_) => 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: u32,
    pub lambda: f64,
    pub rho: f64,
    pub kappa: f64,
    pub lambda_bound: f64,
    pub lambda_star: f64,
    /// `λ` lies below the bound for this `ϱ`, so the ball claim is certified.
    pub lambda_below_bound: bool,
    pub lambda_below_star: bool,
    pub admissibility: AdmissibilityReport,
    pub solutions: Vec<Solution>,
    /// Smallest pairwise sup-norm distance between reported solutions.
    pub distinctness: f64,
    pub options: SolverOptions,
    pub warnings: Vec<String>,
}

/// Admissibility checks, then the ball-constrained minimizer, then the
/// mountain-pass solution, then optionally a deflated sweep for more.
pub fn two_solutions(problem: &Problem, opts: &SolverOptions) -> Result<SolveReport, SolveError> {
    let lambda = problem.lambda.ok_or(SolveError::Missing("lambda"))?;
    let rho = problem.rho.ok_or(SolveError::Missing("rho"))?;
    let admissibility =
        AdmissibilityReport::assess(&problem.level, &problem.weight, &problem.f, &problem.assess_options())?;
    if let Some(hypothesis) = admissibility.failed {
        return Err(SolveError::Hypothesis { hypothesis, report: Box::new(admissibility) });
    }
    let kappa = admissibility.kappa.expect("admissible weight has κ");
    let lambda_bound = admissibility.lambda_bound.expect("ϱ was given").bound;
    let lambda_star = admissibility.lambda_star.expect("admissible problem has λ*").value;

    let mut warnings = vec![admissibility.alpha.convention.to_string()];
    if !(lambda < lambda_bound) {
        warnings.push(format!("λ = {lambda} is not below the bound {lambda_bound} for ϱ = {rho}"));
    }
    if !(lambda < lambda_star) {
        warnings.push(format!("λ = {lambda} lies outside the certified interval (0, {lambda_star})"));
    }
    if admissibility.ar.searched {
        warnings.push(format!(
            "AR witness found by search: ν = {}, r0 = {}",
            admissibility.ar.nu, admissibility.ar.r0
        ));
    }

    let func = problem.functional(lambda)?;
    let u1 = solve_local_min(&func, rho, opts)?;
    let u2 = solve_mountain_pass(&func, &u1, None, opts)?;
    let mut solutions = vec![u1, u2];
    if opts.deflation_starts > 0 {
        solutions.extend(deflated_sweep(&func, &solutions, opts, MAX_EXTRA)?);
    }
    for s in &mut solutions {
        s.in_ball = Some(s.norm_alpha < rho.sqrt());
        if s.sup_norm == 0.0 {
            return Err(SolverError::NotDistinct { distance: 0.0 }.into());
        }
    }
    let mut distinctness = f64::INFINITY;
    for (i, a) in solutions.iter().enumerate() {
        for b in &solutions[i + 1..] {
            distinctness = distinctness.min(sup_distance(&a.u, &b.u));
        }
    }
    Ok(SolveReport {
        n: problem.level.n(),
        m: problem.level.m(),
        lambda,
        rho,
        kappa,
        lambda_bound,
        lambda_star,
        lambda_below_bound: lambda < lambda_bound,
        lambda_below_star: lambda < lambda_star,
        admissibility,
        solutions,
        distinctness,
        options: opts.clone(),
        warnings,
    })
}
