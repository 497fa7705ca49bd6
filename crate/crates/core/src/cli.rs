//! Command-line front end: `mesh`, `verify`, `solve`, `sweep`, `lambda-star`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, ProblemConfig};
use crate::embedding::AlphaBranch;
use crate::gasket::build_level;
use crate::output::{diagonal, to_json, write_json, write_matrix_market, write_solution_csv};
use crate::problem::{check_alpha, lambda_star, LambdaStar, LambdaStarOptions};
use crate::solver::{two_solutions, SolveError, SolverOptions};
use crate::verify::run_suites;

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gasketvar", version, about = "Semilinear problems on the Sierpiński gasket")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunConfig,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Overrides the level `m` of a config, or sets it for `mesh`/`verify`.
    #[arg(long, global = true)]
    pub level: Option<u32>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub tol_residual: Option<f64>,
    /// Worker threads for sweeps and deflation (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Export a level as JSON.
    Mesh {
        #[arg(short = 'n', long = "corners", default_value_t = 3)]
        n: usize,
    },
    /// Randomized energy and embedding suites.
    Verify {
        #[arg(short = 'n', long = "corners", default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Replace (N+2)/N by this ratio when assembling (fault injection).
        #[arg(long)]
        renormalization_ratio: Option<f64>,
    },
    /// Two solutions of the configured problem.
    Solve {
        config: PathBuf,
        /// Seeded deflated-Newton starts after the two solutions.
        #[arg(long, default_value_t = 0)]
        deflation_starts: usize,
        /// Also report the energy-dual residual.
        #[arg(long)]
        energy_dual: bool,
        /// Write A and M in Matrix Market format.
        #[arg(long)]
        export_matrices: bool,
    },
    /// Solve over a grid of λ values.
    Sweep {
        config: PathBuf,
        /// Comma-separated λ values.
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
    },
    /// λ*, its maximizing z, and κ.
    LambdaStar { config: PathBuf },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Hypothesis(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Gasket(#[from] crate::gasket::GasketError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solve(e) => e.exit_code(),
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Hypothesis(_) => EXIT_HYPOTHESIS,
            CliError::Config(_) | CliError::Gasket(_) | CliError::Json(_) | CliError::Io(_) => EXIT_CONFIG,
        }
    }
}

fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

fn ensure_dir(dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)
}

fn solver_options(run: &RunConfig) -> SolverOptions {
    let mut o = SolverOptions { seed: run.seed, ..Default::default() };
    if let Some(t) = run.tol_residual {
        o.tol_residual = t;
    }
    o
}

pub fn cmd_mesh(n: usize, run: &RunConfig) -> Result<PathBuf, CliError> {
    let m = run.level.unwrap_or(2);
    let level = build_level(n, m)?;
    ensure_dir(&run.out)?;
    let path = run.out.join(format!("mesh-N{n}-m{m}.json"));
    write_json(&path, &level.export())?;
    println!("vertices {}  edges {}  cells {}", level.num_vertices(), level.edges().len(), level.cells().len());
    Ok(path)
}

pub fn cmd_verify(n: usize, trials: usize, ratio: Option<f64>, run: &RunConfig) -> Result<bool, CliError> {
    let m = run.level.unwrap_or(4);
    let report = run_suites(n, m, trials, run.seed, ratio)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("{:<8} {:>16} {:>16} {:>16}", "N", "sigma", "2N+3", "kappa");
    println!(
        "{:<8} {:>16} {:>16} {:>16}",
        n,
        sig9(report.constants.sigma),
        sig9(report.constants.morrey_constant),
        sig9(report.constants.kappa)
    );
    for s in &report.suites {
        println!(
            "{:<30} {:>6} trials  {:>4} violations  worst {}  {}",
            s.name,
            s.trials,
            s.violations,
            sig9(s.worst),
            if s.passed() { "pass" } else { "FAIL" }
        );
    }
    ensure_dir(&run.out)?;
    write_json(&run.out.join(format!("verify-N{n}-m{m}.json")), &report)?;
    Ok(report.passed())
}

pub fn cmd_solve(
    config: &Path,
    deflation_starts: usize,
    energy_dual: bool,
    export_matrices: bool,
    run: &RunConfig,
) -> Result<(), CliError> {
    let cfg = ProblemConfig::from_path(config)?;
    let problem = cfg.build(run.level)?;
    let opts = SolverOptions { deflation_starts, energy_dual, ..solver_options(run) };
    ensure_dir(&run.out)?;
    if export_matrices {
        write_matrix_market(&run.out.join("stiffness.mtx"), problem.form.stiffness())?;
        write_matrix_market(&run.out.join("mass.mtx"), &diagonal(problem.form.lumped()))?;
    }
    let report = match two_solutions(&problem, &opts) {
        Ok(r) => r,
        Err(SolveError::Hypothesis { hypothesis, report }) => {
            write_json(&run.out.join("admissibility.json"), &*report)?;
            return Err(CliError::Hypothesis(format!("hypothesis `{hypothesis}` fails")));
        }
        Err(e) => return Err(e.into()),
    };
    write_json(&run.out.join("report.json"), &report)?;
    for (k, s) in report.solutions.iter().enumerate() {
        write_solution_csv(&run.out.join(format!("solution-{}.csv", k + 1)), &problem.level, &s.u)?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("lambda {}  rho {}  kappa {}", sig9(report.lambda), sig9(report.rho), sig9(report.kappa));
    println!("lambda bound {}  lambda* {}", sig9(report.lambda_bound), sig9(report.lambda_star));
    for (k, s) in report.solutions.iter().enumerate() {
        println!(
            "u{}  J {}  norm_alpha {}  sup {}  residual {}  in_ball {}",
            k + 1,
            sig9(s.functional),
            sig9(s.norm_alpha),
            sig9(s.sup_norm),
            sig9(s.residual),
            s.in_ball.unwrap_or(false)
        );
    }
    println!("distinctness {}", sig9(report.distinctness));
    let ok = report.solutions.len() >= 2
        && report.solutions.iter().all(|s| s.residual < opts.tol_residual)
        && report.distinctness > opts.distinct_tol;
    if ok {
        Ok(())
    } else {
        Err(CliError::Numerical("two distinct solutions within tolerance were not found".into()))
    }
}

#[derive(Debug, Serialize)]
struct SweepRow {
    lambda: f64,
    status: String,
    solutions: usize,
    j1: Option<f64>,
    j2: Option<f64>,
    norm1: Option<f64>,
    norm2: Option<f64>,
    residual1: Option<f64>,
    residual2: Option<f64>,
}

pub fn cmd_sweep(config: &Path, lambdas: &[f64], run: &RunConfig) -> Result<(), CliError> {
    let cfg = ProblemConfig::from_path(config)?;
    let base = cfg.build(run.level)?;
    let opts = solver_options(run);
    let mut rows: Vec<SweepRow> = lambdas
        .par_iter()
        .map(|&lambda| {
            let mut p = base.clone();
            p.lambda = Some(lambda);
            match two_solutions(&p, &opts) {
                Ok(r) => {
                    let get = |k: usize, f: fn(&crate::solver::Solution) -> f64| r.solutions.get(k).map(f);
                    SweepRow {
                        lambda,
                        status: "ok".into(),
                        solutions: r.solutions.len(),
                        j1: get(0, |s| s.functional),
                        j2: get(1, |s| s.functional),
                        norm1: get(0, |s| s.norm_alpha),
                        norm2: get(1, |s| s.norm_alpha),
                        residual1: get(0, |s| s.residual),
                        residual2: get(1, |s| s.residual),
                    }
                }
                Err(e) => SweepRow {
                    lambda,
                    status: e.to_string(),
                    solutions: 0,
                    j1: None,
                    j2: None,
                    norm1: None,
                    norm2: None,
                    residual1: None,
                    residual2: None,
                },
            }
        })
        .collect();
    rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    ensure_dir(&run.out)?;
    let mut w = csv::Writer::from_path(run.out.join("sweep.csv")).map_err(std::io::Error::other)?;
    w.write_record(["lambda", "status", "solutions", "j1", "j2", "norm1", "norm2", "residual1", "residual2"])
        .map_err(std::io::Error::other)?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for r in &rows {
        w.write_record([
            format!("{:.16e}", r.lambda),
            r.status.clone(),
            r.solutions.to_string(),
            fmt(r.j1),
            fmt(r.j2),
            fmt(r.norm1),
            fmt(r.norm2),
            fmt(r.residual1),
            fmt(r.residual2),
        ])
        .map_err(std::io::Error::other)?;
        println!("lambda {}  {}  solutions {}", sig9(r.lambda), r.status, r.solutions);
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct LambdaStarOutput {
    #[serde(rename = "N")]
    n: usize,
    branch: AlphaBranch,
    abs_alpha_integral: f64,
    #[serde(flatten)]
    star: LambdaStar,
}

pub fn cmd_lambda_star(config: &Path, run: &RunConfig) -> Result<(), CliError> {
    let cfg = ProblemConfig::from_path(config)?;
    let problem = cfg.build(run.level)?;
    let alpha = check_alpha(&problem.weight, &problem.level);
    let Some(branch) = alpha.branch else {
        return Err(CliError::Hypothesis(format!(
            "hypothesis `alpha` fails: ∫|α|dμ = {} is not below {}",
            alpha.abs_integral, alpha.limit
        )));
    };
    let kappa = crate::embedding::kappa(problem.level.n(), branch, alpha.abs_integral)
        .map_err(|e| CliError::Hypothesis(e.to_string()))?;
    let star = lambda_star(&problem.f, kappa, &LambdaStarOptions::default());
    println!("lambda* {}", sig9(star.value));
    println!("z       {}", sig9(star.z));
    println!("kappa   {}", sig9(star.kappa));
    if star.unbounded {
        eprintln!("warning: the ratio z²/max|F| still grows at z = {}; λ* reported as +inf", star.z);
    }
    ensure_dir(&run.out)?;
    let out = LambdaStarOutput { n: problem.level.n(), branch, abs_alpha_integral: alpha.abs_integral, star };
    std::fs::write(run.out.join("lambda-star.json"), to_json(&out)?)?;
    Ok(())
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(j) = cli.run.jobs {
        // a second initialization only happens in tests that call `run` twice
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    let result = match &cli.command {
        Command::Mesh { n } => cmd_mesh(*n, &cli.run).map(|_| ()),
        Command::Verify { n, trials, renormalization_ratio } => {
            cmd_verify(*n, *trials, *renormalization_ratio, &cli.run).and_then(|ok| {
                if ok {
                    Ok(())
                } else {
                    Err(CliError::Numerical("verification suite reported violations".into()))
                }
            })
        }
        Command::Solve { config, deflation_starts, energy_dual, export_matrices } => {
            cmd_solve(config, *deflation_starts, *energy_dual, *export_matrices, &cli.run)
        }
        Command::Sweep { config, lambdas } => cmd_sweep(config, lambdas, &cli.run),
        Command::LambdaStar { config } => cmd_lambda_star(config, &cli.run),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
