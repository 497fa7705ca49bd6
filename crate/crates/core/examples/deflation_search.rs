//! Seeded deflated Newton looking for critical points beyond the two found by
//! the pipeline.

use gasketvar::config::Problem;
use gasketvar::gasket::build_level;
use gasketvar::problem::{Nonlinearity, Weight};
use gasketvar::solver::{deflated_sweep, two_solutions, SolverOptions};

fn main() {
    let starts: usize = std::env::args().nth(1).map_or(64, |s| s.parse().expect("starts"));
    let level = build_level(3, 3).unwrap();
    let weight = Weight::zero(&level);
    let f = Nonlinearity::model("1", 3, 1.0, 2).unwrap();
    let problem = Problem::new(level, weight, &f).with_lambda(1e-4).with_rho(1.0).with_ar(3.0, 2.0);
    let opts = SolverOptions { deflation_starts: starts, seed: 7, ..Default::default() };
    let report = two_solutions(&problem, &SolverOptions::default()).unwrap();
    let j = problem.functional(1e-4).unwrap();
    let extra = deflated_sweep(&j, &report.solutions, &opts, 6).unwrap();
    for s in report.solutions.iter().chain(&extra) {
        let min = s.u.iter().copied().fold(f64::INFINITY, f64::min);
        let max = s.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("{:?}: J = {:.6e}  range [{min:.4e}, {max:.4e}]  residual {:.1e}", s.kind, s.functional, s.residual);
    }
    println!("{} extra solutions from {starts} starts", extra.len());
}
