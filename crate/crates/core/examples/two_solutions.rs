//! Two critical points of the model problem on the level-4 gasket.

use gasketvar::config::Problem;
use gasketvar::gasket::build_level;
use gasketvar::problem::{Nonlinearity, Weight};
use gasketvar::solver::{two_solutions, SolverOptions};

fn main() {
    let lambda: f64 = std::env::args().nth(1).map_or(1e-4, |s| s.parse().expect("λ"));
    let m: u32 = std::env::args().nth(2).map_or(4, |s| s.parse().expect("m"));
    let level = build_level(3, m).unwrap();
    let weight = Weight::zero(&level);
    let f = Nonlinearity::model("1", 3, 1.0, 2).unwrap();
    let problem = Problem::new(level, weight, &f).with_lambda(lambda).with_rho(1.0).with_ar(3.0, 2.0);
    let t = std::time::Instant::now();
    let report = two_solutions(&problem, &SolverOptions::default()).unwrap();
    println!("λ = {lambda}, bound {:.6e}, λ* {:.6e}", report.lambda_bound, report.lambda_star);
    for s in &report.solutions {
        println!(
            "{:?}: J = {:.6e}  ‖u‖_α = {:.6e}  sup = {:.6e}  residual = {:.3e}  in ball: {:?}",
            s.kind, s.functional, s.norm_alpha, s.sup_norm, s.residual, s.in_ball
        );
    }
    println!("distinct by {:.4e} in {:.2?}", report.distinctness, t.elapsed());
}
