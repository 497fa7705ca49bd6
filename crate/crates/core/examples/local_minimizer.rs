//! Ball-constrained minimizer of the model problem; its norm is linear in λ.

use gasketvar::config::Problem;
use gasketvar::gasket::build_level;
use gasketvar::problem::{Nonlinearity, Weight};
use gasketvar::solver::{solve_local_min, SolverOptions};

fn main() {
    let level = build_level(3, 4).unwrap();
    let f = Nonlinearity::model("1", 3, 1.0, 2).unwrap();
    let weight = Weight::zero(&level);
    let problem = Problem::new(level, weight, &f);
    for lambda in [4e-4, 2e-4, 1e-4, 5e-5, 2.5e-5] {
        let j = problem.functional(lambda).unwrap();
        let u = solve_local_min(&j, 1.0, &SolverOptions::default()).unwrap();
        println!(
            "λ = {lambda:.2e}  J = {:.6e}  ‖u‖_α = {:.6e}  ‖u‖_α/λ = {:.6}  residual {:.1e}  iterations {}",
            u.functional,
            u.norm_alpha,
            u.norm_alpha / lambda,
            u.residual,
            u.log.len()
        );
    }
}
