//! Two-solution pipeline over a range of λ, in parallel.

use gasketvar::config::ProblemConfig;
use gasketvar::solver::{two_solutions, SolverOptions};
use rayon::prelude::*;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/model-n3.json");
    let cfg = ProblemConfig::from_path(std::path::Path::new(path)).unwrap();
    let problem = cfg.build(Some(3)).unwrap();
    let lambdas: Vec<f64> = (0..10).map(|k| 5e-5 * 1.5f64.powi(k)).collect();
    let rows: Vec<String> = lambdas
        .par_iter()
        .map(|&l| match two_solutions(&problem.clone().with_lambda(l), &SolverOptions::default()) {
            Ok(r) => format!(
                "λ = {l:.4e}  below bound {:<5}  J1 = {:>12.4e}  J2 = {:>12.4e}  sup u2 = {:.4e}",
                r.lambda_below_bound, r.solutions[0].functional, r.solutions[1].functional, r.solutions[1].sup_norm
            ),
            Err(e) => format!("λ = {l:.4e}  {e}"),
        })
        .collect();
    rows.iter().for_each(|r| println!("{r}"));
}
