//! J along the ray t·u0 for the model problem: growth, then collapse.

use gasketvar::config::Problem;
use gasketvar::gasket::build_level;
use gasketvar::problem::{Nonlinearity, Weight};
use gasketvar::solver::first_eigen_direction;

fn main() {
    let lambda: f64 = std::env::args().nth(1).map_or(1e-4, |s| s.parse().expect("λ"));
    let level = build_level(3, 4).unwrap();
    let weight = Weight::zero(&level);
    let f = Nonlinearity::model("1", 3, 1.0, 2).unwrap();
    let problem = Problem::new(level, weight, &f);
    let j = problem.functional(lambda).unwrap();
    let (u0, eig) = first_eigen_direction(&j).unwrap();
    println!("first interior eigenvalue {eig:.6e}, ‖u0‖_α = {:.6}", j.norm_alpha(&u0));
    for k in 0..=14 {
        let t = 2f64.powi(k);
        let v: Vec<f64> = u0.iter().map(|x| t * x).collect();
        println!("t = 2^{k:<2}  J = {:.6e}", j.value(&v));
    }
}
