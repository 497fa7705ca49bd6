//! λ* and the ϱ-dependent bound for the model nonlinearity.

use gasketvar::gasket::build_level;
use gasketvar::problem::{lambda_bound, lambda_star, LambdaStarOptions, Nonlinearity, DEFAULT_GRID_POINTS};

fn main() {
    let level = build_level(3, 2).unwrap();
    let f = Nonlinearity::model("1", 3, 1.0, 2).unwrap().sample(&level);
    let star = lambda_star(&f, 9.0, &LambdaStarOptions::default());
    println!("λ* = {:.9e} at z = {:.9} (2^(1/3) = {:.9})", star.value, star.z, 2f64.cbrt());
    println!("{:>12} {:>16}", "rho", "bound");
    for k in -12..=4 {
        let rho = 2f64.powi(k);
        let b = lambda_bound(&f, 9.0, rho, DEFAULT_GRID_POINTS).unwrap();
        println!("{rho:>12.6e} {:>16.9e}", b.bound);
    }
}
