//! N = 2 reduces to the three-point scheme on [0, 1]: exact nodal values for a
//! constant source and second-order convergence for the cubic model.

use gasketvar::energy::EnergyForm;
use gasketvar::gasket::build_level;
use gasketvar::problem::{Nonlinearity, Weight};
use gasketvar::solver::{solve_local_min, DiscreteFunctional, SolverOptions};

fn solve(m: u32, f: &str) -> (Vec<f64>, Vec<f64>) {
    let level = build_level(2, m).unwrap();
    let form = EnergyForm::assemble(&level);
    let weight = Weight::zero(&level);
    let f = Nonlinearity::parse(f, 1).unwrap().sample(&level);
    let j = DiscreteFunctional::new(&form, &weight, &f, 1.0).unwrap();
    let u = solve_local_min(&j, 1.0, &SolverOptions::default()).unwrap().u;
    (level.coords().iter().map(|x| x[0]).collect(), u)
}

fn main() {
    let (x, u) = solve(6, "-1");
    let err = x.iter().zip(&u).map(|(x, v)| (v - x * (1.0 - x) / 2.0).abs()).fold(0.0, f64::max);
    println!("f = -1: max nodal error against x(1-x)/2 is {err:.2e}");

    // Richardson combination of levels 10 and 11 as reference
    let (_, coarse) = solve(10, "-(t^3 + 1)");
    let (_, fine) = solve(11, "-(t^3 + 1)");
    let ur: Vec<f64> = coarse.iter().enumerate().map(|(i, c)| (4.0 * fine[2 * i] - c) / 3.0).collect();
    let at = |x: f64| ur[(x * 1024.0).round() as usize];
    let mut prev = f64::NAN;
    for m in 3..=7 {
        let (x, u) = solve(m, "-(t^3 + 1)");
        let d = x.iter().zip(&u).map(|(x, v)| (v - at(*x)).abs()).fold(0.0, f64::max);
        println!("m = {m}: sup difference {d:.4e}  ratio {:.4}", prev / d);
        prev = d;
    }
}
