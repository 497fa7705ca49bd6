//! The 1/5–2/5 extension rule and energy preservation under refinement.

use gasketvar::energy::{harmonic_extension, DiscreteFunction, EnergyForm};
use gasketvar::gasket::build_level;

fn main() {
    let levels: Vec<_> = (0..=6).map(|m| build_level(3, m).unwrap()).collect();
    let mut u = DiscreteFunction::from_values(&levels[0], vec![1.0, 0.0, 0.0]).unwrap();
    for k in 0..6 {
        let w = EnergyForm::assemble(&levels[k]).quadratic(&u);
        println!("m = {k}: W_m(u) = {w:.15}");
        u = harmonic_extension(&levels[k], &levels[k + 1], &u).unwrap();
    }
    println!("m = 6: W_m(u) = {:.15}", EnergyForm::assemble(&levels[6]).quadratic(&u));

    let u1 = harmonic_extension(
        &levels[0],
        &levels[1],
        &DiscreteFunction::from_values(&levels[0], vec![1.0, 0.0, 0.0]).unwrap(),
    )
    .unwrap();
    println!("level-1 values from corner data (1, 0, 0):");
    for (x, v) in levels[1].coords().iter().zip(u1.values()) {
        println!("  ({:.3}, {:.3})  {v:.6}", x[0], x[1]);
    }
}
