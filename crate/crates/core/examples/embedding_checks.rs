//! Embedding constants for N = 2..6 and the randomized inequality suites.

use gasketvar::embedding::{AlphaBranch, EmbeddingConstants};
use gasketvar::verify::run_suites;

fn main() {
    println!("{:>3} {:>12} {:>6} {:>12}", "N", "sigma", "2N+3", "kappa(1/2)");
    for n in 2..=6 {
        let c = EmbeddingConstants::new(n, AlphaBranch::NonPositive, 0.0).unwrap();
        let limit = 1.0 / (c.morrey_constant * c.morrey_constant);
        let half = EmbeddingConstants::new(n, AlphaBranch::SmallIntegral, 0.5 * limit).unwrap();
        println!("{n:>3} {:>12.9} {:>6} {:>12.6}", c.sigma, c.morrey_constant, half.kappa);
    }
    for n in 2..=4 {
        let report = run_suites(n, 4, 200, 1, None).unwrap();
        println!("N = {n}, m = 4");
        for s in &report.suites {
            println!("  {:<30} worst {:.4e}  {}", s.name, s.worst, if s.passed() { "pass" } else { "FAIL" });
        }
    }
}
