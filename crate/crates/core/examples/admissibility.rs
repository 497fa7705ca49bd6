//! Hypothesis checks on a few weights and nonlinearities.

use gasketvar::gasket::build_level;
use gasketvar::problem::{AdmissibilityReport, AssessOptions, Nonlinearity, Weight};

fn main() {
    let level = build_level(3, 3).unwrap();
    let cases = [
        ("0", "-(t^3 + 1)"),
        ("-2", "-(t^3 + 1)*(1 + x1)"),
        ("0.005", "-(t^3 + 1)"),
        ("1", "-(t^3 + 1)"),
        ("0", "-t^3"),
        ("0", "-(t + 1)"),
        ("0", "-exp(-t^2) - 1"),
    ];
    let opts = AssessOptions { rho: Some(1.0), ..Default::default() };
    for (alpha, f) in cases {
        let w = Weight::from_expr(&level, alpha).unwrap();
        let p = Nonlinearity::parse(f, 2).unwrap().sample(&level);
        let r = AdmissibilityReport::assess(&level, &w, &p, &opts).unwrap();
        let verdict = r.failed.map_or("admissible".to_string(), |h| format!("fails {h}"));
        let ar = if r.ar.passed { format!("ν = {}, r0 = {}", r.ar.nu, r.ar.r0) } else { "no witness".into() };
        println!("α = {alpha:<6} f = {f:<22} {verdict:<12} AR: {ar}");
    }
}
