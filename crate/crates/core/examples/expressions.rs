//! Parsing nonlinearities and weights; symbolic against quadrature potentials.

use gasketvar::problem::Nonlinearity;

fn main() {
    let x = [0.25, 0.1];
    for text in ["-(t^3 + 1)", "-(1 + x1)*(t^3 + 1)", "-t*abs(t) - 2", "-exp(t) - t^3", "-(t^5 + sin(t) + 1)"] {
        let f = Nonlinearity::parse(text, 2).unwrap();
        println!("{text}  (depends on x: {}, closed-form F: {})", f.depends_on_x(), f.has_closed_form_potential());
        for t in [-2.0, 0.5, 3.0] {
            println!(
                "  t = {t:>4}: f = {:>12.6e}  F = {:>12.6e}  F by quadrature = {:>12.6e}",
                f.f(&x, t),
                f.potential(&x, t),
                f.potential_by_quadrature(&x, t)
            );
        }
    }
    for bad in ["-(t^3 +", "-t^3 + y", "sqrt"] {
        println!("{bad:<10} -> {}", Nonlinearity::parse(bad, 2).unwrap_err());
    }
}
