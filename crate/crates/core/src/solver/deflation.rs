use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::mountain_pass::default_direction;
use super::{newton, sup_distance, DiscreteFunctional, Solution, SolutionKind, SolverError, SolverOptions};

/// Start vector number `index`: even indices are signed multiples of the
/// endpoint direction, odd ones are rough random fields. Magnitudes are
/// log-uniform up to twice the largest known solution.
fn start(func: &DiscreteFunctional, u0: &[f64], scale: f64, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    let magnitude = scale * 10f64.powf(-3.0 * rng.random::<f64>());
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    if index.is_multiple_of(2) {
        let peak = u0.iter().map(|v| v.abs()).fold(0.0, f64::max);
        u0.iter().map(|v| sign * magnitude * v / peak).collect()
    } else {
        let mut u = vec![0.0; func.dim()];
        for &i in func.form().interior() {
            u[i] = sign * magnitude * rng.random_range(-1.0..1.0);
        }
        u
    }
}

/// Newton iterations deflated away from `known`, from `opts.deflation_starts`
/// seeded starts. Returns the solution from the lowest-numbered successful
/// start, or `None`.
pub fn solve_newton_deflated(
    func: &DiscreteFunctional,
    known: &[Solution],
    opts: &SolverOptions,
) -> Result<Option<Solution>, SolverError> {
    let known_u: Vec<Vec<f64>> = known.iter().map(|s| s.u.clone()).collect();
    let u0 = default_direction(func);
    let scale = known.iter().map(|s| 2.0 * s.sup_norm).fold(1.0, f64::max);
    let found = (0..opts.deflation_starts).into_par_iter().find_map_first(|i| {
        let u = start(func, &u0, scale, opts.seed, i);
        let out = newton(func, &u, &known_u, opts.tol_residual, opts.newton_max_iter).ok()?;
        let fresh = known_u.iter().all(|k| sup_distance(k, &out.u) > opts.distinct_tol);
        (out.converged && fresh).then_some(out)
    });
    Ok(found.map(|out| Solution::new(func, SolutionKind::Deflated, out.u, None, out.log, opts.energy_dual)))
}

/// Repeats [`solve_newton_deflated`], adding each new solution to the known
/// set, until a search comes back empty or `max_new` were found.
pub fn deflated_sweep(
    func: &DiscreteFunctional,
    known: &[Solution],
    opts: &SolverOptions,
    max_new: usize,
) -> Result<Vec<Solution>, SolverError> {
    let mut all = known.to_vec();
    let mut new = Vec::new();
    while new.len() < max_new {
        match solve_newton_deflated(func, &all, opts)? {
            Some(s) => {
                all.push(s.clone());
                new.push(s);
            }
            None => break,
        }
    }
    Ok(new)
}
