use super::{dot, newton, DiscreteFunctional, IterRecord, Metric, Solution, SolutionKind, SolverError, SolverOptions};

/// Relative distance to the sphere below which an iterate counts as on it.
const SPHERE_TOL: f64 = 1e-8;

/// Newton polish target relative to the residual tolerance.
const POLISH_FACTOR: f64 = 1e-6;

/// Minimizes `J_λ` over the ball `‖u‖_α ≤ sqrt(ϱ)` by projected gradient in the
/// `α`-metric, starting from zero.
///
/// Steps `u ← P(u − τλK⁻¹∇J)` with `P` the radial projection and `τ` halved
/// until the Armijo condition holds, so `J` never increases. A minimizer
/// strictly inside the ball is then polished by a few Newton steps.
pub fn solve_local_min(func: &DiscreteFunctional, rho: f64, opts: &SolverOptions) -> Result<Solution, SolverError> {
    if !(rho > 0.0) {
        return Err(SolverError::InvalidRadius(rho));
    }
    let radius = rho.sqrt();
    let metric = Metric::new(func)?;
    let project = |mut u: Vec<f64>| {
        let norm = func.norm_alpha(&u);
        if norm > radius {
            let s = radius / norm;
            for x in &mut u {
                *x *= s;
            }
        }
        u
    };

    let mut u = vec![0.0; func.dim()];
    let mut j = func.value(&u);
    let mut log = Vec::new();
    let mut tau: f64 = 1.0;
    let mut residual = f64::INFINITY;
    for it in 0..opts.max_iter {
        let g = func.gradient(&u);
        residual = func.residual_of(&g);
        if residual < opts.tol_residual {
            break;
        }
        let p = metric.precondition(&g);
        tau = (2.0 * tau).min(1.0);
        let mut accepted = None;
        for _ in 0..60 {
            let cand = project(u.iter().zip(&p).map(|(a, b)| a - tau * b).collect());
            let diff: Vec<f64> = cand.iter().zip(&u).map(|(a, b)| a - b).collect();
            let jc = func.value(&cand);
            if jc <= j + 1e-4 * dot(&g, &diff) && jc <= j {
                accepted = Some((cand, jc, diff));
                break;
            }
            tau *= 0.5;
        }
        let Some((cand, jc, diff)) = accepted else { break };
        let step = func.norm_alpha(&diff);
        u = cand;
        j = jc;
        log.push(IterRecord { phase: "projected-gradient", iter: it, functional: j, residual, step });
        if step <= opts.tol_step * (1.0 + func.norm_alpha(&u)) {
            residual = func.residual(&u);
            break;
        }
    }

    let on_sphere = func.norm_alpha(&u) >= radius * (1.0 - SPHERE_TOL);
    if on_sphere {
        return Err(SolverError::BoundaryStuck { radius, residual });
    }
    // projected gradient alone leaves an error far above the residual
    let polished = newton(func, &u, &[], opts.tol_residual * POLISH_FACTOR, 8)?;
    if polished.residual < residual && func.norm_alpha(&polished.u) < radius {
        u = polished.u;
        log.extend(polished.log);
    }
    let sol = Solution::new(func, SolutionKind::LocalMin, u, Some(rho), log, opts.energy_dual);
    if sol.residual >= opts.tol_residual {
        return Err(SolverError::NotConverged { stage: "local minimization", residual: sol.residual, tol: opts.tol_residual });
    }
    Ok(sol)
}
