use super::{dot, gather, scatter, DiscreteFunctional, IterRecord, SolverError};

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    /// Iterate with the smallest residual seen.
    pub u: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub log: Vec<IterRecord>,
}

/// `Π_k (1/‖u − u_k‖_α² + 1)` and the gradient of its logarithm.
fn deflation(func: &DiscreteFunctional, u: &[f64], known: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let mut m = 1.0;
    let mut grad = vec![0.0; u.len()];
    for k in known {
        let diff: Vec<f64> = u.iter().zip(k).map(|(a, b)| a - b).collect();
        let kd = func.apply_k(&diff);
        let d2 = dot(&diff, &kd).max(f64::MIN_POSITIVE);
        m *= 1.0 / d2 + 1.0;
        let c = -2.0 / (d2 * (1.0 + d2));
        for (g, x) in grad.iter_mut().zip(&kd) {
            *g += c * x;
        }
    }
    (m, grad)
}

/// Damped Newton on `∇J = 0` from `u0`, deflated away from `known`.
///
/// With deflation the step solves for the root of `m(u)∇J(u)`, obtained from the
/// plain Newton step `δ` as `δ / (1 − ∇ln m · δ)`. Backtracking accepts the first
/// step that decreases `m(u)·residual(u)`.
pub fn newton(
    func: &DiscreteFunctional,
    u0: &[f64],
    known: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<NewtonOutcome, SolverError> {
    let interior = func.form().interior();
    let n = func.dim();
    let merit = |u: &[f64]| {
        let r = func.residual(u);
        if known.is_empty() {
            r
        } else {
            deflation(func, u, known).0 * r
        }
    };
    let mut u = u0.to_vec();
    let mut log = Vec::new();
    let mut best = (f64::INFINITY, u.clone());
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..=max_iter {
        let g = func.gradient(&u);
        let r = func.residual_of(&g);
        if r < best.0 {
            best = (r, u.clone());
        }
        if r < tol {
            converged = true;
            break;
        }
        if it == max_iter {
            break;
        }
        iterations = it + 1;
        let Some(step) = func.hessian(&u).lu().solve(&gather(interior, &g)) else {
            if it == 0 {
                return Err(SolverError::SingularJacobian);
            }
            break;
        };
        let mut delta = scatter(interior, &(-step), n);
        if !known.is_empty() {
            let (_, grad_ln) = deflation(func, &u, known);
            let denom = 1.0 - dot(&grad_ln, &delta);
            if denom.abs() > 1e-300 {
                for d in &mut delta {
                    *d /= denom;
                }
            }
        }
        let current = merit(&u);
        let mut accepted = None;
        let mut tau = 1.0;
        for _ in 0..40 {
            let cand: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + tau * d).collect();
            let value = merit(&cand);
            if value < current {
                accepted = Some((cand, tau));
                break;
            }
            tau *= 0.5;
        }
        let Some((next, tau)) = accepted else { break };
        u = next;
        log.push(IterRecord { phase: "newton", iter: it, functional: func.value(&u), residual: func.residual(&u), step: tau });
        if !u.iter().all(|v| v.is_finite()) {
            break;
        }
    }
    Ok(NewtonOutcome { u: best.1, residual: best.0, iterations, converged, log })
}
