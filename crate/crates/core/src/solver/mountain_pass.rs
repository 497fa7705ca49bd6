use rayon::prelude::*;

use super::{
    dot, first_eigen_direction, newton, solve_newton_deflated, sup_distance, DiscreteFunctional, IterRecord, Metric,
    Solution, SolutionKind, SolverError, SolverOptions,
};

const MAX_DOUBLINGS: u32 = 60;

/// Sweeps without a better highest node before the string is stopped.
const STALE_SWEEPS: usize = 25;

/// Direction `u0` for the path endpoint: the first eigen-direction of the
/// interior stiffness block, or the measure profile on interior vertices when
/// that is unavailable. Normalized to `‖u0‖_α = 1`.
pub fn default_direction(func: &DiscreteFunctional) -> Vec<f64> {
    match first_eigen_direction(func) {
        Ok((u, _)) if u.iter().all(|v| v.is_finite()) => u,
        _ => {
            let mut u = vec![0.0; func.dim()];
            for &i in func.form().interior() {
                u[i] = func.form().lumped()[i];
            }
            let norm = func.norm_alpha(&u);
            u.iter_mut().for_each(|x| *x /= norm);
            u
        }
    }
}

/// Smallest `t = 2^k` with `J(t·u0) < J(u1)`.
pub fn path_endpoint(func: &DiscreteFunctional, u0: &[f64], j1: f64) -> Result<Vec<f64>, SolverError> {
    for k in 0..=MAX_DOUBLINGS {
        let t = 2f64.powi(k as i32);
        let e: Vec<f64> = u0.iter().map(|v| t * v).collect();
        if func.value(&e) < j1 {
            return Ok(e);
        }
    }
    Err(SolverError::NoEndpoint { max_doublings: MAX_DOUBLINGS })
}

fn path_length(func: &DiscreteFunctional, nodes: &[Vec<f64>]) -> f64 {
    nodes
        .windows(2)
        .map(|w| {
            let d: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
            func.norm_alpha(&d)
        })
        .sum()
}

/// Redistributes interior nodes to equal `‖·‖_α` spacing along the polygon.
fn reparameterize(func: &DiscreteFunctional, nodes: &mut [Vec<f64>]) {
    let p = nodes.len();
    let mut cum = vec![0.0; p];
    for k in 1..p {
        let d: Vec<f64> = nodes[k].iter().zip(&nodes[k - 1]).map(|(a, b)| a - b).collect();
        cum[k] = cum[k - 1] + func.norm_alpha(&d);
    }
    let total = cum[p - 1];
    if !(total > 0.0) {
        return;
    }
    let old = nodes.to_vec();
    let mut seg = 0;
    for (k, node) in nodes.iter_mut().enumerate().take(p - 1).skip(1) {
        let target = total * k as f64 / (p - 1) as f64;
        while seg + 1 < p - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let w = if len > 0.0 { (target - cum[seg]) / len } else { 0.0 };
        for (i, x) in node.iter_mut().enumerate() {
            *x = (1.0 - w) * old[seg][i] + w * old[seg + 1][i];
        }
    }
}

/// One Armijo-backtracked descent step of a path node, moving it by at most
/// `max_move` in `‖·‖_α` so that no node jumps across the ridge.
fn descend(
    func: &DiscreteFunctional,
    metric: &Metric,
    u: &[f64],
    j: f64,
    tau: f64,
    max_move: f64,
) -> (Vec<f64>, f64, f64) {
    let g = func.gradient(u);
    let p = metric.precondition(&g);
    let slope = dot(&g, &p);
    let p_norm = func.norm_alpha(&p);
    let cap = if p_norm > 0.0 { max_move / p_norm } else { 1.0 };
    let mut tau = (2.0 * tau).min(1.0).min(cap);
    for _ in 0..50 {
        let cand: Vec<f64> = u.iter().zip(&p).map(|(a, b)| a - tau * b).collect();
        let jc = func.value(&cand);
        if jc <= j - 1e-4 * tau * slope {
            return (cand, jc, tau);
        }
        tau *= 0.5;
    }
    (u.to_vec(), j, tau)
}

struct PathResult {
    top: Vec<f64>,
    tangent: Vec<f64>,
    log: Vec<IterRecord>,
}

fn deform_path(
    func: &DiscreteFunctional,
    metric: &Metric,
    start: &[f64],
    end: &[f64],
    nodes: usize,
    opts: &SolverOptions,
) -> Result<PathResult, SolverError> {
    let p = nodes.max(3);
    let mut path: Vec<Vec<f64>> = (0..p)
        .map(|k| {
            let s = k as f64 / (p - 1) as f64;
            start.iter().zip(end).map(|(a, b)| (1.0 - s) * a + s * b).collect()
        })
        .collect();
    let mut values: Vec<f64> = path.iter().map(|u| func.value(u)).collect();
    let mut taus = vec![1.0; p];
    let mut log = Vec::new();
    let mut best: Option<(f64, PathResult)> = None;
    let mut stale = 0;
    for sweep in 0..opts.max_sweeps {
        let spacing = path_length(func, &path) / (p - 1) as f64;
        let updated: Vec<(Vec<f64>, f64, f64)> = (1..p - 1)
            .into_par_iter()
            .map(|k| descend(func, metric, &path[k], values[k], taus[k], 0.5 * spacing))
            .collect();
        for (k, (u, _, tau)) in updated.into_iter().enumerate() {
            path[k + 1] = u;
            taus[k + 1] = tau;
        }
        reparameterize(func, &mut path);
        values = path.par_iter().map(|u| func.value(u)).collect();
        let (top, jmax) = argmax(&values);
        let residual = func.residual(&path[top]);
        log.push(IterRecord { phase: "string", iter: sweep, functional: jmax, residual, step: taus[top] });
        if top > 0 && best.as_ref().is_none_or(|(r, _)| residual < *r) {
            let mut tangent: Vec<f64> = path[top + 1].iter().zip(&path[top - 1]).map(|(a, b)| a - b).collect();
            let norm = func.norm_alpha(&tangent);
            if norm > 0.0 {
                tangent.iter_mut().for_each(|x| *x /= norm);
            }
            best = Some((residual, PathResult { top: path[top].clone(), tangent, log: Vec::new() }));
            stale = 0;
        } else {
            stale += 1;
            if stale >= STALE_SWEEPS {
                break;
            }
        }
    }
    let (_, mut result) = best.ok_or(SolverError::PathCollapse)?;
    result.log = log;
    Ok(result)
}

fn argmax(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best })
}

/// Moves `u` uphill along `tangent` and downhill across it, keeping the iterate
/// with the smallest residual.
fn climb(
    func: &DiscreteFunctional,
    metric: &Metric,
    u: Vec<f64>,
    tangent: &[f64],
    iters: usize,
    log: &mut Vec<IterRecord>,
) -> Vec<f64> {
    let kt = func.apply_k(tangent);
    let mut best = (func.residual(&u), u.clone());
    let mut cur = u;
    let mut tau: f64 = 0.5;
    for it in 0..iters {
        let g = func.gradient(&cur);
        let p = metric.precondition(&g);
        let along = dot(&p, &kt);
        let d: Vec<f64> = p.iter().zip(tangent).map(|(a, t)| -a + 2.0 * along * t).collect();
        let cand: Vec<f64> = cur.iter().zip(&d).map(|(a, b)| a + tau * b).collect();
        let r = func.residual(&cand);
        if r < best.0 {
            best = (r, cand.clone());
            cur = cand;
            tau = (1.5 * tau).min(1.0);
        } else {
            tau *= 0.5;
            if tau < 1e-8 {
                break;
            }
        }
        log.push(IterRecord { phase: "climbing", iter: it, functional: func.value(&cur), residual: best.0, step: tau });
    }
    best.1
}

/// Second critical point of `J_λ` at the mountain-pass level between the
/// local minimizer `u1` and an endpoint `e = t·u0` below it.
///
/// The segment from `u1` to `e` is discretized into `path_nodes` nodes and
/// deformed by steepest descent in the `α`-metric with equal-arclength
/// reparameterization. The highest node is refined by climbing-image steps
/// and Newton. If Newton fails or returns to `u1`, deflated Newton takes over.
pub fn solve_mountain_pass(
    func: &DiscreteFunctional,
    u1: &Solution,
    direction: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<Solution, SolverError> {
    let metric = Metric::new(func)?;
    let u0 = match direction {
        Some(d) => d.to_vec(),
        None => default_direction(func),
    };
    let e = path_endpoint(func, &u0, u1.functional)?;
    let path = match deform_path(func, &metric, &u1.u, &e, opts.path_nodes, opts) {
        Err(SolverError::PathCollapse) => deform_path(func, &metric, &u1.u, &e, 2 * opts.path_nodes - 1, opts)?,
        other => other?,
    };
    let mut log = path.log;
    let start = climb(func, &metric, path.top, &path.tangent, 200, &mut log);
    let refined = newton(func, &start, &[], opts.tol_residual, opts.newton_max_iter)?;
    log.extend(refined.log.iter().copied());
    let distance = sup_distance(&refined.u, &u1.u);
    if refined.converged && distance > opts.distinct_tol {
        return Ok(Solution::new(func, SolutionKind::MountainPass, refined.u, None, log, opts.energy_dual));
    }
    let known = [u1.u.clone()];
    let deflated = newton(func, &start, &known, opts.tol_residual, opts.newton_max_iter)?;
    if deflated.converged && sup_distance(&deflated.u, &u1.u) > opts.distinct_tol {
        log.extend(deflated.log);
        return Ok(Solution::new(func, SolutionKind::MountainPass, deflated.u, None, log, opts.energy_dual));
    }
    let fallback_opts = SolverOptions { deflation_starts: opts.deflation_starts.max(32), ..opts.clone() };
    match solve_newton_deflated(func, std::slice::from_ref(u1), &fallback_opts)? {
        Some(mut s) => {
            log.extend(s.log);
            s.log = log;
            Ok(s)
        }
        None if refined.converged => Err(SolverError::NotDistinct { distance }),
        None => Err(SolverError::NotConverged {
            stage: "mountain-pass refinement",
            residual: refined.residual,
            tol: opts.tol_residual,
        }),
    }
}
