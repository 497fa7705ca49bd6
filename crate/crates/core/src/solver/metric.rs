use nalgebra::{Cholesky, DVector, Dyn};

use super::{gather, scatter, DiscreteFunctional, SolverError};

/// Riesz map of the `‖·‖_α` inner product, scaled by `λ` so that a unit step
/// along `−precondition(∇J)` is exact for the quadratic part of `J_λ`.
#[derive(Debug, Clone)]
pub struct Metric {
    chol: Cholesky<f64, Dyn>,
    interior: Vec<usize>,
    dim: usize,
    lambda: f64,
}

impl Metric {
    pub fn new(func: &DiscreteFunctional) -> Result<Self, SolverError> {
        let chol = func.k_interior().cholesky().ok_or(SolverError::NotPositiveDefinite)?;
        Ok(Self { chol, interior: func.form().interior().to_vec(), dim: func.dim(), lambda: func.lambda() })
    }

    /// `λ K⁻¹ g` on the interior, zero on the boundary.
    pub fn precondition(&self, g: &[f64]) -> Vec<f64> {
        let mut z = self.chol.solve(&gather(&self.interior, g));
        z *= self.lambda;
        scatter(&self.interior, &z, self.dim)
    }
}

/// Eigenvector of the interior block of `A` for its smallest eigenvalue, by
/// inverse iteration. Scaled to `‖u0‖_α = 1` and made positive in sum.
pub fn first_eigen_direction(func: &DiscreteFunctional) -> Result<(Vec<f64>, f64), SolverError> {
    let a = func.form().interior_dense();
    let k = a.nrows();
    let chol = a.clone().cholesky().ok_or(SolverError::NotPositiveDefinite)?;
    let mut v = DVector::from_element(k, 1.0 / (k as f64).sqrt());
    let mut eig = f64::NAN;
    for _ in 0..1000 {
        let mut w = chol.solve(&v);
        w /= w.norm();
        let rq = w.dot(&(&a * &w));
        let done = (rq - eig).abs() <= 1e-15 * rq.abs() && (&w - &v).norm() < 1e-12;
        v = w;
        eig = rq;
        if done {
            break;
        }
    }
    if v.sum() < 0.0 {
        v = -v;
    }
    let mut u = scatter(func.form().interior(), &v, func.dim());
    let norm = func.norm_alpha(&u);
    for x in &mut u {
        *x /= norm;
    }
    Ok((u, eig))
}
