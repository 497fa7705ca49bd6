//! The discrete functional `J_λ`, its gradient and Hessian, and the solvers
//! that locate its critical points.

mod deflation;
mod local_min;
mod metric;
mod mountain_pass;
mod newton;
mod pipeline;

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

pub use deflation::{deflated_sweep, solve_newton_deflated};
pub use local_min::solve_local_min;
pub use metric::{first_eigen_direction, Metric};
pub use mountain_pass::{default_direction, path_endpoint, solve_mountain_pass};
pub use newton::{newton, NewtonOutcome};
pub use pipeline::{two_solutions, SolveError, SolveReport};

use crate::energy::{EnergyError, EnergyForm};
use crate::problem::{Pointwise, Weight};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("λ = {0} must be positive and finite")]
    InvalidLambda(f64),
    #[error("ϱ = {0} must be positive")]
    InvalidRadius(f64),
    #[error("vector has {got} entries, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("A − diag(μα) restricted to the interior is not positive definite")]
    NotPositiveDefinite,
    #[error("iterate pinned to the sphere ‖u‖_α = {radius} (residual {residual:e}); λ is too large for this ϱ")]
    BoundaryStuck { radius: f64, residual: f64 },
    #[error("{stage} stopped at residual {residual:e} above tolerance {tol:e}")]
    NotConverged { stage: &'static str, residual: f64, tol: f64 },
    #[error("no endpoint t·u0 with J below J(u1) for t up to 2^{max_doublings}")]
    NoEndpoint { max_doublings: u32 },
    #[error("mountain-pass path collapsed onto the local minimizer")]
    PathCollapse,
    #[error("mountain-pass critical point coincides with the local minimizer (distance {distance:e})")]
    NotDistinct { distance: f64 },
    #[error("Hessian is singular at the starting point")]
    SingularJacobian,
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// Tolerances and budgets shared by all solvers.
#[derive(Debug, Clone, Serialize)]
pub struct SolverOptions {
    pub tol_residual: f64,
    pub tol_step: f64,
    /// Two solutions closer than this in sup norm count as one.
    pub distinct_tol: f64,
    pub max_iter: usize,
    pub newton_max_iter: usize,
    pub path_nodes: usize,
    pub max_sweeps: usize,
    /// Random starts for the deflated sweep; `0` skips it in the pipeline.
    pub deflation_starts: usize,
    pub seed: u64,
    /// Also report `sqrt(r·A⁻¹r)` for every solution.
    pub energy_dual: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_residual: 1e-8,
            tol_step: 1e-10,
            distinct_tol: 1e-3,
            max_iter: 2000,
            newton_max_iter: 100,
            path_nodes: 33,
            max_sweeps: 500,
            deflation_starts: 0,
            seed: 0,
            energy_dual: false,
        }
    }
}

/// `J_λ(u) = W_m(u)/(2λ) − Σ μ α u²/(2λ) + Σ μ F(x,u)` on one level.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteFunctional<'a> {
    form: &'a EnergyForm,
    alpha: &'a [f64],
    f: &'a Pointwise,
    lambda: f64,
}

impl<'a> DiscreteFunctional<'a> {
    pub fn new(form: &'a EnergyForm, weight: &'a Weight, f: &'a Pointwise, lambda: f64) -> Result<Self, SolverError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(SolverError::InvalidLambda(lambda));
        }
        if weight.values().len() != form.dim() {
            return Err(SolverError::Length { expected: form.dim(), got: weight.values().len() });
        }
        Ok(Self { form, alpha: weight.values(), f, lambda })
    }

    pub fn form(&self) -> &'a EnergyForm {
        self.form
    }

    pub fn alpha(&self) -> &'a [f64] {
        self.alpha
    }

    pub fn nonlinearity(&self) -> &'a Pointwise {
        self.f
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    fn check(&self, u: &[f64]) {
        assert_eq!(u.len(), self.dim(), "vector length does not match the level");
    }

    /// `Ku = Au − μαu` on every vertex.
    pub fn apply_k(&self, u: &[f64]) -> Vec<f64> {
        let mut out = self.form.apply(u);
        for (i, o) in out.iter_mut().enumerate() {
            *o -= self.form.lumped()[i] * self.alpha[i] * u[i];
        }
        out
    }

    /// `u·Kv`.
    pub fn alpha_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(u, &self.apply_k(v))
    }

    pub fn norm_alpha(&self, u: &[f64]) -> f64 {
        self.alpha_inner(u, u).max(0.0).sqrt()
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        self.check(u);
        let quad = self.alpha_inner(u, u);
        let mu = self.form.lumped();
        let pot: f64 = u.iter().enumerate().map(|(i, &t)| mu[i] * self.f.potential(i, t)).sum();
        quad / (2.0 * self.lambda) + pot
    }

    /// `((Au)_x − μ_x α(x) u(x))/λ + μ_x f(x,u(x))` at interior vertices, zero on
    /// the boundary.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        self.check(u);
        let ku = self.apply_k(u);
        let mu = self.form.lumped();
        let mut g = vec![0.0; u.len()];
        for &i in self.form.interior() {
            g[i] = ku[i] / self.lambda + mu[i] * self.f.f(i, u[i]);
        }
        g
    }

    /// `‖∇J‖₂ / sqrt(|V_m|)`.
    pub fn residual_of(&self, g: &[f64]) -> f64 {
        dot(g, g).sqrt() / (g.len() as f64).sqrt()
    }

    pub fn residual(&self, u: &[f64]) -> f64 {
        self.residual_of(&self.gradient(u))
    }

    /// `K/λ + diag(μ f_t(x,u))` on interior rows and columns.
    pub fn hessian(&self, u: &[f64]) -> DMatrix<f64> {
        self.check(u);
        let mut h = self.k_interior() / self.lambda;
        let mu = self.form.lumped();
        for (p, &i) in self.form.interior().iter().enumerate() {
            h[(p, p)] += mu[i] * self.f.df(i, u[i]);
        }
        h
    }

    /// `A − diag(μα)` on interior rows and columns.
    pub fn k_interior(&self) -> DMatrix<f64> {
        let mut k = self.form.interior_dense();
        let mu = self.form.lumped();
        for (p, &i) in self.form.interior().iter().enumerate() {
            k[(p, p)] -= mu[i] * self.alpha[i];
        }
        k
    }

    /// `sqrt(r·A⁻¹r)` with `r` the gradient restricted to the interior.
    pub fn energy_dual_residual(&self, u: &[f64]) -> Option<f64> {
        let g = self.gradient(u);
        let r = gather(self.form.interior(), &g);
        let chol = self.form.interior_dense().cholesky()?;
        let z = chol.solve(&r);
        Some(r.dot(&z).max(0.0).sqrt())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(crate) fn gather(idx: &[usize], full: &[f64]) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_iterator(idx.len(), idx.iter().map(|&i| full[i]))
}

pub(crate) fn scatter(idx: &[usize], v: &nalgebra::DVector<f64>, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (p, &i) in idx.iter().enumerate() {
        out[i] = v[p];
    }
    out
}

/// How a solution was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionKind {
    LocalMin,
    MountainPass,
    Deflated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterRecord {
    pub phase: &'static str,
    pub iter: usize,
    pub functional: f64,
    pub residual: f64,
    pub step: f64,
}

/// A critical point of `J_λ` with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub kind: SolutionKind,
    #[serde(skip)]
    pub u: Vec<f64>,
    pub residual: f64,
    pub energy_dual_residual: Option<f64>,
    pub functional: f64,
    pub norm_alpha: f64,
    pub sup_norm: f64,
    /// `‖u‖_α < sqrt(ϱ)`, when a radius applies.
    pub in_ball: Option<bool>,
    pub log: Vec<IterRecord>,
}

impl Solution {
    pub(crate) fn new(
        func: &DiscreteFunctional,
        kind: SolutionKind,
        u: Vec<f64>,
        rho: Option<f64>,
        log: Vec<IterRecord>,
        energy_dual: bool,
    ) -> Self {
        let norm = func.norm_alpha(&u);
        Self {
            kind,
            residual: func.residual(&u),
            energy_dual_residual: if energy_dual { func.energy_dual_residual(&u) } else { None },
            functional: func.value(&u),
            norm_alpha: norm,
            sup_norm: u.iter().map(|v| v.abs()).fold(0.0, f64::max),
            in_ball: rho.map(|r| norm < r.sqrt()),
            u,
            log,
        }
    }
}
