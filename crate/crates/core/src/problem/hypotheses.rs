use rayon::prelude::*;
use serde::Serialize;

use super::lambda::{lambda_bound, lambda_star, LambdaBound, LambdaStar, LambdaStarOptions, DEFAULT_GRID_POINTS};
use super::{max_abs_refined, Pointwise, ProblemError, Weight};
use crate::embedding::{kappa, morrey_constant, AlphaBranch};
use crate::gasket::GasketLevel;

/// `f(x,0)` closer to zero than this counts as vanishing.
pub const F0_ZERO_TOL: f64 = 1e-14;

/// Relative slack when comparing `max|f|` with the growth bound, so that a
/// configuration sitting exactly on the bound is not rejected by rounding.
pub const F1_REL_TOL: f64 = 1e-12;

/// The hypotheses that can fail, named by what they constrain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    /// Sign or smallness of the weight.
    Alpha,
    /// `f(x,0) ≠ 0`.
    F0,
    /// Ambrosetti–Rabinowitz growth.
    Ar,
    /// Small `|f|` on `[−M0, M0]`.
    F1,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Hypothesis::Alpha => "alpha",
            Hypothesis::F0 => "f0",
            Hypothesis::Ar => "ar",
            Hypothesis::F1 => "f1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaCheck {
    /// `None` when the weight is inadmissible.
    pub branch: Option<AlphaBranch>,
    pub abs_integral: f64,
    pub limit: f64,
    pub max_value: f64,
    pub max_vertex: usize,
    /// How the almost-everywhere sign condition was read on the mesh.
    pub convention: &'static str,
}

impl AlphaCheck {
    pub fn passed(&self) -> bool {
        self.branch.is_some()
    }
}

pub fn check_alpha(weight: &Weight, level: &GasketLevel) -> AlphaCheck {
    let (max_vertex, max_value) = weight
        .values()
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, a)| if a > best.1 { (i, a) } else { best });
    let c = morrey_constant(level.n());
    let limit = 1.0 / (c * c);
    let branch = if max_value <= 0.0 {
        Some(AlphaBranch::NonPositive)
    } else if weight.abs_integral() < limit {
        Some(AlphaBranch::SmallIntegral)
    } else {
        None
    };
    AlphaCheck {
        branch,
        abs_integral: weight.abs_integral(),
        limit,
        max_value,
        max_vertex,
        convention: "sign checked at every vertex of the working level",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F0Check {
    pub passed: bool,
    /// Vertex where `|f(x,0)|` is smallest.
    pub worst_vertex: usize,
    pub min_abs: f64,
}

pub fn check_f0(f: &Pointwise) -> F0Check {
    let (p, min_abs) = f
        .profiles()
        .iter()
        .enumerate()
        .map(|(i, pr)| (i, f.profile_f(pr, 0.0).abs()))
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 || v.is_nan() { (i, v) } else { best });
    F0Check { passed: min_abs > F0_ZERO_TOL, worst_vertex: f.representative(p), min_abs }
}

/// Sampling of `[−T, −r0] ∪ [r0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArGrid {
    /// `T` as a multiple of `r0`.
    pub t_max_factor: f64,
    /// Points per half-line, endpoints included.
    pub points: usize,
}

impl Default for ArGrid {
    fn default() -> Self {
        Self { t_max_factor: 10.0, points: 4097 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArWitness {
    pub nu: f64,
    pub r0: f64,
    /// `F(x,t) ≤ −b1|t|^ν + b2` for all `x`, `t`.
    pub b1: f64,
    pub b2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArClause {
    /// `t f(x,t) ≤ ν F(x,t)`.
    Ordering,
    /// `F(x,t) < 0`.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArViolation {
    pub clause: ArClause,
    pub vertex: usize,
    pub t: f64,
    pub t_f: f64,
    pub potential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArCheck {
    pub passed: bool,
    pub nu: f64,
    pub r0: f64,
    pub grid: ArGrid,
    pub witness: Option<ArWitness>,
    pub violation: Option<ArViolation>,
    /// Whether `(ν, r0)` came from the automatic search.
    pub searched: bool,
}

pub fn check_ar(f: &Pointwise, nu: f64, r0: f64, grid: ArGrid) -> Result<ArCheck, ProblemError> {
    if !(nu > 2.0) {
        return Err(ProblemError::InvalidWitness(format!("ν = {nu} must exceed 2")));
    }
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(ProblemError::InvalidWitness(format!("r0 = {r0} must be positive")));
    }
    if grid.points < 2 || !(grid.t_max_factor > 1.0) {
        return Err(ProblemError::InvalidParameter("AR grid needs ≥ 2 points and T > r0".into()));
    }
    let t_max = grid.t_max_factor * r0;
    let step = (t_max - r0) / (grid.points - 1) as f64;
    let ts: Vec<f64> = (0..grid.points)
        .map(|k| if k + 1 == grid.points { t_max } else { r0 + step * k as f64 })
        .collect();

    let violation = f
        .profiles()
        .par_iter()
        .enumerate()
        .find_map_first(|(p, pr)| {
            for &t0 in &ts {
                for t in [-t0, t0] {
                    let big_f = f.profile_potential(pr, t);
                    let t_f = t * f.profile_f(pr, t);
                    let clause = if !(big_f < 0.0) {
                        ArClause::Negative
                    } else if !(t_f <= nu * big_f) {
                        ArClause::Ordering
                    } else {
                        continue;
                    };
                    return Some(ArViolation { clause, vertex: p, t, t_f, potential: big_f });
                }
            }
            None
        })
        .map(|mut v| {
            v.vertex = f.representative(v.vertex);
            v
        });

    let witness = violation.is_none().then(|| {
        let b1 = f
            .profiles()
            .iter()
            .map(|pr| (-f.profile_potential(pr, r0)).min(-f.profile_potential(pr, -r0)))
            .fold(f64::INFINITY, f64::min)
            / r0.powf(nu);
        let inner = f
            .profiles()
            .iter()
            .map(|pr| {
                max_abs_refined(
                    &|t| f.profile_potential(pr, t),
                    &|t| f.profile_f(pr, t),
                    -r0,
                    r0,
                    DEFAULT_GRID_POINTS,
                )
                .0
            })
            .fold(0.0, f64::max);
        ArWitness { nu, r0, b1, b2: inner + b1 * r0.powf(nu) }
    });
    Ok(ArCheck { passed: violation.is_none(), nu, r0, grid, witness, violation, searched: false })
}

/// Looks for some `(ν, r0)` that passes [`check_ar`]: `r0` runs over powers of
/// two from 1/4 to 1024, `ν` over `2.25, 2.5, …, 8` from the top down.
/// Returns the check for the smallest passing `r0`, or the last failure.
pub fn search_ar(f: &Pointwise, grid: ArGrid) -> ArCheck {
    let mut last = None;
    for j in -2..=10 {
        let r0 = 2f64.powi(j);
        for k in (1..=24).rev() {
            let nu = 2.0 + 0.25 * k as f64;
            let mut c = check_ar(f, nu, r0, grid).expect("search parameters are valid");
            c.searched = true;
            if c.passed {
                return c;
            }
            last = Some(c);
        }
    }
    last.expect("search is non-empty")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F1Check {
    pub passed: bool,
    #[serde(rename = "M0")]
    pub m0: f64,
    pub beta: f64,
    pub max_abs_f: f64,
    /// `M0 / (2(β+1)(2N+3)²)`.
    pub bound: f64,
    pub worst_vertex: usize,
    pub worst_t: f64,
    pub grid_points: usize,
}

pub fn check_f1(f: &Pointwise, m0: f64, beta: f64, n: usize, points: usize) -> Result<F1Check, ProblemError> {
    if !(m0 > 0.0) || !(beta > 0.0) {
        return Err(ProblemError::InvalidParameter(format!("M0 = {m0} and β = {beta} must be positive")));
    }
    let c = morrey_constant(n);
    let bound = m0 / (2.0 * (beta + 1.0) * c * c);
    let (p, max_abs_f, worst_t) = f
        .profiles()
        .par_iter()
        .enumerate()
        .map(|(p, pr)| {
            let (v, t) = max_abs_refined(&|t| f.profile_f(pr, t), &|t| f.profile_df(pr, t), -m0, m0, points);
            (p, v, t)
        })
        .reduce(|| (0, f64::NEG_INFINITY, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    Ok(F1Check {
        passed: max_abs_f <= bound * (1.0 + F1_REL_TOL),
        m0,
        beta,
        max_abs_f,
        bound,
        worst_vertex: f.representative(p),
        worst_t,
        grid_points: points,
    })
}

/// Inputs to [`AdmissibilityReport::assess`] beyond the level, weight and `f`.
#[derive(Debug, Clone, Default)]
pub struct AssessOptions {
    pub rho: Option<f64>,
    /// Declared `(ν, r0)`; searched for when absent.
    pub ar: Option<(f64, f64)>,
    pub ar_grid: ArGrid,
    /// `(M0, β)` when the small-growth variant is requested.
    pub f1: Option<(f64, f64)>,
    pub lambda_star: LambdaStarOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub alpha: AlphaCheck,
    pub f0: F0Check,
    pub ar: ArCheck,
    pub f1: Option<F1Check>,
    pub kappa: Option<f64>,
    pub lambda_bound: Option<LambdaBound>,
    pub lambda_star: Option<LambdaStar>,
    pub failed: Option<Hypothesis>,
}

impl AdmissibilityReport {
    pub fn assess(
        level: &GasketLevel,
        weight: &Weight,
        f: &Pointwise,
        opts: &AssessOptions,
    ) -> Result<Self, ProblemError> {
        let alpha = check_alpha(weight, level);
        let f0 = check_f0(f);
        let ar = match opts.ar {
            Some((nu, r0)) => check_ar(f, nu, r0, opts.ar_grid)?,
            None => search_ar(f, opts.ar_grid),
        };
        let f1 = opts
            .f1
            .map(|(m0, beta)| check_f1(f, m0, beta, level.n(), DEFAULT_GRID_POINTS))
            .transpose()?;
        let failed = if !alpha.passed() {
            Some(Hypothesis::Alpha)
        } else if !f0.passed {
            Some(Hypothesis::F0)
        } else if !ar.passed {
            Some(Hypothesis::Ar)
        } else if f1.as_ref().is_some_and(|c| !c.passed) {
            Some(Hypothesis::F1)
        } else {
            None
        };
        let kappa = alpha.branch.map(|b| kappa(level.n(), b, alpha.abs_integral)).transpose()?;
        let (lambda_bound, lambda_star) = match (kappa, failed) {
            (Some(k), None) => (
                opts.rho.map(|rho| lambda_bound(f, k, rho, DEFAULT_GRID_POINTS)).transpose()?,
                Some(lambda_star(f, k, &opts.lambda_star)),
            ),
            _ => (None, None),
        };
        Ok(Self { alpha, f0, ar, f1, kappa, lambda_bound, lambda_star, failed })
    }

    pub fn passed(&self) -> bool {
        self.failed.is_none()
    }
}
