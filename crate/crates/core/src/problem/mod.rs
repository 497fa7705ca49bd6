//! The data of the boundary value problem: the weight `α`, the nonlinearity
//! `f` with its potential `F(x,t) = ∫_0^t f(x,s) ds`, the hypotheses they must
//! satisfy and the admissible range of the parameter `λ`.

pub mod expr;
mod hypotheses;
mod lambda;

use serde::Serialize;
use thiserror::Error;

pub use expr::{Expr, ExprError, Vars};
pub use hypotheses::{
    check_alpha, check_ar, check_f0, check_f1, search_ar, AdmissibilityReport, AlphaCheck, ArCheck, ArClause,
    ArGrid, ArViolation, ArWitness, AssessOptions, F0Check, F1Check, Hypothesis, F0_ZERO_TOL, F1_REL_TOL,
};
pub use lambda::{lambda_bound, lambda_star, LambdaBound, LambdaStar, LambdaStarOptions, DEFAULT_GRID_POINTS};

use crate::embedding::EmbeddingError;
use crate::gasket::GasketLevel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error(transparent)]
    Parse(#[from] ExprError),
    #[error("weight has {got} values, level has {expected} vertices")]
    WeightLength { expected: usize, got: usize },
    #[error("invalid AR witness: {0}")]
    InvalidWitness(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("λ bound undefined: max |F| vanishes on the search box")]
    UndefinedBound,
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// Parameters of the model family `f(x,t) = −a(x)(t^p + c)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFamily {
    pub a_expr: String,
    pub p: u32,
    pub c: f64,
}

/// A continuous nonlinearity `f(x,t)` with its derivative in `t` and its
/// potential.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    source: String,
    f: Expr,
    df: Expr,
    /// Coefficients of `f` in powers of `t`, when `f` is polynomial in `t`.
    poly: Option<Vec<Expr>>,
    model: Option<ModelFamily>,
    dim: usize,
}

impl Nonlinearity {
    /// Parses `f` over `t` and `x1..x_dim`.
    pub fn parse(text: &str, dim: usize) -> Result<Self, ProblemError> {
        let f = expr::parse(text, Vars { dim, allow_t: true })?;
        Ok(Self::from_expr(text.to_string(), f, dim))
    }

    /// `f(x,t) = −a(x)(t^p + c)` with `a` given as an expression in `x`.
    pub fn model(a_expr: &str, p: u32, c: f64, dim: usize) -> Result<Self, ProblemError> {
        let a = expr::parse(a_expr, Vars { dim, allow_t: false })?;
        let f = Expr::Neg(Box::new(Expr::Mul(
            Box::new(a),
            Box::new(Expr::Add(Box::new(Expr::Pow(Box::new(Expr::T), p)), Box::new(Expr::Num(c)))),
        )));
        let mut nl = Self::from_expr(format!("-({a_expr})*(t^{p} + {c})"), f, dim);
        nl.model = Some(ModelFamily { a_expr: a_expr.to_string(), p, c });
        Ok(nl)
    }

    fn from_expr(source: String, f: Expr, dim: usize) -> Self {
        let df = f.diff_t();
        let poly = f.as_poly_in_t();
        Self { source, f, df, poly, model: None, dim }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn model_family(&self) -> Option<&ModelFamily> {
        self.model.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depends_on_x(&self) -> bool {
        self.f.depends_on_x()
    }

    pub fn has_closed_form_potential(&self) -> bool {
        self.poly.is_some()
    }

    pub fn f(&self, x: &[f64], t: f64) -> f64 {
        self.f.eval(t, x)
    }

    pub fn df_dt(&self, x: &[f64], t: f64) -> f64 {
        self.df.eval(t, x)
    }

    /// `F(x,t)`: exact antiderivative for polynomial `f`, quadrature otherwise.
    pub fn potential(&self, x: &[f64], t: f64) -> f64 {
        match &self.poly {
            Some(coeffs) => {
                let c: Vec<f64> = coeffs.iter().map(|e| e.eval(0.0, x)).collect();
                eval_antiderivative(&c, t)
            }
            None => self.potential_by_quadrature(x, t),
        }
    }

    /// `F(x,t)` by adaptive Simpson quadrature regardless of the form of `f`.
    pub fn potential_by_quadrature(&self, x: &[f64], t: f64) -> f64 {
        adaptive_simpson(&|s| self.f.eval(s, x), 0.0, t, 1e-13)
    }

    /// Evaluator bound to the vertices of `level`.
    pub fn sample(&self, level: &GasketLevel) -> Pointwise {
        let coords = level.coords();
        let (profiles, profile_of) = if self.depends_on_x() {
            (coords.iter().map(|x| self.profile(x)).collect(), (0..coords.len()).collect())
        } else {
            (vec![self.profile(&coords[0])], vec![0; coords.len()])
        };
        Pointwise { nl: self.clone(), profiles, profile_of }
    }

    fn profile(&self, x: &[f64]) -> Profile {
        let poly = self.poly.as_ref().map(|coeffs| {
            let f: Vec<f64> = coeffs.iter().map(|e| e.eval(0.0, x)).collect();
            let df: Vec<f64> = f.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
            let big_f: Vec<f64> = std::iter::once(0.0)
                .chain(f.iter().enumerate().map(|(k, c)| c / (k as f64 + 1.0)))
                .collect();
            PolyProfile { f, df, big_f }
        });
        Profile { x: x.to_vec(), poly }
    }
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, k| acc * t + k)
}

fn eval_antiderivative(c: &[f64], t: f64) -> f64 {
    t * c.iter().enumerate().rev().fold(0.0, |acc, (k, ck)| acc * t + ck / (k as f64 + 1.0))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(fa, fm, fb, a, b);
    let scale = whole.abs().max(1.0);
    rec(f, a, b, fa, fm, fb, whole, tol * scale, 40)
}

#[derive(Debug, Clone)]
struct PolyProfile {
    f: Vec<f64>,
    df: Vec<f64>,
    big_f: Vec<f64>,
}

/// `f` frozen at one point `x`.
#[derive(Debug, Clone)]
pub struct Profile {
    x: Vec<f64>,
    poly: Option<PolyProfile>,
}

impl Profile {
    pub fn x(&self) -> &[f64] {
        &self.x
    }
}

/// A nonlinearity evaluated at the vertices of one level. When `f` does not
/// depend on `x` all vertices share a single profile.
#[derive(Debug, Clone)]
pub struct Pointwise {
    nl: Nonlinearity,
    profiles: Vec<Profile>,
    profile_of: Vec<usize>,
}

impl Pointwise {
    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nl
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    /// A vertex carrying profile `p`.
    pub fn representative(&self, p: usize) -> usize {
        self.profile_of.iter().position(|&q| q == p).unwrap_or(0)
    }

    pub fn profile_f(&self, p: &Profile, t: f64) -> f64 {
        match &p.poly {
            Some(c) => horner(&c.f, t),
            None => self.nl.f(&p.x, t),
        }
    }

    pub fn profile_df(&self, p: &Profile, t: f64) -> f64 {
        match &p.poly {
            Some(c) => horner(&c.df, t),
            None => self.nl.df_dt(&p.x, t),
        }
    }

    pub fn profile_potential(&self, p: &Profile, t: f64) -> f64 {
        match &p.poly {
            Some(c) => horner(&c.big_f, t),
            None => self.nl.potential(&p.x, t),
        }
    }

    pub fn f(&self, v: usize, t: f64) -> f64 {
        self.profile_f(&self.profiles[self.profile_of[v]], t)
    }

    pub fn df(&self, v: usize, t: f64) -> f64 {
        self.profile_df(&self.profiles[self.profile_of[v]], t)
    }

    pub fn potential(&self, v: usize, t: f64) -> f64 {
        self.profile_potential(&self.profiles[self.profile_of[v]], t)
    }
}

/// Maximum of `|g|` on `[lo, hi]` from a uniform grid, refined by bisection
/// wherever `dg` changes sign between grid points. Returns `(value, argmax)`.
pub(crate) fn max_abs_refined(
    g: &dyn Fn(f64) -> f64,
    dg: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> (f64, f64) {
    let points = points.max(2);
    let step = (hi - lo) / (points - 1) as f64;
    let at = |k: usize| if k + 1 == points { hi } else { lo + step * k as f64 };
    let mut best = (g(lo).abs(), lo);
    let mut prev_t = lo;
    let mut prev_d = dg(lo);
    for k in 1..points {
        let t = at(k);
        let v = g(t).abs();
        if v > best.0 {
            best = (v, t);
        }
        let d = dg(t);
        if prev_d != 0.0 && d != 0.0 && (prev_d < 0.0) != (d < 0.0) {
            let (mut a, mut b, mut da) = (prev_t, t, prev_d);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                let dm = dg(mid);
                if dm == 0.0 || mid == a || mid == b {
                    a = mid;
                    b = mid;
                    break;
                }
                if (dm < 0.0) == (da < 0.0) {
                    a = mid;
                    da = dm;
                } else {
                    b = mid;
                }
            }
            let s = 0.5 * (a + b);
            let v = g(s).abs();
            if v > best.0 {
                best = (v, s);
            }
        }
        prev_t = t;
        prev_d = d;
    }
    best
}

/// Which rule produced a weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightSource {
    Values,
    Expr(String),
}

/// The weight `α` sampled at the vertices of the working level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weight {
    source: WeightSource,
    values: Vec<f64>,
    abs_integral: f64,
}

impl Weight {
    pub fn zero(level: &GasketLevel) -> Self {
        Self::from_values(level, vec![0.0; level.num_vertices()]).expect("length matches")
    }

    pub fn constant(level: &GasketLevel, c: f64) -> Self {
        Self::from_values(level, vec![c; level.num_vertices()]).expect("length matches")
    }

    pub fn from_values(level: &GasketLevel, values: Vec<f64>) -> Result<Self, ProblemError> {
        if values.len() != level.num_vertices() {
            return Err(ProblemError::WeightLength { expected: level.num_vertices(), got: values.len() });
        }
        let abs_integral = level.measure().iter().zip(&values).map(|(m, a)| m * a.abs()).sum();
        Ok(Self { source: WeightSource::Values, values, abs_integral })
    }

    /// Evaluates an expression in `x1..x_{N-1}` at every vertex.
    pub fn from_expr(level: &GasketLevel, text: &str) -> Result<Self, ProblemError> {
        let e = expr::parse(text, Vars { dim: level.n() - 1, allow_t: false })?;
        let values = level.coords().iter().map(|x| e.eval(0.0, x)).collect();
        let mut w = Self::from_values(level, values)?;
        w.source = WeightSource::Expr(text.to_string());
        Ok(w)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> &WeightSource {
        &self.source
    }

    /// `Σ_x μ_x |α(x)|`.
    pub fn abs_integral(&self) -> f64 {
        self.abs_integral
    }
}
