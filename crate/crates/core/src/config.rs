//! Problem configuration files and the assembled problem they describe.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::EnergyForm;
use crate::gasket::{build_level, GasketError, GasketLevel};
use crate::problem::{ArGrid, AssessOptions, LambdaStarOptions, Nonlinearity, Pointwise, ProblemError, Weight};
use crate::solver::{DiscreteFunctional, SolverError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config is missing `{0}`")]
    Missing(&'static str),
    #[error(transparent)]
    Gasket(#[from] GasketError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaConfig {
    Expr(String),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub a_expr: String,
    #[serde(default = "default_power")]
    pub p: u32,
    #[serde(default = "default_shift")]
    pub c: f64,
}

fn default_power() -> u32 {
    3
}

fn default_shift() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FConfig {
    Expr(String),
    Model(ModelConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArConfig {
    pub nu: f64,
    pub r0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct F1Config {
    #[serde(rename = "M0")]
    pub m0: f64,
    pub beta: f64,
}

/// `{N, m, alpha: {expr|values}, f: {expr|model}, lambda, rho, ar, f1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: u32,
    #[serde(default)]
    pub alpha: Option<AlphaConfig>,
    pub f: FConfig,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub ar: Option<ArConfig>,
    #[serde(default)]
    pub f1: Option<F1Config>,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity, ConfigError> {
        let dim = self.n.saturating_sub(1);
        Ok(match &self.f {
            FConfig::Expr(e) => Nonlinearity::parse(e, dim)?,
            FConfig::Model(m) => Nonlinearity::model(&m.a_expr, m.p, m.c, dim)?,
        })
    }

    /// Builds the level (or `level` in place of `m`) and everything on it.
    pub fn build(&self, level: Option<u32>) -> Result<Problem, ConfigError> {
        let level = build_level(self.n, level.unwrap_or(self.m))?;
        let weight = match &self.alpha {
            None => Weight::zero(&level),
            Some(AlphaConfig::Expr(e)) => Weight::from_expr(&level, e)?,
            Some(AlphaConfig::Values(v)) => Weight::from_values(&level, v.clone())?,
        };
        let mut p = Problem::new(level, weight, &self.nonlinearity()?);
        p.lambda = self.lambda;
        p.rho = self.rho;
        p.ar = self.ar.map(|a| (a.nu, a.r0));
        p.f1 = self.f1.map(|c| (c.m0, c.beta));
        Ok(p)
    }
}

/// A level with its energy form, weight and sampled nonlinearity, plus the
/// scalar parameters of a run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub level: GasketLevel,
    pub form: EnergyForm,
    pub weight: Weight,
    pub f: Pointwise,
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
    pub ar: Option<(f64, f64)>,
    pub f1: Option<(f64, f64)>,
}

impl Problem {
    pub fn new(level: GasketLevel, weight: Weight, f: &Nonlinearity) -> Self {
        let form = EnergyForm::assemble(&level);
        let f = f.sample(&level);
        Self { level, form, weight, f, lambda: None, rho: None, ar: None, f1: None }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = Some(rho);
        self
    }

    pub fn with_ar(mut self, nu: f64, r0: f64) -> Self {
        self.ar = Some((nu, r0));
        self
    }

    pub fn with_f1(mut self, m0: f64, beta: f64) -> Self {
        self.f1 = Some((m0, beta));
        self
    }

    pub fn functional(&self, lambda: f64) -> Result<DiscreteFunctional<'_>, SolverError> {
        DiscreteFunctional::new(&self.form, &self.weight, &self.f, lambda)
    }

    pub fn assess_options(&self) -> AssessOptions {
        AssessOptions {
            rho: self.rho,
            ar: self.ar,
            ar_grid: ArGrid::default(),
            f1: self.f1,
            lambda_star: LambdaStarOptions::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        let c = ProblemConfig::from_json(
            r#"{"N": 3, "m": 2, "alpha": {"expr": "0"}, "f": {"model": {"a_expr": "1", "p": 3, "c": 1}},
                "lambda": 1e-4, "rho": 1, "ar": {"nu": 3, "r0": 2}, "f1": {"M0": 1, "beta": 1}}"#,
        )
        .unwrap();
        let p = c.build(None).unwrap();
        assert_eq!(p.level.num_vertices(), 15);
        assert_eq!((p.lambda, p.rho, p.ar, p.f1), (Some(1e-4), Some(1.0), Some((3.0, 2.0)), Some((1.0, 1.0))));
        let c = ProblemConfig::from_json(r#"{"N": 2, "m": 3, "alpha": {"values": [0,0,0,0,0,0,0,0,0]}, "f": {"expr": "-1"}}"#)
            .unwrap();
        assert_eq!(c.build(Some(1)).unwrap_err().to_string(), "weight has 9 values, level has 3 vertices");
        assert!(c.build(None).is_ok());
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(ProblemConfig::from_json(r#"{"N": 3, "m": 2, "f": {"expr": "-1"}, "mu": 2}"#).is_err());
        assert!(matches!(
            ProblemConfig::from_json(r#"{"N": 3, "m": 2, "f": {"expr": "-(t^"}}"#).unwrap().build(None),
            Err(ConfigError::Problem(_))
        ));
    }
}
