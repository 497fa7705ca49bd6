//! Hölder exponent, the Morrey constant `2N+3`, the embedding constant `κ`
//! and numerical checks of the Morrey and sup-norm inequalities.

use rand::seq::index::sample;
use rayon::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::energy::{DiscreteFunction, EnergyError, EnergyForm};
use crate::gasket::GasketLevel;

/// Largest vertex count for which [`morrey_ratio`] enumerates all pairs.
pub const FULL_PAIR_LIMIT: usize = 20_000;

/// Largest vertex count for which a [`PairTable`] stores all pairs.
pub const TABLE_PAIR_LIMIT: usize = 3_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("weight is inadmissible: ∫|α|dμ = {integral} is not below 1/(2N+3)^2 = {limit}")]
    Inadmissible { integral: f64, limit: f64 },
    #[error("sup estimate needs zero boundary values")]
    NonZeroBoundary,
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// Which hypothesis on the weight `α` is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaBranch {
    /// `α ≤ 0` at every vertex.
    NonPositive,
    /// `∫|α| dμ < 1/(2N+3)^2`.
    SmallIntegral,
}

/// `σ = log((N+2)/N) / (2 log 2)`.
pub fn sigma(n: usize) -> f64 {
    ((n as f64 + 2.0) / n as f64).ln() / (2.0 * std::f64::consts::LN_2)
}

pub fn morrey_constant(n: usize) -> f64 {
    2.0 * n as f64 + 3.0
}

/// `κ = 2N+3` in the non-positive branch, `(2N+3)/sqrt(1 − (2N+3)²∫|α|)`
/// otherwise.
pub fn kappa(n: usize, branch: AlphaBranch, abs_alpha_integral: f64) -> Result<f64, EmbeddingError> {
    let c = morrey_constant(n);
    match branch {
        AlphaBranch::NonPositive => Ok(c),
        AlphaBranch::SmallIntegral => {
            let limit = 1.0 / (c * c);
            if !(abs_alpha_integral < limit) {
                return Err(EmbeddingError::Inadmissible { integral: abs_alpha_integral, limit });
            }
            Ok(c / (1.0 - c * c * abs_alpha_integral).sqrt())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingConstants {
    #[serde(rename = "N")]
    pub n: usize,
    pub sigma: f64,
    pub morrey_constant: f64,
    pub kappa: f64,
}

impl EmbeddingConstants {
    pub fn new(n: usize, branch: AlphaBranch, abs_alpha_integral: f64) -> Result<Self, EmbeddingError> {
        Ok(Self {
            n,
            sigma: sigma(n),
            morrey_constant: morrey_constant(n),
            kappa: kappa(n, branch, abs_alpha_integral)?,
        })
    }
}

/// Vertex pairs with precomputed `|x−y|^{-σ}`, reusable across functions on
/// one level.
#[derive(Debug, Clone)]
pub struct PairTable {
    pairs: Vec<(u32, u32, f64)>,
    exhaustive: bool,
}

impl PairTable {
    /// All pairs when `|V_m| ≤ TABLE_PAIR_LIMIT`, otherwise `samples` random
    /// pairs drawn with `seed` plus every edge.
    pub fn for_level(level: &GasketLevel, samples: usize, seed: u64) -> Self {
        let nv = level.num_vertices();
        let s = sigma(level.n());
        let coords = level.coords();
        let weight = |i: usize, j: usize| {
            let d: f64 = coords[i].iter().zip(&coords[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            d.powf(-s)
        };
        if nv <= TABLE_PAIR_LIMIT {
            let mut pairs = Vec::with_capacity(nv * (nv - 1) / 2);
            for i in 0..nv {
                for j in i + 1..nv {
                    pairs.push((i as u32, j as u32, weight(i, j)));
                }
            }
            return Self { pairs, exhaustive: true };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs: Vec<(u32, u32, f64)> =
            level.edges().iter().map(|&[i, j]| (i as u32, j as u32, weight(i, j))).collect();
        for _ in 0..samples {
            let pick = sample(&mut rng, nv, 2);
            let (i, j) = (pick.index(0), pick.index(1));
            pairs.push((i as u32, j as u32, weight(i, j)));
        }
        Self { pairs, exhaustive: false }
    }

    pub fn is_exhaustive(&self) -> bool {
        self.exhaustive
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `max |u(x)−u(y)| / |x−y|^σ` over the table.
    pub fn ratio(&self, u: &[f64]) -> f64 {
        self.pairs
            .par_chunks(1 << 16)
            .map(|c| c.iter().map(|&(i, j, w)| (u[i as usize] - u[j as usize]).abs() * w).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }
}

/// Hölder quotient of `u` over vertex pairs of its level.
///
/// Exhaustive up to [`FULL_PAIR_LIMIT`] vertices; beyond that a seeded sample
/// of pairs is used, which can only underestimate the supremum.
pub fn morrey_ratio(level: &GasketLevel, u: &DiscreteFunction) -> Result<f64, EmbeddingError> {
    u.check_level(level)?;
    let nv = level.num_vertices();
    if nv > FULL_PAIR_LIMIT {
        return Ok(PairTable::for_level(level, 50 * nv, 0).ratio(u.values()));
    }
    let s = sigma(level.n());
    let coords = level.coords();
    let vals = u.values();
    Ok((0..nv)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in i + 1..nv {
                let diff = (vals[i] - vals[j]).abs();
                if diff == 0.0 {
                    continue;
                }
                let d2: f64 = coords[i].iter().zip(&coords[j]).map(|(a, b)| (a - b).powi(2)).sum();
                best = best.max(diff * d2.powf(-0.5 * s));
            }
            best
        })
        .reduce(|| 0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupEstimate {
    pub holds: bool,
    pub max_abs: f64,
    pub bound: f64,
    /// Vertex where `|u|` is largest.
    pub witness: usize,
}

/// Checks `max|u| ≤ (2N+3) sqrt(W_m(u))` for `u` vanishing on the boundary.
pub fn sup_estimate_check(
    level: &GasketLevel,
    form: &EnergyForm,
    u: &DiscreteFunction,
) -> Result<SupEstimate, EmbeddingError> {
    u.check_level(level)?;
    if !u.in_h0(level) {
        return Err(EmbeddingError::NonZeroBoundary);
    }
    let (witness, value) = u.argmax_abs();
    let bound = morrey_constant(level.n()) * form.quadratic(u).max(0.0).sqrt();
    Ok(SupEstimate { holds: value.abs() <= bound, max_abs: value.abs(), bound, witness })
}
