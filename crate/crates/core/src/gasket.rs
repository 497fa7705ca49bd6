//! Finite approximations `V_m` of the N-corner Sierpinski gasket.
//!
//! Every vertex of `V_m` is a dyadic barycentric combination of the simplex
//! corners, so vertices are addressed by integer weight tuples
//! ([`VertexKey`]) and deduplicated exactly. Euclidean coordinates are derived
//! from the keys only for output and distance computations.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

/// Default guard on the number of level-m cells (`N^m`).
pub const DEFAULT_CELL_BUDGET: u64 = 10_000_000;

/// Environment variable overriding [`DEFAULT_CELL_BUDGET`].
pub const CELL_BUDGET_ENV: &str = "GASKETVAR_CELL_BUDGET";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GasketError {
    #[error("invalid dimension: the gasket needs N >= 2 corners, got {0}")]
    InvalidDimension(usize),
    #[error("corner index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("point has {got} coordinates, expected {expected}")]
    PointDimension { got: usize, expected: usize },
    #[error("level N={n}, m={m} has {cells} cells, above the budget of {budget}")]
    CellBudget { n: usize, m: u32, cells: u128, budget: u64 },
    #[error("invalid cell budget {0:?} in {CELL_BUDGET_ENV}")]
    BadBudget(String),
}

/// The corners `p_1..p_N` of a regular unit simplex in `R^{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexCorners {
    n: usize,
    points: Vec<Vec<f64>>,
}

/// Regular simplex with unit edges, first corner at the origin.
///
/// Corner `k` (0-based) sits above the centroid of corners `0..k` along the
/// `k`-th axis, so the construction is canonical and deterministic.
pub fn simplex_corners(n: usize) -> Result<SimplexCorners, GasketError> {
    if n < 2 {
        return Err(GasketError::InvalidDimension(n));
    }
    let dim = n - 1;
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);
    points.push(vec![0.0; dim]);
    for k in 1..n {
        let mut p = vec![0.0; dim];
        for q in &points {
            for (c, v) in p.iter_mut().zip(q) {
                *c += v / k as f64;
            }
        }
        // height over the centroid so that |p - p_0| = 1
        let r2: f64 = p.iter().map(|c| c * c).sum();
        p[k - 1] = (1.0 - r2).sqrt();
        points.push(p);
    }
    Ok(SimplexCorners { n, points })
}

impl SimplexCorners {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n - 1
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Corner `p_i`, 1-based.
    pub fn corner(&self, i: usize) -> Result<&[f64], GasketError> {
        if i == 0 || i > self.n {
            return Err(GasketError::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(&self.points[i - 1])
    }

    /// The contraction `S_i(x) = x/2 + p_i/2` (1-based `i`).
    pub fn ifs_map(&self, i: usize, x: &[f64]) -> Result<Vec<f64>, GasketError> {
        let p = self.corner(i)?;
        if x.len() != self.dim() {
            return Err(GasketError::PointDimension { got: x.len(), expected: self.dim() });
        }
        Ok(x.iter().zip(p).map(|(a, b)| 0.5 * a + 0.5 * b).collect())
    }

    /// Applies `S_{w_1} ∘ ... ∘ S_{w_k}` to `x`.
    pub fn apply_word(&self, word: &[usize], x: &[f64]) -> Result<Vec<f64>, GasketError> {
        let mut y = x.to_vec();
        for &i in word.iter().rev() {
            y = self.ifs_map(i, &y)?;
        }
        Ok(y)
    }

    /// Euclidean point of a barycentric key.
    pub fn point_of(&self, key: &VertexKey) -> Vec<f64> {
        let scale = (key.exponent as f64).exp2();
        let mut out = vec![0.0; self.dim()];
        for (w, p) in key.weights.iter().zip(&self.points) {
            if *w == 0 {
                continue;
            }
            let c = *w as f64 / scale;
            for (o, v) in out.iter_mut().zip(p) {
                *o += c * v;
            }
        }
        out
    }
}

/// Exact barycentric address `Σ (w_i / 2^e) p_i` with `Σ w_i = 2^e`.
///
/// Ordering is lexicographic on the weight tuple with larger leading weights
/// first, so `p_1` always sorts first. Keys compare equal only at the same
/// exponent; use [`VertexKey::lift`] or [`VertexKey::reduced`] to compare
/// across levels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexKey {
    weights: Vec<u64>,
    exponent: u32,
}

impl VertexKey {
    pub fn new(weights: Vec<u64>, exponent: u32) -> Option<Self> {
        let total: u128 = weights.iter().map(|&w| w as u128).sum();
        (total == 1u128 << exponent).then_some(Self { weights, exponent })
    }

    /// The corner `p_i` (0-based) at exponent `e`.
    pub fn corner(n: usize, i: usize, exponent: u32) -> Self {
        let mut weights = vec![0; n];
        weights[i] = 1 << exponent;
        Self { weights, exponent }
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// Same point expressed with denominator `2^exponent`.
    pub fn lift(&self, exponent: u32) -> Option<Self> {
        let shift = exponent.checked_sub(self.exponent)?;
        Some(Self {
            weights: self.weights.iter().map(|w| w << shift).collect(),
            exponent,
        })
    }

    /// Smallest exponent representing the same point.
    pub fn reduced(&self) -> Self {
        let mut k = self.clone();
        while k.exponent > 0 && k.weights.iter().all(|w| w % 2 == 0) {
            k.weights.iter_mut().for_each(|w| *w /= 2);
            k.exponent -= 1;
        }
        k
    }

    /// Image under `S_i` (0-based), one exponent up.
    pub fn contract(&self, i: usize) -> Self {
        let mut weights = self.weights.clone();
        weights[i] += 1 << self.exponent;
        Self { weights, exponent: self.exponent + 1 }
    }

    /// Midpoint of two keys at the same exponent, one exponent up.
    pub fn midpoint(&self, other: &Self) -> Self {
        debug_assert_eq!(self.exponent, other.exponent);
        Self {
            weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect(),
            exponent: self.exponent + 1,
        }
    }
}

impl Ord for VertexKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.exponent
            .cmp(&other.exponent)
            .then_with(|| other.weights.cmp(&self.weights))
    }
}

impl PartialOrd for VertexKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The level-m graph of the gasket with its measure weights.
#[derive(Debug, Clone)]
pub struct GasketLevel {
    n: usize,
    m: u32,
    corners: SimplexCorners,
    keys: Vec<VertexKey>,
    coords: Vec<Vec<f64>>,
    index: BTreeMap<VertexKey, usize>,
    edges: Vec<[usize; 2]>,
    cells: Vec<Vec<usize>>,
    boundary: Vec<usize>,
    measure: Vec<f64>,
}

/// Cell budget from [`CELL_BUDGET_ENV`], falling back to the default.
pub fn cell_budget_from_env() -> Result<u64, GasketError> {
    match std::env::var(CELL_BUDGET_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| GasketError::BadBudget(s)),
        Err(_) => Ok(DEFAULT_CELL_BUDGET),
    }
}

/// Builds `V_m` honouring the environment cell budget.
pub fn build_level(n: usize, m: u32) -> Result<GasketLevel, GasketError> {
    build_level_with_budget(n, m, cell_budget_from_env()?)
}

pub fn build_level_with_budget(n: usize, m: u32, budget: u64) -> Result<GasketLevel, GasketError> {
    let corners = simplex_corners(n)?;
    let cells_total = (n as u128).checked_pow(m).unwrap_or(u128::MAX);
    if cells_total > budget as u128 || m >= 60 {
        return Err(GasketError::CellBudget { n, m, cells: cells_total, budget });
    }

    // Cells in lexicographic word order: the cell of w = (i, w') is S_i of
    // the cell of w'.
    let mut cell_keys: Vec<Vec<VertexKey>> = vec![(0..n).map(|j| VertexKey::corner(n, j, 0)).collect()];
    for _ in 0..m {
        let mut next = Vec::with_capacity(cell_keys.len() * n);
        for i in 0..n {
            for cell in &cell_keys {
                next.push(cell.iter().map(|k| k.contract(i)).collect());
            }
        }
        cell_keys = next;
    }

    let mut index: BTreeMap<VertexKey, usize> = BTreeMap::new();
    for cell in &cell_keys {
        for k in cell {
            index.entry(k.clone()).or_insert(0);
        }
    }
    for (pos, slot) in index.values_mut().enumerate() {
        *slot = pos;
    }
    let keys: Vec<VertexKey> = index.keys().cloned().collect();
    let coords = keys.iter().map(|k| corners.point_of(k)).collect();

    let cells: Vec<Vec<usize>> = cell_keys
        .iter()
        .map(|cell| cell.iter().map(|k| index[k]).collect())
        .collect();

    let mut edges = Vec::with_capacity(cells.len() * n * (n - 1) / 2);
    for cell in &cells {
        for a in 0..n {
            for b in a + 1..n {
                let (i, j) = (cell[a], cell[b]);
                edges.push([i.min(j), i.max(j)]);
            }
        }
    }
    edges.sort_unstable();

    let boundary = (0..n).map(|j| index[&VertexKey::corner(n, j, m)]).collect();

    let mut level = GasketLevel {
        n,
        m,
        corners,
        keys,
        coords,
        index,
        edges,
        cells,
        boundary,
        measure: Vec::new(),
    };
    level.measure = vertex_measures(&level);
    Ok(level)
}

/// Each level-m cell carries mass `N^{-m}`, split equally among its corners.
pub fn vertex_measures(level: &GasketLevel) -> Vec<f64> {
    let mut counts = vec![0u64; level.keys.len()];
    for cell in &level.cells {
        for &v in cell {
            counts[v] += 1;
        }
    }
    let share = 1.0 / (level.n as f64).powi(level.m as i32 + 1);
    counts.into_iter().map(|c| c as f64 * share).collect()
}

impl GasketLevel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn corners(&self) -> &SimplexCorners {
        &self.corners
    }

    pub fn num_vertices(&self) -> usize {
        self.keys.len()
    }

    pub fn keys(&self) -> &[VertexKey] {
        &self.keys
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    /// Edge length `2^{-m}`.
    pub fn edge_length(&self) -> f64 {
        (-(self.m as f64)).exp2()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary.contains(&v)
    }

    /// Interior vertex indices in ascending order.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.keys.len()).filter(|v| !self.is_boundary(*v)).collect()
    }

    /// Index of a key given at any exponent not above `m`.
    pub fn index_of(&self, key: &VertexKey) -> Option<usize> {
        let lifted = key.lift(self.m)?;
        self.index.get(&lifted).copied()
    }

    /// Vertex degrees in the level-m graph.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.keys.len()];
        for [a, b] in &self.edges {
            deg[*a] += 1;
            deg[*b] += 1;
        }
        deg
    }

    /// For each vertex of `self`, its index in the finer level `fine`.
    pub fn embed_into(&self, fine: &GasketLevel) -> Option<Vec<usize>> {
        if fine.n != self.n || fine.m < self.m {
            return None;
        }
        self.keys.iter().map(|k| fine.index_of(k)).collect()
    }

    pub fn export(&self) -> MeshExport<'_> {
        MeshExport {
            n: self.n,
            m: self.m,
            vertices: &self.coords,
            edges: &self.edges,
            cells: &self.cells,
            boundary: &self.boundary,
            measure: &self.measure,
        }
    }
}

/// JSON shape of the `mesh` export; field order is fixed.
#[derive(Debug, Serialize)]
pub struct MeshExport<'a> {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: u32,
    pub vertices: &'a [Vec<f64>],
    pub edges: &'a [[usize; 2]],
    pub cells: &'a [Vec<usize>],
    pub boundary: &'a [usize],
    pub measure: &'a [f64],
}
