//! Renormalized energy forms `W_m`, the stiffness operator, harmonic
//! extension between levels and the weighted norm `‖·‖_α`.

use nalgebra::DMatrix;
use serde::Serialize;
use sprs::{CsMat, TriMat};
use thiserror::Error;

use crate::gasket::GasketLevel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("function lives on level (N={got_n}, m={got_m}) but level (N={n}, m={m}) was expected")]
    LevelMismatch { n: usize, m: u32, got_n: usize, got_m: u32 },
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("target level must refine the source level by exactly one step")]
    NotNested,
    #[error("singular local system in harmonic extension")]
    SingularLocalSystem,
    #[error("inadmissible weight: W(u) - ∫α u² dμ = {0} is negative")]
    InadmissibleWeight(f64),
}

/// Identifies the level a function lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LevelTag {
    pub n: usize,
    pub m: u32,
}

impl LevelTag {
    pub fn of(level: &GasketLevel) -> Self {
        Self { n: level.n(), m: level.m() }
    }
}

/// Real values on the vertices of one level, in the level's vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction {
    tag: LevelTag,
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn zeros(level: &GasketLevel) -> Self {
        Self { tag: LevelTag::of(level), values: vec![0.0; level.num_vertices()] }
    }

    pub fn constant(level: &GasketLevel, c: f64) -> Self {
        Self { tag: LevelTag::of(level), values: vec![c; level.num_vertices()] }
    }

    pub fn from_values(level: &GasketLevel, values: Vec<f64>) -> Result<Self, EnergyError> {
        if values.len() != level.num_vertices() {
            return Err(EnergyError::Length { expected: level.num_vertices(), got: values.len() });
        }
        Ok(Self { tag: LevelTag::of(level), values })
    }

    pub fn from_fn(level: &GasketLevel, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = level.coords().iter().map(|x| f(x)).collect();
        Self { tag: LevelTag::of(level), values }
    }

    pub fn tag(&self) -> LevelTag {
        self.tag
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn check_level(&self, level: &GasketLevel) -> Result<(), EnergyError> {
        let want = LevelTag::of(level);
        if self.tag != want || self.values.len() != level.num_vertices() {
            return Err(EnergyError::LevelMismatch {
                n: want.n,
                m: want.m,
                got_n: self.tag.n,
                got_m: self.tag.m,
            });
        }
        Ok(())
    }

    /// True when every boundary value is exactly zero.
    pub fn in_h0(&self, level: &GasketLevel) -> bool {
        level.boundary().iter().all(|&b| self.values[b] == 0.0)
    }

    pub fn zero_boundary(mut self, level: &GasketLevel) -> Self {
        for &b in level.boundary() {
            self.values[b] = 0.0;
        }
        self
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Index and value of the entry with largest magnitude.
    pub fn argmax_abs(&self) -> (usize, f64) {
        let mut best = (0, 0.0f64);
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > best.1.abs() {
                best = (i, *v);
            }
        }
        best
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { tag: self.tag, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        debug_assert_eq!(self.tag, other.tag);
        Self {
            tag: self.tag,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect(),
        }
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc: f64, (a, b)| acc.max((a - b).abs()))
    }

    /// Restriction to a coarser level nested inside this one.
    pub fn restrict(&self, fine: &GasketLevel, coarse: &GasketLevel) -> Option<Self> {
        let map = coarse.embed_into(fine)?;
        Some(Self {
            tag: LevelTag::of(coarse),
            values: map.into_iter().map(|i| self.values[i]).collect(),
        })
    }
}

/// `((N+2)/N)^m`.
pub fn renormalization(n: usize, m: u32) -> f64 {
    ((n as f64 + 2.0) / n as f64).powi(m as i32)
}

/// `W_m(u)` evaluated directly as a renormalized edge sum.
pub fn energy(level: &GasketLevel, u: &DiscreteFunction) -> Result<f64, EnergyError> {
    bilinear(level, u, u)
}

/// The polarized form `W_m(u, v)` as an edge sum.
pub fn bilinear(level: &GasketLevel, u: &DiscreteFunction, v: &DiscreteFunction) -> Result<f64, EnergyError> {
    u.check_level(level)?;
    v.check_level(level)?;
    let (a, b) = (u.values(), v.values());
    let sum: f64 = level
        .edges()
        .iter()
        .map(|&[i, j]| (a[i] - a[j]) * (b[i] - b[j]))
        .sum();
    Ok(renormalization(level.n(), level.m()) * sum)
}

/// `Σ_x μ_x g(x)`, with Neumaier-compensated summation.
pub fn integrate(measure: &[f64], g: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for (m, v) in measure.iter().zip(g) {
        let x = m * v;
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Assembled stiffness `A` (with `u·Au = W_m(u)`) and lumped measure `M`.
#[derive(Debug, Clone)]
pub struct EnergyForm {
    tag: LevelTag,
    factor: f64,
    stiffness: CsMat<f64>,
    lumped: Vec<f64>,
    boundary: Vec<usize>,
    interior: Vec<usize>,
}

impl EnergyForm {
    pub fn assemble(level: &GasketLevel) -> Self {
        let ratio = (level.n() as f64 + 2.0) / level.n() as f64;
        Self::assemble_with_ratio(level, ratio)
    }

    /// Assembly with `ratio^m` in place of `((N+2)/N)^m`.
    pub fn assemble_with_ratio(level: &GasketLevel, ratio: f64) -> Self {
        let factor = ratio.powi(level.m() as i32);
        let nv = level.num_vertices();
        let mut tri = TriMat::with_capacity((nv, nv), 4 * level.edges().len());
        for &[i, j] in level.edges() {
            tri.add_triplet(i, i, factor);
            tri.add_triplet(j, j, factor);
            tri.add_triplet(i, j, -factor);
            tri.add_triplet(j, i, -factor);
        }
        Self {
            tag: LevelTag::of(level),
            factor,
            stiffness: tri.to_csr(),
            lumped: level.measure().to_vec(),
            boundary: level.boundary().to_vec(),
            interior: level.interior(),
        }
    }

    pub fn tag(&self) -> LevelTag {
        self.tag
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn stiffness(&self) -> &CsMat<f64> {
        &self.stiffness
    }

    pub fn lumped(&self) -> &[f64] {
        &self.lumped
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn dim(&self) -> usize {
        self.lumped.len()
    }

    /// `Au` evaluated row by row as `Σ_j (−A_ij)(u_i − u_j)`.
    ///
    /// Rows sum to zero, so this equals the plain product but avoids the
    /// cancellation between the diagonal and off-diagonal terms.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for (i, row) in self.stiffness.outer_iterator().enumerate() {
            let ui = u[i];
            let mut acc = 0.0;
            for (j, &a) in row.iter() {
                if j != i {
                    acc -= a * (ui - u[j]);
                }
            }
            out[i] = acc;
        }
        out
    }

    /// `u·Av`.
    pub fn bilinear(&self, u: &DiscreteFunction, v: &DiscreteFunction) -> f64 {
        let av = self.apply(v.values());
        u.values().iter().zip(&av).map(|(a, b)| a * b).sum()
    }

    /// `u·Au`.
    pub fn quadratic(&self, u: &DiscreteFunction) -> f64 {
        self.bilinear(u, u)
    }

    /// `Σ_x μ_x α(x) u(x) v(x)`.
    pub fn weighted_inner(&self, alpha: &[f64], u: &[f64], v: &[f64]) -> f64 {
        self.lumped
            .iter()
            .zip(alpha)
            .zip(u.iter().zip(v))
            .map(|((m, a), (x, y))| m * a * x * y)
            .sum()
    }

    /// Dense copy of `A` restricted to interior rows and columns.
    pub fn interior_dense(&self) -> DMatrix<f64> {
        let k = self.interior.len();
        let mut pos = vec![usize::MAX; self.dim()];
        for (p, &v) in self.interior.iter().enumerate() {
            pos[v] = p;
        }
        let mut out = DMatrix::zeros(k, k);
        for (i, row) in self.stiffness.outer_iterator().enumerate() {
            if pos[i] == usize::MAX {
                continue;
            }
            for (j, &a) in row.iter() {
                if pos[j] != usize::MAX {
                    out[(pos[i], pos[j])] += a;
                }
            }
        }
        out
    }

    /// `‖u‖_α = sqrt(W_m(u) − Σ μ_x α(x) u(x)²)`.
    pub fn norm_alpha(&self, u: &DiscreteFunction, alpha: &[f64]) -> Result<f64, EnergyError> {
        let w = self.quadratic(u);
        let uv = u.values();
        let weighted = self.weighted_inner(alpha, uv, uv);
        let radicand = w - weighted;
        let scale = w.abs() + self.weighted_inner(&alpha.iter().map(|a| a.abs()).collect::<Vec<_>>(), uv, uv);
        if radicand < -1e-13 * scale.max(f64::MIN_POSITIVE) {
            return Err(EnergyError::InadmissibleWeight(radicand));
        }
        Ok(radicand.max(0.0).sqrt())
    }
}

pub fn norm_alpha(form: &EnergyForm, u: &DiscreteFunction, alpha: &[f64]) -> Result<f64, EnergyError> {
    form.norm_alpha(u, alpha)
}

/// Weights expressing each new vertex of a subdivided cell in terms of the
/// cell's corners: row `p` is the midpoint of the `p`-th corner pair `(a, b)`,
/// `a < b`, in lexicographic order.
pub fn extension_weights(n: usize) -> Result<Vec<Vec<f64>>, EnergyError> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let k = pairs.len();
    let mid = |a: usize, b: usize| {
        let (a, b) = (a.min(b), a.max(b));
        pairs.iter().position(|&p| p == (a, b)).unwrap()
    };
    // local vertices: corners 0..n, midpoints n..n+k
    let total = n + k;
    let mut lap = DMatrix::<f64>::zeros(total, total);
    for i in 0..n {
        let mut sub: Vec<usize> = vec![i];
        sub.extend((0..n).filter(|&j| j != i).map(|j| n + mid(i, j)));
        for x in 0..sub.len() {
            for y in x + 1..sub.len() {
                let (p, q) = (sub[x], sub[y]);
                lap[(p, p)] += 1.0;
                lap[(q, q)] += 1.0;
                lap[(p, q)] -= 1.0;
                lap[(q, p)] -= 1.0;
            }
        }
    }
    let l_ii = lap.view((n, n), (k, k)).clone_owned();
    let l_ib = lap.view((n, 0), (k, n)).clone_owned();
    let solved = l_ii.lu().solve(&(-l_ib)).ok_or(EnergyError::SingularLocalSystem)?;
    Ok((0..k).map(|p| (0..n).map(|c| solved[(p, c)]).collect()).collect())
}

/// Energy-minimizing extension of `u` from `coarse` to the next level `fine`.
pub fn harmonic_extension(
    coarse: &GasketLevel,
    fine: &GasketLevel,
    u: &DiscreteFunction,
) -> Result<DiscreteFunction, EnergyError> {
    u.check_level(coarse)?;
    if fine.n() != coarse.n() || fine.m() != coarse.m() + 1 {
        return Err(EnergyError::NotNested);
    }
    let n = coarse.n();
    let weights = extension_weights(n)?;
    let mut out = vec![f64::NAN; fine.num_vertices()];
    let keys = coarse.keys();
    for cell in coarse.cells() {
        let vals: Vec<f64> = cell.iter().map(|&c| u.values()[c]).collect();
        for (a, &ca) in cell.iter().enumerate() {
            let fa = fine.index_of(&keys[ca]).ok_or(EnergyError::NotNested)?;
            out[fa] = vals[a];
        }
        let mut p = 0;
        for a in 0..n {
            for b in a + 1..n {
                let key = keys[cell[a]].midpoint(&keys[cell[b]]);
                let fm = fine.index_of(&key).ok_or(EnergyError::NotNested)?;
                out[fm] = weights[p].iter().zip(&vals).map(|(w, v)| w * v).sum();
                p += 1;
            }
        }
    }
    if out.iter().any(|v| v.is_nan()) {
        return Err(EnergyError::NotNested);
    }
    DiscreteFunction::from_values(fine, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gasket::build_level;

    #[test]
    fn hat_on_the_interval() {
        let l = build_level(2, 1).unwrap();
        let u = DiscreteFunction::from_values(&l, vec![0.0, 1.0, 0.0]).unwrap();
        assert!((energy(&l, &u).unwrap() - 4.0).abs() < 1e-15);
        let form = EnergyForm::assemble(&l);
        assert!((form.quadratic(&u) - 4.0).abs() < 1e-15);
        let alpha = vec![-1.0; 3];
        assert!((form.norm_alpha(&u, &alpha).unwrap() - 4.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_triangle_energy() {
        let l = build_level(3, 0).unwrap();
        let u = DiscreteFunction::from_values(&l, vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(energy(&l, &u).unwrap(), 2.0);
        assert_eq!(energy(&l, &DiscreteFunction::constant(&l, 3.5)).unwrap(), 0.0);
    }

    #[test]
    fn stiffness_diagonal_counts_degree() {
        let l = build_level(3, 1).unwrap();
        let form = EnergyForm::assemble(&l);
        let a = form.stiffness();
        for v in 0..6 {
            let d = *a.get(v, v).unwrap();
            let expected = if l.is_boundary(v) { 2.0 } else { 4.0 } * 5.0 / 3.0;
            assert!((d - expected).abs() < 1e-14);
            let row_sum: f64 = a.outer_view(v).unwrap().iter().map(|(_, x)| *x).sum();
            assert!(row_sum.abs() < 1e-12);
        }
    }

    #[test]
    fn one_fifth_two_fifths_rule() {
        let w = extension_weights(3).unwrap();
        let expected = [[0.4, 0.4, 0.2], [0.4, 0.2, 0.4], [0.2, 0.4, 0.4]];
        for (row, exp) in w.iter().zip(expected) {
            for (a, b) in row.iter().zip(exp) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        let w2 = extension_weights(2).unwrap();
        assert!((w2[0][0] - 0.5).abs() < 1e-15 && (w2[0][1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn extension_rejects_wrong_levels() {
        let l0 = build_level(3, 0).unwrap();
        let l2 = build_level(3, 2).unwrap();
        let u = DiscreteFunction::zeros(&l0);
        assert_eq!(harmonic_extension(&l0, &l2, &u), Err(EnergyError::NotNested));
        let wrong = DiscreteFunction::zeros(&l2);
        assert!(matches!(energy(&l0, &wrong), Err(EnergyError::LevelMismatch { .. })));
    }

    #[test]
    fn negative_radicand_is_inadmissible() {
        let l = build_level(2, 1).unwrap();
        let form = EnergyForm::assemble(&l);
        let u = DiscreteFunction::from_values(&l, vec![0.0, 1.0, 0.0]).unwrap();
        // W = 4, ∫αu² = 0.5·α
        let err = form.norm_alpha(&u, &[0.0, 10.0, 0.0]).unwrap_err();
        assert!(matches!(err, EnergyError::InadmissibleWeight(r) if (r + 1.0).abs() < 1e-12));
    }
}
