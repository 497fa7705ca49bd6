use rayon::prelude::*;
use serde::Serialize;

use super::{max_abs_refined, Pointwise, ProblemError};

/// Grid points on `[−z, z]` for the inner maximum of `|F|`.
pub const DEFAULT_GRID_POINTS: usize = 4097;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaBound {
    pub rho: f64,
    pub kappa: f64,
    /// `κ√ϱ`, the half-width of the search box in `s`.
    pub s_max: f64,
    pub max_abs_potential: f64,
    pub argmax_s: f64,
    pub argmax_vertex: usize,
    /// `ϱ / (2 max|F|)`.
    pub bound: f64,
    pub grid_points: usize,
}

/// `max_{x, |s| ≤ z} |F(x,s)|` with its location.
fn max_abs_potential(f: &Pointwise, z: f64, points: usize) -> (f64, f64, usize) {
    let best = |profiles: &[super::Profile]| -> (f64, f64, usize) {
        profiles
            .iter()
            .enumerate()
            .map(|(p, pr)| {
                let (v, s) = max_abs_refined(&|t| f.profile_potential(pr, t), &|t| f.profile_f(pr, t), -z, z, points);
                (v, s, p)
            })
            .fold((f64::NEG_INFINITY, 0.0, 0), |a, b| if b.0 > a.0 { b } else { a })
    };
    let profiles = f.profiles();
    let (v, s, p) = if profiles.len() > 16 {
        profiles
            .par_chunks(16)
            .enumerate()
            .map(|(c, chunk)| {
                let (v, s, p) = best(chunk);
                (v, s, p + 16 * c)
            })
            .reduce(|| (f64::NEG_INFINITY, 0.0, 0), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.2 < a.2) { b } else { a })
    } else {
        best(profiles)
    };
    (v, s, f.representative(p))
}

pub fn lambda_bound(f: &Pointwise, kappa: f64, rho: f64, points: usize) -> Result<LambdaBound, ProblemError> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(ProblemError::InvalidParameter(format!("ϱ = {rho} must be positive")));
    }
    let s_max = kappa * rho.sqrt();
    let (max_abs, argmax_s, argmax_vertex) = max_abs_potential(f, s_max, points);
    if !(max_abs > 0.0) {
        return Err(ProblemError::UndefinedBound);
    }
    Ok(LambdaBound {
        rho,
        kappa,
        s_max,
        max_abs_potential: max_abs,
        argmax_s,
        argmax_vertex,
        bound: rho / (2.0 * max_abs),
        grid_points: points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaStarOptions {
    pub z_min: f64,
    pub z_max: f64,
    /// Log-spaced points in the bracketing scan.
    pub scan_points: usize,
    pub grid_points: usize,
}

impl Default for LambdaStarOptions {
    fn default() -> Self {
        Self { z_min: 2f64.powi(-20), z_max: 2f64.powi(20), scan_points: 401, grid_points: DEFAULT_GRID_POINTS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaStar {
    /// `+∞` when the supremum is not attained inside the bracket.
    pub value: f64,
    /// Maximizing `z`, or the bracket end where the ratio was still growing.
    pub z: f64,
    pub kappa: f64,
    /// `sup_z z² / max_{x,|s|≤z} |F(x,s)|`.
    pub sup_ratio: f64,
    pub unbounded: bool,
}

/// `λ* = sup_z z² / (2κ² max_{x,|s|≤z}|F|)`: log-spaced scan of `[z_min, z_max]`,
/// then golden-section search in `log z` around the best scan point.
pub fn lambda_star(f: &Pointwise, kappa: f64, opts: &LambdaStarOptions) -> LambdaStar {
    let ratio = |z: f64| {
        let m = max_abs_potential(f, z, opts.grid_points).0;
        if m > 0.0 {
            z * z / m
        } else {
            f64::INFINITY
        }
    };
    let (a, b) = (opts.z_min.ln(), opts.z_max.ln());
    let k = opts.scan_points.max(3);
    let logs: Vec<f64> = (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect();
    let vals: Vec<f64> = logs.iter().map(|&l| ratio(l.exp())).collect();
    let best = vals
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > vals[best] || (v.is_infinite() && !vals[best].is_infinite()) { i } else { best });
    let finish = |value: f64, z: f64, unbounded: bool| LambdaStar {
        value: if unbounded { f64::INFINITY } else { value / (2.0 * kappa * kappa) },
        z,
        kappa,
        sup_ratio: if unbounded { f64::INFINITY } else { value },
        unbounded,
    };
    if vals[best].is_infinite() || best == k - 1 {
        return finish(vals[best], logs[best].exp(), true);
    }
    let (mut lo, mut hi) = (logs[best.saturating_sub(1)], logs[best + 1]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (ratio(c.exp()), ratio(d.exp()));
    while hi - lo > 1e-12 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = ratio(c.exp());
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = ratio(d.exp());
        }
    }
    let (mut z, mut v) = if fc > fd { (c.exp(), fc) } else { (d.exp(), fd) };
    if vals[best] > v {
        (z, v) = (logs[best].exp(), vals[best]);
    }
    finish(v, z, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gasket::build_level;
    use crate::problem::Nonlinearity;

    fn model(a: &str) -> Pointwise {
        Nonlinearity::model(a, 3, 1.0, 2).unwrap().sample(&build_level(3, 1).unwrap())
    }

    #[test]
    fn bound_for_model() {
        let b = lambda_bound(&model("1"), 9.0, 1.0, DEFAULT_GRID_POINTS).unwrap();
        assert!((b.max_abs_potential - 1649.25).abs() < 1e-9);
        assert!((b.bound - 1.0 / 3298.5).abs() < 1e-15);
        assert_eq!(b.argmax_s, 9.0);
        let half = lambda_bound(&model("2"), 9.0, 1.0, DEFAULT_GRID_POINTS).unwrap();
        assert!((half.bound - b.bound / 2.0).abs() < 1e-18);
    }

    #[test]
    fn bound_errors() {
        let zero = Nonlinearity::parse("0*t", 2).unwrap().sample(&build_level(3, 1).unwrap());
        assert_eq!(lambda_bound(&zero, 9.0, 1.0, 65), Err(ProblemError::UndefinedBound));
        assert!(lambda_bound(&model("1"), 9.0, 0.0, 65).is_err());
    }

    #[test]
    fn star_for_model() {
        let s = lambda_star(&model("1"), 9.0, &LambdaStarOptions::default());
        // sup of z/(1+z³/4) at z = 2^{1/3}
        let z0 = 2f64.cbrt();
        let sup = z0 / (1.0 + z0.powi(3) / 4.0);
        assert!((s.z - z0).abs() < 1e-5);
        assert!((s.sup_ratio - sup).abs() < 1e-12);
        assert!((s.value - sup / 162.0).abs() < 1e-14);
        assert!(!s.unbounded);
        let half = lambda_star(&model("2"), 9.0, &LambdaStarOptions::default());
        assert!((half.value - s.value / 2.0).abs() < 1e-14);
    }

    #[test]
    fn star_dominates_bounds() {
        let f = model("1");
        let s = lambda_star(&f, 9.0, &LambdaStarOptions::default());
        for k in -12..=8 {
            let rho = 2f64.powi(k);
            let b = lambda_bound(&f, 9.0, rho, DEFAULT_GRID_POINTS).unwrap();
            assert!(b.bound <= s.value * (1.0 + 1e-12), "ϱ = {rho}");
        }
    }

    #[test]
    fn bounded_potential_gives_infinite_star() {
        let f = Nonlinearity::parse("-exp(-t*t)", 2).unwrap().sample(&build_level(3, 0).unwrap());
        let opts = LambdaStarOptions { scan_points: 41, grid_points: 257, ..Default::default() };
        let s = lambda_star(&f, 9.0, &opts);
        assert!(s.unbounded && s.value.is_infinite());
    }
}
