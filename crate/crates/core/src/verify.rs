//! Randomized suites for the energy form and the embedding inequalities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::embedding::{kappa, morrey_constant, morrey_ratio, sigma, AlphaBranch, PairTable, TABLE_PAIR_LIMIT};
use crate::energy::{energy, harmonic_extension, DiscreteFunction, EnergyForm};
use crate::gasket::{build_level, GasketError, GasketLevel};

/// Relative tolerance for energy equalities.
pub const ENERGY_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsRow {
    pub sigma: f64,
    pub morrey_constant: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub trials: usize,
    pub violations: usize,
    /// Largest `lhs/rhs` (inequalities) or relative error (equalities).
    pub worst: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: u32,
    pub seed: u64,
    pub renormalization_ratio: f64,
    pub constants: ConstantsRow,
    pub suites: Vec<SuiteResult>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

/// Forms on levels `0..=m` assembled with `ratio^k` as renormalization.
struct Ladder {
    levels: Vec<GasketLevel>,
    forms: Vec<EnergyForm>,
}

impl Ladder {
    fn new(n: usize, m: u32, ratio: f64) -> Result<Self, GasketError> {
        let levels: Vec<GasketLevel> = (0..=m).map(|k| build_level(n, k)).collect::<Result<_, _>>()?;
        let forms = levels.iter().map(|l| EnergyForm::assemble_with_ratio(l, ratio)).collect();
        Ok(Self { levels, forms })
    }

    /// Random data on level `from` (zero on the boundary when asked), extended
    /// harmonically to the top level.
    fn random_harmonic(&self, rng: &mut ChaCha8Rng, from: usize, zero_boundary: bool) -> DiscreteFunction {
        let coarse = &self.levels[from];
        let mut u = random_values(coarse, rng);
        if zero_boundary {
            u = u.zero_boundary(coarse);
        }
        for k in from..self.levels.len() - 1 {
            u = harmonic_extension(&self.levels[k], &self.levels[k + 1], &u).expect("ladder levels are nested");
        }
        u
    }

    fn top(&self) -> (&GasketLevel, &EnergyForm) {
        (self.levels.last().unwrap(), self.forms.last().unwrap())
    }
}

fn random_values(level: &GasketLevel, rng: &mut ChaCha8Rng) -> DiscreteFunction {
    let values = (0..level.num_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect();
    DiscreteFunction::from_values(level, values).expect("length matches")
}

fn suite(name: &'static str, trials: usize, mut check: impl FnMut(usize) -> f64, limit: f64) -> SuiteResult {
    let mut worst = 0.0f64;
    let mut violations = 0;
    for t in 0..trials {
        let v = check(t);
        worst = worst.max(v);
        if !(v <= limit) {
            violations += 1;
        }
    }
    SuiteResult { name, trials, violations, worst }
}

/// Runs every suite on `trials` random functions at level `m`.
///
/// `ratio` replaces `(N+2)/N` in every assembled form, which is how a faulty
/// renormalization is injected.
pub fn run_suites(n: usize, m: u32, trials: usize, seed: u64, ratio: Option<f64>) -> Result<VerifyReport, GasketError> {
    let true_ratio = (n as f64 + 2.0) / n as f64;
    let ratio = ratio.unwrap_or(true_ratio);
    let ladder = Ladder::new(n, m, ratio)?;
    let (level, form) = ladder.top();
    let c = morrey_constant(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut warnings = Vec::new();
    if trials == 0 {
        warnings.push("trials = 0: every suite passes vacuously".to_string());
    }
    if ratio != true_ratio {
        warnings.push(format!("renormalization ratio {ratio} replaces {true_ratio}"));
    }
    let mut suites = Vec::new();
    let table = (level.num_vertices() <= TABLE_PAIR_LIMIT).then(|| PairTable::for_level(level, 0, 0));

    suites.push(suite(
        "energy-consistency",
        trials,
        |_| {
            let u = random_values(level, &mut rng);
            let edge_sum = energy(level, &u).unwrap() * (ratio / true_ratio).powi(m as i32);
            let quad = form.quadratic(&u);
            (edge_sum - quad).abs() / quad.abs().max(f64::MIN_POSITIVE)
        },
        1e-12,
    ));

    suites.push(suite(
        "extension-invariance",
        if m == 0 { 0 } else { trials },
        |_| {
            let from = rng.random_range(0..m as usize);
            let coarse = random_values(&ladder.levels[from], &mut rng);
            let mut u = coarse.clone();
            for k in from..m as usize {
                u = harmonic_extension(&ladder.levels[k], &ladder.levels[k + 1], &u).unwrap();
            }
            let w0 = ladder.forms[from].quadratic(&coarse);
            let w1 = form.quadratic(&u);
            (w1 - w0).abs() / w0.abs().max(f64::MIN_POSITIVE)
        },
        ENERGY_REL_TOL,
    ));

    suites.push(suite(
        "morrey",
        trials,
        |t| {
            let from = rng.random_range(0..=m.min(3) as usize);
            let u = ladder.random_harmonic(&mut rng, from, t % 2 == 0);
            let w = form.quadratic(&u).max(0.0);
            let r = match &table {
                Some(t) => t.ratio(u.values()),
                None => morrey_ratio(level, &u).unwrap(),
            };
            if w == 0.0 {
                if r == 0.0 { 0.0 } else { f64::INFINITY }
            } else {
                r / (c * w.sqrt())
            }
        },
        1.0,
    ));

    suites.push(suite(
        "sup-estimate",
        trials,
        |_| {
            let from = rng.random_range(0..=m.min(3) as usize);
            let u = ladder.random_harmonic(&mut rng, from, true);
            let w = form.quadratic(&u).max(0.0);
            let s = u.sup_norm();
            if s == 0.0 { 0.0 } else { s / (c * w.sqrt()) }
        },
        1.0,
    ));

    let interior = level.interior();
    let random_h0 = |rng: &mut ChaCha8Rng| {
        let mut u = vec![0.0; level.num_vertices()];
        for &i in &interior {
            u[i] = rng.random_range(-1.0..1.0);
        }
        DiscreteFunction::from_values(level, u).unwrap()
    };
    let small = 0.5 / (c * c);
    for (name, alpha) in [("norm-equivalence-nonpositive", -1.0), ("norm-equivalence-small", small)] {
        let a = vec![alpha; level.num_vertices()];
        let integral = alpha.abs();
        let (lo, hi) = if alpha <= 0.0 { (1.0, 1.0 + c * c * integral) } else { (1.0 - c * c * integral, 2.0) };
        suites.push(suite(
            name,
            trials,
            |_| {
                let u = random_h0(&mut rng);
                let w = form.quadratic(&u);
                let na = form.norm_alpha(&u, &a).unwrap().powi(2);
                ((lo * w) / na).max(na / (hi * w))
            },
            1.0 + 1e-12,
        ));
    }

    Ok(VerifyReport {
        n,
        m,
        seed,
        renormalization_ratio: ratio,
        constants: ConstantsRow {
            sigma: sigma(n),
            morrey_constant: c,
            kappa: kappa(n, AlphaBranch::NonPositive, 0.0).expect("non-positive branch"),
        },
        suites,
        warnings,
    })
}
