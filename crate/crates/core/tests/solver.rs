use gasketvar::config::Problem;
use gasketvar::energy::EnergyForm;
use gasketvar::gasket::build_level;
use gasketvar::problem::{Nonlinearity, Weight};
use gasketvar::solver::{
    deflated_sweep, solve_local_min, solve_mountain_pass, two_solutions, DiscreteFunctional, SolutionKind,
    SolverError, SolverOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model(m: u32, lambda: f64) -> Problem {
    let level = build_level(3, m).unwrap();
    let weight = Weight::zero(&level);
    let f = Nonlinearity::model("1", 3, 1.0, 2).unwrap();
    Problem::new(level, weight, &f).with_lambda(lambda).with_rho(1.0).with_ar(3.0, 2.0)
}

#[test]
fn linear_problem_has_a_single_solution() {
    let level = build_level(3, 3).unwrap();
    let form = EnergyForm::assemble(&level);
    let weight = Weight::zero(&level);
    let f = Nonlinearity::parse("-1", 2).unwrap().sample(&level);
    let j = DiscreteFunctional::new(&form, &weight, &f, 1.0).unwrap();
    let opts = SolverOptions { deflation_starts: 32, seed: 11, ..Default::default() };
    let u = solve_local_min(&j, 1.0, &opts).unwrap();
    assert!(u.residual < 1e-12);
    let extra = deflated_sweep(&j, &[u], &opts, 4).unwrap();
    assert!(extra.is_empty(), "found {} spurious solutions", extra.len());
}

#[test]
fn small_solution_scales_linearly_in_lambda() {
    let norms: Vec<f64> = [1e-4, 5e-5, 2.5e-5]
        .iter()
        .map(|&l| {
            let p = model(4, l);
            solve_local_min(&p.functional(l).unwrap(), 1.0, &SolverOptions::default()).unwrap().norm_alpha
        })
        .collect();
    for w in norms.windows(2) {
        assert!((w[0] / w[1] - 2.0).abs() < 1e-6, "{norms:?}");
    }
}

#[test]
fn solutions_satisfy_the_weak_form() {
    let p = model(4, 1e-4);
    let report = two_solutions(&p, &SolverOptions::default()).unwrap();
    let j = p.functional(1e-4).unwrap();
    let form = j.form();
    let mu = form.lumped();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for s in &report.solutions {
        let au = form.apply(&s.u);
        for _ in 0..20 {
            let mut v = vec![0.0; j.dim()];
            for &i in form.interior() {
                v[i] = rng.random_range(-1.0..1.0);
            }
            // W(u,v)/λ + Σ μ f(u) v = 0 for every v vanishing on the boundary
            let lhs: f64 = (0..v.len()).map(|i| au[i] * v[i] / 1e-4 + mu[i] * p.f.f(i, s.u[i]) * v[i]).sum();
            let scale: f64 = (0..v.len()).map(|i| (au[i] * v[i] / 1e-4).abs()).sum();
            assert!(lhs.abs() <= 1e-8 * scale.max(1.0), "{:?}: {lhs} vs {scale}", s.kind);
        }
    }
}

#[test]
fn mountain_pass_sits_above_the_minimizer() {
    let p = model(4, 2e-4);
    let j = p.functional(2e-4).unwrap();
    let opts = SolverOptions::default();
    let u1 = solve_local_min(&j, 1.0, &opts).unwrap();
    let u2 = solve_mountain_pass(&j, &u1, None, &opts).unwrap();
    assert_eq!(u2.kind, SolutionKind::MountainPass);
    assert!(u2.functional > u1.functional);
    assert!(u2.norm_alpha > 1.0 && u1.norm_alpha < 1.0);
    assert!(u2.u.iter().all(|v| *v >= -1e-12), "positive source gives a nonnegative saddle");
}

#[test]
fn tiny_ball_reports_boundary() {
    let p = model(3, 1e-4);
    let err = solve_local_min(&p.functional(1e-4).unwrap(), 1e-14, &SolverOptions::default()).unwrap_err();
    assert!(matches!(err, SolverError::BoundaryStuck { .. }), "{err:?}");
}

#[test]
fn runs_are_reproducible() {
    let opts = SolverOptions { deflation_starts: 8, seed: 3, ..Default::default() };
    let a = two_solutions(&model(4, 1e-4), &opts).unwrap();
    let b = two_solutions(&model(4, 1e-4), &opts).unwrap();
    assert_eq!(a.solutions.len(), b.solutions.len());
    for (x, y) in a.solutions.iter().zip(&b.solutions) {
        assert_eq!(x.u, y.u);
    }
    assert_eq!(
        gasketvar::output::to_json(&a).unwrap(),
        gasketvar::output::to_json(&b).unwrap()
    );
}

#[test]
fn interval_problem_matches_closed_form() {
    // −u'' = λ on (0,1): the three-point scheme is exact at the nodes
    for m in [3u32, 5] {
        let level = build_level(2, m).unwrap();
        let form = EnergyForm::assemble(&level);
        let weight = Weight::zero(&level);
        let f = Nonlinearity::parse("-1", 1).unwrap().sample(&level);
        let j = DiscreteFunctional::new(&form, &weight, &f, 2.0).unwrap();
        let u = solve_local_min(&j, 4.0, &SolverOptions::default()).unwrap();
        for (x, v) in level.coords().iter().zip(&u.u) {
            assert!((v - x[0] * (1.0 - x[0])).abs() < 1e-12);
        }
    }
}
