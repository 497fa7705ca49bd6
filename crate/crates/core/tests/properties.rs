use gasketvar::energy::{bilinear, energy, harmonic_extension, DiscreteFunction, EnergyForm};
use gasketvar::gasket::{build_level, GasketLevel};
use gasketvar::output::to_json;
use gasketvar::problem::{Nonlinearity, Weight};
use gasketvar::solver::DiscreteFunctional;
use proptest::prelude::*;

fn level(n: usize, m: u32) -> GasketLevel {
    build_level(n, m).unwrap()
}

/// Values for every vertex of `(n, m)`, drawn from `[-2, 2]`.
fn values(n: usize, m: u32) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, level(n, m).num_vertices())
}

fn interior_only(l: &GasketLevel, mut v: Vec<f64>) -> Vec<f64> {
    for &b in l.boundary() {
        v[b] = 0.0;
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polarization(u in values(3, 3), v in values(3, 3)) {
        let l = level(3, 3);
        let f = |x: &[f64]| DiscreteFunction::from_values(&l, x.to_vec()).unwrap();
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let diff: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
        let lhs = energy(&l, &f(&sum)).unwrap() - energy(&l, &f(&diff)).unwrap();
        let rhs = 4.0 * bilinear(&l, &f(&u), &f(&v)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn assembled_form_matches_edge_sum(u in values(4, 2)) {
        let l = level(4, 2);
        let du = DiscreteFunction::from_values(&l, u).unwrap();
        let form = EnergyForm::assemble(&l);
        let w = energy(&l, &du).unwrap();
        prop_assert!((form.quadratic(&du) - w).abs() <= 1e-12 * w.max(1.0));
        prop_assert!(w >= 0.0);
    }

    #[test]
    fn extension_restricts_back(u in values(3, 2)) {
        let (c, f) = (level(3, 2), level(3, 3));
        let du = DiscreteFunction::from_values(&c, u.clone()).unwrap();
        let ext = harmonic_extension(&c, &f, &du).unwrap();
        let back = ext.restrict(&f, &c).unwrap();
        prop_assert_eq!(back.values(), &u[..]);
    }

    #[test]
    fn gradient_is_the_derivative(u in values(3, 3), v in values(3, 3), lambda in 1e-3f64..10.0) {
        let l = level(3, 3);
        let form = EnergyForm::assemble(&l);
        let weight = Weight::constant(&l, -0.5);
        let f = Nonlinearity::model("1 + x1", 3, 1.0, 2).unwrap().sample(&l);
        let j = DiscreteFunctional::new(&form, &weight, &f, lambda).unwrap();
        let (u, v) = (interior_only(&l, u), interior_only(&l, v));
        let h = 1e-5;
        let at = |c: f64| -> Vec<f64> { u.iter().zip(&v).map(|(a, b)| a + c * b).collect() };
        let fd = (j.value(&at(h)) - j.value(&at(-h))) / (2.0 * h);
        let exact: f64 = j.gradient(&u).iter().zip(&v).map(|(g, b)| g * b).sum();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{} vs {}", fd, exact);
    }

    #[test]
    fn alpha_norm_dominates_energy_for_nonpositive_weight(u in values(3, 3), a in -5.0f64..0.0) {
        let l = level(3, 3);
        let form = EnergyForm::assemble(&l);
        let du = DiscreteFunction::from_values(&l, interior_only(&l, u)).unwrap();
        let na = form.norm_alpha(&du, &vec![a; l.num_vertices()]).unwrap();
        prop_assert!(na * na >= form.quadratic(&du) * (1.0 - 1e-14));
    }
}

#[test]
fn levels_are_nested() {
    for n in 2..=4 {
        for m in 0..4 {
            let map = level(n, m).embed_into(&level(n, m + 1)).expect("coarse vertices persist");
            let mut sorted = map.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), map.len());
        }
    }
}

#[test]
fn mesh_export_is_deterministic() {
    for (n, m) in [(2, 4), (3, 3), (5, 2)] {
        assert_eq!(to_json(&level(n, m).export()).unwrap(), to_json(&level(n, m).export()).unwrap());
    }
}

#[test]
fn vertex_counts_follow_closed_forms() {
    for m in 0..6u32 {
        assert_eq!(level(2, m).num_vertices(), (1 << m) + 1);
        assert_eq!(level(3, m).edges().len(), 3usize.pow(m + 1));
        assert_eq!(level(4, m).cells().len(), 4usize.pow(m));
    }
}
