mod common;

use rand::Rng;

use common::{brute_force_transport, linspace, quantile_coupling, random_simplex, rng};
use ineqlab::measures::{nu_p_make, relative_entropy, DiscreteMeasure};
use ineqlab::transport::{
    contraction_check, optimal_cost, optimal_cost_weights, pullback_cost, quasi_triangle_violation,
    symmetrized_tci_bound, CostSpec, DenseCost, Family,
};
use ineqlab::weight::alpha;
use ineqlab::{Error, Weight, WeightFunction};

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut r = rng(17);
    for _ in 0..300 {
        let m = r.gen_range(1..=4);
        let n = r.gen_range(1..=4);
        let a = random_simplex(&mut r, m);
        let b = random_simplex(&mut r, n);
        let c: Vec<f64> = (0..m * n).map(|_| r.gen_range(0.0..10.0)).collect();
        let cost = DenseCost::new(m, n, c.clone()).unwrap();
        let plan = optimal_cost_weights(&a, &b, &cost).unwrap();
        let oracle = brute_force_transport(&a, &b, &|i, j| c[i * n + j]);
        assert!((plan.value - oracle).abs() <= 1e-9, "{} vs {oracle}", plan.value);
    }
}

#[test]
fn plan_marginals_and_value() {
    let mut r = rng(5);
    for _ in 0..50 {
        let m = r.gen_range(2..30);
        let n = r.gen_range(2..30);
        let a = random_simplex(&mut r, m);
        let b = random_simplex(&mut r, n);
        let cost = DenseCost::from_fn(m, n, |i, j| ((i as f64) - 0.7 * j as f64).abs().sqrt());
        let plan = optimal_cost_weights(&a, &b, &cost).unwrap();
        for (x, y) in plan.row_sums().iter().zip(&a) {
            assert!((x - y).abs() < 1e-9);
        }
        for (x, y) in plan.col_sums().iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!(plan.entries.iter().all(|e| e.2 >= 0.0));
        let v: f64 = plan.entries.iter().map(|&(i, j, f)| f * ineqlab::transport::CostMatrix::cost(&cost, i, j)).sum();
        assert!((v - plan.value).abs() < 1e-12);
    }
}

#[test]
fn squared_cost_equals_quantile_coupling() {
    let mut r = rng(23);
    for _ in 0..100 {
        let k = r.gen_range(2..40);
        let l = r.gen_range(2..40);
        let mut x: Vec<f64> = (0..k).map(|_| r.gen_range(-5.0..5.0)).collect();
        let mut y: Vec<f64> = (0..l).map(|_| r.gen_range(-5.0..5.0)).collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        x.dedup();
        y.dedup();
        let p = random_simplex(&mut r, x.len());
        let q = random_simplex(&mut r, y.len());
        let cost = DenseCost::from_fn(x.len(), y.len(), |i, j| (x[i] - y[j]).powi(2));
        let v = optimal_cost_weights(&p, &q, &cost).unwrap().value;
        let oracle = quantile_coupling(&x, &p, &y, &q, |s, t| (s - t).powi(2));
        assert!((v - oracle).abs() < 1e-6, "{v} vs {oracle}");
    }
}

#[test]
fn half_mass_moves_one_unit() {
    let nu = DiscreteMeasure::new_1d(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
    let mu = DiscreteMeasure::new_1d(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
    let cost = CostSpec::raw(DenseCost::from_fn(2, 2, |i, j| (i as f64 - j as f64).abs()));
    let v = optimal_cost(&nu, &mu, &cost).unwrap().value;
    let oracle = brute_force_transport(&[1.0, 0.0], &[0.5, 0.5], &|i, j| (i as f64 - j as f64).abs());
    assert_eq!(v, 0.5);
    assert_eq!(oracle, 0.5);
}

#[test]
fn equal_measures_cost_nothing() {
    let mut r = rng(2);
    let atoms = linspace(-3.0, 3.0, 25);
    let w = random_simplex(&mut r, 25);
    let mu = DiscreteMeasure::new_1d(atoms.clone(), w.clone()).unwrap();
    let cost = CostSpec::alpha(WeightFunction::omega_p(2.0).unwrap(), 0.8).unwrap();
    let plan = optimal_cost(&mu, &mu, &cost).unwrap();
    assert_eq!(plan.value, 0.0);
    // and a perturbed ν costs something
    let mut w2 = w.clone();
    w2[0] += 0.01;
    w2[24] -= 0.01;
    let nu = DiscreteMeasure::new_1d(atoms, w2).unwrap();
    assert!(optimal_cost(&nu, &mu, &cost).unwrap().value > 0.0);
}

#[test]
fn unbalanced_measures_are_rejected() {
    let nu = DiscreteMeasure::new_1d(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
    let cost = DenseCost::from_fn(2, 2, |_, _| 1.0);
    assert!(matches!(optimal_cost_weights(&[0.5, 0.6], nu.weights(), &cost), Err(Error::InvalidMeasure(_))));
}

#[test]
fn alpha_cost_is_two_quasi_metric() {
    for w in ["identity", "omega_p:p=1.5", "omega_p:p=3", "omega_T:r=1.5"] {
        let omega = WeightFunction::from_spec(w).unwrap();
        let atoms = DiscreteMeasure::new_1d(linspace(-4.0, 4.0, 30), vec![1.0 / 30.0; 30]).unwrap();
        let cost = CostSpec::alpha(omega, 0.7).unwrap();
        let m = cost.matrix(&atoms, &atoms).unwrap();
        assert!(quasi_triangle_violation(&m) <= 1e-12, "{w}");
    }
}

#[test]
fn symmetrized_bound_on_disjoint_halves() {
    let mu1 = nu_p_make(1.0).unwrap();
    let edges = linspace(-9.0, 9.0, 9);
    let mu = ineqlab::measures::discretize(&mu1, &edges).unwrap().measure;
    let w = mu.weights();
    let left: Vec<f64> = (0..8).map(|i| if i < 4 { w[i] } else { 0.0 }).collect();
    let right: Vec<f64> = (0..8).map(|i| if i >= 4 { w[i] } else { 0.0 }).collect();
    let (sl, sr): (f64, f64) = (left.iter().sum(), right.iter().sum());
    let nu1 = DiscreteMeasure::new_1d(mu.coords().to_vec(), left.iter().map(|v| v / sl).collect()).unwrap();
    let nu2 = DiscreteMeasure::new_1d(mu.coords().to_vec(), right.iter().map(|v| v / sr).collect()).unwrap();
    let cost = CostSpec::alpha(WeightFunction::Identity, 0.5).unwrap();
    let report = symmetrized_tci_bound(&nu1, &nu2, &mu, &cost).unwrap();

    // oracle: 4x4 enumeration between the halves, entropies by hand
    let x = mu.coords();
    let t = brute_force_transport(&nu1.weights()[..4], &nu2.weights()[4..], &|i, j| alpha(0.5 * (x[i] - x[4 + j]).abs()));
    let h = |nu: &DiscreteMeasure| -> f64 {
        nu.weights().iter().zip(w).filter(|(p, _)| **p > 0.0).map(|(p, q)| p * (p / q).ln()).sum()
    };
    assert!((report.transport.0 - t).abs() < 1e-9);
    assert!((report.bound.0 - 2.0 * (h(&nu1) + h(&nu2))).abs() < 1e-12);
    assert!(report.pass && report.slack.0 > 0.0);

    let same = symmetrized_tci_bound(&mu, &mu, &mu, &cost).unwrap();
    assert_eq!(same.transport.0, 0.0);
    assert_eq!(same.bound.0, 0.0);
    assert!(same.pass);
}

#[test]
fn symmetrized_rejects_cost_without_quasi_triangle() {
    // c = |x − y|⁴ has quasi-triangle constant 8
    let mu = DiscreteMeasure::new_1d(vec![0.0, 1.0, 2.0], vec![1.0 / 3.0; 3]).unwrap();
    let cost = CostSpec::raw(DenseCost::from_fn(3, 3, |i, j| (i as f64 - j as f64).powi(4)));
    assert!(matches!(symmetrized_tci_bound(&mu, &mu, &mu, &cost), Err(Error::InvalidCost(_))));
}

fn five_atoms() -> DiscreteMeasure {
    DiscreteMeasure::new_1d(vec![-2.0, -0.5, 0.3, 1.2, 3.0], vec![0.1, 0.3, 0.25, 0.2, 0.15]).unwrap()
}

#[test]
fn contraction_identity_is_bit_equal() {
    let mu = five_atoms();
    let cost = DenseCost::from_fn(5, 5, |i, j| (mu.atom(i)[0] - mu.atom(j)[0]).powi(2));
    let r = contraction_check(&mu, &cost, |x| x, Family::Standard).unwrap();
    assert_eq!(r.max_abs_diff.0, 0.0);
    for e in &r.entries {
        assert_eq!(e.original, e.image);
    }
}

#[test]
fn contraction_under_omega_two() {
    let mu = five_atoms();
    let omega = WeightFunction::omega_p(2.0).unwrap();
    let cost = DenseCost::from_fn(5, 5, |i, j| alpha((mu.atom(i)[0] - mu.atom(j)[0]).abs()));
    let r = contraction_check(&mu, &cost, |x| omega.eval(x), Family::Standard).unwrap();
    assert!(r.pass, "{}", r.max_abs_diff.0);
}

#[test]
fn doubling_map_pulls_back_quarter_cost() {
    let mu = five_atoms();
    let cost = DenseCost::from_fn(5, 5, |i, j| (mu.atom(i)[0] - mu.atom(j)[0]).powi(2));
    let order: Vec<usize> = (0..5).collect();
    let pulled = pullback_cost(&cost, &order);
    for i in 0..5 {
        for j in 0..5 {
            let (y1, y2) = (2.0 * mu.atom(i)[0], 2.0 * mu.atom(j)[0]);
            let c = ineqlab::transport::CostMatrix::cost(&pulled, i, j);
            assert!((c - (y1 - y2).powi(2) / 4.0).abs() < 1e-12);
        }
    }
    let r = contraction_check(&mu, &cost, |x| 2.0 * x, Family::Standard).unwrap();
    assert!(r.pass);
}

#[test]
fn contraction_needs_injective_map() {
    let mu = five_atoms();
    let cost = DenseCost::from_fn(5, 5, |_, _| 1.0);
    assert!(matches!(contraction_check(&mu, &cost, |x| x.abs().min(1.0), Family::Tilts), Err(Error::InvalidParameter(_))));
}

#[test]
fn entropy_of_discretized_tilts_matches_formula() {
    let mu = DiscreteMeasure::new_1d(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
    let nu = DiscreteMeasure::new_1d(vec![0.0, 1.0], vec![0.75, 0.25]).unwrap();
    let h = relative_entropy(&nu, &mu).unwrap();
    let oracle = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
    assert!((h - oracle).abs() < 1e-15);
    assert!((h - 0.13081).abs() < 1e-5);
}
