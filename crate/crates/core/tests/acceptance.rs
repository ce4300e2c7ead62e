//! One test per acceptance criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line; run with `--nocapture` to see them.
//! Tests hold a shared lock so the runtime limits are measured alone.

mod common;

use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;

use common::{brute_force_transport, linspace, quantile_coupling, random_simplex, rng};
use ineqlab::concentration::{
    geometric_grid, mc_deviation, mc_enlargement, route_consistency, DeviationSpec, Verdict,
};
use ineqlab::measures::{nu_p_make, DiscreteMeasure};
use ineqlab::metric::HalfSpaceSet;
use ineqlab::poincare::{equivalence_check, muckenhoupt_weighted};
use ineqlab::report::to_json;
use ineqlab::spectral::spectral_gap_estimate;
use ineqlab::transport::{
    contraction_check, optimal_cost_weights, tci_check, tensorize_check, DenseCost, Family,
};
use ineqlab::weight::{alpha, kappa, BecknerProfile};
use ineqlab::{Weight, WeightFunction};

static SERIAL: Mutex<()> = Mutex::new(());

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(n: u32, pass: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

#[test]
fn criterion_01_muckenhoupt_exactness() {
    let _g = lock();
    let start = Instant::now();
    let r = muckenhoupt_weighted(&nu_p_make(1.0).unwrap(), &WeightFunction::Identity).unwrap();
    let elapsed = start.elapsed();
    let (lo, hi) = r.bracket();
    let pass = (r.d_minus.0 - 1.0).abs() <= 1e-3
        && (r.d_plus.0 - 1.0).abs() <= 1e-3
        && (lo - 1.0).abs() <= 1e-3
        && (hi - 4.0).abs() <= 4e-3
        && elapsed < Duration::from_secs(5);
    report(
        1,
        pass,
        format!("D-={:.6} D+={:.6} bracket=[{lo:.6}, {hi:.6}] in {elapsed:.2?}", r.d_minus.0, r.d_plus.0),
    );
}

#[test]
fn criterion_02_sharp_constant() {
    let _g = lock();
    let mu = nu_p_make(1.0).unwrap();
    let bracket = muckenhoupt_weighted(&mu, &WeightFunction::Identity).unwrap().bracket();
    // the box grows with the grid; a fixed box converges to a value below 4
    let mut values = Vec::new();
    let mut last_time = Duration::ZERO;
    for (half, cells) in [(20.0, 1000), (40.0, 2000), (80.0, 4000)] {
        let start = Instant::now();
        let e = spectral_gap_estimate(&mu, &WeightFunction::Identity, cells, (-half, half)).unwrap();
        last_time = start.elapsed();
        values.push(e.value());
    }
    let last = *values.last().unwrap();
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let pass = (last - 4.0).abs() <= 0.05 * 4.0
        && increasing
        && bracket.0 <= last
        && last <= bracket.1
        && last_time < Duration::from_secs(30);
    report(
        2,
        pass,
        format!("estimates {values:.5?} bracket=[{:.5}, {:.5}], 4000 cells in {last_time:.2?}", bracket.0, bracket.1),
    );
}

#[test]
fn criterion_03_pushforward_equivalence() {
    let _g = lock();
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for p in [2.0, 1.5] {
        let r = equivalence_check(&nu_p_make(p).unwrap(), &WeightFunction::omega_p(p).unwrap()).unwrap();
        worst = worst.max(r.rel_diff_minus.0).max(r.rel_diff_plus.0);
        pass &= r.pass && r.weighted.is_finite();
    }
    pass &= worst <= 1e-6;
    report(3, pass, format!("max relative difference {worst:.3e}"));
}

/// Inputs spread over many scales: log-uniform on [1e-6, 60] half the time.
fn magnitude(r: &mut impl Rng) -> f64 {
    if r.gen_bool(0.5) {
        (r.gen_range((1e-6f64).ln()..60f64.ln())).exp()
    } else {
        r.gen_range(0.0..3.0)
    }
}

#[test]
fn criterion_04_lemma_suite() {
    let _g = lock();
    let weights = [
        WeightFunction::Identity,
        WeightFunction::omega_p(1.5).unwrap(),
        WeightFunction::omega_p(2.0).unwrap(),
        WeightFunction::omega_p(3.0).unwrap(),
        WeightFunction::omega_t(BecknerProfile::latala_oleszkiewicz(1.5).unwrap()).unwrap(),
    ];
    let start = Instant::now();
    let slack = |v: f64| 1e-12 * (1.0 + v.abs());
    let mut violations = [0usize; 4];
    let mut r = rng(4);
    const N: usize = 1_000_000;
    for w in &weights {
        for _ in 0..N {
            let (x, y) = (magnitude(&mut r), magnitude(&mut r));
            // super-additivity
            let s = w.eval(x + y);
            if s < w.eval(x) + w.eval(y) - slack(s) {
                violations[0] += 1;
            }
            // halving bound on signed pairs
            let (sx, sy) = (if r.gen_bool(0.5) { x } else { -x }, if r.gen_bool(0.5) { y } else { -y });
            let h = w.eval((sx - sy).abs() / 2.0);
            if (w.eval(sx) - w.eval(sy)).abs() < h - slack(h) {
                violations[1] += 1;
            }
            // α lemmas on d_ω distances
            let (u, v) = ((w.eval(x) - w.eval(sy)).abs(), (w.eval(sy) - w.eval(-y)).abs());
            let a = magnitude(&mut r);
            let m = alpha(a * u);
            if m < alpha(a) * alpha(u) - slack(m) {
                violations[2] += 1;
            }
            let q = alpha(u + v);
            if q > 2.0 * (alpha(u) + alpha(v)) + slack(q) {
                violations[3] += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = violations.iter().all(|&v| v == 0) && elapsed < Duration::from_secs(20);
    report(
        4,
        pass,
        format!("violations super+/halving/super*/quasi-triangle = {violations:?} over {N} inputs x 5 weights in {elapsed:.2?}"),
    );
}

#[test]
fn criterion_05_omega_t_closed_form() {
    let _g = lock();
    let mut worst_value: f64 = 0.0;
    let mut worst_deriv: f64 = 0.0;
    let mut sandwich_breaks = 0usize;
    let mut at_r2_t2 = f64::NAN;
    for r in [1.2, 1.5, 2.0] {
        let w = WeightFunction::omega_t(BecknerProfile::latala_oleszkiewicz(r).unwrap()).unwrap();
        let omega_r = WeightFunction::omega_p(r).unwrap();
        let grid: Vec<f64> = linspace(0.0, 1.0, 1001).into_iter().chain(linspace(1.0, 50.0, 4901)).collect();
        for &t in &grid {
            let quoted = if t <= 1.0 { t } else { t.powf(r) / r + 1.0 - 1.0 / r };
            worst_value = worst_value.max((w.eval(t) - quoted).abs());
            if t > 0.0 && t != 1.0 {
                let d = w.deriv1(t);
                worst_deriv = worst_deriv.max((d - t.powf(r - 1.0).max(1.0)).abs());
                let upper = omega_r.deriv1(t);
                if d < upper / r - 1e-12 || d > upper + 1e-12 {
                    sandwich_breaks += 1;
                }
            }
        }
        if r == 2.0 {
            at_r2_t2 = w.eval(2.0);
        }
    }
    let pass = worst_value <= 1e-8 && worst_deriv <= 1e-6 && sandwich_breaks == 0;
    report(
        5,
        pass,
        format!(
            "max |omega_T - quoted| = {worst_value:.4e}, max |omega_T' - max(1,t^(r-1))| = {worst_deriv:.4e}, \
             sandwich breaks = {sandwich_breaks}, omega_T(2) at r=2 is {at_r2_t2:.6} (quoted 2.5)"
        ),
    );
}

#[test]
fn criterion_06_transport_oracles() {
    let _g = lock();
    let mut r = rng(6);
    let mut worst_enum: f64 = 0.0;
    for _ in 0..1000 {
        let m = r.gen_range(1..=4);
        let n = r.gen_range(1..=4);
        let a = random_simplex(&mut r, m);
        let b = random_simplex(&mut r, n);
        let c: Vec<f64> = (0..m * n).map(|_| r.gen_range(0.0..10.0)).collect();
        let v = optimal_cost_weights(&a, &b, &DenseCost::new(m, n, c.clone()).unwrap()).unwrap().value;
        worst_enum = worst_enum.max((v - brute_force_transport(&a, &b, &|i, j| c[i * n + j])).abs());
    }
    let mut worst_quantile: f64 = 0.0;
    for _ in 0..100 {
        let mut x: Vec<f64> = (0..r.gen_range(2..50)).map(|_| r.gen_range(-5.0..5.0)).collect();
        let mut y: Vec<f64> = (0..r.gen_range(2..50)).map(|_| r.gen_range(-5.0..5.0)).collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        let p = random_simplex(&mut r, x.len());
        let q = random_simplex(&mut r, y.len());
        let cost = DenseCost::from_fn(x.len(), y.len(), |i, j| (x[i] - y[j]).powi(2));
        let v = optimal_cost_weights(&p, &q, &cost).unwrap().value;
        worst_quantile = worst_quantile.max((v - quantile_coupling(&x, &p, &y, &q, |s, t| (s - t).powi(2))).abs());
    }
    let pass = worst_enum <= 1e-9 && worst_quantile <= 1e-6;
    report(6, pass, format!("max |simplex - enumeration| = {worst_enum:.3e}, max |simplex - quantile| = {worst_quantile:.3e}"));
}

#[test]
fn criterion_07_tci_certification() {
    let _g = lock();
    let start = Instant::now();
    let mu = nu_p_make(1.0).unwrap();
    let a = 1.0 / (2.0 * kappa::<f64>());
    let grid = linspace(-15.0, 15.0, 400);
    let one = tci_check(&mu, &WeightFunction::Identity, a, Family::Standard, &grid).unwrap();
    let control = tci_check(&mu, &WeightFunction::Identity, 50.0, Family::Standard, &grid).unwrap();
    let tensor = tensorize_check(&mu, &WeightFunction::Identity, a, 2, &linspace(-9.0, 9.0, 60)).unwrap();
    let elapsed = start.elapsed();
    let pass = one.max_ratio.0 <= 1.0
        && one.ratios.len() == 49
        && tensor.max_ratio.0 <= 1.0
        && control.max_ratio.0 > 1.0
        && elapsed < Duration::from_secs(180);
    report(
        7,
        pass,
        format!(
            "max_ratio {:.5} over {} members, n=2 max_ratio {:.5}, a=50 control {:.3}, total {elapsed:.1?}",
            one.max_ratio.0,
            one.ratios.len(),
            tensor.max_ratio.0,
            control.max_ratio.0
        ),
    );
}

#[test]
fn criterion_08_contraction() {
    let _g = lock();
    let omega = WeightFunction::omega_p(2.0).unwrap();
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for _ in 0..20 {
        let mut atoms: Vec<f64> = (0..5).map(|_| r.gen_range(-3.0..3.0)).collect();
        atoms.sort_by(f64::total_cmp);
        let mu = DiscreteMeasure::new_1d(atoms.clone(), random_simplex(&mut r, 5)).unwrap();
        let scale = r.gen_range(0.2..2.0);
        let cost = DenseCost::from_fn(5, 5, |i, j| alpha(scale * (atoms[i] - atoms[j]).abs()));
        let rep = contraction_check(&mu, &cost, |x| omega.eval(x), Family::Standard).unwrap();
        worst = worst.max(rep.max_abs_diff.0);
        pass &= rep.pass;
    }
    pass &= worst <= 1e-9;
    report(8, pass, format!("max ratio difference {worst:.3e} over 20 instances"));
}

#[test]
fn criterion_09_deviation_mc() {
    let _g = lock();
    let mu = nu_p_make(1.0).unwrap();
    let spec = DeviationSpec::normalized_sum(20, WeightFunction::Identity).unwrap();
    let run = || mc_deviation(&mu, &spec, 4.0, &[1.0, 2.0, 3.0], 1_000_000, 20_240_607).unwrap();
    let first = run();
    let second = run();
    let identical = to_json(&first) == to_json(&second);
    let never_exceeds = first.rows.iter().all(|row| row.empirical.0 <= row.bound.0);
    let pass = identical && never_exceeds && first.verdict == Verdict::Pass;
    let rows: Vec<String> = first
        .rows
        .iter()
        .map(|row| format!("t={} emp={:.5} bound={:.5}", row.t_or_h.0, row.empirical.0, row.bound.0))
        .collect();
    report(9, pass, format!("{}; re-run identical: {identical}", rows.join(", ")));
}

#[test]
fn criterion_10_enlargement() {
    let _g = lock();
    let mu = nu_p_make(1.0).unwrap();
    let median = mu.quantile(0.5);
    let set = HalfSpaceSet::at_most(0, 0, median);
    let h_grid = [1e3, 1e4, 1e5];
    let rep = mc_enlargement(&mu, &WeightFunction::Identity, &set, 10, 4.0, &h_grid, 200_000, 1010).unwrap();
    let above = rep.rows.iter().all(|row| row.empirical.0 >= row.bound.0 - 0.005);
    let route = route_consistency(&geometric_grid(0.1, 100.0, 400), &[1, 2, 3], 8.0).unwrap();
    let pass = above && rep.verdict == Verdict::Pass && route.pass;
    let rows: Vec<String> = rep
        .rows
        .iter()
        .map(|row| format!("h={} emp={:.5} bound={:.5}", row.t_or_h.0, row.empirical.0, row.bound.0))
        .collect();
    report(
        10,
        pass,
        format!("{}; route ratio {:.12} (C={:.3}, d={})", rows.join(", "), route.max_ratio.0, route.worst_c.0, route.worst_d),
    );
}
