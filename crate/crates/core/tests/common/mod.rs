//! Oracles shared by the integration tests. None of them call into the
//! solver or quadrature code under test.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Minimum transport cost by enumerating every basic feasible solution.
/// A basis is a spanning tree of the bipartite graph on m + n nodes; its
/// flows follow from peeling leaves.
pub fn brute_force_transport(a: &[f64], b: &[f64], cost: &dyn Fn(usize, usize) -> f64) -> f64 {
    let (m, n) = (a.len(), b.len());
    let arcs: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let k = m + n - 1;
    let mut best = f64::INFINITY;
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        if let Some(flows) = tree_flows(a, b, &pick.iter().map(|&e| arcs[e]).collect::<Vec<_>>()) {
            if flows.iter().all(|&f| f >= -1e-12) {
                let v: f64 = pick.iter().zip(&flows).map(|(&e, f)| f * cost(arcs[e].0, arcs[e].1)).sum();
                best = best.min(v);
            }
        }
        // next k-subset in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < arcs.len() - k + i {
                break;
            }
        }
        pick[i] += 1;
        for j in i + 1..k {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

fn tree_flows(a: &[f64], b: &[f64], edges: &[(usize, usize)]) -> Option<Vec<f64>> {
    let (m, n) = (a.len(), b.len());
    let mut residual: Vec<f64> = a.iter().copied().chain(b.iter().copied()).collect();
    let mut degree = vec![0usize; m + n];
    for &(i, j) in edges {
        degree[i] += 1;
        degree[m + j] += 1;
    }
    let mut flows = vec![f64::NAN; edges.len()];
    let mut done = vec![false; edges.len()];
    for _ in 0..edges.len() {
        // a leaf fixes the flow on its only remaining edge
        let (e, leaf) = edges.iter().enumerate().filter(|(e, _)| !done[*e]).find_map(|(e, &(i, j))| {
            if degree[i] == 1 {
                Some((e, i))
            } else if degree[m + j] == 1 {
                Some((e, m + j))
            } else {
                None
            }
        })?;
        let (i, j) = edges[e];
        let f = residual[leaf];
        flows[e] = f;
        done[e] = true;
        residual[i] -= f;
        residual[m + j] -= f;
        degree[i] -= 1;
        degree[m + j] -= 1;
    }
    // a cycle leaves some vertex uncovered
    if degree.iter().any(|&d| d != 0) || residual.iter().any(|r| r.abs() > 1e-9) {
        return None;
    }
    Some(flows)
}

/// ∫₀¹ c(F_ν^{-1}(u), F_μ^{-1}(u)) du for sorted one-dimensional atoms.
pub fn quantile_coupling(x: &[f64], p: &[f64], y: &[f64], q: &[f64], c: impl Fn(f64, f64) -> f64) -> f64 {
    let (mut i, mut j) = (0, 0);
    let (mut left_p, mut left_q) = (p[0], q[0]);
    let mut total = 0.0;
    while i < x.len() && j < y.len() {
        let step = left_p.min(left_q);
        total += step * c(x[i], y[j]);
        left_p -= step;
        left_q -= step;
        if left_p <= 1e-15 && i + 1 < x.len() {
            i += 1;
            left_p += p[i];
        } else if left_p <= 1e-15 {
            i += 1;
        }
        if left_q <= 1e-15 && j + 1 < y.len() {
            j += 1;
            left_q += q[j];
        } else if left_q <= 1e-15 {
            j += 1;
        }
    }
    total
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * k as f64);
    }
    s * h / 3.0
}

/// Random probability vector with `k` positive entries.
pub fn random_simplex(rng: &mut ChaCha20Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous cdf.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - k as f64 / n).abs()).max(((k + 1) as f64 / n - f).abs());
    }
    d
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
