//! Exact discrete optimal transport and checks of the transport-cost
//! inequality T_c(ν, μ) ≤ H(ν|μ) for costs c = α(a·d_ω).

pub mod simplex;

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{relative_entropy, Density1D, DiscreteMeasure};
use crate::metric::d_omega;
use crate::report::Real;
use crate::scalar::Scalar;
use crate::weight::{alpha, kappa, BglProfile, Weight, WeightFunction};

pub use simplex::{CostMatrix, DenseCost, SumCost};

/// Largest support accepted by [`optimal_cost`].
pub const MAX_ATOMS: usize = 10_000;

/// How a [`CostSpec`] turns a pair of points into a cost.
#[derive(Debug, Clone)]
pub enum CostMode {
    /// α(a·d_ω(x, y)).
    AlphaOfADomega,
    /// α_s(a·d_ω(x, y)) for a modified log-Sobolev profile.
    AlphaSProfile(BglProfile<f64>),
    /// A fixed matrix indexed by (source atom, target atom).
    RawMatrix(DenseCost),
}

#[derive(Debug, Clone)]
pub struct CostSpec {
    pub omega: WeightFunction,
    pub a: f64,
    pub mode: CostMode,
}

impl CostSpec {
    pub fn alpha(omega: WeightFunction, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::param(format!("cost scale a must be positive, got {a}")));
        }
        Ok(Self { omega, a, mode: CostMode::AlphaOfADomega })
    }

    pub fn alpha_s(omega: WeightFunction, a: f64, profile: BglProfile<f64>) -> Result<Self> {
        let mut c = Self::alpha(omega, a)?;
        c.mode = CostMode::AlphaSProfile(profile);
        Ok(c)
    }

    pub fn raw(matrix: DenseCost) -> Self {
        Self { omega: WeightFunction::Identity, a: 1.0, mode: CostMode::RawMatrix(matrix) }
    }

    /// Cost between two points (not available for raw matrices).
    pub fn pair(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let d = d_omega(x, y, &self.omega)?;
        match &self.mode {
            CostMode::AlphaOfADomega => Ok(alpha(self.a * d)),
            CostMode::AlphaSProfile(p) => Ok(p.alpha_s(self.a * d)),
            CostMode::RawMatrix(_) => Err(Error::InvalidCost("raw matrices have no pointwise form".into())),
        }
    }

    /// Cost matrix between the atoms of `nu` (rows) and `mu` (columns).
    pub fn matrix(&self, nu: &DiscreteMeasure, mu: &DiscreteMeasure) -> Result<DenseCost> {
        if let CostMode::RawMatrix(m) = &self.mode {
            if m.rows() != nu.len() || m.cols() != mu.len() {
                return Err(Error::DimensionMismatch { expected: nu.len() * mu.len(), got: m.rows() * m.cols() });
            }
            return Ok(m.clone());
        }
        if nu.dim() != mu.dim() {
            return Err(Error::DimensionMismatch { expected: nu.dim(), got: mu.dim() });
        }
        let mut data = Vec::with_capacity(nu.len() * mu.len());
        for i in 0..nu.len() {
            for j in 0..mu.len() {
                data.push(self.pair(nu.atom(i), mu.atom(j))?);
            }
        }
        DenseCost::new(nu.len(), mu.len(), data)
    }

    pub fn descriptor(&self) -> String {
        match &self.mode {
            CostMode::AlphaOfADomega => format!("alpha(a*d_omega), a={}, omega={}", self.a, self.omega.descriptor()),
            CostMode::AlphaSProfile(p) => format!(
                "alpha_s(a*d_omega), s={}, C={}, a={}, omega={}",
                p.s(),
                p.c(),
                self.a,
                self.omega.descriptor()
            ),
            CostMode::RawMatrix(m) => format!("raw {}x{}", m.rows(), m.cols()),
        }
    }
}

/// An optimal coupling stored sparsely; rows index ν, columns index μ.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
    pub value: f64,
}

impl TransportPlan {
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let mut p = vec![vec![0.0; self.cols]; self.rows];
        for &(i, j, f) in &self.entries {
            p[i][j] += f;
        }
        p
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.rows];
        for &(i, _, f) in &self.entries {
            r[i] += f;
        }
        r
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.cols];
        for &(_, j, f) in &self.entries {
            c[j] += f;
        }
        c
    }
}

/// Exact transport between weight vectors for any [`CostMatrix`]. Atoms
/// with zero weight are removed before solving.
pub fn optimal_cost_weights<C: CostMatrix + ?Sized>(nu: &[f64], mu: &[f64], cost: &C) -> Result<TransportPlan> {
    if nu.len() > MAX_ATOMS || mu.len() > MAX_ATOMS {
        return Err(Error::Size(format!(
            "supports of {} and {} atoms exceed {MAX_ATOMS}",
            nu.len(),
            mu.len()
        )));
    }
    let rows: Vec<usize> = (0..nu.len()).filter(|&i| nu[i] > 0.0).collect();
    let cols: Vec<usize> = (0..mu.len()).filter(|&j| mu[j] > 0.0).collect();
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::InvalidMeasure("a measure has no mass".into()));
    }
    struct Sub<'a, C: ?Sized> {
        base: &'a C,
        rows: &'a [usize],
        cols: &'a [usize],
    }
    impl<C: CostMatrix + ?Sized> CostMatrix for Sub<'_, C> {
        fn rows(&self) -> usize {
            self.rows.len()
        }
        fn cols(&self) -> usize {
            self.cols.len()
        }
        fn cost(&self, i: usize, j: usize) -> f64 {
            self.base.cost(self.rows[i], self.cols[j])
        }
    }
    let sub = Sub { base: cost, rows: &rows, cols: &cols };
    let a: Vec<f64> = rows.iter().map(|&i| nu[i]).collect();
    let b: Vec<f64> = cols.iter().map(|&j| mu[j]).collect();
    let sol = simplex::solve(&a, &b, &sub)?;
    Ok(TransportPlan {
        rows: nu.len(),
        cols: mu.len(),
        entries: sol.flows.into_iter().map(|(i, j, f)| (rows[i], cols[j], f)).collect(),
        value: sol.value,
    })
}

/// T_c(ν, μ) and an optimal plan.
pub fn optimal_cost(nu: &DiscreteMeasure, mu: &DiscreteMeasure, cost: &CostSpec) -> Result<TransportPlan> {
    for m in [nu, mu] {
        let total: f64 = m.weights().iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
    }
    let matrix = cost.matrix(nu, mu)?;
    optimal_cost_weights(nu.weights(), mu.weights(), &matrix)
}

/// A member of the declared test family: the ν it produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyEntry {
    pub index: usize,
    pub label: String,
    pub entropy: Real,
    pub cost: Real,
    /// None when H(ν|μ) = 0 (the ratio is 0/0).
    pub ratio: Option<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TciReport {
    pub measure: String,
    pub weight: String,
    pub a: Real,
    pub family_id: String,
    pub ratios: Vec<FamilyEntry>,
    pub max_ratio: Real,
    pub worst: Option<String>,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// The declared family of test measures for one-dimensional checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// μ itself, 16 tilts e^{λx}, 16 tilts e^{λω(x)}, 8 one-sided
    /// truncations and 8 two-tilt mixtures.
    Standard,
    /// μ itself and the 16 tilts e^{λx}.
    Tilts,
}

impl Family {
    pub fn id(&self) -> &'static str {
        match self {
            Family::Standard => "standard-v1",
            Family::Tilts => "tilts-v1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "standard" | "standard-v1" => Ok(Family::Standard),
            "tilts" | "tilts-v1" => Ok(Family::Tilts),
            other => Err(Error::param(format!("unknown family '{other}'"))),
        }
    }
}

pub const TILT_LAMBDAS: [f64; 16] = [
    -0.4, -0.35, -0.3, -0.25, -0.2, -0.15, -0.1, -0.05, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4,
];
pub const TRUNCATION_LEVELS: [f64; 4] = [0.3, 0.5, 0.7, 0.9];
pub const MIXTURE_PAIRS: [(f64, f64); 8] = [
    (-0.4, 0.4),
    (-0.2, 0.2),
    (0.0, 0.4),
    (0.0, -0.4),
    (0.1, 0.3),
    (-0.1, -0.3),
    (-0.4, 0.1),
    (0.4, -0.1),
];

fn tilt(mu: &DiscreteMeasure, f: impl Fn(f64) -> f64, lambda: f64) -> Result<Vec<f64>> {
    // shift exponents by their maximum so nothing overflows
    let e: Vec<f64> = (0..mu.len()).map(|i| lambda * f(mu.atom(i)[0])).collect();
    let top = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let masses: Vec<f64> = mu.weights().iter().zip(&e).map(|(w, x)| w * (x - top).exp()).collect();
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) {
        return Err(Error::numeric("tilted measure has no mass"));
    }
    Ok(masses.into_iter().map(|m| m / total).collect())
}

/// The family members as weight vectors on the atoms of `mu`.
pub fn family_members(mu: &DiscreteMeasure, omega: &WeightFunction, family: Family) -> Result<Vec<(String, Vec<f64>)>> {
    if mu.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: mu.dim() });
    }
    let mut out = vec![("identity".to_string(), mu.weights().to_vec())];
    for &l in &TILT_LAMBDAS {
        out.push((format!("tilt(lambda={l})"), tilt(mu, |x| x, l)?));
    }
    if family == Family::Tilts {
        return Ok(out);
    }
    let max_x = (0..mu.len()).map(|i| mu.atom(i)[0].abs()).fold(0.0, f64::max);
    let max_w = (0..mu.len()).map(|i| omega.eval(mu.atom(i)[0]).abs()).fold(0.0, f64::max);
    let shrink = if max_w > 0.0 { (max_x / max_w).min(1.0) } else { 1.0 };
    for &l in &TILT_LAMBDAS {
        let ls = l * shrink;
        out.push((format!("omega_tilt(lambda={ls})"), tilt(mu, |x| omega.eval(x), ls)?));
    }
    let w = mu.weights();
    let mut cum = Vec::with_capacity(w.len());
    let mut acc = 0.0;
    for &x in w {
        acc += x;
        cum.push(acc);
    }
    for &q in &TRUNCATION_LEVELS {
        // lower piece {x ≤ q-quantile} and upper piece {x ≥ (1−q)-quantile}
        let k_lo = cum.partition_point(|&c| c < q).min(w.len() - 1);
        let lower: Vec<f64> = (0..w.len()).map(|i| if i <= k_lo { w[i] } else { 0.0 }).collect();
        let k_hi = cum.partition_point(|&c| c < 1.0 - q).min(w.len() - 1);
        let upper: Vec<f64> = (0..w.len()).map(|i| if i >= k_hi { w[i] } else { 0.0 }).collect();
        for (label, piece) in [(format!("truncate(x<=q{q})"), lower), (format!("truncate(x>=q{})", 1.0 - q), upper)] {
            let t: f64 = piece.iter().sum();
            out.push((label, piece.into_iter().map(|m| m / t).collect()));
        }
    }
    for &(la, lb) in &MIXTURE_PAIRS {
        let ta = tilt(mu, |x| x, la)?;
        let tb = tilt(mu, |x| x, lb)?;
        out.push((format!("mixture({la},{lb})"), ta.iter().zip(&tb).map(|(p, q)| 0.5 * (p + q)).collect()));
    }
    Ok(out)
}

/// Atoms at `grid` with the μ-mass of the cells between midpoints.
pub fn discretize_on_atoms(mu: &Density1D, grid: &[f64]) -> Result<DiscreteMeasure> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("grid must have at least two strictly increasing points"));
    }
    let n = grid.len();
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(grid[0] - 0.5 * (grid[1] - grid[0]));
    for w in grid.windows(2) {
        edges.push(0.5 * (w[0] + w[1]));
    }
    edges.push(grid[n - 1] + 0.5 * (grid[n - 1] - grid[n - 2]));
    let d = crate::measures::discretize(mu, &edges)?;
    DiscreteMeasure::new_1d(grid.to_vec(), d.measure.weights().to_vec())
}

fn ratios_for<C: CostMatrix + ?Sized>(
    mu_w: &[f64],
    members: &[(String, Vec<f64>)],
    cost: &C,
    entropy: impl Fn(&[f64]) -> Result<f64> + Sync,
) -> Result<Vec<FamilyEntry>> {
    members
        .par_iter()
        .enumerate()
        .map(|(index, (label, w))| {
            let h = entropy(w)?;
            let (c, ratio) = if h > 0.0 {
                let plan = optimal_cost_weights(w, mu_w, cost)?;
                (plan.value, Some(Real(plan.value / h)))
            } else {
                (0.0, None)
            };
            Ok(FamilyEntry { index, label: label.clone(), entropy: Real(h), cost: Real(c), ratio })
        })
        .collect()
}

fn summarize(
    measure: String,
    weight: String,
    a: f64,
    family_id: String,
    ratios: Vec<FamilyEntry>,
    mut notes: Vec<String>,
) -> TciReport {
    let mut max_ratio = f64::NEG_INFINITY;
    let mut worst = None;
    for e in &ratios {
        match e.ratio {
            Some(r) if r.0 > max_ratio => {
                max_ratio = r.0;
                worst = Some(e.label.clone());
            }
            None => notes.push(format!("{}: H(nu|mu) = 0, ratio skipped (0/0)", e.label)),
            _ => {}
        }
    }
    notes.push("pass means: not falsified on the declared family".into());
    let pass = max_ratio <= 1.0 + 1e-6;
    TciReport {
        measure,
        weight,
        a: Real(a),
        family_id,
        ratios,
        max_ratio: Real(max_ratio),
        worst,
        pass,
        notes,
    }
}

/// Checks T_c(ν, μ) ≤ H(ν|μ) for c = α(a·d_ω) over the family, with every
/// measure discretized on the atoms `grid`.
pub fn tci_check(
    mu: &Density1D,
    omega: &WeightFunction,
    a: f64,
    family: Family,
    grid: &[f64],
) -> Result<TciReport> {
    let mu_d = discretize_on_atoms(mu, grid)?;
    let cost = CostSpec::alpha(omega.clone(), a)?;
    let matrix = cost.matrix(&mu_d, &mu_d)?;
    let members = family_members(&mu_d, omega, family)?;
    let ratios = ratios_for(mu_d.weights(), &members, &matrix, |w| entropy_weights(w, mu_d.weights()))?;
    Ok(summarize(
        mu.name().to_string(),
        omega.descriptor(),
        a,
        family.id().to_string(),
        ratios,
        Vec::new(),
    ))
}

/// H between weight vectors on a shared atom set.
pub fn entropy_weights(nu: &[f64], mu: &[f64]) -> Result<f64> {
    if nu.len() != mu.len() {
        return Err(Error::Alignment(format!("{} vs {} atoms", nu.len(), mu.len())));
    }
    let mut h = 0.0;
    for (&p, &q) in nu.iter().zip(mu) {
        if p == 0.0 {
            continue;
        }
        if q == 0.0 {
            return Ok(f64::INFINITY);
        }
        h += p * (p / q).ln();
    }
    Ok(h.max(0.0))
}

/// Product-space check: μ^n on grid^n with the summed cost, against
/// product tilts, correlated tilts e^{γΣ_{i<j} x_i x_j}, a half-space
/// truncation and a mixture. `n = 1` is exactly [`tci_check`].
pub fn tensorize_check(
    mu: &Density1D,
    omega: &WeightFunction,
    a: f64,
    n: usize,
    grid: &[f64],
) -> Result<TciReport> {
    if n == 0 || n > 3 {
        return Err(Error::param(format!("n must be 1, 2 or 3, got {n}")));
    }
    if n == 1 {
        return tci_check(mu, omega, a, Family::Standard, grid);
    }
    let g = grid.len();
    let size = g.checked_pow(n as u32).filter(|&s| s <= 10_000).ok_or_else(|| {
        Error::Size(format!("product grid {g}^{n} exceeds 10^4 points"))
    })?;
    let mu_d = discretize_on_atoms(mu, grid)?;
    let cost = CostSpec::alpha(omega.clone(), a)?;
    let base = cost.matrix(&mu_d, &mu_d)?;
    let sum_cost = SumCost::new(base, n)?;

    let coords = |mut k: usize| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for slot in x.iter_mut().rev() {
            *slot = grid[k % g];
            k /= g;
        }
        x
    };
    let w1 = mu_d.weights();
    let product: Vec<f64> = (0..size)
        .map(|mut k| {
            let mut p = 1.0;
            for _ in 0..n {
                p *= w1[k % g];
                k /= g;
            }
            p
        })
        .collect();
    let reweight = |f: &dyn Fn(&[f64]) -> f64| -> Vec<f64> {
        let e: Vec<f64> = (0..size).map(|k| f(&coords(k))).collect();
        let top = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let m: Vec<f64> = product.iter().zip(&e).map(|(p, x)| if *x == f64::NEG_INFINITY { 0.0 } else { p * (x - top).exp() }).collect();
        let t: f64 = m.iter().sum();
        m.into_iter().map(|v| v / t).collect()
    };

    let mut members: Vec<(String, Vec<f64>)> = vec![("identity".into(), product.clone())];
    let patterns: Vec<Vec<f64>> = {
        let mut p = vec![vec![1.0; n]];
        p.push((0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect());
        p.push((0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect());
        p
    };
    for lambda in [0.1, 0.3, -0.3] {
        for pat in &patterns {
            let l: Vec<f64> = pat.iter().map(|s| s * lambda).collect();
            let label = format!("product_tilt({l:?})");
            members.push((label, reweight(&|x| x.iter().zip(&l).map(|(a, b)| a * b).sum())));
        }
    }
    for gamma in [-0.1, -0.05, 0.05, 0.1] {
        let f = move |x: &[f64]| {
            let mut s = 0.0;
            for i in 0..x.len() {
                for j in i + 1..x.len() {
                    s += x[i] * x[j];
                }
            }
            gamma * s
        };
        members.push((format!("correlated(gamma={gamma})"), reweight(&f)));
    }
    members.push((
        "halfspace(sum x >= 0)".into(),
        reweight(&|x| if x.iter().sum::<f64>() >= 0.0 { 0.0 } else { f64::NEG_INFINITY }),
    ));
    let plus = reweight(&|x| 0.3 * x.iter().sum::<f64>());
    let minus = reweight(&|x| -0.3 * x.iter().sum::<f64>());
    members.push(("mixture(+0.3,-0.3)".into(), plus.iter().zip(&minus).map(|(p, q)| 0.5 * (p + q)).collect()));

    // a materialized matrix prices faster when it fits in memory comfortably
    let ratios = if size * size <= 16_000_000 {
        let dense = DenseCost::from_fn(size, size, |i, j| sum_cost.cost(i, j));
        ratios_for(&product, &members, &dense, |w| entropy_weights(w, &product))?
    } else {
        ratios_for(&product, &members, &sum_cost, |w| entropy_weights(w, &product))?
    };
    Ok(summarize(
        format!("{}^{n}", mu.name()),
        omega.descriptor(),
        a,
        format!("tensor-v1(n={n})"),
        ratios,
        Vec::new(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionEntry {
    pub label: String,
    pub original: Option<Real>,
    pub image: Option<Real>,
    pub abs_diff: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub entries: Vec<ContractionEntry>,
    pub max_abs_diff: Real,
    pub tolerance: Real,
    pub pass: bool,
}

/// Compares TCI ratios of (μ, c) with those of (T♯μ, c∘(T^{-1}×T^{-1})),
/// test measures pushed forward by T. The image problem is solved on the
/// image atoms in increasing order, so the two programs differ by a
/// relabeling only.
pub fn contraction_check<F: Fn(f64) -> f64>(
    mu: &DiscreteMeasure,
    cost: &DenseCost,
    map: F,
    family: Family,
) -> Result<ContractionReport> {
    if mu.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: mu.dim() });
    }
    let k = mu.len();
    if cost.rows() != k || cost.cols() != k {
        return Err(Error::DimensionMismatch { expected: k * k, got: cost.rows() * cost.cols() });
    }
    let images: Vec<f64> = (0..k).map(|i| map(mu.atom(i)[0])).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| images[a].total_cmp(&images[b]));
    if order.windows(2).any(|w| images[w[0]] == images[w[1]]) || images.iter().any(|y| !y.is_finite()) {
        return Err(Error::param("map is not injective on the atoms"));
    }
    let image_atoms: Vec<f64> = order.iter().map(|&i| images[i]).collect();
    let image_weights: Vec<f64> = order.iter().map(|&i| mu.weights()[i]).collect();
    let image_mu = DiscreteMeasure::new_1d(image_atoms, image_weights)?;
    let pulled = pullback_cost(cost, &order);

    let members = family_members(mu, &WeightFunction::Identity, family)?;
    let image_members: Vec<(String, Vec<f64>)> = members
        .iter()
        .map(|(l, w)| (l.clone(), order.iter().map(|&i| w[i]).collect()))
        .collect();
    let a = ratios_for(mu.weights(), &members, cost, |w| entropy_weights(w, mu.weights()))?;
    let b = ratios_for(image_mu.weights(), &image_members, &pulled, |w| entropy_weights(w, image_mu.weights()))?;
    let mut max_abs_diff: f64 = 0.0;
    let entries = a
        .into_iter()
        .zip(b)
        .map(|(x, y)| {
            let d = match (x.ratio, y.ratio) {
                (Some(p), Some(q)) => (p.0 - q.0).abs(),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            };
            max_abs_diff = max_abs_diff.max(d);
            ContractionEntry { label: x.label, original: x.ratio, image: y.ratio, abs_diff: Real(d) }
        })
        .collect();
    let tolerance = 1e-9;
    Ok(ContractionReport { entries, max_abs_diff: Real(max_abs_diff), tolerance: Real(tolerance), pass: max_abs_diff <= tolerance })
}

/// c̃(y_a, y_b) = c(order[a], order[b]).
pub fn pullback_cost(cost: &DenseCost, order: &[usize]) -> DenseCost {
    DenseCost::from_fn(order.len(), order.len(), |a, b| cost.cost(order[a], order[b]))
}

/// a = 1/(√C·κ).
pub fn sg_to_tci_constant<S: Scalar>(c: S) -> Result<S> {
    if !(c > S::zero()) || !c.is_finite() {
        return Err(Error::param(format!("C must be positive, got {c:?}")));
    }
    Ok(S::one() / (c.sqrt() * kappa::<S>()))
}

/// C = 1/(2a²).
pub fn tci_to_sg_constant<S: Scalar>(a: S) -> Result<S> {
    if !(a > S::zero()) || !a.is_finite() {
        return Err(Error::param(format!("a must be positive, got {a:?}")));
    }
    Ok(S::one() / (S::lit(2.0) * a * a))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetrizedReport {
    pub transport: Real,
    pub bound: Real,
    pub slack: Real,
    pub quasi_triangle_worst: Real,
    pub pass: bool,
}

/// Largest value of c(x,z) − 2c(x,y) − 2c(y,z) over atom triples.
pub fn quasi_triangle_violation(matrix: &DenseCost) -> f64 {
    let k = matrix.rows();
    (0..k)
        .into_par_iter()
        .map(|x| {
            let mut worst = f64::NEG_INFINITY;
            for y in 0..k {
                let cxy = matrix.cost(x, y);
                for z in 0..k {
                    let v = matrix.cost(x, z) - 2.0 * cxy - 2.0 * matrix.cost(y, z);
                    worst = worst.max(v);
                }
            }
            worst
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Checks T_c(ν1, ν2) ≤ 2H(ν1|μ) + 2H(ν2|μ) with all three measures on the
/// same atoms.
pub fn symmetrized_tci_bound(
    nu1: &DiscreteMeasure,
    nu2: &DiscreteMeasure,
    mu: &DiscreteMeasure,
    cost: &CostSpec,
) -> Result<SymmetrizedReport> {
    let matrix = cost.matrix(mu, mu)?;
    let worst = quasi_triangle_violation(&matrix);
    let scale = matrix.data().iter().copied().fold(0.0, f64::max).max(1.0);
    if worst > 1e-12 * scale {
        return Err(Error::InvalidCost(format!("quasi-triangle inequality violated by {worst}")));
    }
    let h1 = relative_entropy(nu1, mu)?;
    let h2 = relative_entropy(nu2, mu)?;
    let t = optimal_cost_weights(nu1.weights(), nu2.weights(), &matrix)?.value;
    let bound = 2.0 * h1 + 2.0 * h2;
    Ok(SymmetrizedReport {
        transport: Real(t),
        bound: Real(bound),
        slack: Real(bound - t),
        quasi_triangle_worst: Real(worst),
        pass: t <= bound * (1.0 + 1e-9) + 1e-15,
    })
}

const MAGIC: &[u8; 8] = b"INEQLABC";

/// Writes `INEQLABC`, u32 rows, u32 cols (little endian), then the
/// entries as row-major little-endian f64.
pub fn write_cost_matrix(path: &Path, m: &DenseCost) -> Result<()> {
    let rows = u32::try_from(m.rows()).map_err(|_| Error::Size("too many rows".into()))?;
    let cols = u32::try_from(m.cols()).map_err(|_| Error::Size("too many columns".into()))?;
    let mut buf = Vec::with_capacity(16 + 8 * m.data().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&rows.to_le_bytes());
    buf.extend_from_slice(&cols.to_le_bytes());
    for v in m.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn read_cost_matrix(path: &Path) -> Result<DenseCost> {
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 16 || &buf[..8] != MAGIC {
        return Err(Error::Parse { line: 1, column: 1, message: "missing INEQLABC header".into() });
    }
    let rows = u32::from_le_bytes(buf[8..12].try_into().expect("4 bytes")) as usize;
    let cols = u32::from_le_bytes(buf[12..16].try_into().expect("4 bytes")) as usize;
    let body = &buf[16..];
    if body.len() != 8 * rows * cols {
        return Err(Error::Parse {
            line: 1,
            column: 17,
            message: format!("expected {} bytes of entries, found {}", 8 * rows * cols, body.len()),
        });
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    DenseCost::new(rows, cols, data)
}
