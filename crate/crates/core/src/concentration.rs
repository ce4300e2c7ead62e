//! Monte-Carlo checks of the dimension-free deviation and enlargement
//! bounds for μⁿ under SG(ω, C).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::Density1D;
use crate::metric::{half_space_cost, HalfSpaceSet, Side};
use crate::report::{format_real, Real};
use crate::rng::{UniformStream, BLOCK};
use crate::weight::{alpha, concentration_rate, kappa, Weight, WeightFunction};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Fewer hits than this at a grid point excludes it from the verdict.
pub const MIN_EVENTS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseFunction {
    Identity,
    Omega,
}

/// f(x) = Σ_i c_i·g(x_i) with gradient bounds
/// a² = Σ c_i²·sup|g′/ω′|² and b = max_i |c_i|·sup|g′/ω′|.
#[derive(Debug, Clone)]
pub struct DeviationSpec {
    pub coefficients: Vec<f64>,
    pub g: BaseFunction,
    pub omega: WeightFunction,
    pub a: f64,
    pub b: f64,
}

impl DeviationSpec {
    pub fn linear(coefficients: Vec<f64>, g: BaseFunction, omega: WeightFunction) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("coefficients must be finite and non-empty"));
        }
        let sup = match g {
            BaseFunction::Omega => 1.0,
            BaseFunction::Identity => {
                let m = omega.min_deriv1();
                if !(m > 0.0) {
                    return Err(Error::param(format!(
                        "{} has no positive lower bound on ω′",
                        omega.descriptor()
                    )));
                }
                1.0 / m
            }
        };
        let a = sup * coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
        let b = sup * coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if !(a > 0.0) {
            return Err(Error::param("f is constant"));
        }
        Ok(Self { coefficients, g, omega, a, b })
    }

    /// Σ x_i/√n.
    pub fn normalized_sum(n: usize, omega: WeightFunction) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n must be positive"));
        }
        Self::linear(vec![1.0 / (n as f64).sqrt(); n], BaseFunction::Identity, omega)
    }

    pub fn n(&self) -> usize {
        self.coefficients.len()
    }

    fn g(&self, x: f64) -> f64 {
        match self.g {
            BaseFunction::Identity => x,
            BaseFunction::Omega => self.omega.eval(x),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().zip(x).map(|(c, &v)| c * self.g(v)).sum()
    }

    /// ∫ f dμⁿ.
    pub fn mean(&self, mu: &Density1D) -> f64 {
        let m = mu.expect(|x| self.g(x));
        self.coefficients.iter().sum::<f64>() * m
    }

    pub fn descriptor(&self) -> String {
        let g = match self.g {
            BaseFunction::Identity => "x".to_string(),
            BaseFunction::Omega => format!("{}(x)", self.omega.descriptor()),
        };
        format!("sum_i c_i*{g}_i, n={}", self.n())
    }
}

/// exp(−min(t²/(Cκ²a²), t/(√C·κ·b))).
pub fn deviation_bound(c: f64, a: f64, b: f64, t: f64) -> f64 {
    let k: f64 = kappa();
    let quad = t * t / (c * k * k * a * a);
    let lin = t / (c.sqrt() * k * b);
    (-quad.min(lin)).exp()
}

/// 1 − e^{−K(C)h/d}.
pub fn enlargement_bound(c: f64, d: usize, h: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    let k = concentration_rate(c)?;
    Ok(-(-k * h / d as f64).exp_m1())
}

/// max(0, 1 − e^{−h·α(a/√d)/2}/μⁿ(A)).
pub fn tci_enlargement_bound(a: f64, d: usize, mu_n_a: f64, h: f64) -> Result<f64> {
    if !(mu_n_a > 0.0 && mu_n_a <= 1.0) {
        return Err(Error::param(format!("mu^n(A) must lie in (0, 1], got {mu_n_a}")));
    }
    if d == 0 || !(a > 0.0) {
        return Err(Error::param("a and d must be positive"));
    }
    let e = h * alpha(a / (d as f64).sqrt()) / 2.0;
    Ok((1.0 - (-e).exp() / mu_n_a).max(0.0))
}

/// Wilson score interval at confidence `z`.
pub fn wilson(hits: u64, total: u64, z: f64) -> (f64, f64) {
    let n = total as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRow {
    pub t_or_h: Real,
    pub empirical: Real,
    pub conf_low: Real,
    pub conf_high: Real,
    pub bound: Real,
    pub pass: bool,
    pub events: u64,
    pub low_resolution: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub kind: String,
    pub measure: String,
    pub weight: String,
    pub function: String,
    pub c: Real,
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub rows: Vec<McRow>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl McReport {
    pub fn pass(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t_or_h,empirical,conf_low,conf_high,bound,pass\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                format_real(r.t_or_h.0),
                format_real(r.empirical.0),
                format_real(r.conf_low.0),
                format_real(r.conf_high.0),
                format_real(r.bound.0),
                r.pass
            ));
        }
        s
    }
}

fn verdict_of(rows: &[McRow]) -> Verdict {
    let counted: Vec<&McRow> = rows.iter().filter(|r| !r.low_resolution).collect();
    if counted.iter().any(|r| !r.pass) {
        Verdict::Fail
    } else if counted.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    }
}

fn check_inputs(c: f64, samples: u64, grid: &[f64]) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::param(format!("C must be positive, got {c}")));
    }
    if samples == 0 {
        return Err(Error::param("samples must be positive"));
    }
    if grid.is_empty() || grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::param("grid must be non-empty, finite and non-negative"));
    }
    Ok(())
}

/// Counts per grid point of `event(value, level)` over `samples` values,
/// where sample s consumes uniforms s·stride .. s·stride + stride.
fn count_events<V, E>(samples: u64, stride: u64, seed: u64, grid: &[f64], value: V, event: E) -> Vec<u64>
where
    V: Fn(&[f64]) -> f64 + Sync,
    E: Fn(f64, f64) -> bool + Sync,
{
    let stream = UniformStream::new(seed);
    let per_chunk = (BLOCK / stride).max(1);
    let chunks = samples.div_ceil(per_chunk);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let first = c * per_chunk;
            let last = (first + per_chunk).min(samples);
            let mut u = vec![0.0; (stride as usize) * (last - first) as usize];
            stream.fill(first * stride, &mut u);
            let mut counts = vec![0u64; grid.len()];
            for row in u.chunks_exact(stride as usize) {
                let v = value(row);
                for (k, &t) in grid.iter().enumerate() {
                    if event(v, t) {
                        counts[k] += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; grid.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Empirical μⁿ(f ≥ ∫f + t) against the deviation bound; each t passes
/// when the Wilson upper limit is at most the bound.
pub fn mc_deviation(
    mu: &Density1D,
    spec: &DeviationSpec,
    c: f64,
    t_grid: &[f64],
    samples: u64,
    seed: u64,
) -> Result<McReport> {
    check_inputs(c, samples, t_grid)?;
    let n = spec.n();
    let mean = spec.mean(mu);
    let counts = count_events(
        samples,
        n as u64,
        seed,
        t_grid,
        |u| {
            let x: Vec<f64> = u.iter().map(|&v| mu.quantile(v)).collect();
            spec.eval(&x)
        },
        |v, t| v >= mean + t,
    );
    let rows: Vec<McRow> = t_grid
        .iter()
        .zip(counts)
        .map(|(&t, hits)| {
            let (lo, hi) = wilson(hits, samples, Z99);
            let bound = deviation_bound(c, spec.a, spec.b, t);
            McRow {
                t_or_h: Real(t),
                empirical: Real(hits as f64 / samples as f64),
                conf_low: Real(lo),
                conf_high: Real(hi),
                bound: Real(bound),
                pass: hi <= bound,
                events: hits,
                low_resolution: hits < MIN_EVENTS,
            }
        })
        .collect();
    let mut notes = vec![format!("a = {}, b = {}", format_real(spec.a), format_real(spec.b))];
    notes.push("f is unbounded; the bound is applied to it directly rather than to truncations min(f, r)".into());
    for r in rows.iter().filter(|r| r.low_resolution) {
        notes.push(format!("t = {}: {} exceedances, excluded from the verdict", format_real(r.t_or_h.0), r.events));
    }
    Ok(McReport {
        kind: "deviation".into(),
        measure: mu.name().to_string(),
        weight: spec.omega.descriptor(),
        function: spec.descriptor(),
        c: Real(c),
        n,
        samples,
        seed,
        verdict: verdict_of(&rows),
        rows,
        notes,
    })
}

/// Empirical μⁿ(cost ≤ h) for the half-space `set` against
/// 1 − e^{−K(C)h/d}; each h passes when the Wilson lower limit is at least
/// the bound minus 0.005. Only the constrained coordinate affects the cost,
/// so only its uniform is drawn, at the position it has in the full point.
#[allow(clippy::too_many_arguments)]
pub fn mc_enlargement(
    mu: &Density1D,
    omega: &WeightFunction,
    set: &HalfSpaceSet,
    n: usize,
    c: f64,
    h_grid: &[f64],
    samples: u64,
    seed: u64,
) -> Result<McReport> {
    check_inputs(c, samples, h_grid)?;
    if set.factor >= n || set.coord != 0 {
        return Err(Error::DimensionMismatch { expected: n, got: set.factor + 1 });
    }
    let d = 1;
    let offset = set.factor as u64;
    let stream = UniformStream::new(seed);
    let per_chunk = BLOCK;
    let chunks = samples.div_ceil(per_chunk);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|ch| {
            let first = ch * per_chunk;
            let last = (first + per_chunk).min(samples);
            let mut counts = vec![0u64; h_grid.len()];
            for s in first..last {
                let x = mu.quantile(stream.at(s * n as u64 + offset));
                let cost = half_space_cost(set.excess(x), omega);
                for (k, &h) in h_grid.iter().enumerate() {
                    if cost <= h {
                        counts[k] += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; h_grid.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let mut rows = Vec::with_capacity(h_grid.len());
    for (&h, hits) in h_grid.iter().zip(counts) {
        let (lo, hi) = wilson(hits, samples, Z99);
        let bound = enlargement_bound(c, d, h)?;
        rows.push(McRow {
            t_or_h: Real(h),
            empirical: Real(hits as f64 / samples as f64),
            conf_low: Real(lo),
            conf_high: Real(hi),
            bound: Real(bound),
            pass: lo >= bound - 0.005,
            events: hits,
            low_resolution: hits < MIN_EVENTS,
        });
    }
    let mut notes = Vec::new();
    let mass = match set.side {
        Side::AtMost => mu.cdf(set.threshold),
        Side::AtLeast => mu.sf(set.threshold),
    };
    if (mass - 0.5).abs() > 1e-6 {
        notes.push(format!("mu^n(A) = {} differs from 1/2", format_real(mass)));
    }
    let mut order: Vec<&McRow> = rows.iter().collect();
    order.sort_by(|a, b| a.t_or_h.0.total_cmp(&b.t_or_h.0));
    if order.windows(2).any(|w| w[1].events < w[0].events) {
        return Err(Error::numeric("empirical cdf of the enlargement cost decreases in h"));
    }
    for r in rows.iter().filter(|r| r.low_resolution) {
        notes.push(format!("h = {}: {} hits, excluded from the verdict", format_real(r.t_or_h.0), r.events));
    }
    Ok(McReport {
        kind: "enlargement".into(),
        measure: mu.name().to_string(),
        weight: omega.descriptor(),
        function: format!("half-space x[{}] {:?} {}", set.factor, set.side, format_real(set.threshold)),
        c: Real(c),
        n,
        samples,
        seed,
        verdict: verdict_of(&rows),
        rows,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteReport {
    /// Largest of the two exponent ratios in either direction.
    pub max_ratio: Real,
    pub worst_c: Real,
    pub worst_d: usize,
    pub factor: Real,
    pub pass: bool,
}

/// Compares the exponents K(C)/d and α(a/√d)/2 with a = 1/(√C·κ).
pub fn route_consistency(c_grid: &[f64], dims: &[usize], factor: f64) -> Result<RouteReport> {
    let k: f64 = kappa();
    let mut best = (0.0f64, f64::NAN, 0usize);
    for &c in c_grid {
        for &d in dims {
            if d == 0 {
                return Err(Error::param("dimension must be positive"));
            }
            let e1 = concentration_rate(c)? / d as f64;
            let a = 1.0 / (c.sqrt() * k);
            let e2 = alpha(a / (d as f64).sqrt()) / 2.0;
            let r = (e1 / e2).max(e2 / e1);
            if r > best.0 {
                best = (r, c, d);
            }
        }
    }
    Ok(RouteReport {
        max_ratio: Real(best.0),
        worst_c: Real(best.1),
        worst_d: best.2,
        factor: Real(factor),
        pass: best.0 <= factor * (1.0 + 1e-12),
    })
}

/// Geometric grid of `count` points on [lo, hi].
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (r * i as f64).exp()).collect()
}
