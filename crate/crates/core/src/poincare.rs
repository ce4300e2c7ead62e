//! Certificates and brackets for Poincaré constants of measures on the line
//! (and drift conditions on R^d).
//!
//! The Muckenhoupt suprema are evaluated in a normalization-free form: on
//! the right of the median m,
//!
//!   μ[y, ∞) · ∫_m^y ω′²/h = A(y) · B(y),
//!   A(y) = ∫_y^∞ e^{V(y)−V(u)} du,   B(y) = ∫_m^y ω′(u)² e^{V(u)−V(y)} du,
//!
//! so neither factor overflows however far the probes go.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{pushforward_density, Density1D, PotentialField};
use crate::quadrature::{self, Tolerance};
use crate::report::Real;
use crate::spectral::SpectralEstimate;
use crate::weight::{deriv2_or_numeric, Weight, WeightFunction};

const GRID_RATIO: f64 = 1.05;
const DIVERGENCE: f64 = 1e12;
const SATURATION: f64 = 1e-9;
const SATURATION_LAG: usize = 20;
const MARCH_CUTOFF: f64 = 45.0;

/// Far in the tails V(y) − V(u) is a difference of large numbers, so the
/// attainable relative accuracy is limited; chunks are sized to the decay
/// length, so a few bisections suffice.
fn tol() -> Tolerance {
    Tolerance { abs: 1e-300, rel: 1e-12, max_intervals: 48 }
}

/// How the search over one half-line ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Three successive decreasing probes well below the running maximum,
    /// beyond the bulk of the measure.
    Decreasing,
    /// The product stopped changing.
    Saturated,
    /// The product exceeded 1e12 and was still increasing.
    Diverged,
    /// The probe range was exhausted.
    ProbeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfLine {
    pub sup: Real,
    pub argsup: Real,
    pub termination: Termination,
    pub probes: usize,
    pub evaluations: usize,
}

impl HalfLine {
    pub fn converged(&self) -> bool {
        self.termination != Termination::ProbeLimit
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuckenhouptResult {
    pub d_minus: Real,
    pub d_plus: Real,
    pub bracket_low: Real,
    pub bracket_high: Real,
    pub median: Real,
    pub left: HalfLine,
    pub right: HalfLine,
}

impl MuckenhouptResult {
    pub fn bracket(&self) -> (f64, f64) {
        (self.bracket_low.0, self.bracket_high.0)
    }

    pub fn is_finite(&self) -> bool {
        self.bracket_low.0.is_finite()
    }

    pub fn converged(&self) -> bool {
        self.left.converged() && self.right.converged()
    }
}

/// One half-line of the criterion in the reflected coordinate s = dir·(x − m) ≥ 0.
struct Side<'a> {
    mu: &'a Density1D,
    omega: &'a WeightFunction,
    m: f64,
    dir: f64,
    breaks: Vec<f64>,
}

impl<'a> Side<'a> {
    fn new(mu: &'a Density1D, omega: &'a WeightFunction, dir: f64) -> Self {
        let m = mu.median();
        let mut pts: Vec<f64> = mu.knots().to_vec();
        for k in omega.kinks() {
            pts.push(k);
            pts.push(-k);
        }
        let mut breaks: Vec<f64> = pts
            .into_iter()
            .map(|k| dir * (k - m))
            .filter(|s| *s > 0.0 && s.is_finite())
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        Self { mu, omega, m, dir, breaks }
    }

    fn x(&self, s: f64) -> f64 {
        self.m + self.dir * s
    }

    /// V(x(t)) − V(x(s)).
    fn dv(&self, s: f64, t: f64) -> f64 {
        self.mu.potential_diff(self.x(s), self.x(t))
    }

    fn w2(&self, s: f64) -> f64 {
        let d = self.omega.deriv1(self.x(s));
        d * d
    }

    /// A(s) = ∫_s^∞ e^{V(s)−V(t)} dt.
    fn tail(&self, s: f64) -> Result<(f64, usize)> {
        let lf = |t: f64| -self.dv(s, t);
        let r = quadrature::march(|t| lf(t).exp(), lf, s, f64::INFINITY, &self.breaks, MARCH_CUTOFF, tol())?;
        Ok((r.value, r.evaluations))
    }

    /// ∫_{s0}^{s1} ω′(t)² e^{V(t)−V(s1)} dt.
    fn inner(&self, s0: f64, s1: f64) -> Result<(f64, usize)> {
        if s1 <= s0 {
            return Ok((0.0, 0));
        }
        let lf = |t: f64| self.w2(t).ln() - self.dv(t, s1);
        let r = quadrature::march(|t| self.w2(t) * (-self.dv(t, s1)).exp(), lf, s1, s0, &self.breaks, MARCH_CUTOFF, tol())?;
        Ok((r.value, r.evaluations))
    }

    fn product_at(&self, s: f64) -> Result<(f64, usize)> {
        let (a, ea) = self.tail(s)?;
        let (b, eb) = self.inner(0.0, s)?;
        Ok((a * b, ea + eb))
    }

    fn supremum(&self) -> Result<HalfLine> {
        let (q1, q3) = (self.mu.quantile(0.25), self.mu.quantile(0.75));
        let scale = (q3 - q1).abs().max(1e-12);
        let s0 = 1e-3 * scale;
        let s_max = 1e12 * scale;
        // a decreasing run only ends the search once the tail regime is reached
        let (lo, hi) = self.mu.support();
        let edge = if self.dir > 0.0 { hi - self.m } else { self.m - lo };
        let asymptotic = self.breaks.last().copied().unwrap_or(0.0).max(edge);

        let mut evaluations = 0;
        let mut probes: Vec<(f64, f64)> = Vec::new();
        let mut b = 0.0;
        let mut prev_s = 0.0;
        let mut best = (0.0, 0.0);
        let mut best_idx = 0;
        let mut decreases = 0;
        let mut termination = Termination::ProbeLimit;
        let mut s = s0;
        while s <= s_max {
            let (seg, e1) = self.inner(prev_s, s)?;
            b = b * (-self.dv(prev_s, s)).exp() + seg;
            let (a, e2) = self.tail(s)?;
            evaluations += e1 + e2;
            let p = a * b;
            if !p.is_finite() && probes.is_empty() {
                return Err(Error::Criterion(format!(
                    "integrand not integrable near the median (product {p} at s = {s})"
                )));
            }
            if p.is_nan() {
                return Err(Error::numeric(format!("product is NaN at x = {}", self.x(s))));
            }
            let last = probes.last().map(|&(_, q)| q);
            probes.push((s, p));
            if p > best.1 {
                best = (s, p);
                best_idx = probes.len() - 1;
            }
            if let Some(q) = last {
                if p > DIVERGENCE && p > q {
                    termination = Termination::Diverged;
                    break;
                }
                if p < q {
                    decreases += 1;
                } else {
                    decreases = 0;
                }
            }
            if decreases >= 3 && p < 0.9 * best.1 && s >= asymptotic {
                termination = Termination::Decreasing;
                break;
            }
            let k = probes.len() - 1;
            if k >= SATURATION_LAG {
                let old = probes[k - SATURATION_LAG].1;
                if (p - old).abs() <= SATURATION * p.abs() {
                    termination = Termination::Saturated;
                    break;
                }
            }
            prev_s = s;
            s *= GRID_RATIO;
        }
        let count = probes.len();
        if termination == Termination::Diverged {
            return Ok(HalfLine {
                sup: Real(f64::INFINITY),
                argsup: Real(f64::INFINITY),
                termination,
                probes: count,
                evaluations,
            });
        }
        if best_idx > 0 && best_idx + 1 < count {
            let (lo, hi) = (probes[best_idx - 1].0, probes[best_idx + 1].0);
            let (s_ref, p_ref, e) = self.golden(lo, hi)?;
            evaluations += e;
            if p_ref > best.1 {
                best = (s_ref, p_ref);
            }
        }
        Ok(HalfLine {
            sup: Real(best.1),
            argsup: Real(self.x(best.0)),
            termination,
            probes: count,
            evaluations,
        })
    }

    fn golden(&self, mut a: f64, mut b: f64) -> Result<(f64, f64, usize)> {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut evals = 0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, e1) = self.product_at(c)?;
        let (mut fd, e2) = self.product_at(d)?;
        evals += e1 + e2;
        for _ in 0..60 {
            if (b - a) <= 1e-10 * b {
                break;
            }
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                let (f, e) = self.product_at(c)?;
                fc = f;
                evals += e;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                let (f, e) = self.product_at(d)?;
                fd = f;
                evals += e;
            }
        }
        Ok(if fc >= fd { (c, fc, evals) } else { (d, fd, evals) })
    }
}

/// D_ω^± for μ and ω and the bracket max(D⁻, D⁺) ≤ C_opt ≤ 4·max(D⁻, D⁺).
pub fn muckenhoupt_weighted(mu: &Density1D, omega: &WeightFunction) -> Result<MuckenhouptResult> {
    let left = Side::new(mu, omega, -1.0).supremum()?;
    let right = Side::new(mu, omega, 1.0).supremum()?;
    let low = left.sup.0.max(right.sup.0);
    Ok(MuckenhouptResult {
        d_minus: left.sup,
        d_plus: right.sup,
        bracket_low: Real(low),
        bracket_high: Real(4.0 * low),
        median: Real(mu.median()),
        left,
        right,
    })
}

/// The classical criterion (ω = identity).
pub fn muckenhoupt_classical(mu: &Density1D) -> Result<MuckenhouptResult> {
    muckenhoupt_weighted(mu, &WeightFunction::Identity)
}

/// Verdict of a drift (sufficient) condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Drift {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftSide {
    pub probes: Vec<Real>,
    pub values: Vec<Real>,
    /// Infimum over the outer half of the probes.
    pub outer_inf: Real,
    pub regularity: Option<Real>,
    pub verdict: Drift,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub verdict: Drift,
    pub liminf_estimate: Real,
    pub threshold: Real,
    pub sides: Vec<DriftSide>,
    /// On `holds` for the d-dimensional condition, the weight x ↦ ω(ux).
    pub rescaled_weight: Option<String>,
}

/// Classifies a probe sequence against `threshold`.
fn classify(values: &[f64], threshold: f64, regular: bool) -> (Drift, f64) {
    let n = values.len();
    let outer = &values[n / 2..];
    let inf = outer.iter().copied().fold(f64::INFINITY, f64::min);
    let last = values[n - 1];
    let decreasing = outer.windows(2).all(|w| w[1] < w[0]);
    let decaying = decreasing && last < 0.5 * outer[0];
    let tail_below = values[n.saturating_sub(3)..].iter().all(|&v| v < threshold);
    if tail_below && (threshold > 0.0 || last < 0.0) {
        return (Drift::Fails, inf);
    }
    if decreasing && last < threshold + 1e-6 {
        return (Drift::Fails, inf);
    }
    if inf > threshold + 1e-6 && regular && !decaying {
        return (Drift::Holds, inf);
    }
    (Drift::Inconclusive, inf)
}

fn combine(sides: &[DriftSide]) -> Drift {
    if sides.iter().any(|s| s.verdict == Drift::Fails) {
        Drift::Fails
    } else if sides.iter().all(|s| s.verdict == Drift::Holds) {
        Drift::Holds
    } else {
        Drift::Inconclusive
    }
}

fn geometric_probes(extent: f64, count: usize) -> Vec<f64> {
    let start = if extent > 1.0 { 1.0 } else { extent / 100.0 };
    let ratio = (extent / start).powf(1.0 / (count - 1) as f64);
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}

/// Drift test sgn(x)V′(x)/ω′(x) with the regularity ratio ω″/ω′² at the
/// largest probes, on geometric probes up to the ends of `probe_range`.
pub fn sufficient_condition_1d(
    mu: &Density1D,
    omega: &WeightFunction,
    probe_range: (f64, f64),
) -> Result<DriftReport> {
    let (lo, hi) = probe_range;
    if !(lo < 0.0 && hi > 0.0) {
        return Err(Error::param("probe range must contain 0 in its interior"));
    }
    const COUNT: usize = 100;
    let mut sides = Vec::new();
    for (dir, extent) in [(-1.0, -lo), (1.0, hi)] {
        let probes = geometric_probes(extent, COUNT);
        let values: Vec<f64> = probes
            .iter()
            .map(|&r| {
                let x = dir * r;
                dir * mu.potential_deriv(x) / omega.deriv1(x)
            })
            .collect();
        let regularity = probes[COUNT - 5..]
            .iter()
            .map(|&r| {
                let x = dir * r;
                let d1 = omega.deriv1(x);
                (deriv2_or_numeric(omega, x) / (d1 * d1)).abs()
            })
            .fold(0.0, f64::max);
        let (verdict, inf) = classify(&values, 0.0, regularity < 1e-3);
        sides.push(DriftSide {
            probes: probes.iter().map(|&r| Real(dir * r)).collect(),
            values: values.into_iter().map(Real).collect(),
            outer_inf: Real(inf),
            regularity: Some(Real(regularity)),
            verdict,
        });
    }
    let liminf = sides.iter().map(|s| s.outer_inf.0).fold(f64::INFINITY, f64::min);
    Ok(DriftReport {
        verdict: combine(&sides),
        liminf_estimate: Real(liminf),
        threshold: Real(0.0),
        sides,
        rescaled_weight: None,
    })
}

/// sup |ω‴/ω′³| on the grid ±2^k, k = −40..40.
pub fn third_derivative_bound(omega: &WeightFunction) -> f64 {
    let mut worst: f64 = 0.0;
    for k in -40..=40 {
        for sign in [-1.0, 1.0] {
            let x = sign * 2f64.powi(k);
            if x.abs() >= omega.domain_radius() {
                continue;
            }
            let d1 = omega.deriv1(x);
            let d3 = omega.deriv3(x).unwrap_or_else(|| {
                let h = 1e-4 * (1.0 + x.abs());
                (deriv2_or_numeric(omega, x + h) - deriv2_or_numeric(omega, x - h)) / (2.0 * h)
            });
            let r = (d3 / (d1 * d1 * d1)).abs();
            if r.is_finite() {
                worst = worst.max(r);
            }
        }
    }
    worst
}

/// The d-dimensional drift expression
/// (1/u²) Σ_i [¼(∂_iV)²(x/u) − ∂²_iV(x/u)] / ω′(x_i)².
pub fn drift_expression(field: &PotentialField, omega: &WeightFunction, u: f64, x: &[f64]) -> f64 {
    let d = field.dim();
    let y: Vec<f64> = x.iter().map(|t| t / u).collect();
    let mut g = vec![0.0; d];
    let mut h = vec![0.0; d];
    field.grad(&y, &mut g);
    field.hess_diag(&y, &mut h);
    let mut s = 0.0;
    for i in 0..d {
        let w = omega.deriv1(x[i]);
        s += (0.25 * g[i] * g[i] - h[i]) / (w * w);
    }
    s / (u * u)
}

/// Evaluates [`drift_expression`] on shells of 64 seeded random directions
/// at geometric radii up to `probe_radius`, taking the minimum per shell,
/// and compares with the threshold d·M.
pub fn sufficient_condition_dd(
    field: &PotentialField,
    omega: &WeightFunction,
    u: f64,
    m_bound: f64,
    probe_radius: f64,
) -> Result<DriftReport> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::param("u must be positive"));
    }
    if !(m_bound >= 0.0) {
        return Err(Error::param("M must be non-negative"));
    }
    if !(probe_radius > 1.0) {
        return Err(Error::param("probe radius must exceed 1"));
    }
    if !(omega.deriv1(0.0) > 0.0) {
        return Err(Error::param("the weight needs ω′(0) > 0"));
    }
    let sup = third_derivative_bound(omega);
    if sup > m_bound * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::param(format!(
            "M = {m_bound} does not bound |ω‴/ω′³| (grid supremum {sup})"
        )));
    }
    let d = field.dim();
    let threshold = d as f64 * m_bound;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d1f7);
    let directions: Vec<Vec<f64>> = (0..64)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|t| t * t).sum::<f64>().sqrt().max(1e-300);
            v.into_iter().map(|t| t / n).collect()
        })
        .collect();
    let radii = geometric_probes(probe_radius, 60);
    let values: Vec<f64> = radii
        .iter()
        .map(|&r| {
            directions
                .iter()
                .map(|dir| {
                    let x: Vec<f64> = dir.iter().map(|t| r * t).collect();
                    drift_expression(field, omega, u, &x)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let (verdict, inf) = classify(&values, threshold, true);
    let rescaled = (verdict == Drift::Holds).then(|| {
        if u == 1.0 {
            omega.descriptor()
        } else {
            format!("{}*u={u}", omega.descriptor())
        }
    });
    Ok(DriftReport {
        verdict,
        liminf_estimate: Real(inf),
        threshold: Real(threshold),
        sides: vec![DriftSide {
            probes: radii.into_iter().map(Real).collect(),
            values: values.into_iter().map(Real).collect(),
            outer_inf: Real(inf),
            regularity: None,
            verdict,
        }],
        rescaled_weight: rescaled,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneMapBound {
    pub lipschitz: Real,
    pub c_bound: Real,
    pub argmax: Real,
}

/// Lipschitz constant of T = F_{ω♯μ}^{-1} ∘ F_ν, ν the two-sided
/// exponential, over `probe_grid`; C_bound = 4L².
pub fn monotone_map_lipschitz(
    mu: &Density1D,
    omega: &WeightFunction,
    probe_grid: &[f64],
) -> Result<MonotoneMapBound> {
    if probe_grid.is_empty() {
        return Err(Error::param("probe grid is empty"));
    }
    let target = pushforward_density(mu, omega)?;
    let mut best = (0.0, f64::NAN);
    for &x in probe_grid {
        let tail = 0.5 * (-x.abs()).exp();
        let t = if x <= 0.0 { target.quantile(tail) } else { target.upper_quantile(tail) };
        let slope = tail / target.pdf(t);
        let slope = if slope.is_finite() { slope } else { f64::INFINITY };
        if slope > best.0 || best.1.is_nan() {
            best = (slope, x);
        }
    }
    let l = if best.0 > 1e10 { f64::INFINITY } else { best.0 };
    Ok(MonotoneMapBound { lipschitz: Real(l), c_bound: Real(4.0 * l * l), argmax: Real(best.1) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub weighted: MuckenhouptResult,
    pub pushed: MuckenhouptResult,
    pub rel_diff_minus: Real,
    pub rel_diff_plus: Real,
    pub tolerance: Real,
    pub pass: bool,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() {
        0.0
    } else if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Weighted criterion of μ against the classical criterion of ω♯μ.
pub fn equivalence_check(mu: &Density1D, omega: &WeightFunction) -> Result<EquivalenceReport> {
    let weighted = muckenhoupt_weighted(mu, omega)?;
    let pushed = muckenhoupt_classical(&pushforward_density(mu, omega)?)?;
    let dm = rel_diff(weighted.d_minus.0, pushed.d_minus.0);
    let dp = rel_diff(weighted.d_plus.0, pushed.d_plus.0);
    let tolerance = 1e-6;
    Ok(EquivalenceReport {
        pass: dm <= tolerance && dp <= tolerance,
        weighted,
        pushed,
        rel_diff_minus: Real(dm),
        rel_diff_plus: Real(dp),
        tolerance: Real(tolerance),
    })
}

/// JSON record of a Poincaré job.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareRecord {
    pub measure: String,
    pub weight: String,
    #[serde(rename = "D_minus")]
    pub d_minus: Option<Real>,
    #[serde(rename = "D_plus")]
    pub d_plus: Option<Real>,
    pub bracket: Option<[Real; 2]>,
    pub spectral_estimate: Option<SpectralEstimate>,
    pub verdict: String,
    pub probes: usize,
}

impl PoincareRecord {
    pub fn from_muckenhoupt(mu: &Density1D, omega: &WeightFunction, r: &MuckenhouptResult) -> Self {
        let verdict = if !r.is_finite() {
            "fail"
        } else if r.converged() {
            "pass"
        } else {
            "inconclusive"
        };
        Self {
            measure: mu.name().to_string(),
            weight: omega.descriptor(),
            d_minus: Some(r.d_minus),
            d_plus: Some(r.d_plus),
            bracket: Some([r.bracket_low, r.bracket_high]),
            spectral_estimate: None,
            verdict: verdict.into(),
            probes: r.left.probes + r.right.probes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{gaussian, nu_p_make};

    #[test]
    fn two_sided_exponential() {
        let mu = nu_p_make(1.0).unwrap();
        let r = muckenhoupt_classical(&mu).unwrap();
        assert!((r.d_minus.0 - 1.0).abs() < 1e-6, "{r:?}");
        assert!((r.d_plus.0 - 1.0).abs() < 1e-6);
        assert_eq!(r.bracket_high.0, 4.0 * r.bracket_low.0);
    }

    #[test]
    fn exponential_fails_quadratic_weight() {
        let mu = nu_p_make(1.0).unwrap();
        let r = muckenhoupt_weighted(&mu, &WeightFunction::omega_p(2.0).unwrap()).unwrap();
        assert!(r.d_plus.0.is_infinite());
        assert_eq!(r.right.termination, Termination::Diverged);
    }

    #[test]
    fn gaussian_bracket_contains_one() {
        let r = muckenhoupt_classical(&gaussian(1.0).unwrap()).unwrap();
        let (lo, hi) = r.bracket();
        assert!(lo <= 1.0 && 1.0 <= hi, "{lo} {hi}");
        assert!(r.converged());
    }

    #[test]
    fn drift_verdicts() {
        let probe = (-1e7, 1e7);
        for p in [1.5, 2.0, 3.0] {
            let r = sufficient_condition_1d(
                &nu_p_make(p).unwrap(),
                &WeightFunction::omega_p(p).unwrap(),
                probe,
            )
            .unwrap();
            assert_eq!(r.verdict, Drift::Holds, "p = {p}");
            assert!((r.liminf_estimate.0 - 1.0).abs() < 1e-9);
        }
        let r = sufficient_condition_1d(
            &nu_p_make(1.0).unwrap(),
            &WeightFunction::omega_p(2.0).unwrap(),
            probe,
        )
        .unwrap();
        assert_eq!(r.verdict, Drift::Fails);
        let r = sufficient_condition_1d(&gaussian(1.0).unwrap(), &WeightFunction::Identity, probe).unwrap();
        assert_eq!(r.verdict, Drift::Holds);
    }

    #[test]
    fn classify_rules() {
        let flat = vec![1.0; 10];
        assert_eq!(classify(&flat, 0.0, true).0, Drift::Holds);
        assert_eq!(classify(&flat, 0.0, false).0, Drift::Inconclusive);
        let neg = vec![-1.0; 10];
        assert_eq!(classify(&neg, 0.0, true).0, Drift::Fails);
        let decay: Vec<f64> = (1..=10).map(|k| 10f64.powi(-k)).collect();
        assert_eq!(classify(&decay, 0.0, true).0, Drift::Fails);
        let slow: Vec<f64> = (1..=10).map(|k| 1.0 / (k * k) as f64).collect();
        assert_eq!(classify(&slow, 0.0, true).0, Drift::Inconclusive);
    }

    #[test]
    fn drift_dd() {
        let q = PotentialField::quadratic(2).unwrap();
        let r = sufficient_condition_dd(&q, &WeightFunction::Identity, 1.0, 0.0, 1e3).unwrap();
        assert_eq!(r.verdict, Drift::Holds);
        let s = PotentialField::smooth_abs(2).unwrap();
        let r = sufficient_condition_dd(&s, &WeightFunction::omega_p(2.0).unwrap(), 1.0, 0.1, 1e3).unwrap();
        assert_eq!(r.verdict, Drift::Fails);
        assert!(sufficient_condition_dd(&s, &WeightFunction::omega_p(3.0).unwrap(), 1.0, 0.0, 1e3).is_err());
    }

    #[test]
    fn identity_map_is_an_isometry() {
        let mu = nu_p_make(1.0).unwrap();
        let grid: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.1).collect();
        let b = monotone_map_lipschitz(&mu, &WeightFunction::Identity, &grid).unwrap();
        assert!((b.lipschitz.0 - 1.0).abs() < 1e-8, "{b:?}");
        assert!((b.c_bound.0 - 4.0).abs() < 1e-7);
    }
}
