//! Probability measures: one-dimensional densities e^{−V}/Z with cached
//! distribution functions, finitely supported measures, and potentials on
//! R^d for the multivariate drift condition.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::rng::{UniformStream, BLOCK};
use crate::spec::{parse_family, read_two_columns};
use crate::weight::{deriv2_or_numeric, Weight, WeightFunction};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFieldFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
/// (a, b) ↦ V(b) − V(a), computed without cancellation.
pub type DiffFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// log(1e16): densities below 1e−16 of the peak are tail.
const TAIL_CUT: f64 = 36.841_361_487_904_734;
const TABLE_CELLS: usize = 4096;

fn tol() -> Tolerance {
    Tolerance::rel(1e-12)
}

/// An absolutely continuous probability measure on R with density
/// h = e^{−V}/Z, h > 0 everywhere.
#[derive(Clone)]
pub struct Density1D {
    name: String,
    potential: ScalarFn,
    potential_deriv: Option<ScalarFn>,
    potential_diff: Option<DiffFn>,
    log_norm: f64,
    v_min: f64,
    knots: Vec<f64>,
    nodes: Vec<f64>,
    /// μ(−∞, nodes[k]]
    left_mass: Vec<f64>,
    /// μ[nodes[k], ∞)
    right_mass: Vec<f64>,
    median: f64,
}

impl fmt::Debug for Density1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density1D")
            .field("name", &self.name)
            .field("log_norm", &self.log_norm)
            .field("median", &self.median)
            .field("support", &(self.nodes[0], self.nodes[self.nodes.len() - 1]))
            .finish()
    }
}

impl Density1D {
    /// Builds a density from its potential. `knots` lists points where V is
    /// not smooth; they become quadrature breakpoints.
    pub fn from_potential(
        name: impl Into<String>,
        potential: ScalarFn,
        potential_deriv: Option<ScalarFn>,
        knots: Vec<f64>,
    ) -> Result<Self> {
        let name = name.into();
        let v = potential.clone();
        let invalid = |msg: String| Error::InvalidMeasure(format!("{name}: {msg}"));

        let mut probes = vec![0.0];
        for k in -20..=20 {
            let x = 2f64.powi(k);
            probes.push(x);
            probes.push(-x);
        }
        probes.extend(knots.iter().copied());
        let mut center = 0.0;
        let mut v_min = f64::INFINITY;
        for &x in &probes {
            let val = v(x);
            if val.is_nan() || val == f64::NEG_INFINITY {
                return Err(invalid(format!("potential is not finite at {x}")));
            }
            if val < v_min {
                v_min = val;
                center = x;
            }
        }
        if !v_min.is_finite() {
            return Err(invalid("potential is infinite everywhere probed".into()));
        }

        let find_cut = |dir: f64| -> Result<f64> {
            let mut step = 1e-3 * (1.0 + center.abs());
            let mut inside = center;
            loop {
                let x = center + dir * step;
                let val = v(x);
                if val == f64::INFINITY {
                    return Err(invalid(
                        "density vanishes on an interval (compact support is not supported)".into(),
                    ));
                }
                if val.is_nan() {
                    return Err(invalid(format!("potential is NaN at {x}")));
                }
                if val - v_min > TAIL_CUT {
                    let (mut a, mut b) = (inside, x);
                    for _ in 0..200 {
                        let m = 0.5 * (a + b);
                        if v(m) - v_min > TAIL_CUT {
                            b = m;
                        } else {
                            a = m;
                        }
                    }
                    return Ok(b);
                }
                inside = x;
                step *= 2.0;
                if step > 1e15 {
                    return Err(invalid("potential does not grow: not normalizable".into()));
                }
            }
        };
        let lower = find_cut(-1.0)?;
        let upper = find_cut(1.0)?;

        let mut knots: Vec<f64> = knots.into_iter().filter(|k| k.is_finite()).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let mut nodes: Vec<f64> = (0..=TABLE_CELLS)
            .map(|i| lower + (upper - lower) * i as f64 / TABLE_CELLS as f64)
            .collect();
        nodes.extend(knots.iter().copied().filter(|&k| k > lower && k < upper));
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();

        let scaled = |x: f64| (v_min - v(x)).exp();
        let log_scaled = |x: f64| v_min - v(x);
        let cells: Vec<f64> = nodes
            .windows(2)
            .map(|w| quadrature::integrate(scaled, w[0], w[1], tol()).value)
            .collect();
        let tail_left = quadrature::march(scaled, log_scaled, lower, f64::NEG_INFINITY, &knots, 45.0, tol())?.value;
        let tail_right = quadrature::march(scaled, log_scaled, upper, f64::INFINITY, &knots, 45.0, tol())?.value;

        let mut left_mass = Vec::with_capacity(nodes.len());
        let mut acc = tail_left;
        left_mass.push(acc);
        for c in &cells {
            acc += c;
            left_mass.push(acc);
        }
        let mut right_mass = vec![0.0; nodes.len()];
        let mut acc = tail_right;
        right_mass[nodes.len() - 1] = acc;
        for k in (0..cells.len()).rev() {
            acc += cells[k];
            right_mass[k] = acc;
        }
        let total = 0.5 * (left_mass[nodes.len() - 1] + right_mass[0]);
        if !(total > 0.0) || !total.is_finite() {
            return Err(invalid(format!("normalization failed (mass {total})")));
        }
        for m in left_mass.iter_mut().chain(right_mass.iter_mut()) {
            *m /= total;
        }
        let log_norm = total.ln() - v_min;

        let mut density = Self {
            name,
            potential,
            potential_deriv,
            potential_diff: None,
            log_norm,
            v_min,
            knots,
            nodes,
            left_mass,
            right_mass,
            median: 0.0,
        };
        density.median = density.quantile(0.5);
        Ok(density)
    }

    /// Supplies an accurate V(b) − V(a), used where both values are large.
    pub fn with_potential_diff(mut self, diff: DiffFn) -> Self {
        self.potential_diff = Some(diff);
        self
    }

    /// V(b) − V(a).
    pub fn potential_diff(&self, a: f64, b: f64) -> f64 {
        match &self.potential_diff {
            Some(d) => d(a, b),
            None => (self.potential)(b) - (self.potential)(a),
        }
    }

    /// Parses `nu_p:p=1.5`, `gaussian:sigma=1` or
    /// `potential:file=<path>[,tail_slope=k]`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (family, params) = parse_family(spec)?;
        match family.as_str() {
            "nu_p" => nu_p_make(params.number("p")?),
            "gaussian" => gaussian(params.number_or("sigma", 1.0)?),
            "potential" => {
                let path = params
                    .get("file")
                    .ok_or_else(|| Error::param("potential measure needs file=<path>"))?;
                let (x, v) = read_two_columns(Path::new(path))?;
                potential_table(x, v, params.number_or("tail_slope", 1.0)?)
            }
            other => Err(Error::param(format!("unknown measure family '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    pub fn median(&self) -> f64 {
        self.median
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Interval outside which the density is below 1e−16 of its peak.
    pub fn support(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    pub fn potential(&self, x: f64) -> f64 {
        (self.potential)(x)
    }

    pub fn potential_fn(&self) -> ScalarFn {
        self.potential.clone()
    }

    /// V′(x), analytic when supplied, otherwise a central difference.
    pub fn potential_deriv(&self, x: f64) -> f64 {
        match &self.potential_deriv {
            Some(d) => d(x),
            None => {
                let h = 1e-6 * (1.0 + x.abs());
                ((self.potential)(x + h) - (self.potential)(x - h)) / (2.0 * h)
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        (-(self.potential)(x) - self.log_norm).exp()
    }

    fn scaled(&self, x: f64) -> f64 {
        (self.v_min - (self.potential)(x)).exp()
    }

    fn tail_integral(&self, from: f64, to: f64) -> f64 {
        let lf = |x: f64| self.v_min - (self.potential)(x);
        quadrature::march(|x| lf(x).exp(), lf, from, to, &self.knots, 45.0, tol())
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
            * (self.v_min - self.log_norm).exp()
    }

    fn partial(&self, a: f64, b: f64) -> f64 {
        quadrature::integrate(|x| self.scaled(x), a, b, tol()).value * (self.v_min - self.log_norm).exp()
    }

    /// μ(−∞, x].
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return self.tail_integral(x, f64::NEG_INFINITY);
        }
        if x >= self.nodes[n - 1] {
            return 1.0 - self.sf(x);
        }
        let k = self.nodes.partition_point(|&v| v <= x) - 1;
        self.left_mass[k] + self.partial(self.nodes[k], x)
    }

    /// μ[x, ∞), accurate far in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x >= self.nodes[n - 1] {
            return self.tail_integral(x, f64::INFINITY);
        }
        if x <= self.nodes[0] {
            return 1.0 - self.cdf(x);
        }
        let k = self.nodes.partition_point(|&v| v <= x) - 1;
        self.right_mass[k + 1] + self.partial(x, self.nodes[k + 1])
    }

    /// Inverse of the cdf on (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        if !(u > 0.0 && u < 1.0) {
            return if u <= 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        if u <= 0.5 {
            self.lower_quantile(u)
        } else {
            self.upper_quantile(1.0 - u)
        }
    }

    /// Inverse of the survival function: x with μ[x, ∞) = s.
    pub fn upper_quantile(&self, s: f64) -> f64 {
        let n = self.nodes.len();
        if s >= self.right_mass[0] {
            return self.lower_quantile(1.0 - s);
        }
        if s < self.right_mass[n - 1] {
            let f = |x: f64| s - self.sf(x);
            return bracket_decreasing(f, self.nodes[n - 1], 1.0);
        }
        // right_mass is decreasing
        let k = self.right_mass.partition_point(|&m| m >= s) - 1;
        let (a, b) = (self.nodes[k], self.nodes[k + 1]);
        let base = self.right_mass[k + 1];
        let residual = |x: f64| base + self.partial(x, b) - s;
        newton_in_cell(residual, |x| -self.pdf(x), a, b, self.right_mass[k], base, s)
    }

    fn lower_quantile(&self, u: f64) -> f64 {
        let n = self.nodes.len();
        if u < self.left_mass[0] {
            let f = |x: f64| u - self.cdf(x);
            return bracket_decreasing(f, self.nodes[0], -1.0);
        }
        if u >= self.left_mass[n - 1] {
            return self.upper_quantile(1.0 - u);
        }
        let k = self.left_mass.partition_point(|&m| m <= u) - 1;
        let (a, b) = (self.nodes[k], self.nodes[k + 1]);
        let base = self.left_mass[k];
        let residual = |x: f64| base + self.partial(a, x) - u;
        newton_in_cell(residual, |x| self.pdf(x), a, b, base, self.left_mass[k + 1], u)
    }

    /// ∫ g dμ.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let (lo, hi) = self.support();
        let mut pts = vec![lo];
        pts.extend(self.knots.iter().copied().filter(|&k| k > lo && k < hi));
        pts.push(hi);
        let t = Tolerance { max_intervals: 20_000, ..tol() };
        quadrature::integrate_with_breaks(|x| g(x) * self.pdf(x), &pts, t).value
    }
}

/// Safeguarded Newton for a monotone residual inside `[a, b]`, with the
/// residual values at the ends given by `fa - target` and `fb - target`.
fn newton_in_cell<R, D>(residual: R, deriv: D, a: f64, b: f64, fa: f64, fb: f64, target: f64) -> f64
where
    R: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (a, b);
    let mut x = if fb != fa {
        a + (b - a) * ((target - fa) / (fb - fa)).clamp(0.0, 1.0)
    } else {
        0.5 * (a + b)
    };
    let increasing = fb >= fa;
    for _ in 0..200 {
        let r = residual(x);
        if r == 0.0 {
            return x;
        }
        if (r > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        let d = deriv(x);
        let mut next = x - r / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-13 * (1.0 + x.abs()) || hi - lo <= 1e-13 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Root of a function that is negative inside `from` and changes sign
/// somewhere beyond it in direction `dir`.
fn bracket_decreasing<F: Fn(f64) -> f64>(f: F, from: f64, dir: f64) -> f64 {
    let mut inner = from;
    let mut step = 1.0 + from.abs();
    let mut outer = from + dir * step;
    let mut guard = 0;
    while f(outer) < 0.0 && guard < 200 {
        inner = outer;
        step *= 2.0;
        outer = from + dir * step;
        guard += 1;
    }
    let (mut a, mut b) = (inner, outer);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
        if (b - a).abs() <= 1e-13 * (1.0 + m.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// ν_p with density e^{−|x|^p}/Z_p.
pub fn nu_p_make(p: f64) -> Result<Density1D> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::param(format!("nu_p needs p >= 1, got {p}")));
    }
    let v: ScalarFn = Arc::new(move |x: f64| x.abs().powf(p));
    let dv: ScalarFn = Arc::new(move |x: f64| {
        if x == 0.0 {
            if p == 1.0 { 1.0 } else { 0.0 }
        } else {
            p * x.abs().powf(p - 1.0) * x.signum()
        }
    });
    let diff: DiffFn = Arc::new(move |a: f64, b: f64| pow_diff(a.abs(), b.abs(), p));
    Ok(Density1D::from_potential(format!("nu_p:p={p}"), v, Some(dv), vec![0.0])?.with_potential_diff(diff))
}

/// y^p − x^p for x, y ≥ 0, accurate when x and y are close.
fn pow_diff(x: f64, y: f64, p: f64) -> f64 {
    if x == 0.0 || y == 0.0 || (y - x).abs() > 0.5 * x.max(y) {
        return y.powf(p) - x.powf(p);
    }
    x.powf(p) * (p * ((y - x) / x).ln_1p()).exp_m1()
}

/// Centered Gaussian with standard deviation `sigma`.
pub fn gaussian(sigma: f64) -> Result<Density1D> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("gaussian needs sigma > 0, got {sigma}")));
    }
    let s2 = sigma * sigma;
    let v: ScalarFn = Arc::new(move |x: f64| 0.5 * x * x / s2);
    let dv: ScalarFn = Arc::new(move |x: f64| x / s2);
    let diff: DiffFn = Arc::new(move |a: f64, b: f64| 0.5 * (b - a) * (b + a) / s2);
    Ok(Density1D::from_potential(format!("gaussian:sigma={sigma}"), v, Some(dv), vec![])?.with_potential_diff(diff))
}

/// Potential given on a grid: linear interpolation inside, and beyond each
/// end V(x) = V_end + g_end·Δ + tail_slope·Δ², where g_end is the slope of
/// the last segment and Δ the distance past the end.
pub fn potential_table(x: Vec<f64>, v: Vec<f64>, tail_slope: f64) -> Result<Density1D> {
    if x.len() < 2 || x.len() != v.len() {
        return Err(Error::param("potential table needs at least two rows"));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("potential table abscissae must be strictly increasing"));
    }
    if !(tail_slope > 0.0) {
        return Err(Error::param("tail_slope must be positive"));
    }
    let n = x.len();
    let g_lo = (v[1] - v[0]) / (x[1] - x[0]);
    let g_hi = (v[n - 1] - v[n - 2]) / (x[n - 1] - x[n - 2]);
    let xs = Arc::new(x);
    let vs = Arc::new(v);
    let (xa, va) = (xs.clone(), vs.clone());
    let pot: ScalarFn = Arc::new(move |t: f64| {
        let n = xa.len();
        if t <= xa[0] {
            let d = xa[0] - t;
            va[0] - g_lo * d + tail_slope * d * d
        } else if t >= xa[n - 1] {
            let d = t - xa[n - 1];
            va[n - 1] + g_hi * d + tail_slope * d * d
        } else {
            let k = xa.partition_point(|&u| u <= t).clamp(1, n - 1);
            let w = (t - xa[k - 1]) / (xa[k] - xa[k - 1]);
            va[k - 1] + w * (va[k] - va[k - 1])
        }
    });
    Density1D::from_potential("potential:file", pot, None, xs.to_vec())
}

/// Density of ω♯μ: h̃ = h∘ω^{−1} / ω′∘ω^{−1}.
pub fn pushforward_density(mu: &Density1D, omega: &WeightFunction) -> Result<Density1D> {
    if omega.is_identity() {
        return Ok(mu.clone());
    }
    let (lo, hi) = mu.support();
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=2000 {
        let x = lo + (hi - lo) * i as f64 / 2000.0;
        let y = omega.eval(x);
        if !(y > prev) {
            return Err(Error::InvalidWeight(format!(
                "{} is not strictly increasing near {x}",
                omega.descriptor()
            )));
        }
        prev = y;
    }
    let v = mu.potential_fn();
    let w = omega.clone();
    let pot: ScalarFn = Arc::new(move |t: f64| {
        let x = w.inverse(t);
        v(x) + w.deriv1(x).ln()
    });
    let mu_d = mu.clone();
    let w2 = omega.clone();
    let dpot: ScalarFn = Arc::new(move |t: f64| {
        let x = w2.inverse(t);
        let d1 = w2.deriv1(x);
        mu_d.potential_deriv(x) / d1 + deriv2_or_numeric(&w2, x) / (d1 * d1)
    });
    let mut knots: Vec<f64> = mu.knots().iter().map(|&k| omega.eval(k)).collect();
    for k in omega.kinks() {
        let y = omega.eval(k);
        knots.push(y);
        knots.push(-y);
    }
    let mu_diff = mu.clone();
    let w3 = omega.clone();
    let diff: DiffFn = Arc::new(move |a: f64, b: f64| {
        let (xa, xb) = (w3.inverse(a), w3.inverse(b));
        mu_diff.potential_diff(xa, xb) + (w3.deriv1(xb) / w3.deriv1(xa)).ln()
    });
    Ok(Density1D::from_potential(
        format!("push[{}]({})", omega.descriptor(), mu.name()),
        pot,
        Some(dpot),
        knots,
    )?
    .with_potential_diff(diff))
}

/// n draws by inversion of the counter-based uniform stream keyed by `seed`.
pub fn sample(mu: &Density1D, n: usize, seed: u64) -> Vec<f64> {
    let stream = UniformStream::new(seed);
    let block = BLOCK as usize;
    let mut out = vec![0.0; n];
    out.par_chunks_mut(block).enumerate().for_each(|(c, chunk)| {
        stream.fill((c * block) as u64, chunk);
        for v in chunk.iter_mut() {
            *v = mu.quantile(*v);
        }
    });
    out
}

/// A finitely supported probability measure on R^dim. Atoms are stored
/// row-major in `coords`. Zero weights are allowed so that measures can
/// share a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() != dim * weights.len() || weights.is_empty() {
            return Err(Error::InvalidMeasure(format!(
                "{} coordinates do not form {} atoms of dimension {dim}",
                coords.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidMeasure("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMeasure("atoms must be finite".into()));
        }
        let m = Self { dim, coords, weights };
        let mut order: Vec<usize> = (0..m.len()).collect();
        order.sort_by(|&a, &b| {
            m.atom(a)
                .iter()
                .zip(m.atom(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        if order.windows(2).any(|w| m.atom(w[0]) == m.atom(w[1])) {
            return Err(Error::InvalidMeasure("atoms must be distinct".into()));
        }
        Ok(m)
    }

    pub fn new_1d(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::new(1, atoms, weights)
    }

    /// Rescales non-negative masses to total one.
    pub fn normalized(dim: usize, coords: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidMeasure(format!("total mass {total} cannot be normalized")));
        }
        Self::new(dim, coords, masses.iter().map(|m| m / total).collect())
    }

    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::new(point.len(), point.to_vec(), vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn same_atoms(&self, other: &Self) -> bool {
        self.dim == other.dim && self.coords == other.coords
    }

    /// Reweights by a non-negative density relative to this measure.
    pub fn reweighted<F: Fn(&[f64]) -> f64>(&self, f: F) -> Result<Self> {
        let masses = (0..self.len()).map(|i| self.weights[i] * f(self.atom(i))).collect();
        Self::normalized(self.dim, self.coords.clone(), masses)
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for i in 0..self.len() {
            for (mj, xj) in m.iter_mut().zip(self.atom(i)) {
                *mj += self.weights[i] * xj;
            }
        }
        m
    }
}

/// Outcome of [`discretize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub measure: DiscreteMeasure,
    /// Mass of μ inside the grid before renormalization.
    pub coverage: f64,
}

/// Atoms at cell midpoints of `grid` (sorted edges) carrying the cdf
/// increment of each cell, renormalized.
pub fn discretize(mu: &Density1D, grid: &[f64]) -> Result<Discretization> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("grid must have at least two strictly increasing edges"));
    }
    let m = mu.median();
    let masses: Vec<f64> = grid
        .windows(2)
        .map(|w| {
            if w[1] <= m {
                mu.cdf(w[1]) - mu.cdf(w[0])
            } else if w[0] >= m {
                mu.sf(w[0]) - mu.sf(w[1])
            } else {
                (mu.cdf(m) - mu.cdf(w[0])) + (mu.sf(m) - mu.sf(w[1]))
            }
        })
        .map(|v: f64| v.max(0.0))
        .collect();
    let coverage: f64 = masses.iter().sum();
    if coverage < 1.0 - 1e-3 {
        return Err(Error::Coverage { covered: coverage });
    }
    let atoms = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let measure = DiscreteMeasure::normalized(1, atoms, masses)?;
    Ok(Discretization { measure, coverage })
}

/// H(ν|μ) = Σ ν_i log(ν_i/μ_i) on a shared atom set.
pub fn relative_entropy(nu: &DiscreteMeasure, mu: &DiscreteMeasure) -> Result<f64> {
    if !nu.same_atoms(mu) {
        return Err(Error::Alignment(format!(
            "{} atoms in dimension {} vs {} atoms in dimension {}",
            nu.len(),
            nu.dim(),
            mu.len(),
            mu.dim()
        )));
    }
    let mut h = 0.0;
    for (&p, &q) in nu.weights().iter().zip(mu.weights()) {
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

/// A C² potential V on R^d with its gradient and the diagonal of its
/// Hessian.
#[derive(Clone)]
pub struct PotentialField {
    dim: usize,
    name: String,
    value: FieldFn,
    grad: VectorFieldFn,
    hess_diag: VectorFieldFn,
}

impl fmt::Debug for PotentialField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PotentialField({}, d={})", self.name, self.dim)
    }
}

impl PotentialField {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        value: FieldFn,
        grad: VectorFieldFn,
        hess_diag: VectorFieldFn,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("potential field needs dimension >= 1"));
        }
        Ok(Self { dim, name: name.into(), value, grad, hess_diag })
    }

    /// V(x) = Σ x_i²/2.
    pub fn quadratic(dim: usize) -> Result<Self> {
        Self::new(
            "quadratic",
            dim,
            Arc::new(|x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>()),
            Arc::new(|x: &[f64], g: &mut [f64]| g.copy_from_slice(x)),
            Arc::new(|_x: &[f64], h: &mut [f64]| h.fill(1.0)),
        )
    }

    /// V(x) = Σ √(1 + x_i²), a smoothed ℓ¹ potential.
    pub fn smooth_abs(dim: usize) -> Result<Self> {
        Self::new(
            "smooth_abs",
            dim,
            Arc::new(|x: &[f64]| x.iter().map(|v| (1.0 + v * v).sqrt()).sum()),
            Arc::new(|x: &[f64], g: &mut [f64]| {
                for (gi, v) in g.iter_mut().zip(x) {
                    *gi = v / (1.0 + v * v).sqrt();
                }
            }),
            Arc::new(|x: &[f64], h: &mut [f64]| {
                for (hi, v) in h.iter_mut().zip(x) {
                    *hi = (1.0 + v * v).powf(-1.5);
                }
            }),
        )
    }

    /// V(x) = Σ |x_i|^p for p ≥ 2 (C² everywhere).
    pub fn separable_power(dim: usize, p: f64) -> Result<Self> {
        if !(p >= 2.0) {
            return Err(Error::param("separable_power needs p >= 2 for a C² potential"));
        }
        Self::new(
            format!("separable_power:p={p}"),
            dim,
            Arc::new(move |x: &[f64]| x.iter().map(|v| v.abs().powf(p)).sum()),
            Arc::new(move |x: &[f64], g: &mut [f64]| {
                for (gi, v) in g.iter_mut().zip(x) {
                    *gi = p * v.abs().powf(p - 1.0) * v.signum();
                }
            }),
            Arc::new(move |x: &[f64], h: &mut [f64]| {
                for (hi, v) in h.iter_mut().zip(x) {
                    *hi = p * (p - 1.0) * v.abs().powf(p - 2.0);
                }
            }),
        )
    }

    /// Potential of the image of μ under x ↦ u·x: V(x/u) up to a constant.
    pub fn scaled(&self, u: f64) -> Result<Self> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::param("scale must be positive"));
        }
        let (v, g, h) = (self.value.clone(), self.grad.clone(), self.hess_diag.clone());
        Self::new(
            format!("{}(x/{u})", self.name),
            self.dim,
            Arc::new(move |x: &[f64]| {
                let y: Vec<f64> = x.iter().map(|t| t / u).collect();
                v(&y)
            }),
            Arc::new(move |x: &[f64], out: &mut [f64]| {
                let y: Vec<f64> = x.iter().map(|t| t / u).collect();
                g(&y, out);
                out.iter_mut().for_each(|o| *o /= u);
            }),
            Arc::new(move |x: &[f64], out: &mut [f64]| {
                let y: Vec<f64> = x.iter().map(|t| t / u).collect();
                h(&y, out);
                out.iter_mut().for_each(|o| *o /= u * u);
            }),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        (self.grad)(x, out)
    }

    pub fn hess_diag(&self, x: &[f64], out: &mut [f64]) {
        (self.hess_diag)(x, out)
    }

    /// Largest relative disagreement between the supplied derivatives and
    /// central differences at the given probe points.
    pub fn derivative_mismatch(&self, probes: &[Vec<f64>]) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        let mut g = vec![0.0; d];
        let mut hd = vec![0.0; d];
        let mut gp = vec![0.0; d];
        let mut gm = vec![0.0; d];
        for x in probes {
            self.grad(x, &mut g);
            self.hess_diag(x, &mut hd);
            for i in 0..d {
                let h = 1e-5 * (1.0 + x[i].abs());
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (self.value(&xp) - self.value(&xm)) / (2.0 * h);
                worst = worst.max((fd - g[i]).abs() / (1.0 + g[i].abs()));
                self.grad(&xp, &mut gp);
                self.grad(&xm, &mut gm);
                let fd2 = (gp[i] - gm[i]) / (2.0 * h);
                worst = worst.max((fd2 - hd[i]).abs() / (1.0 + hd[i].abs()));
            }
        }
        worst
    }
}
