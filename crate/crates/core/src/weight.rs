//! Weight functions ω, the cost profile α and the constants built from them.
//!
//! A weight is an odd map ω: R → R, non-negative on R⁺, with ω(x)/x
//! non-decreasing on (0, ∞). It induces the metric
//! d_ω(x, y) = |ω(x) − ω(y)|₂ used throughout the crate.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::scalar::Scalar;
use crate::spec::{parse_family, read_two_columns};

/// The cost profile α(u) = min(|u|, u²).
pub fn alpha<S: Scalar>(u: S) -> S {
    let a = u.abs();
    a.min(a * a)
}

/// κ = √(18·e^{√5}), the constant of the exponential deviation bound.
pub fn kappa<S: Scalar>() -> S {
    let five = S::lit(5.0);
    (S::lit(18.0) * five.sqrt().exp()).sqrt()
}

/// K(C) = α(1/(√C·κ)) / 16.
pub fn concentration_rate<S: Scalar>(c: S) -> Result<S> {
    if !(c > S::zero()) || !c.is_finite() {
        return Err(Error::param(format!(
            "Poincaré constant must be positive and finite, got {c:?}"
        )));
    }
    Ok(alpha(S::one() / (c.sqrt() * kappa::<S>())) / S::lit(16.0))
}

/// The cost u ↦ α(a·u) with a positive scale `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaCost<S> {
    scale: S,
}

impl<S: Scalar> AlphaCost<S> {
    pub fn new(scale: S) -> Result<Self> {
        if !(scale > S::zero()) || !scale.is_finite() {
            return Err(Error::param(format!("cost scale must be positive, got {scale:?}")));
        }
        Ok(Self { scale })
    }

    pub fn scale(&self) -> S {
        self.scale
    }

    pub fn eval(&self, u: S) -> S {
        alpha(self.scale * u)
    }
}

/// Profile of the modified log-Sobolev transport cost α_s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BglProfile<S> {
    s: S,
    c: S,
    l: S,
}

impl<S: Scalar> BglProfile<S> {
    /// Requires `0 < s < 2/√C`.
    pub fn new(s: S, c: S) -> Result<Self> {
        if !(c > S::zero()) || !c.is_finite() {
            return Err(Error::param(format!("C must be positive, got {c:?}")));
        }
        let two = S::lit(2.0);
        let rc = c.sqrt();
        if !(s > S::zero()) || !(s < two / rc) {
            return Err(Error::param(format!(
                "s must lie in (0, 2/sqrt(C)) = (0, {:?}), got {s:?}",
                two / rc
            )));
        }
        let ratio = (two + rc * s) / (two - rc * s);
        let l = c / two * ratio * ratio * (s * (S::lit(5.0) * c).sqrt()).exp();
        Ok(Self { s, c, l })
    }

    pub fn s(&self) -> S {
        self.s
    }

    pub fn c(&self) -> S {
        self.c
    }

    /// L(s) = (C/2)·((2+√C·s)/(2−√C·s))²·e^{s√(5C)}.
    pub fn l(&self) -> S {
        self.l
    }

    /// Location |t| = 2·L(s)·s where the quadratic branch meets the linear one.
    pub fn knee(&self) -> S {
        S::lit(2.0) * self.l * self.s
    }

    pub fn alpha_s(&self, t: S) -> S {
        let a = t.abs();
        if a <= self.knee() {
            a * a / (S::lit(4.0) * self.l)
        } else {
            self.s * a - self.l * self.s * self.s
        }
    }
}

/// Free-function form of [`BglProfile::alpha_s`].
pub fn alpha_s<S: Scalar>(t: S, profile: &BglProfile<S>) -> S {
    profile.alpha_s(t)
}

/// Interface shared by all weight families.
pub trait Weight<S: Scalar>: Send + Sync {
    fn eval(&self, x: S) -> S;
    /// First derivative; at kinks the outer one-sided derivative.
    fn deriv1(&self, x: S) -> S;
    /// Second derivative when available in closed form.
    fn deriv2(&self, x: S) -> Option<S>;
    /// Third derivative when available in closed form.
    fn deriv3(&self, x: S) -> Option<S>;
    fn inverse(&self, y: S) -> S;
    /// Points of R⁺ where a derivative jumps.
    fn kinks(&self) -> Vec<S> {
        Vec::new()
    }
    /// inf_x ω′(x).
    fn min_deriv1(&self) -> S;
    /// Half-width of the interval on which eval/inverse are valid.
    fn domain_radius(&self) -> S {
        S::infinity()
    }
}

/// ω(x) = x.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Identity;

impl<S: Scalar> Weight<S> for Identity {
    fn eval(&self, x: S) -> S {
        x
    }
    fn deriv1(&self, _x: S) -> S {
        S::one()
    }
    fn deriv2(&self, _x: S) -> Option<S> {
        Some(S::zero())
    }
    fn deriv3(&self, _x: S) -> Option<S> {
        Some(S::zero())
    }
    fn inverse(&self, y: S) -> S {
        y
    }
    fn min_deriv1(&self) -> S {
        S::one()
    }
}

/// ω_p(x) = max(x, x^p) on R⁺, extended oddly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaP<S> {
    p: S,
}

impl<S: Scalar> OmegaP<S> {
    pub fn new(p: S) -> Result<Self> {
        if !(p >= S::one()) || !p.is_finite() {
            return Err(Error::param(format!("omega_p needs p >= 1, got {p:?}")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> S {
        self.p
    }
}

/// Builds ω_p, failing for p < 1.
pub fn omega_p_make<S: Scalar>(p: S) -> Result<OmegaP<S>> {
    OmegaP::new(p)
}

impl<S: Scalar> Weight<S> for OmegaP<S> {
    fn eval(&self, x: S) -> S {
        let a = x.abs();
        let v = if a <= S::one() { a } else { a.powf(self.p) };
        v.copysign(x)
    }
    fn deriv1(&self, x: S) -> S {
        let a = x.abs();
        if a < S::one() {
            S::one()
        } else {
            self.p * a.powf(self.p - S::one())
        }
    }
    fn deriv2(&self, x: S) -> Option<S> {
        let a = x.abs();
        Some(if a < S::one() {
            S::zero()
        } else {
            (self.p * (self.p - S::one()) * a.powf(self.p - S::lit(2.0))).copysign(x)
        })
    }
    fn deriv3(&self, x: S) -> Option<S> {
        let a = x.abs();
        let p = self.p;
        Some(if a < S::one() {
            S::zero()
        } else {
            p * (p - S::one()) * (p - S::lit(2.0)) * a.powf(p - S::lit(3.0))
        })
    }
    fn inverse(&self, y: S) -> S {
        let a = y.abs();
        let v = if a <= S::one() { a } else { a.powf(S::one() / self.p) };
        v.copysign(y)
    }
    fn kinks(&self) -> Vec<S> {
        if self.p == S::one() {
            Vec::new()
        } else {
            vec![S::one()]
        }
    }
    fn min_deriv1(&self) -> S {
        S::one()
    }
}

/// A non-decreasing rate function T on [0, 1], extended by T(x) = T(1)
/// for x ≥ 1.
#[derive(Debug, Clone, PartialEq)]
pub enum BecknerProfile {
    Constant(f64),
    /// T(u) = u^e.
    Power(f64),
    /// Piecewise linear through (u, T(u)) with u from 0 to 1.
    Table { u: Vec<f64>, t: Vec<f64> },
}

impl BecknerProfile {
    /// Latała–Oleszkiewicz rate T(u) = u^{2(1 − 1/r)}.
    pub fn latala_oleszkiewicz(r: f64) -> Result<Self> {
        if !(r >= 1.0) || !r.is_finite() {
            return Err(Error::param(format!("LO exponent needs r >= 1, got {r}")));
        }
        Ok(Self::Power(2.0 * (1.0 - 1.0 / r)))
    }

    pub fn table(u: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        if u.len() != t.len() || u.len() < 2 {
            return Err(Error::param("T table needs at least two (u, T) rows"));
        }
        if u[0] != 0.0 || *u.last().unwrap() != 1.0 {
            return Err(Error::param("T table must start at u = 0 and end at u = 1"));
        }
        if u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("T table abscissae must be strictly increasing"));
        }
        if t.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::param("T table values must be finite and non-negative"));
        }
        if t.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::param("T must be non-decreasing"));
        }
        Ok(Self::Table { u, t })
    }

    pub fn from_table_file(path: &Path) -> Result<Self> {
        let (u, t) = read_two_columns(path)?;
        Self::table(u, t)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            Self::Constant(c) => *c,
            Self::Power(e) => {
                if *e == 0.0 {
                    1.0
                } else {
                    x.powf(*e)
                }
            }
            Self::Table { u, t } => {
                let k = u.partition_point(|&v| v <= x).clamp(1, u.len() - 1);
                let (u0, u1) = (u[k - 1], u[k]);
                let w = (x - u0) / (u1 - u0);
                t[k - 1] + w * (t[k] - t[k - 1])
            }
        }
    }

    pub fn at_one(&self) -> f64 {
        self.eval(1.0)
    }

    /// Whether x ↦ T(x)/x is non-increasing on (0, 1], checked on a grid.
    pub fn ratio_nonincreasing(&self) -> bool {
        match self {
            Self::Constant(_) => true,
            Self::Power(e) => *e <= 1.0,
            Self::Table { .. } => {
                let grid = test_grid();
                grid.windows(2)
                    .all(|w| self.eval(w[1]) / w[1] <= self.eval(w[0]) / w[0] * (1.0 + 1e-12))
            }
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        let grid = test_grid();
        grid.windows(2).all(|w| self.eval(w[1]) >= self.eval(w[0]))
    }

    /// Abscissae in (0, 1) where T has a kink.
    fn kinks(&self) -> Vec<f64> {
        match self {
            Self::Table { u, .. } => u.iter().copied().filter(|&v| v > 0.0 && v < 1.0).collect(),
            _ => Vec::new(),
        }
    }

    fn descriptor(&self) -> String {
        match self {
            Self::Constant(c) => format!("T=const:{c}"),
            Self::Power(e) => format!("T=u^{e}"),
            Self::Table { u, .. } => format!("T=table[{}]", u.len()),
        }
    }
}

fn test_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=60).map(|k| 2f64.powi(-k)).collect();
    g.extend((1..1000).map(|k| k as f64 / 1000.0));
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// The weight ω_T defined through ω_T^{-1}(t) = ∫₀ᵗ √T(1/u) du.
///
/// The integral is tabulated on a geometric grid of u ≥ 1; evaluation
/// inverts it inside a cell by safeguarded Newton iteration, with the
/// partial-cell integral done by a fixed Gauss rule.
#[derive(Debug, Clone)]
pub struct OmegaT {
    profile: BecknerProfile,
    root_t1: f64,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
    quad_tol: f64,
}

const OMEGA_T_RATIO: f64 = 1.02;
const OMEGA_T_UMAX: f64 = 1e30;

impl OmegaT {
    pub fn build(profile: BecknerProfile, quad_tol: f64) -> Result<Self> {
        let fail = |reason: String| Error::BuildFailure {
            what: format!("omega_T ({})", profile.descriptor()),
            reason,
        };
        if !(quad_tol > 0.0) {
            return Err(Error::param("quadrature tolerance must be positive"));
        }
        if !profile.is_nondecreasing() {
            return Err(fail("T is not non-decreasing on [0,1]".into()));
        }
        let t1 = profile.at_one();
        if !(t1 > 0.0) || !t1.is_finite() {
            return Err(fail(format!("T(1) must be positive and finite, got {t1}")));
        }
        let root_t1 = t1.sqrt();
        let mut nodes = vec![1.0];
        let mut breaks: Vec<f64> = profile.kinks().iter().map(|k| 1.0 / k).collect();
        breaks.sort_by(f64::total_cmp);
        let mut u = 1.0;
        while u < OMEGA_T_UMAX {
            let mut next = u * OMEGA_T_RATIO;
            if let Some(&b) = breaks.iter().find(|&&b| b > u * (1.0 + 1e-12) && b < next) {
                next = b;
            }
            nodes.push(next);
            u = next;
        }
        let g = |u: f64| profile.eval(1.0 / u).sqrt();
        let mut cumulative = Vec::with_capacity(nodes.len());
        let mut acc = root_t1;
        cumulative.push(acc);
        for w in nodes.windows(2) {
            let r = quadrature::integrate(g, w[0], w[1], Tolerance::rel(quad_tol.min(1e-12)));
            if !r.value.is_finite() {
                return Err(fail(format!(
                    "sqrt(T(1/u)) is not integrable on [{}, {}]",
                    w[0], w[1]
                )));
            }
            acc += r.value;
            cumulative.push(acc);
        }
        if cumulative.windows(2).any(|w| w[1] < w[0]) {
            return Err(fail("cumulative integral is not monotone".into()));
        }
        Ok(Self {
            profile,
            root_t1,
            nodes,
            cumulative,
            quad_tol,
        })
    }

    pub fn profile(&self) -> &BecknerProfile {
        &self.profile
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    fn integrand(&self, u: f64) -> f64 {
        if u <= 1.0 {
            self.root_t1
        } else {
            self.profile.eval(1.0 / u).sqrt()
        }
    }

    /// ∫ from `a` to `b` of the integrand, both inside one cell.
    fn cell_integral(&self, a: f64, b: f64) -> f64 {
        let (r, _) = quadrature::gk21(&|u| self.integrand(u), a, b);
        r
    }

    /// ω_T^{-1}(t) for t ≥ 0.
    fn inverse_pos(&self, t: f64) -> f64 {
        if t <= 1.0 {
            return t * self.root_t1;
        }
        let last = self.nodes.len() - 1;
        if t >= self.nodes[last] {
            return self.cumulative[last]
                + quadrature::integrate(|u| self.integrand(u), self.nodes[last], t, Tolerance::default()).value;
        }
        let k = self.nodes.partition_point(|&u| u <= t) - 1;
        self.cumulative[k] + self.cell_integral(self.nodes[k], t)
    }

    /// ω_T(x) for x ≥ 0.
    fn eval_pos(&self, x: f64) -> f64 {
        if x <= self.root_t1 {
            return x / self.root_t1;
        }
        let last = self.cumulative.len() - 1;
        if x >= self.cumulative[last] {
            return f64::INFINITY;
        }
        let k = self.cumulative.partition_point(|&c| c <= x) - 1;
        let (mut lo, mut hi) = (self.nodes[k], self.nodes[k + 1]);
        let (c0, c1) = (self.cumulative[k], self.cumulative[k + 1]);
        // cubic Hermite start: t(c) has slope 1/integrand at the nodes
        let w = c1 - c0;
        let s = (x - c0) / w;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        let mut t = h00 * lo + h10 * w / self.integrand(lo) + h01 * hi + h11 * w / self.integrand(hi);
        if !(t > lo && t < hi) {
            t = lo + (hi - lo) * s;
        }
        for _ in 0..100 {
            let r = self.cumulative[k] + self.cell_integral(self.nodes[k], t) - x;
            if r.abs() <= 4.0 * f64::EPSILON * x {
                return t;
            }
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let g = self.integrand(t);
            let mut next = t - r / g;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * t || hi - lo <= 1e-15 * t {
                return next;
            }
            t = next;
        }
        t
    }
}

impl Weight<f64> for OmegaT {
    fn eval(&self, x: f64) -> f64 {
        self.eval_pos(x.abs()).copysign(x)
    }
    fn deriv1(&self, x: f64) -> f64 {
        let t = self.eval_pos(x.abs());
        1.0 / self.integrand(t)
    }
    fn deriv2(&self, _x: f64) -> Option<f64> {
        None
    }
    fn deriv3(&self, _x: f64) -> Option<f64> {
        None
    }
    fn inverse(&self, y: f64) -> f64 {
        self.inverse_pos(y.abs()).copysign(y)
    }
    fn kinks(&self) -> Vec<f64> {
        vec![self.root_t1]
    }
    fn min_deriv1(&self) -> f64 {
        1.0 / self.root_t1
    }
    fn domain_radius(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }
}

/// Builds ω_T from a rate function.
pub fn omega_t_build(profile: BecknerProfile, quad_tol: f64) -> Result<OmegaT> {
    OmegaT::build(profile, quad_tol)
}

/// Θ(x) = x / T(1/log(1 + 1/x)).
#[derive(Debug, Clone)]
pub struct Theta {
    profile: BecknerProfile,
}

impl Theta {
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let h = 1.0 / (1.0 / x).ln_1p();
        let t = if h >= 1.0 { self.profile.at_one() } else { self.profile.eval(h) };
        x / t
    }
}

/// Builds Θ; requires T(x)/x to be non-increasing.
pub fn theta_build(profile: BecknerProfile) -> Result<Theta> {
    if !profile.ratio_nonincreasing() {
        return Err(Error::param(
            "Theta requires x -> T(x)/x to be non-increasing",
        ));
    }
    if !(profile.at_one() > 0.0) {
        return Err(Error::param("Theta requires T(1) > 0"));
    }
    Ok(Theta { profile })
}

/// Concrete weight used by the numerical modules.
#[derive(Clone)]
pub enum WeightFunction {
    Identity,
    Power(OmegaP<f64>),
    Beckner(Arc<OmegaT>),
    /// x ↦ base(u·x).
    Scaled { base: Box<WeightFunction>, u: f64 },
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl WeightFunction {
    pub fn omega_p(p: f64) -> Result<Self> {
        if p == 1.0 {
            return Ok(Self::Identity);
        }
        Ok(Self::Power(OmegaP::new(p)?))
    }

    pub fn omega_t(profile: BecknerProfile) -> Result<Self> {
        Ok(Self::Beckner(Arc::new(OmegaT::build(profile, 1e-12)?)))
    }

    pub fn scaled(self, u: f64) -> Result<Self> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::param(format!("rescaling factor must be positive, got {u}")));
        }
        Ok(Self::Scaled { base: Box::new(self), u })
    }

    /// Parses `identity`, `omega_p:p=2`, `omega_T:r=1.5` or `omega_T:table=<file>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (family, params) = parse_family(spec)?;
        match family.as_str() {
            "identity" => Ok(Self::Identity),
            "omega_p" => Self::omega_p(params.number("p")?),
            "omega_T" => {
                if let Some(path) = params.get("table") {
                    Self::omega_t(BecknerProfile::from_table_file(Path::new(path))?)
                } else {
                    Self::omega_t(BecknerProfile::latala_oleszkiewicz(params.number("r")?)?)
                }
            }
            other => Err(Error::param(format!("unknown weight family '{other}'"))),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Self::Identity)
    }

    pub fn descriptor(&self) -> String {
        match self {
            Self::Identity => "identity".into(),
            Self::Power(w) => format!("omega_p:p={}", w.p()),
            Self::Beckner(w) => match w.profile() {
                BecknerProfile::Power(e) if *e < 2.0 => {
                    format!("omega_T:r={}", 1.0 / (1.0 - e / 2.0))
                }
                other => format!("omega_T:{}", other.descriptor()),
            },
            Self::Scaled { base, u } => format!("{}*u={}", base.descriptor(), u),
        }
    }
}

impl Weight<f64> for WeightFunction {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Identity => x,
            Self::Power(w) => w.eval(x),
            Self::Beckner(w) => w.eval(x),
            Self::Scaled { base, u } => base.eval(u * x),
        }
    }
    fn deriv1(&self, x: f64) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Power(w) => w.deriv1(x),
            Self::Beckner(w) => w.deriv1(x),
            Self::Scaled { base, u } => u * base.deriv1(u * x),
        }
    }
    fn deriv2(&self, x: f64) -> Option<f64> {
        match self {
            Self::Identity => Some(0.0),
            Self::Power(w) => w.deriv2(x),
            Self::Beckner(w) => w.deriv2(x),
            Self::Scaled { base, u } => base.deriv2(u * x).map(|d| u * u * d),
        }
    }
    fn deriv3(&self, x: f64) -> Option<f64> {
        match self {
            Self::Identity => Some(0.0),
            Self::Power(w) => w.deriv3(x),
            Self::Beckner(w) => w.deriv3(x),
            Self::Scaled { base, u } => base.deriv3(u * x).map(|d| u * u * u * d),
        }
    }
    fn inverse(&self, y: f64) -> f64 {
        match self {
            Self::Identity => y,
            Self::Power(w) => w.inverse(y),
            Self::Beckner(w) => w.inverse(y),
            Self::Scaled { base, u } => base.inverse(y) / u,
        }
    }
    fn kinks(&self) -> Vec<f64> {
        match self {
            Self::Identity => Vec::new(),
            Self::Power(w) => w.kinks(),
            Self::Beckner(w) => w.kinks(),
            Self::Scaled { base, u } => base.kinks().into_iter().map(|k| k / u).collect(),
        }
    }
    fn min_deriv1(&self) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Power(w) => w.min_deriv1(),
            Self::Beckner(w) => w.min_deriv1(),
            Self::Scaled { base, u } => u * base.min_deriv1(),
        }
    }
    fn domain_radius(&self) -> f64 {
        match self {
            Self::Beckner(w) => w.domain_radius(),
            Self::Scaled { base, u } => base.domain_radius() / u,
            _ => f64::INFINITY,
        }
    }
}

/// Second derivative, falling back to a central difference of ω′.
pub fn deriv2_or_numeric<W: Weight<f64> + ?Sized>(w: &W, x: f64) -> f64 {
    w.deriv2(x).unwrap_or_else(|| {
        let h = 1e-5 * (1.0 + x.abs());
        (w.deriv1(x + h) - w.deriv1(x - h)) / (2.0 * h)
    })
}

/// Outcome of [`check_admissible`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Admissibility {
    pub odd: bool,
    pub nonnegative: bool,
    pub ratio_nondecreasing: bool,
    pub inverse_consistent: bool,
    pub worst_violation: f64,
    pub points_checked: usize,
}

impl Admissibility {
    pub fn ok(&self) -> bool {
        self.odd && self.nonnegative && self.ratio_nondecreasing && self.inverse_consistent
    }
}

/// Checks the weight conditions on the grid {2^k : k = −40..40} plus
/// 10⁴ random points; a relative violation beyond 1e−9 fails.
pub fn check_admissible<W: Weight<f64> + ?Sized>(w: &W, seed: u64) -> Admissibility {
    const SLACK: f64 = 1e-9;
    let radius = w.domain_radius();
    let mut pts: Vec<f64> = (-40..=40).map(|k| 2f64.powi(k)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let e: f64 = rng.gen_range(-40.0..40.0);
        pts.push(2f64.powf(e));
    }
    pts.retain(|&x| x < radius);
    pts.sort_by(f64::total_cmp);
    let mut report = Admissibility {
        odd: true,
        nonnegative: true,
        ratio_nondecreasing: true,
        inverse_consistent: true,
        worst_violation: 0.0,
        points_checked: pts.len(),
    };
    let mut bump = |v: f64| {
        if v > report.worst_violation {
            report.worst_violation = v;
        }
    };
    let mut prev_ratio = 0.0;
    for &x in &pts {
        let fx = w.eval(x);
        let fm = w.eval(-x);
        let odd_err = (fx + fm).abs() / (1.0 + fx.abs());
        bump(odd_err);
        if odd_err > SLACK {
            report.odd = false;
        }
        if fx < 0.0 {
            bump(-fx);
            report.nonnegative = false;
        }
        let ratio = fx / x;
        if ratio < prev_ratio * (1.0 - SLACK) {
            bump((prev_ratio - ratio) / prev_ratio);
            report.ratio_nondecreasing = false;
        }
        prev_ratio = prev_ratio.max(ratio);
        if fx.is_finite() {
            let back = w.inverse(fx);
            let rel = (back - x).abs() / x;
            if rel > 1e-10 {
                bump(rel);
                report.inverse_consistent = false;
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_p_values() {
        let w = omega_p_make(2.0f64).unwrap();
        assert_eq!(w.eval(0.5), 0.5);
        assert_eq!(w.eval(3.0), 9.0);
        assert_eq!(w.eval(-3.0), -9.0);
        assert_eq!(w.deriv1(0.5), 1.0);
        assert_eq!(w.deriv1(2.0), 4.0);
        // right-hand derivative at the kink
        assert_eq!(w.deriv1(1.0), 2.0);
        let id = omega_p_make(1.0f32).unwrap();
        for x in [-3.5f32, 0.0, 0.25, 7.0] {
            assert_eq!(id.eval(x), x);
        }
        assert!(matches!(omega_p_make(0.5f64), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha(0.5f64), 0.25);
        assert_eq!(alpha(2.0f64), 2.0);
        assert!((alpha(-0.3f64) - 0.09).abs() < 1e-15);
        assert_eq!(alpha(0.0f32), 0.0);
    }

    #[test]
    fn kappa_value() {
        let k: f64 = kappa();
        let direct = (18.0 * 5f64.sqrt().exp()).sqrt();
        assert_eq!(k, direct);
        assert!((k - 12.9770).abs() < 1e-3);
        assert!((k * k - 168.416_442_298_820_7).abs() < 1e-9);
        assert!(k > 12.0 && k < 13.0);
        let k32: f32 = kappa();
        assert!((k32 as f64 - k).abs() < 1e-5);
    }

    #[test]
    fn concentration_rate_values() {
        let k: f64 = kappa();
        let oracle = (1.0 / (2.0 * k)).powi(2) / 16.0;
        let got = concentration_rate(4.0f64).unwrap();
        assert!((got - oracle).abs() < 1e-15);
        assert!((got - 9.28e-5).abs() < 1e-7);
        assert!((concentration_rate(1.0 / (k * k)).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let v = concentration_rate(i as f64 * 0.05).unwrap();
            assert!(v <= prev);
            prev = v;
        }
        assert!(concentration_rate(0.0f64).is_err());
        assert!(concentration_rate(-1.0f64).is_err());
    }

    #[test]
    fn alpha_s_branches() {
        let prof = BglProfile::new(1.0f64, 1.0).unwrap();
        assert_eq!(prof.alpha_s(0.0), 0.0);
        let knee = prof.knee();
        let below = prof.alpha_s(knee * (1.0 - 1e-15));
        let above = prof.alpha_s(knee * (1.0 + 1e-15));
        assert!((below - above).abs() < 1e-12);
        let l = 0.5 * 9.0 * 5f64.sqrt().exp();
        assert!((prof.l() - l).abs() < 1e-12);
        assert!(BglProfile::new(2.0f64, 1.0).is_err());
        assert!(BglProfile::new(1.0f64, 4.0).is_err());
    }

    #[test]
    fn alpha_s_dominates_scaled_alpha() {
        let prof = BglProfile::new(1.0f64, 1.0).unwrap();
        let k: f64 = kappa();
        for i in 0..=100_000 {
            let t = i as f64 * 1e-3;
            // equality holds on the quadratic branch since 4L(1) = κ²
            assert!(prof.alpha_s(t) >= alpha(t / k) * (1.0 - 1e-12), "t = {t}");
        }
    }

    #[test]
    fn omega_t_constant_profile_is_identity() {
        let w = OmegaT::build(BecknerProfile::Constant(1.0), 1e-12).unwrap();
        for x in [0.0, 0.3, 1.0, 2.5, 40.0] {
            assert!((w.eval(x) - x).abs() < 1e-10 * (1.0 + x), "{x}");
            assert!((w.deriv1(x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn omega_t_power_profile_matches_direct_integration() {
        // ω_T^{-1}(t) = 1 + r(t^{1/r} − 1) for t ≥ 1, hence
        // ω_T(x) = ((x + r − 1)/r)^r.
        for r in [1.2, 1.5, 2.0] {
            let w = OmegaT::build(BecknerProfile::latala_oleszkiewicz(r).unwrap(), 1e-12).unwrap();
            for x in [0.5, 1.0, 2.0, 7.5, 50.0] {
                let expect = if x <= 1.0 { x } else { ((x + r - 1.0) / r).powf(r) };
                assert!((w.eval(x) - expect).abs() <= 1e-10 * expect, "r={r} x={x}");
                assert!((w.inverse(w.eval(x)) - x).abs() <= 1e-12 * (1.0 + x));
                let d = if x < 1.0 { 1.0 } else { ((x + r - 1.0) / r).powf(r - 1.0) };
                assert!((w.deriv1(x) - d).abs() <= 1e-9 * d, "r={r} x={x}");
            }
        }
        let w2 = OmegaT::build(BecknerProfile::latala_oleszkiewicz(2.0).unwrap(), 1e-12).unwrap();
        assert!((w2.eval(2.0) - 2.25).abs() < 1e-12);
    }

    #[test]
    fn theta_values() {
        let th = theta_build(BecknerProfile::Constant(1.0)).unwrap();
        assert_eq!(th.eval(0.5), 0.5);
        let th = theta_build(BecknerProfile::Power(1.0)).unwrap();
        // 1/log 2 > 1, so T is taken at its extension value T(1) = 1
        assert_eq!(th.eval(1.0), 1.0);
        assert!((th.eval(0.5) - 0.5 * 3f64.ln()).abs() < 1e-15);
        let th = theta_build(BecknerProfile::Power(0.5)).unwrap();
        assert!(th.eval(0.5) <= th.eval(0.3) + th.eval(0.2));
        assert!(theta_build(BecknerProfile::Power(1.5)).is_err());
    }

    #[test]
    fn admissible_families() {
        for w in [
            WeightFunction::Identity,
            WeightFunction::omega_p(1.5).unwrap(),
            WeightFunction::omega_p(3.0).unwrap(),
            WeightFunction::omega_t(BecknerProfile::latala_oleszkiewicz(1.5).unwrap()).unwrap(),
        ] {
            let rep = check_admissible(&w, 7);
            assert!(rep.ok(), "{w:?}: {rep:?}");
        }
    }

    #[test]
    fn spec_strings() {
        assert!(WeightFunction::from_spec("identity").unwrap().is_identity());
        let w = WeightFunction::from_spec("omega_p:p=2").unwrap();
        assert_eq!(w.eval(3.0), 9.0);
        assert_eq!(w.descriptor(), "omega_p:p=2");
        let w = WeightFunction::from_spec("omega_T:r=1.5").unwrap();
        assert!((w.eval(0.5) - 0.5).abs() < 1e-12);
        assert!(WeightFunction::from_spec("omega_p:p=0.5").is_err());
        assert!(WeightFunction::from_spec("omega_q:p=2").is_err());
    }
}
