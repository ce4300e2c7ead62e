//! The metric d_ω on R^d, weighted gradient lengths and the coordinatewise
//! enlargement cost used by the concentration checks.

use crate::error::{Error, Result};
use crate::weight::{alpha, Weight};

/// d_ω(x, y) = (Σ |ω(x_i) − ω(y_i)|²)^{1/2}.
pub fn d_omega<W: Weight<f64> + ?Sized>(x: &[f64], y: &[f64], omega: &W) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let s: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let d = omega.eval(a) - omega.eval(b);
            d * d
        })
        .sum();
    Ok(s.sqrt())
}

/// (Σ (∂_i f / ω′(x_i))²)^{1/2}, the length of a gradient measured in d_ω.
pub fn grad_length_weighted<W: Weight<f64> + ?Sized>(
    gradient: &[f64],
    x: &[f64],
    omega: &W,
) -> Result<f64> {
    if gradient.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: gradient.len() });
    }
    let mut s = 0.0;
    for (i, (&g, &xi)) in gradient.iter().zip(x).enumerate() {
        let d = omega.deriv1(xi);
        if !(d.abs() > 0.0) || !d.is_finite() {
            return Err(Error::SingularWeight { index: i, x: xi });
        }
        let r = g / d;
        s += r * r;
    }
    Ok(s.sqrt())
}

/// A point of (R^d)^n stored row-major: factor i, coordinate j at `i*d + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPoint {
    n: usize,
    d: usize,
    coords: Vec<f64>,
}

impl ProductPoint {
    pub fn new(n: usize, d: usize, coords: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::param("product point needs n >= 1 and d >= 1"));
        }
        if coords.len() != n * d {
            return Err(Error::DimensionMismatch { expected: n * d, got: coords.len() });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("product point coordinates must be finite"));
        }
        Ok(Self { n, d, coords })
    }

    pub fn factors(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coords[i * self.d + j]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    AtMost,
    AtLeast,
}

/// {x : x_{i,j} ≤ m} or {x : x_{i,j} ≥ m}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpaceSet {
    pub factor: usize,
    pub coord: usize,
    pub threshold: f64,
    pub side: Side,
}

impl HalfSpaceSet {
    pub fn at_most(factor: usize, coord: usize, threshold: f64) -> Self {
        Self { factor, coord, threshold, side: Side::AtMost }
    }

    pub fn at_least(factor: usize, coord: usize, threshold: f64) -> Self {
        Self { factor, coord, threshold, side: Side::AtLeast }
    }

    pub fn contains(&self, y: &ProductPoint) -> bool {
        let v = y.get(self.factor, self.coord);
        match self.side {
            Side::AtMost => v <= self.threshold,
            Side::AtLeast => v >= self.threshold,
        }
    }

    /// Distance from `v` to the half-line along the constrained coordinate.
    pub fn excess(&self, v: f64) -> f64 {
        match self.side {
            Side::AtMost => (v - self.threshold).max(0.0),
            Side::AtLeast => (self.threshold - v).max(0.0),
        }
    }
}

/// Sets for which the enlargement infimum is computed exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum EnlargementSet {
    HalfSpace(HalfSpaceSet),
    /// Anything else; rejected.
    Other(String),
}

/// inf_{a∈A} Σ_{i,j} α(ω(|y_{i,j} − a_{i,j}|/2)). For a half-space only the
/// constrained coordinate moves, giving α(ω(excess/2)).
pub fn enlargement_cost<W: Weight<f64> + ?Sized>(
    y: &ProductPoint,
    set: &EnlargementSet,
    omega: &W,
) -> Result<f64> {
    match set {
        EnlargementSet::HalfSpace(h) => {
            if h.factor >= y.factors() || h.coord >= y.dim() {
                return Err(Error::DimensionMismatch {
                    expected: y.factors() * y.dim(),
                    got: h.factor * y.dim() + h.coord + 1,
                });
            }
            Ok(half_space_cost(h.excess(y.get(h.factor, h.coord)), omega))
        }
        EnlargementSet::Other(name) => Err(Error::UnsupportedSet(name.clone())),
    }
}

/// α(ω(e/2)) for a non-negative excess `e`.
pub fn half_space_cost<W: Weight<f64> + ?Sized>(excess: f64, omega: &W) -> f64 {
    if excess <= 0.0 {
        0.0
    } else {
        alpha(omega.eval(0.5 * excess))
    }
}

/// Certificate for u ∈ √h·B₂ + h^{1/p}·B_p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallSplit {
    pub member: bool,
    /// |v|₂² for the entries with |u_k| ≤ 1.
    pub v_norm_sq: f64,
    /// |w|_p^p for the remaining entries.
    pub w_norm_p: f64,
}

/// Splits u into the small entries v (|u_k| ≤ 1) and large entries w and
/// reports membership when |v|₂ ≤ √h and |w|_p ≤ h^{1/p}.
pub fn ball_sum_membership(u: &[f64], h: f64, p: f64) -> Result<BallSplit> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::param(format!("p must lie in [1, 2], got {p}")));
    }
    if !(h >= 0.0) {
        return Err(Error::param(format!("h must be non-negative, got {h}")));
    }
    let mut v_norm_sq = 0.0;
    let mut w_norm_p = 0.0;
    for &x in u {
        let a = x.abs();
        if a <= 1.0 {
            v_norm_sq += a * a;
        } else {
            w_norm_p += a.powf(p);
        }
    }
    Ok(BallSplit { member: v_norm_sq <= h && w_norm_p <= h, v_norm_sq, w_norm_p })
}
