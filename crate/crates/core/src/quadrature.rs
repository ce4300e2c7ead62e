//! Adaptive Gauss–Kronrod quadrature.
//!
//! [`integrate`] is a global adaptive 21-point Gauss–Kronrod scheme in the
//! QUADPACK mould: the interval with the largest error estimate is bisected
//! until the requested tolerance is met. [`march`] integrates rapidly
//! decaying integrands over long or infinite ranges by walking outward in
//! chunks whose length follows the local decay rate of the log-integrand.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-300,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Self {
            rel,
            ..Self::default()
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Single 21-point Kronrod rule with the embedded 10-point Gauss estimate.
/// Returns `(kronrod, error_estimate)`.
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let asc = asc * half.abs();
    let result = kronrod * half;
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    (result, err)
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]` (finite, either orientation).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Integral {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Integrates `f` over consecutive intervals given by the sorted `points`,
/// so that kinks and jumps of the integrand sit on interval boundaries.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: Tolerance) -> Integral {
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let (v, e) = gk21(&f, a, b);
        evaluations += 21;
        value += v;
        error += e;
        heap.push(Piece { a, b, value: v, error: e });
    }
    let target = |value: f64| tol.abs.max(tol.rel * value.abs());
    while error > target(value) && heap.len() < tol.max_intervals {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        evaluations += 42;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // re-sum to shed accumulated cancellation from the running totals
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Integral {
        value,
        error,
        evaluations,
        converged: error <= target(value).max(1e-15 * value.abs()),
    }
}

/// Integrates `f` from `start` toward `limit` (`±inf` allowed), where
/// `log_f` is the logarithm of the dominant factor of `f`.
///
/// Chunk lengths follow `1 / |d log_f|` so that sharply peaked exponentials
/// near `start` are resolved. The walk stops once `log_f` has dropped
/// `cutoff` below its running maximum and the last chunk no longer moves
/// the total. Points in `breaks` become chunk boundaries.
pub fn march<F, G>(
    f: F,
    log_f: G,
    start: f64,
    limit: f64,
    breaks: &[f64],
    cutoff: f64,
    tol: Tolerance,
) -> Result<Integral>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if start == limit {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        });
    }
    let dir = if limit > start { 1.0 } else { -1.0 };
    let decay_length = |v: f64| {
        let h = 1e-6 * (1.0 + v.abs());
        let slope = (log_f(v + dir * h) - log_f(v)) / h;
        if slope < 0.0 && slope.is_finite() {
            1.0 / -slope
        } else {
            f64::INFINITY
        }
    };
    let mut total = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut converged = true;
    let mut v = start;
    let mut peak = log_f(start);
    let mut len = (1e-3 * (1.0 + start.abs())).min(0.25 * decay_length(start));
    for _ in 0..100_000 {
        let ell = decay_length(v);
        len = (2.0 * len).min(4.0 * ell).max(1e-13 * (1.0 + v.abs()));
        let mut next = v + dir * len;
        if (next - limit) * dir >= 0.0 {
            next = limit;
        }
        for &b in breaks {
            if (b - v) * dir > 0.0 && (next - b) * dir > 0.0 {
                next = b;
                break;
            }
        }
        let (lo, hi) = if dir > 0.0 { (v, next) } else { (next, v) };
        let piece = integrate(&f, lo, hi, tol);
        evaluations += piece.evaluations;
        converged &= piece.converged;
        total += piece.value;
        error += piece.error;
        let lf = log_f(next);
        if lf.is_finite() {
            peak = peak.max(lf);
        }
        v = next;
        if v == limit {
            return Ok(Integral { value: total, error, evaluations, converged });
        }
        let negligible = piece.value.abs() <= 1e-17 * total.abs();
        if (peak - lf > cutoff || lf == f64::NEG_INFINITY) && negligible {
            return Ok(Integral { value: total, error, evaluations, converged });
        }
        if !v.is_finite() {
            break;
        }
    }
    Err(Error::numeric(format!(
        "tail integration from {start} did not terminate"
    )))
}
