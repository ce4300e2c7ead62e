//! Spectral oracle for the optimal weighted Poincaré constant of a 1-D
//! measure: the reciprocal of the first nonzero eigenvalue of the
//! discretized form ∫ (f′/ω′)² dμ against Var_μ.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::Density1D;
use crate::report::Real;
use crate::weight::{Weight, WeightFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralEstimate {
    /// Richardson-extrapolated constant 1/λ.
    pub estimate: Real,
    /// 1/λ on `gridsize` cells.
    pub fine: Real,
    /// 1/λ on `gridsize / 2` cells.
    pub coarse: Real,
    pub gridsize: usize,
    pub box_low: Real,
    pub box_high: Real,
}

impl SpectralEstimate {
    pub fn value(&self) -> f64 {
        self.estimate.0
    }
}

/// Estimates C_opt on `[box_low, box_high]` with reflecting boundaries.
pub fn spectral_gap_estimate(
    mu: &Density1D,
    omega: &WeightFunction,
    gridsize: usize,
    bounds: (f64, f64),
) -> Result<SpectralEstimate> {
    let (lo, hi) = bounds;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::param(format!("invalid box [{lo}, {hi}]")));
    }
    if gridsize < 8 || gridsize % 2 != 0 {
        return Err(Error::param("gridsize must be even and at least 8"));
    }
    let outside = mu.cdf(lo) + mu.sf(hi);
    if outside > 1e-8 {
        return Err(Error::param(format!(
            "box [{lo}, {hi}] leaves mass {outside:e} outside (needs <= 1e-8)"
        )));
    }
    let fine = first_nonzero_eigenvalue(mu, omega, gridsize, lo, hi)?;
    let coarse = first_nonzero_eigenvalue(mu, omega, gridsize / 2, lo, hi)?;
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    let lambda = if extrapolated > 0.0 { extrapolated } else { fine };
    Ok(SpectralEstimate {
        estimate: Real(1.0 / lambda),
        fine: Real(1.0 / fine),
        coarse: Real(1.0 / coarse),
        gridsize,
        box_low: Real(lo),
        box_high: Real(hi),
    })
}

/// Second smallest eigenvalue of M^{-1/2} K M^{-1/2} on `cells` uniform
/// cells. Entries are formed from differences of V so nothing underflows.
pub fn first_nonzero_eigenvalue(
    mu: &Density1D,
    omega: &WeightFunction,
    cells: usize,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let n = cells + 1;
    let dx = (hi - lo) / cells as f64;
    let x = |i: usize| lo + dx * i as f64;
    let v: Vec<f64> = (0..n).map(|i| mu.potential(x(i))).collect();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; cells];
    let end = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    for e in 0..cells {
        let mid = x(e) + 0.5 * dx;
        let vm = mu.potential(mid);
        let w = omega.deriv1(mid);
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::SingularWeight { index: 0, x: mid });
        }
        let base = 1.0 / (w * w * dx * dx);
        diag[e] += base * (v[e] - vm).exp() / end(e);
        diag[e + 1] += base * (v[e + 1] - vm).exp() / end(e + 1);
        off[e] = -base * (0.5 * (v[e] + v[e + 1]) - vm).exp() / (end(e) * end(e + 1)).sqrt();
    }
    if diag.iter().chain(off.iter()).any(|d| !d.is_finite()) {
        return Err(Error::numeric("non-finite entry in the discretized operator"));
    }
    let upper = (0..n)
        .map(|i| {
            let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let r = if i < cells { off[i].abs() } else { 0.0 };
            diag[i] + l + r
        })
        .fold(0.0, f64::max);
    let (mut a, mut b) = (0.0, upper);
    if sturm_count(&diag, &off, b) < 2 {
        return Err(Error::numeric("eigenvalue bracket does not contain two eigenvalues"));
    }
    for _ in 0..300 {
        let m = 0.5 * (a + b);
        if sturm_count(&diag, &off, m) >= 2 {
            b = m;
        } else {
            a = m;
        }
        if b - a <= 1e-14 * b {
            break;
        }
    }
    let lambda = 0.5 * (a + b);
    if !(lambda > 0.0) {
        return Err(Error::numeric("first nonzero eigenvalue is not positive"));
    }
    Ok(lambda)
}

/// Number of eigenvalues strictly below `sigma` of the symmetric
/// tridiagonal matrix (diag, off).
fn sturm_count(diag: &[f64], off: &[f64], sigma: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - sigma;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let qq = if q == 0.0 { f64::EPSILON * (diag[i - 1].abs() + off[i - 1].abs()) } else { q };
        q = diag[i] - sigma - off[i - 1] * off[i - 1] / qq;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{gaussian, nu_p_make};

    #[test]
    fn sturm_on_small_matrix() {
        // eigenvalues of [[2,-1],[-1,2]] are 1 and 3
        let d = [2.0, 2.0];
        let o = [-1.0];
        assert_eq!(sturm_count(&d, &o, 0.5), 0);
        assert_eq!(sturm_count(&d, &o, 2.0), 1);
        assert_eq!(sturm_count(&d, &o, 3.5), 2);
    }

    #[test]
    fn gaussian_constant_is_one() {
        let g = gaussian(1.0).unwrap();
        let est = spectral_gap_estimate(&g, &WeightFunction::Identity, 2000, (-10.0, 10.0)).unwrap();
        assert!((est.value() - 1.0).abs() < 0.02, "{est:?}");
    }

    #[test]
    fn box_must_hold_the_mass() {
        let mu = nu_p_make(1.0).unwrap();
        assert!(spectral_gap_estimate(&mu, &WeightFunction::Identity, 100, (-5.0, 5.0)).is_err());
    }
}
