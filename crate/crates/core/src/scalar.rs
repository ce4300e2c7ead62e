//! Scalar abstraction shared by the closed-form parts of the toolkit.
//!
//! The cost profiles, constants and weight families are written once over
//! [`Scalar`] and instantiated for `f32` and `f64`. Everything that needs
//! quadrature, eigenvalues or linear programming works in `f64` only.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type usable by the generic kernels: `f32` or `f64`.
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    /// Converts a literal. Panics only if the literal is not representable,
    /// which cannot happen for the small constants used here.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
