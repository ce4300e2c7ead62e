//! Numerical verification of weighted Poincaré inequalities, transport-cost
//! inequalities for the cost α(a·d_ω), and the dimension-free concentration
//! bounds that follow from them.
//!
//! The closed-form algebra ([`weight`]) is generic over [`Scalar`]; the
//! numerical engines (quadrature, spectral discretization, exact transport,
//! Monte-Carlo) work in `f64`.

pub mod concentration;
pub mod error;
pub mod measures;
pub mod metric;
pub mod poincare;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod spec;
pub mod spectral;
pub mod transport;
pub mod weight;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use weight::{Weight, WeightFunction};

pub type OmegaP64 = weight::OmegaP<f64>;
pub type OmegaP32 = weight::OmegaP<f32>;
pub type AlphaCost64 = weight::AlphaCost<f64>;
pub type AlphaCost32 = weight::AlphaCost<f32>;
pub type BglProfile64 = weight::BglProfile<f64>;
pub type BglProfile32 = weight::BglProfile<f32>;
