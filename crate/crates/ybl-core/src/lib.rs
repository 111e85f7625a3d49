//! Numerical laboratory for bubble-driven infinite-time blow-up of
//! perturbed Yamabe flows.
//!
//! The crate provides, at desk scale: exact bubble profiles and their
//! linearised kernels, high-precision quadrature of the construction's
//! integral constants with their cancellation identities, the correction
//! profile solving the linearised bubble equation, closed-form and numerical
//! parameter dynamics of the dilation/translation system, Green's functions
//! on flat tori (Ewald summation) and round spheres, assembly and error
//! measurement of approximate blow-up solutions in bubble-adapted weighted
//! norms, a stereographic spectral solver for the core linear problem, and a
//! zonal simulator of the flow that tracks the predicted collapse rate.

pub mod approx;
pub mod bubble;
pub mod config;
pub mod constants;
pub mod correction;
pub mod curvature;
pub mod dim;
pub mod dynamics;
pub mod error;
pub mod ewald;
pub mod flow;
pub mod manifold;
pub mod norms;
pub mod quad;
pub mod stereo;
pub mod zonal;

pub use dim::Dim;
pub use error::{Error, Result};
