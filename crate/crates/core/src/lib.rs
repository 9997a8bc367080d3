//! Riesz fractional calculus on periodic grids, generalized Orlicz
//! (Musielak–Orlicz) norms, and a variational solver for the nonlinear
//! fractional Dirichlet problem
//!
//! ```text
//! -D^s · (a(x, |D^s u|) D^s u) = F   in Ω,      u = 0 outside Ω.
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`phi`]: Φ-functions `A(x, ℓ)`, their densities `a(x, r)`, conjugates,
//!   left inverses and growth-condition audits.
//! * [`spectral`]: grids, fields, Fourier multipliers (fractional gradient,
//!   divergence, Riesz potential and transform, fractional Laplacian) and a
//!   real-space quadrature oracle.
//! * [`orlicz`]: modulars, Luxemburg norms and dual pairings.
//! * [`lab`]: inequality sweeps over deterministic test suites.
//! * [`solver`]: energy minimisation for the Dirichlet problem and the
//!   continuous-dependence experiment.

// `!(x > 0.0)` style guards deliberately reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
mod quad;
pub mod mask;
pub mod orlicz;
pub mod phi;
pub mod lab;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use mask::DomainMask;
pub use phi::{Family, GrowthExponents, PhiFunction, SpatialParam};
pub use spectral::{Grid, GridField, Spectral, VectorGridField};
