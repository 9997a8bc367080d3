//! Periodic-grid fractional calculus.
//!
//! `ℝ^d` is modelled by the torus `[-L/2, L/2)^d`; functions of interest are
//! supported well inside the box. All operators are Fourier multipliers, so
//! the algebraic identities between them hold to rounding on resolved fields
//! (mean-free, no Nyquist content; see [`Spectral::project_resolved`]).

mod constants;
mod field;
mod grid;
pub mod io;
mod multiplier;
pub mod oracle;

pub use constants::mu_constant;
pub use field::{GridField, VectorGridField};
pub use grid::Grid;
pub use multiplier::{FieldRef, FieldValue, Spectral, SpectralMultiplier, SymbolKind, ZeroMode};
pub use oracle::{quadrature_oracle_dsu, OracleOptions};
