//! Simulation and analysis of integrable and deformed (quasi-integrable)
//! 1+1 dimensional classical field theories.
//!
//! The crate is organised around the data flow of a scattering experiment:
//!
//! - [`potentials`]: interaction potentials (sine-Gordon, sinh-Gordon, the
//!   Bazeia deformation family, KdV coefficients), their derivatives and vacua.
//! - [`solutions`]: closed-form solitons and numerically constructed kinks used
//!   as initial data and as oracles.
//! - [`evolve`]: leapfrog evolution of `Φ_tt − Φ_xx + V'(Φ) = 0` and a
//!   pseudospectral KdV integrator.
//! - [`lax`]: the gauge connections `A_t`, `A_x`, the curvature anomaly, Wilson
//!   lines and loops.
//! - [`scattering`]: transfer matrices, Jost bases, spectral data `a(Λ)`, `b(Λ)`
//!   and the charges extracted from `a(Λ)`.
//! - [`diagnostics`]: PT-symmetry residuals, anomaly integrals, topological
//!   charge.
//! - [`collision`]: the reference kink collision setup and refinement checks.
//! - [`io`]: the CSV formats shared with the command-line front-end and the
//!   plotting scripts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collision;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod field;
pub mod io;
pub mod lax;
pub mod potentials;
pub mod scattering;
pub mod solutions;

pub use error::{Error, Result};
pub use evolve::{FieldState, Grid1D, Trajectory};
pub use lax::{ContourRect, Matrix2, SpectralParam};
pub use num_complex::Complex64;
pub use potentials::{PotentialSpec, VacuumInfo};
pub use scattering::SpectralCurve;
