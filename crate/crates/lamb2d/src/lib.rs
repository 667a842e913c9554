//! Transient elastodynamics of a two-dimensional half-plane.
//!
//! This crate computes the displacement field `(u, v)` of a homogeneous
//! isotropic elastic half-plane `y >= 0` (unit density, Lamé moduli λ, μ)
//! driven by surface tractions and arbitrary initial data, by direct
//! numerical evaluation of a contour-integral solution representation.
//! Alongside the main solver it ships two independent cross-checks — a
//! finite-difference time-domain scheme and a Laplace-domain route with a
//! Volterra integral-equation fallback — plus utilities for locating the
//! zeros of the spectral determinants and the Rayleigh pole.
//!
//! Entry points:
//! - [`solver::SolverSession`] — field and trace evaluation,
//! - [`fdtd`] — the independent time-stepping oracle,
//! - [`laplace`] — surface traces via Laplace inversion or Volterra march,
//! - [`spectral::delta_zeros`] — determinant zero sets,
//! - [`config::RunConfig`] + [`cli`] — the command-line front end.

pub mod cli;
pub mod config;
pub mod contour;
pub mod error;
pub mod fdtd;
pub mod io;
pub mod laplace;
pub mod material;
pub mod quad;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod transforms;

pub use error::{Error, Result};
pub use material::Material;
