//! Linear, positivity-preserving and asymptotic-preserving discrete-ordinates
//! solver for the one-group radiation transport equation on continuous P1
//! finite elements.
//!
//! The crate is organised bottom-up:
//!
//! - [`angular`]: discrete-ordinate quadratures (slab Gauss–Legendre and
//!   triangular `S_N`).
//! - [`mesh`]: 1D/2D simplicial meshes and the P1 geometric operators
//!   (`m_i`, `c_ij`, diffusion coefficients, boundary normals).
//! - [`problem`]: cross sections, sources, inflow data and nodal evaluation.
//! - [`assembly`]: Galerkin, graph-viscosity and asymptotic-preserving
//!   systems, plus the discrete diffusion-limit system.
//! - [`solver`]: sparse direct LU and scattering-source iteration.
//! - [`analysis`]: scalar flux, current, error norms, bound checks.
//! - [`cases`]: the benchmark problems and convergence sweeps.

// `!(x > 0.0)` rejects NaN on purpose; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod angular;
pub mod assembly;
pub mod cases;
pub mod config;
mod error;
pub mod geometry;
pub mod mesh;
pub mod output;
pub mod problem;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use geometry::Vec3;
