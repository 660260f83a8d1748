//! Entropy-conservative and entropy-stable modal discontinuous Galerkin
//! discretizations of the compressible Euler equations on affine and
//! curvilinear triangular/tetrahedral meshes.
//!
//! The building blocks:
//! - [`refelem`]: reference simplices, orthonormal bases, nodes, quadrature
//! - [`operators`]: reference mass/projection/lift/differentiation matrices
//!   and decoupled summation-by-parts operators
//! - [`geometry`]: meshes, curvilinear warps, metric terms satisfying a
//!   discrete geometric conservation law
//! - [`wadg`]: weighted and weight-adjusted mass operators with local
//!   conservation fixes
//! - [`euler`]: Euler physics, entropy variables, entropy-conservative fluxes
//! - [`solver`]: flux-differencing right-hand side, LSRK time stepping,
//!   diagnostics
//! - [`config`] / [`presets`] / [`studies`] / [`report`]: experiment runner

pub mod config;
pub mod error;
pub mod euler;
pub mod geometry;
pub mod operators;
pub mod presets;
pub mod refelem;
pub mod report;
pub mod solver;
pub mod studies;
pub mod wadg;

pub use error::{Error, Result};

/// A point in reference or physical coordinates; the third entry is 0 in 2D.
pub type Point = [f64; 3];
