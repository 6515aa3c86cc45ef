//! Deterministic P_N solver toolkit for the steady radiative transfer
//! equation.
//!
//! The pipeline is symbolic up to the sparse system: [`pn`] builds the real
//! P_N moment equations as [`cas::Expr`] trees, [`stencil`] places the
//! coefficients on staggered grids and compiles each equation into a
//! [`stencil::StencilProgram`], and [`solver`] executes that program over a
//! voxel grid, solves the normal equations with conjugate gradients and
//! un-staggers the result. [`problems`] holds the benchmark setups and the
//! Monte Carlo reference.

pub mod cas;
pub mod pn;
pub mod problems;
pub mod sh;
pub mod solver;
pub mod stencil;

pub use sh::ShIndex;
