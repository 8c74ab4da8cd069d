//! Spectra of the quasi-Laplacian `Δ_g` and the drifted Laplacian `Δ_h` on ℝ^m.
//!
//! Both operators separate in spherical coordinates. Each angular degree `k`
//! gives a weighted radial Sturm–Liouville problem that is discretized by a
//! flux-form finite-volume scheme and solved with a symmetric tridiagonal
//! eigensolver.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod measure;
pub mod modes;
pub mod oracles;
pub mod quadrature;
pub mod solver;
pub mod tridiag;

pub use error::{Error, Result};
pub use measure::{build_grid, RadialGrid, Weight, WeightSystem, WeightedFunction};
pub use modes::{build_mode_problem, BoundaryCondition, ModeProblem, OperatorKind};
pub use solver::{assemble, solve_eigen, solve_poisson, DiscreteOperator, SpectralResult};
