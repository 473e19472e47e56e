//! Numerical laboratory for nonlinear anisotropic singularly perturbed
//! elliptic problems on cylinders `Ω = ω₁ × ω₂`.
//!
//! The crate solves
//!
//! ```text
//! ∫ A_ε ∇u·∇φ + β ∫ u φ = ∫ B(u) φ,   u ∈ H¹₀(Ω),
//! A_ε = [[ε² A₁₁, ε A₁₂], [ε A₂₁, A₂₂]]
//! ```
//!
//! with Q1 finite elements on tensor grids and a Picard iteration, solves the
//! dimension-reduced limit problem slice by slice, and measures the estimates
//! that govern the singular limit `ε → 0`.
//!
//! Module map:
//!
//! * [`grid`]: tensor grids, nodal fields, quadrature norms.
//! * [`coefficients`]: the coefficient matrix, its ε-scaling, ellipticity.
//! * [`nonlinear_ops`]: the nonlocal operators `B` and their constants.
//! * [`assembly`]: Q1 systems for the ε-problem, limit slices and resolvent.
//! * [`solver`]: CG, Picard iterations, auxiliary solves.
//! * [`studies`]: ε-sweeps, rate fits, interior/truncation/resolvent studies.
//! * [`cli`]: the batch front-end behind the `anisolab` binary.

pub mod assembly;
pub mod cli;
pub mod coefficients;
pub mod error;
pub mod grid;
pub mod nonlinear_ops;
pub mod quadrature;
pub mod solver;
pub mod studies;

pub use error::{Error, Result};
