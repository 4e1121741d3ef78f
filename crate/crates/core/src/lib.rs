//! Radial EPDiff equations in Lagrangian form.
//!
//! The crate evaluates the Green kernels of the four radial inertia operators
//! `(σ − Δ)^k` (σ ∈ {0, 1}, k ∈ {1, 2}), integrates the particle-trajectory
//! ODE for the flow `γ(t, r)` and its radial Jacobian `ρ = γ_r`, and checks the
//! hypotheses of the Liouville comparison argument that forces `ρ` to vanish in
//! finite time when the initial momentum is nonpositive.
//!
//! Layers, bottom-up:
//!
//! * [`bessel`]: the normalized modified Bessel functions `α_p`, `β_p`.
//! * [`kernel`]: Green kernels, the weight `Q`, the criterion function `S`,
//!   and grid-level inversion/application of the operator.
//! * [`liouville`] and [`hunter_saxton`]: closed-form solutions used as oracles.
//! * [`solver`]: RK4 integration of the particle system.
//! * [`certify`]: numerical verification of the kernel conditions and the
//!   comparison majorant.
//! * [`scenario`]: configuration files, initial-data families and run output.

pub mod bessel;
pub mod certify;
mod error;
pub mod grid;
pub mod hunter_saxton;
pub mod interp;
pub mod kernel;
pub mod liouville;
pub mod quadrature;
pub mod scenario;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{RadialGrid, Spacing};
pub use kernel::{KernelPoint, KernelSpec};
