//! Numerical laboratory for the one-dimensional Lagrangian gas-liquid
//! drift-flux model with gravity, quadratic friction and a degenerate,
//! density-dependent viscosity that vanishes at a vacuum boundary.
//!
//! The crate simulates the transformed system
//!
//! ```text
//! c_t = 0
//! Q_t + rho_l Q^2 u_x = 0
//! u_t + A (cQ)^gamma_x = -h(Q) u|u| + g + (B c^theta Q^(1+theta) u_x)_x
//! ```
//!
//! on the mass interval `[0, 1]` with `cQ(0, t) = 0` and `u(1, t) = 0`,
//! evaluates the a priori functionals along trajectories and measures the
//! algebraic decay towards the hydrostatic profile `(g x / A)^(1/gamma)`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod config;
pub mod diagnostics;
pub mod grid;
pub mod integrator;
pub mod model;
pub mod oracles;
pub mod output;
mod pow;
pub mod simulation;
pub mod sweep;
pub mod tridiag;

pub use grid::MassGrid;
pub use model::{ModelParams, StationaryProfile, TransformedState};
