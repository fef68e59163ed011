//! Shooting solvers for equivariant self-similar wave maps.
//!
//! Self-similar maps `u(t, r) = f(r / (T - t))` from `(m+1)`-dimensional
//! Minkowski space into `S^m` reduce to a singular boundary value problem for
//! the profile `f` on `rho in [0, 1]` with `f(0) = 0` and `f(1) = pi/2`.
//! This crate finds the countable family of such profiles `f_n`, where `n`
//! counts the crossings of `f_n` with the equator `f = pi/2`.
//!
//! The pipeline:
//!
//! * [`equations`] holds the profile equation in the light-cone coordinate `x`
//!   (`rho = sech x`, `h = f - pi/2`) and in `rho`, the Frobenius launch data
//!   at both singular endpoints and the monotone functional `W`.
//! * [`trajectory`] integrates those equations with an adaptive Dormand–Prince
//!   pair, keeps quintic Hermite dense output and logs equator crossings,
//!   extrema and escapes.
//! * [`shooting`] classifies orbits by their fate, brackets and bisects the
//!   shooting parameters `beta_n`, then polishes each profile by two-sided
//!   shooting to a fitting point.
//! * [`observables`] evaluates energies, the energy-ratio law, the limiting
//!   linear solution `H` and the admissibility condition on `(m, l)`.
//! * [`stability`] solves the linearized eigenvalue problem around `f_n` with a
//!   Prüfer-angle shooting method and checks the gauge mode.

pub mod equations;
pub mod error;
pub mod integrator;
pub mod observables;
pub mod params;
pub mod quadrature;
pub mod shooting;
pub mod stability;
pub mod trajectory;

pub use error::{Error, Result};
pub use params::{EquationParams, PhaseState};
pub use shooting::{ConnectingOrbit, OrbitClass, ShooterConfig};
pub use trajectory::{Coordinate, IntegratorConfig, Trajectory};
