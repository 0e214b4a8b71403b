//! Numerical laboratory for pattern formation in a pair of urban-crime
//! reaction-advection-diffusion models with attractiveness-dependent
//! (near-repeat victimization) diffusion.
//!
//! The two model variants share the criminal-density equation
//! `rho_t = div(grad rho - 2 rho grad log f(A)) - lambda0 rho A + lambda0 Bbar`
//! and differ in the attractiveness flux:
//!
//! * **Departure**: `A_t = eps Laplacian(eta(A) (A - A0)) + reactions`,
//! * **Arrival**:   `A_t = eps div(eta^2(A) grad((A - A0)/eta(A))) + reactions`,
//!
//! both with homogeneous Neumann boundaries on an interval `(0, L)` or a
//! square `(0, L)^2`.
//!
//! The crates' pieces mirror the analysis pipeline:
//!
//! * [`kinetics`]: model parameters, the nonlinear function pack
//!   `(eta, f)` with derivatives, homogeneous steady state.
//! * [`spectral`]: Neumann Laplacian eigenmodes on intervals and squares
//!   with closed-form self-integrals.
//! * [`linstab`]: instability thresholds `eps_bar_k`, wavemode selection
//!   and bifurcation applicability conditions.
//! * [`branch`]: weakly-nonlinear branch coefficients `K1`/`K2` and the
//!   stability verdict for bifurcating patterns.
//! * [`solver`]: conservative finite-volume / RK4 method-of-lines
//!   integrator with steady-state detection.
//! * [`pattern`]: mode spectra, spike counting and amplitude-scaling fits
//!   of simulation output.

pub mod branch;
pub mod error;
mod exec;
pub mod kinetics;
pub mod linalg;
pub mod linstab;
pub mod pattern;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use kinetics::{builtin_kinetics, KineticsPack, ModelParams, Variant};
pub use linstab::{bifurcation_value, select_wavemode, BifurcationPoint};
pub use solver::{FieldPair, Mesh, Outcome, SolveConfig};
pub use spectral::{DomainSpec, EigenMode, ModeIndex};
