//! Ground states of the rotating Gross-Pitaevskii energy functional via
//! projected Sobolev gradient flows.
//!
//! The energy of a wave function `u` on a bounded 2D domain with Dirichlet
//! boundary is
//!
//! ```text
//! E(u) = ∫ 1/2 |∇u|^2 + 1/2 V |u|^2 + β/4 |u|^4 - Ω/2 conj(u) Lz u
//! ```
//!
//! minimized over the unit L2 sphere. Three descent schemes are provided,
//! differing in the inner product used to represent the gradient:
//!
//! * `H01` — the kinetic form, Riesz map `(-Δ)^{-1}`;
//! * `A0`  — the linear part, Riesz map `(-Δ + V - Ω Lz)^{-1}`;
//! * `Au`  — the density-shifted form, `(-Δ + V + β|u|^2 - Ω Lz)^{-1}`.
//!
//! Each iteration projects the gradient onto the tangent space of the
//! sphere, takes an explicit Euler step, and renormalizes. See the `flow`
//! module for the driver and the `quotient` module for the phase-invariant
//! error metrics used to measure convergence.

pub mod energy;
pub mod error;
pub mod flow;
pub mod grid;
pub mod linsolve;
pub mod operators;
mod par;
pub mod quotient;
pub mod testutil;

pub use energy::{energy, EnergyBreakdown};
pub use error::{GpError, Result};
pub use flow::{run_flow, FlowConfig, Scheme, SolveReport, StepPolicy};
pub use grid::{l2_inner, load_field, mass, retract, save_field, Field, Grid};
pub use operators::{check_admissibility, Admissibility, MetricKind, MetricOp, Params};
pub use quotient::{align_phase, estimate_rate, rho_pair, AlignedError};
