//! Mechanistic spin-1/2 measurement model ("quantum machine") and its
//! rigid-rod two-sphere extension, together with a standard Hilbert-space
//! calculator that serves as an independent check on every mechanistic
//! probability.
//!
//! The crate is organised bottom-up:
//!
//! - [`bloch`]: points of the unit ball, antipodal decompositions and the
//!   ball ↔ 2×2 density operator correspondence.
//! - [`hilbert`]: trace rule, projectors, tensor products, partial trace,
//!   Schmidt rank and the closed-form 2×2 Hermitian exponential.
//! - [`machine`]: the elastic break-point measurement, analytic and sampled.
//! - [`compound`]: two spheres joined by a rigid rod, singlet statistics,
//!   product baseline and CHSH.
//! - [`dynamics`]: mixture lift versus pure lift under linear and
//!   nonlinear evolutions.
//! - [`rng`]: the counter-based random stream used by every sampler.

pub mod bloch;
pub mod compound;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod machine;
pub mod rng;

pub use bloch::{BallState, Decomposition, DensityMatrix, Direction};
pub use compound::{ChshSetting, EmpiricalJoint, JointDistribution, RodRule, RodState};
pub use dynamics::{EvolutionKind, EvolutionSpec, LiftTrajectory, MixtureRule};
pub use error::{Error, Result};
pub use hilbert::{ComplexMatrix, StateVector4};
pub use machine::{EmpiricalDistribution, MeasurementRecord, Outcome};
pub use rng::RandomStream;

/// Tolerance for identities that hold in exact algebra.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for results that pass through an eigensolve or exponential.
pub const SOLVE_TOL: f64 = 1e-10;
/// Largest norm overshoot that is clamped back onto the unit sphere.
pub const CLAMP_TOL: f64 = 1e-9;
