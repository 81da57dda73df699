//! Numerical machinery for a sharp constant of a fourth-order integral
//! inequality on the real line.
//!
//! The crate integrates the Euler-Lagrange system of the associated
//! Rayleigh quotient with running quadrature accumulators, shoots for the
//! first critical point of half-wave launches, evaluates the quotient on
//! trajectories and on sampled functions, solves for the multiplier at
//! which the shooting scheme closes, and runs independent verification
//! oracles (integral identities, first-integral conservation, an explicit
//! compact-support quotient construction, and a period lower bound).

mod rk;

pub mod functionals;
pub mod ode;
pub mod oracles;
pub mod shooting;

pub use functionals::{FunctionalBreakdown, FunctionalError, SampledFunction};
pub use ode::{
    AugmentedState, FirstCritical, IntegratorConfig, OdeError, PhaseState, Termination,
    Trajectory,
};
pub use oracles::{Check, OracleError, OracleReport};
pub use shooting::{
    InfimumResult, MinimizerProfile, ProfileRow, ShootError, ShotResult, ShotStatus, SweepRow,
};
