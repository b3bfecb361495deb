//! Entanglement dynamics of two static two-level atoms near a perfectly
//! reflecting plane.
//!
//! The crate evaluates the mirror-modified dissipative and coherent
//! coefficients ([`coefficients`]), integrates the X-block master equation
//! ([`dynamics`]), measures concurrence ([`entanglement`]), and derives peak
//! and survival observables over geometry sweeps ([`analysis`]). The
//! [`oracle`] module re-derives the same evolution in the full 16-dimensional
//! Liouville space for verification.

pub mod analysis;
pub mod coefficients;
pub mod dynamics;
pub mod entanglement;
mod error;
pub mod exec;
pub mod oracle;

pub use analysis::{
    max_concurrence, peak_concurrence, summarize, survival_time, sweep, MaxConcurrence, Scenario,
    SurvivalReport, SurvivalTime, SweepError, SweepOptions, SweepResult, TrajectorySummary,
    SCENARIOS,
};
pub use coefficients::{
    compute_coefficients, compute_raw_coefficients, Coefficients, GeometryParams,
};
pub use dynamics::{initial_state, integrate, rhs, InitialState, Sample, Trajectory, XState};
pub use entanglement::{concurrence, ConcurrenceSample};
pub use error::{Error, Result};
pub use exec::Execution;
