//! Numerical solver for a kinetic equation of particles on a line that
//! coalesce in pairs and jump, optionally with density-dependent repulsion.
//!
//! The crate is organised bottom-up: [`kernels`] defines interaction
//! kernels, [`field`] the grid and density field, [`operators`] the
//! right-hand side, [`integrator`] time stepping with domain enlargement,
//! [`diagnostics`] observables, [`scenarios`] configuration and the
//! built-in registry, and [`montecarlo`] a particle-level reference
//! simulator. [`acceptance`] holds the numbered acceptance criteria shared
//! by the command-line `check` command and the test suite.

pub mod acceptance;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod integrator;
pub mod kernels;
pub mod montecarlo;
pub mod operators;
pub mod scenarios;

/// Version of this crate.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use acceptance::{CheckOptions, CriterionResult, Suite};
pub use diagnostics::{DiagnosticsRecord, DiagnosticsRow, Heterogeneity};
pub use error::{Error, Result};
pub use field::{BoundaryKind, BoundaryRegime, DensityField, Grid, Side};
pub use integrator::{
    run, run_with, EnlargePolicy, EnlargementEvent, RunOutput, SimState, Snapshot, TimeConfig,
};
pub use kernels::{Kernel, KernelShape};
pub use operators::{
    Coalescence, CoalescenceForm, Jumps, KineticOperator, ModelConfig, Placement,
};
pub use scenarios::{build_initial, registry, InitialCondition, Scenario, ScenarioFile};
