//! Simulation, basin analysis, strategy synthesis and time-optimal control
//! for a two-population conflict model
//!
//! ```text
//! u' = u (1 - u - v) - a c u
//! v' = rho v (1 - u - v) - a u
//! ```
//!
//! where `a(t) >= 0` is the aggressiveness of the first population.

pub mod emit;
pub mod equilibria;
pub mod error;
pub mod integrator;
pub mod model;
pub mod ode;
pub mod optimal;
pub mod separatrix;
pub mod sweep;
pub mod synth;
pub mod victory;

pub use error::{Error, Result};
pub use integrator::{simulate, stopping_time, Outcome, SimOptions, Trajectory};
pub use model::{State, Strategy, StructParams};
pub use optimal::{minimize_time, OptimalOptions, OptimalResult};
pub use separatrix::{trace_gamma, BasinClass, SeparatrixCurve, TraceOptions};
pub use sweep::{basin_grid, BasinGrid, Cell, GridSpec};
pub use synth::{synthesize, SynthOptions, SynthResult, Synthesis};
pub use victory::in_victory_set;
