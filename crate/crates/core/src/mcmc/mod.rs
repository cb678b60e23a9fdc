//! Continuous-time Metropolis dynamics on discretized random-walk bridges,
//! the shared-uniform monotone coupling, and an importance-sampling oracle.
//!
//! Clocks are simulated by their embedded jump chain: each event draws a
//! uniform (site, line, direction) triple plus an acceptance uniform. A single
//! chain is strictly sequential; parallelism belongs to independent replicas.

mod chain;
mod diagnostics;
mod importance;
mod walk;

pub use chain::{run_chain, run_chain_fold, ChainConfig, ChainRun, WeightMode};
pub use diagnostics::{chain_diagnostics, ChainDiagnostics};
pub use importance::importance_expectation;
pub use walk::{
    acceptance_log_ratio, coupled_step, init_lowest_configuration, metropolis_step, ClockEvent,
    WalkState,
};
