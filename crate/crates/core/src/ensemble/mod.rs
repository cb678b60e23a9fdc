//! Domain types and Boltzmann weights for line ensembles.
//!
//! The continuum weight of a configuration `h = (h_{k1}, ..., h_{k2})` with
//! upper boundary `f` and lower boundary `g` is
//! `W(h) = exp(-sum_{i=k1-1}^{k2} int_a^b H_i(h_{i+1}(s) - h_i(s)) ds)`
//! with `h_{k1-1} = f` and `h_{k2+1} = g`. The discretized weight replaces
//! each integral by `delta * sum_{j=1}^{m}` over mesh points, excluding the
//! left endpoint.

mod boundary;
mod grid;
mod hamiltonian;
mod state;
mod weight;

pub use boundary::{BoundaryCurve, BoundaryData};
pub use grid::{make_grid, Grid};
pub use hamiltonian::{phi, HamiltonianKind, HamiltonianSpec};
pub use state::LineEnsembleState;
pub use weight::{hamiltonian_derivative, log_weight_continuum, log_weight_discrete};
