//! Monte Carlo laboratory for **H**-Brownian Gibbs line ensembles.
//!
//! A line ensemble is a family of continuous random paths `L_1, ..., L_k` on a
//! common interval. The measures studied here tilt independent Brownian
//! bridges by a Boltzmann weight `exp(-sum_i int H(L_{i+1} - L_i))` built from
//! a convex interaction Hamiltonian `H`. The crate provides:
//!
//! * exact domain types and Boltzmann-weight evaluation ([`ensemble`]),
//! * exact Brownian-bridge sampling and tube-probability oracles ([`bridge`]),
//! * coupled Metropolis dynamics on random-walk bridges plus an
//!   importance-sampling oracle ([`mcmc`]),
//! * the stationary Toda profile, the Phi-weighted shifted ensemble, and the
//!   translated-measure identities ([`toda`]),
//! * numerical verification engines for the integration-by-parts and
//!   exponential-gap-moment identities and tail functionals ([`identities`]),
//! * small-N O'Connell-Yor polymer partition functions ([`polymer`]).
//!
//! Everything is deterministic given a seed; replicas parallelize by seed
//! splitting (see [`seeding`]).

pub mod bridge;
pub mod ensemble;
pub mod error;
pub mod identities;
pub mod mcmc;
pub(crate) mod numeric;
pub mod polymer;
pub mod report;
pub mod seeding;
pub mod toda;

pub use error::{Error, Result};
pub use report::EstimateReport;
