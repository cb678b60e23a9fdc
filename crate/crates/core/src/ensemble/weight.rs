use crate::ensemble::{HamiltonianSpec, LineEnsembleState};
use crate::error::Result;

/// Log of the discretized Boltzmann weight:
/// `-delta * sum_{i=k1-1}^{k2} sum_{j=1}^{m} H_i(gap_i(t_j))`.
///
/// The `j`-sum excludes the left endpoint `t_0` and includes `t_m`; this is a
/// bit-exact contract relied on by the Metropolis acceptance ratio.
/// Interfaces with an absent boundary contribute zero. May return `-inf`
/// (hard wall).
pub fn log_weight_discrete(state: &LineEnsembleState, ham: &HamiltonianSpec) -> f64 {
    let delta = state.grid().delta();
    let cols = state.grid().len();
    let mut energy = 0.0;
    for iface in 0..=state.k() {
        for col in 1..cols {
            energy += ham.value(iface, state.gap(iface, col));
            if energy.is_infinite() {
                return f64::NEG_INFINITY;
            }
        }
    }
    -delta * energy
}

/// Log of the continuum Boltzmann weight evaluated on the piecewise-linear
/// interpolant of each gap: each cell integral uses the exact closed form for
/// the exponential-family Hamiltonians.
pub fn log_weight_continuum(state: &LineEnsembleState, ham: &HamiltonianSpec) -> f64 {
    let delta = state.grid().delta();
    let cols = state.grid().len();
    let mut energy = 0.0;
    for iface in 0..=state.k() {
        // An absent boundary makes every gap -inf; skip the interface.
        if state.gap(iface, 0) == f64::NEG_INFINITY {
            continue;
        }
        for col in 0..cols - 1 {
            let v1 = state.gap(iface, col);
            let v2 = state.gap(iface, col + 1);
            energy += ham.cell_integral(iface, v1, v2, delta);
            if energy.is_infinite() {
                return f64::NEG_INFINITY;
            }
        }
    }
    -energy
}

/// Exact derivative `H_i'(x)`; errors for the hard wall.
pub fn hamiltonian_derivative(ham: &HamiltonianSpec, interface: usize, x: f64) -> Result<f64> {
    ham.derivative(interface, x)
}
