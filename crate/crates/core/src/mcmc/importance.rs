use crate::bridge::sample_free_bridges_with;
use crate::ensemble::{
    log_weight_discrete, BoundaryData, Grid, HamiltonianSpec, LineEnsembleState,
};
use crate::error::{Error, Result};
use crate::report::EstimateReport;
use crate::seeding::rng_from_seed;

/// Self-normalized importance sampling from the free bridge measure with the
/// discretized Boltzmann weight: the MCMC-independent oracle for
/// expectations under the tilted law.
///
/// Returns `sum f(B_j) W_j / sum W_j` with the delta-method standard error;
/// provenance carries `log_z` (log of `mean W`) and the weight-based
/// effective sample size.
pub fn importance_expectation<F: Fn(&LineEnsembleState) -> f64>(
    boundary: &BoundaryData,
    ham: &HamiltonianSpec,
    grid: &Grid,
    f: F,
    n_samples: u64,
    seed: u64,
) -> Result<EstimateReport> {
    if n_samples < 2 {
        return Err(Error::invalid("importance sampling needs n_samples >= 2"));
    }
    let mut rng = rng_from_seed(seed);
    let n = n_samples as usize;
    let mut log_w = Vec::with_capacity(n);
    let mut f_vals = Vec::with_capacity(n);
    for _ in 0..n {
        let state = sample_free_bridges_with(boundary, grid, &mut rng)?;
        log_w.push(log_weight_discrete(&state, ham));
        f_vals.push(f(&state));
    }
    let max_lw = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max_lw == f64::NEG_INFINITY {
        return Err(Error::DegenerateEstimate(
            "all importance weights are zero".into(),
        ));
    }
    let w: Vec<f64> = log_w.iter().map(|lw| (lw - max_lw).exp()).collect();
    let w_sum: f64 = w.iter().sum();
    let value: f64 = w.iter().zip(&f_vals).map(|(w, f)| w * f).sum::<f64>() / w_sum;
    // delta-method variance of the self-normalized ratio
    let var: f64 = w
        .iter()
        .zip(&f_vals)
        .map(|(w, f)| {
            let nw = w / w_sum;
            nw * nw * (f - value) * (f - value)
        })
        .sum();
    let w2_sum: f64 = w.iter().map(|w| w * w).sum();
    let ess = w_sum * w_sum / w2_sum;
    let log_z = max_lw + (w_sum / n as f64).ln();
    Ok(
        EstimateReport::new("importance_expectation", value, var.sqrt(), n_samples)
            .with_effective(ess)
            .with_provenance("log_z", log_z)
            .with_provenance("seed", seed),
    )
}
