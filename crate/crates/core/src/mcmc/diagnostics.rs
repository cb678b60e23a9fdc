use crate::error::{Error, Result};

/// Mixing summary of a scalar chain functional.
#[derive(Clone, Copy, Debug)]
pub struct ChainDiagnostics {
    /// Integrated autocorrelation time `tau = sum_{t>=1} rho_t`.
    pub tau: f64,
    /// Effective sample size `N / (2 tau + 1)`.
    pub ess: f64,
}

/// Integrated autocorrelation time by the initial-positive-sequence
/// estimator: autocorrelations are summed in lag pairs until a pair sum goes
/// non-positive. A (numerically) constant stream is reported with `tau`
/// capped at `N/2`, i.e. ESS near 1.
pub fn chain_diagnostics(values: &[f64]) -> Result<ChainDiagnostics> {
    let n = values.len();
    if n < 100 {
        return Err(Error::invalid(format!(
            "need at least 100 snapshots, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    if var <= 1e-24 * scale * scale {
        let tau = nf / 2.0;
        return Ok(ChainDiagnostics {
            tau,
            ess: nf / (2.0 * tau + 1.0),
        });
    }
    let rho = |lag: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..n - lag {
            s += (values[i] - mean) * (values[i + lag] - mean);
        }
        s / nf / var
    };
    let mut tau = 0.0;
    let mut lag = 1;
    while lag + 1 < n / 2 {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += pair;
        lag += 2;
    }
    let tau = tau.min(nf / 2.0);
    Ok(ChainDiagnostics {
        tau,
        ess: nf / (2.0 * tau + 1.0),
    })
}
