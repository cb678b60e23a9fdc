//! Finite-window surrogate ensemble: `n` lines pinned at the stationary
//! parabola values at the window ends, above a parabolic lower wall, with
//! the exponential interaction.

use gibbs_lines_core::ensemble::{BoundaryCurve, BoundaryData, HamiltonianSpec};
use gibbs_lines_core::mcmc::ChainConfig;
use gibbs_lines_core::toda::TodaProfile;
use gibbs_lines_core::Result;

pub struct SurrogateSpec {
    pub n: usize,
    pub t: f64,
    pub half_width: f64,
    pub n_scale: u32,
    pub event_budget: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub seed: u64,
}

pub fn surrogate_chain(spec: &SurrogateSpec) -> Result<(ChainConfig, TodaProfile)> {
    let profile = TodaProfile::new(spec.n, spec.t)?;
    let big_t = spec.half_width;
    let ends: Vec<f64> = (1..=spec.n).map(|i| profile.f(i, big_t)).collect();
    let boundary = BoundaryData::new(
        1,
        spec.n,
        ends.clone(),
        ends,
        BoundaryCurve::absent(),
        BoundaryCurve::parabola(spec.t, profile.levels[spec.n]),
    )?;
    let config = ChainConfig::new(
        spec.n_scale,
        -big_t,
        big_t,
        boundary,
        HamiltonianSpec::exponential(),
        spec.event_budget,
        spec.burn_in,
        spec.thin,
        spec.seed,
    )?;
    Ok((config, profile))
}
