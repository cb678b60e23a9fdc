use crate::ensemble::{BoundaryData, Grid, HamiltonianSpec, LineEnsembleState};
use crate::error::{Error, Result};
use crate::mcmc::walk::{init_lowest_configuration, metropolis_step, ClockEvent, WalkState};
use crate::seeding::rng_from_seed;

/// Which quadrature defines the target weight: the mesh-point sum (exactly
/// local, three affected terms per flip) or the closed-form integral of the
/// linear interpolant over the two adjacent cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    DiscreteSum,
    CellIntegral,
}

impl WeightMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "discrete_sum" => Ok(WeightMode::DiscreteSum),
            "cell_integral" => Ok(WeightMode::CellIntegral),
            other => Err(Error::invalid(format!(
                "unknown weight_mode '{other}' (expected discrete_sum or cell_integral)"
            ))),
        }
    }
}

/// Full specification of one Metropolis chain.
#[derive(Clone, Debug)]
pub struct ChainConfig {
    pub n_scale: u32,
    pub a: f64,
    pub b: f64,
    pub boundary: BoundaryData,
    pub ham: HamiltonianSpec,
    pub event_budget: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub seed: u64,
    pub weight_mode: WeightMode,
}

impl ChainConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_scale: u32,
        a: f64,
        b: f64,
        boundary: BoundaryData,
        ham: HamiltonianSpec,
        event_budget: u64,
        burn_in: u64,
        thin: u64,
        seed: u64,
    ) -> Result<Self> {
        let config = ChainConfig {
            n_scale,
            a,
            b,
            boundary,
            ham,
            event_budget,
            burn_in,
            thin,
            seed,
            weight_mode: WeightMode::DiscreteSum,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_scale == 0 {
            return Err(Error::invalid("n_scale must be positive"));
        }
        if !(self.a < self.b) {
            return Err(Error::invalid("window requires a < b"));
        }
        if self.event_budget < self.burn_in {
            return Err(Error::invalid("event_budget must be >= burn_in"));
        }
        if self.thin == 0 {
            return Err(Error::invalid("thin must be >= 1"));
        }
        self.grid()?;
        Ok(())
    }

    /// Temporal mesh of the window: `(b - a) * n_scale^2` cells of width
    /// `n_scale^{-2}`. The cell count must be an even integer (>= 2) so that
    /// even-lattice endpoints are reachable.
    pub fn grid(&self) -> Result<Grid> {
        let n = self.n_scale as f64;
        let cells_f = (self.b - self.a) * n * n;
        let cells = cells_f.round();
        if (cells_f - cells).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "window length {} is not a whole number of n^-2 cells",
                self.b - self.a
            )));
        }
        let cells = cells as usize;
        if cells < 2 || cells % 2 != 0 {
            return Err(Error::invalid(format!(
                "cell count {cells} must be even and >= 2"
            )));
        }
        Grid::new(self.a, self.b, cells)
    }
}

/// Output of one chain: the thinned post-burn-in snapshots plus bookkeeping.
pub struct ChainRun {
    pub samples: Vec<LineEnsembleState>,
    pub accepted: u64,
    pub total: u64,
    pub rounding_offset: f64,
    pub final_state: WalkState,
}

/// Run the chain, calling `visit` on the state after every post-burn-in
/// event at thinning stride `thin`. Deterministic given the seed.
pub fn run_chain_fold<F: FnMut(&WalkState)>(
    config: &ChainConfig,
    mut visit: F,
) -> Result<ChainRun> {
    config.validate()?;
    let mut state = init_lowest_configuration(config)?;
    let mut rng = rng_from_seed(config.seed);
    let cells = state.cells();
    let k = state.k();
    let mut accepted = 0u64;
    for event_idx in 0..config.event_budget {
        let event = ClockEvent::draw(&mut rng, cells, k);
        if metropolis_step(&mut state, &event, config) {
            accepted += 1;
        }
        if event_idx >= config.burn_in && (event_idx - config.burn_in) % config.thin == 0 {
            visit(&state);
        }
    }
    Ok(ChainRun {
        samples: Vec::new(),
        accepted,
        total: config.event_budget,
        rounding_offset: state.rounding_offset(),
        final_state: state,
    })
}

/// Run the chain and collect the thinned snapshots as real-unit ensemble
/// states.
pub fn run_chain(config: &ChainConfig) -> Result<ChainRun> {
    let mut samples = Vec::new();
    let mut convert_err = None;
    let mut run = run_chain_fold(config, |walk| {
        if convert_err.is_some() {
            return;
        }
        match walk.to_ensemble_state() {
            Ok(s) => samples.push(s),
            Err(e) => convert_err = Some(e),
        }
    })?;
    if let Some(e) = convert_err {
        return Err(e);
    }
    run.samples = samples;
    Ok(run)
}
