use crate::ensemble::{BoundaryData, Grid, HamiltonianSpec, LineEnsembleState};
use crate::error::{Error, Result};
use crate::mcmc::chain::{ChainConfig, WeightMode};
use rand::Rng;

/// A configuration of `k` random-walk bridges on the temporal mesh
/// `n_scale^{-2} Z` with heights on the spatial lattice `n_scale^{-1} Z`.
///
/// Heights are stored as integers in units of `1/n_scale`, full columns
/// including the pinned endpoints; every temporal increment is exactly one
/// step, so corner flips move a height by two steps (`2/n_scale` in real
/// units). Endpoints live on the even sublattice `n_scale^{-1}(2Z)`, which
/// together with the even cell count keeps the parity constraint satisfiable.
#[derive(Clone, Debug)]
pub struct WalkState {
    n_scale: u32,
    grid: Grid,
    /// k rows, `cells + 1` columns, in units of `1/n_scale`.
    heights: Vec<Vec<i64>>,
    boundary: BoundaryData,
    upper_samples: Option<Vec<f64>>,
    lower_samples: Option<Vec<f64>>,
    /// Largest |requested - rounded| endpoint offset, real units.
    rounding_offset: f64,
}

/// One ring of the rate-one clock system: a proposed corner flip of `line`
/// at interior mesh `site_index`, moving the height by `2 * direction` steps,
/// plus the uniform draw deciding acceptance.
#[derive(Clone, Copy, Debug)]
pub struct ClockEvent {
    pub site_index: usize,
    pub line: usize,
    pub direction: i8,
    pub u: f64,
}

impl ClockEvent {
    pub fn new(site_index: usize, line: usize, direction: i8, u: f64) -> Result<Self> {
        if direction != 1 && direction != -1 {
            return Err(Error::invalid("direction must be +1 or -1"));
        }
        if !(0.0..1.0).contains(&u) {
            return Err(Error::invalid("u must lie in [0, 1)"));
        }
        Ok(ClockEvent {
            site_index,
            line,
            direction,
            u,
        })
    }

    /// Uniform (site, line, direction, u): the embedded jump chain of the
    /// independent rate-one clocks.
    pub fn draw<R: Rng>(rng: &mut R, cells: usize, k: usize) -> Self {
        ClockEvent {
            site_index: rng.gen_range(1..cells),
            line: rng.gen_range(0..k),
            direction: if rng.gen::<bool>() { 1 } else { -1 },
            u: rng.gen::<f64>(),
        }
    }
}

impl WalkState {
    /// Build a state from explicit step-unit heights. Validates the bridge
    /// invariants: unit increments, even endpoints, endpoint parity.
    pub fn from_steps(
        n_scale: u32,
        grid: Grid,
        heights: Vec<Vec<i64>>,
        boundary: BoundaryData,
    ) -> Result<Self> {
        if n_scale == 0 {
            return Err(Error::invalid("n_scale must be positive"));
        }
        if heights.len() != boundary.k() {
            return Err(Error::invalid(format!(
                "expected {} lines, got {}",
                boundary.k(),
                heights.len()
            )));
        }
        let cols = grid.len();
        for (row, line) in heights.iter().enumerate() {
            if line.len() != cols {
                return Err(Error::invalid(format!(
                    "line {row} has {} columns, grid has {cols}",
                    line.len()
                )));
            }
            if line[0] % 2 != 0 || line[cols - 1] % 2 != 0 {
                return Err(Error::invalid(format!(
                    "line {row} endpoints must lie on the even sublattice"
                )));
            }
            for c in 0..cols - 1 {
                let d = line[c + 1] - line[c];
                if d != 1 && d != -1 {
                    return Err(Error::invalid(format!(
                        "line {row} has increment {d} at cell {c}; walks move by one step"
                    )));
                }
            }
        }
        let upper_samples = boundary.upper.sample_on(&grid);
        let lower_samples = boundary.lower.sample_on(&grid);
        Ok(WalkState {
            n_scale,
            grid,
            heights,
            boundary,
            upper_samples,
            lower_samples,
            rounding_offset: 0.0,
        })
    }

    pub fn n_scale(&self) -> u32 {
        self.n_scale
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }

    pub fn k(&self) -> usize {
        self.heights.len()
    }

    pub fn cells(&self) -> usize {
        self.grid.cells()
    }

    /// Spatial lattice step, real units.
    pub fn step(&self) -> f64 {
        1.0 / self.n_scale as f64
    }

    pub fn heights_steps(&self) -> &[Vec<i64>] {
        &self.heights
    }

    pub fn height_steps(&self, row: usize, col: usize) -> i64 {
        self.heights[row][col]
    }

    pub fn real_height(&self, row: usize, col: usize) -> f64 {
        self.heights[row][col] as f64 * self.step()
    }

    pub fn rounding_offset(&self) -> f64 {
        self.rounding_offset
    }

    /// Gap `h_{i+1} - h_i` in real units at `col`, same interface convention
    /// as [`LineEnsembleState::gap`]; `-inf` at an absent boundary.
    pub fn gap(&self, iface: usize, col: usize) -> f64 {
        let k = self.k();
        if iface == 0 {
            match &self.upper_samples {
                Some(f) => self.real_height(0, col) - f[col],
                None => f64::NEG_INFINITY,
            }
        } else if iface == k {
            match &self.lower_samples {
                Some(g) => g[col] - self.real_height(k - 1, col),
                None => f64::NEG_INFINITY,
            }
        } else {
            (self.heights[iface][col] - self.heights[iface - 1][col]) as f64 * self.step()
        }
    }

    /// Real-unit view for weight evaluation and reporting.
    pub fn to_ensemble_state(&self) -> Result<LineEnsembleState> {
        let step = self.step();
        let heights: Vec<Vec<f64>> = self
            .heights
            .iter()
            .map(|row| row.iter().map(|&h| h as f64 * step).collect())
            .collect();
        let k = self.k();
        let cols = self.grid.len();
        // Boundary endpoint vectors must match the (lattice-rounded) walk
        // endpoints bit-exactly in the real-unit view.
        let boundary = BoundaryData::new(
            self.boundary.k1,
            self.boundary.k2,
            (0..k).map(|r| heights[r][0]).collect(),
            (0..k).map(|r| heights[r][cols - 1]).collect(),
            self.boundary.upper.clone(),
            self.boundary.lower.clone(),
        )?;
        LineEnsembleState::new(self.grid.clone(), heights, boundary)
    }

    /// True when `self` lies pointwise at or below `other` (all lines, all
    /// columns) and the grids agree.
    pub fn dominated_by(&self, other: &WalkState) -> bool {
        self.n_scale == other.n_scale
            && self.k() == other.k()
            && self.grid.len() == other.grid.len()
            && self
                .heights
                .iter()
                .zip(other.heights.iter())
                .all(|(lo, hi)| lo.iter().zip(hi.iter()).all(|(a, b)| a <= b))
    }
}

fn round_to_even_lattice(value: f64, n_scale: u32) -> i64 {
    2 * (value * n_scale as f64 / 2.0).round() as i64
}

/// The pointwise-minimal admissible walk for each line: descend at maximal
/// slope, then ascend — the lower envelope `max(x - j, y - (m - j))` of the
/// bridge path set. Endpoints are rounded to the even lattice; the offset is
/// recorded on the state.
pub fn init_lowest_configuration(config: &ChainConfig) -> Result<WalkState> {
    let grid = config.grid()?;
    let m = grid.cells();
    let n = config.n_scale;
    let mut heights = Vec::with_capacity(config.boundary.k());
    let mut offset = 0.0f64;
    for row in 0..config.boundary.k() {
        let x = round_to_even_lattice(config.boundary.x_vec[row], n);
        let y = round_to_even_lattice(config.boundary.y_vec[row], n);
        offset = offset
            .max((x as f64 / n as f64 - config.boundary.x_vec[row]).abs())
            .max((y as f64 / n as f64 - config.boundary.y_vec[row]).abs());
        if (y - x - m as i64) % 2 != 0 {
            return Err(Error::invalid(
                "endpoint displacement and step count have different parity",
            ));
        }
        if (y - x).unsigned_abs() as usize > m {
            return Err(Error::invalid(
                "endpoints not reachable by unit steps over the window",
            ));
        }
        let line: Vec<i64> = (0..=m as i64)
            .map(|j| (x - j).max(y - (m as i64 - j)))
            .collect();
        heights.push(line);
    }
    let mut state = WalkState::from_steps(n, grid, heights, config.boundary.clone())?;
    state.rounding_offset = offset;
    Ok(state)
}

/// Is the corner flip of `line` at `site_index` by `2 * direction` steps
/// admissible? Exactly when both neighbors sit `direction` steps away
/// (a V-shape for an up-flip, a Λ-shape for a down-flip).
fn flip_feasible(state: &WalkState, event: &ClockEvent) -> bool {
    let col = event.site_index;
    if col == 0 || col >= state.cells() || event.line >= state.k() {
        return false;
    }
    let h = &state.heights[event.line];
    let d = event.direction as i64;
    h[col - 1] - h[col] == d && h[col + 1] - h[col] == d
}

/// Local energy of the two interfaces touching `line` around `col`, with the
/// height at `col` replaced by `h + shift` steps. `discrete_sum` charges the
/// single affected mesh term per interface; `cell_integral` charges the two
/// adjacent cells with the exact linear-interpolant integral.
fn local_energy(
    state: &WalkState,
    col: usize,
    line: usize,
    shift_steps: i64,
    ham: &HamiltonianSpec,
    mode: WeightMode,
) -> f64 {
    let delta = state.grid.delta();
    let shift = shift_steps as f64 * state.step();
    let mut energy = 0.0;
    // Interface `line` sits above the flipped walk (gap grows with it);
    // interface `line + 1` sits below (gap shrinks).
    for (iface, sign) in [(line, 1.0), (line + 1, -1.0)] {
        let mid = state.gap(iface, col);
        if mid == f64::NEG_INFINITY {
            continue;
        }
        let mid = mid + sign * shift;
        match mode {
            WeightMode::DiscreteSum => {
                energy += delta * ham.value(iface, mid);
            }
            WeightMode::CellIntegral => {
                let left = state.gap(iface, col - 1);
                let right = state.gap(iface, col + 1);
                energy += ham.cell_integral(iface, left, mid, delta)
                    + ham.cell_integral(iface, mid, right, delta);
            }
        }
        if energy == f64::INFINITY {
            return f64::INFINITY;
        }
    }
    energy
}

/// `log R` for the proposed flip: the local log-weight difference, exact
/// against a full-weight recomputation. `-inf` when the flip is infeasible
/// or lands on a hard wall.
pub fn acceptance_log_ratio(state: &WalkState, event: &ClockEvent, config: &ChainConfig) -> f64 {
    if !flip_feasible(state, event) {
        return f64::NEG_INFINITY;
    }
    let shift = 2 * event.direction as i64;
    let new_e = local_energy(
        state,
        event.site_index,
        event.line,
        shift,
        &config.ham,
        config.weight_mode,
    );
    if new_e == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    let old_e = local_energy(
        state,
        event.site_index,
        event.line,
        0,
        &config.ham,
        config.weight_mode,
    );
    if old_e == f64::INFINITY {
        // escaping an inadmissible configuration is free
        return f64::INFINITY;
    }
    old_e - new_e
}

/// Apply the flip iff `R >= u`; infeasible proposals are rejected with time
/// still advancing. Returns whether the move was accepted.
pub fn metropolis_step(state: &mut WalkState, event: &ClockEvent, config: &ChainConfig) -> bool {
    let log_r = acceptance_log_ratio(state, event, config);
    if log_r == f64::NEG_INFINITY {
        return false;
    }
    if log_r < 0.0 && event.u > log_r.exp() {
        return false;
    }
    state.heights[event.line][event.site_index] += 2 * event.direction as i64;
    true
}

/// One event of the monotone coupling: the same uniform drives both chains.
/// Requires `lo <= hi` pointwise with dominated boundaries; convexity of the
/// Hamiltonian then preserves the ordering.
pub fn coupled_step(
    lo: &mut WalkState,
    hi: &mut WalkState,
    event: &ClockEvent,
    config: &ChainConfig,
) -> Result<()> {
    if !lo.dominated_by(hi) {
        return Err(Error::invalid("coupled chains must satisfy lo <= hi"));
    }
    match (&lo.upper_samples, &hi.upper_samples) {
        (Some(f1), Some(f2)) if f1.iter().zip(f2.iter()).any(|(a, b)| a > b) => {
            return Err(Error::invalid("upper boundary of lo must be dominated"));
        }
        (None, Some(_)) => {
            return Err(Error::invalid("upper boundary of lo must be dominated"));
        }
        _ => {}
    }
    match (&lo.lower_samples, &hi.lower_samples) {
        (Some(g1), Some(g2)) if g1.iter().zip(g2.iter()).any(|(a, b)| a > b) => {
            return Err(Error::invalid("lower boundary of lo must be dominated"));
        }
        (Some(_), None) => {
            return Err(Error::invalid("lower boundary of lo must be dominated"));
        }
        _ => {}
    }
    metropolis_step(lo, event, config);
    metropolis_step(hi, event, config);
    Ok(())
}
