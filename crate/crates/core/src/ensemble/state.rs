use crate::ensemble::{BoundaryData, Grid};
use crate::error::{Error, Result};

/// `k` ordered-by-index piecewise-linear paths sampled on a grid, together
/// with the boundary data. Boundary curves are sampled once per grid at
/// construction.
#[derive(Clone, Debug)]
pub struct LineEnsembleState {
    grid: Grid,
    /// Rows are lines `k1..=k2`, columns are mesh times.
    heights: Vec<Vec<f64>>,
    boundary: BoundaryData,
    upper_samples: Option<Vec<f64>>,
    lower_samples: Option<Vec<f64>>,
}

impl LineEnsembleState {
    pub fn new(grid: Grid, heights: Vec<Vec<f64>>, boundary: BoundaryData) -> Result<Self> {
        let k = boundary.k();
        if heights.len() != k {
            return Err(Error::invalid(format!(
                "expected {k} lines, got {}",
                heights.len()
            )));
        }
        let cols = grid.len();
        for (row, line) in heights.iter().enumerate() {
            if line.len() != cols {
                return Err(Error::invalid(format!(
                    "line {row} has {} samples, grid has {cols} points",
                    line.len()
                )));
            }
            let (x, y) = (boundary.x_vec[row], boundary.y_vec[row]);
            if (line[0] - x).abs() > 1e-9 * (1.0 + x.abs())
                || (line[cols - 1] - y).abs() > 1e-9 * (1.0 + y.abs())
            {
                return Err(Error::invalid(format!(
                    "line {row} endpoints ({}, {}) do not match boundary ({x}, {y})",
                    line[0],
                    line[cols - 1]
                )));
            }
        }
        let upper_samples = boundary.upper.sample_on(&grid);
        let lower_samples = boundary.lower.sample_on(&grid);
        Ok(LineEnsembleState {
            grid,
            heights,
            boundary,
            upper_samples,
            lower_samples,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }

    /// Number of lines.
    pub fn k(&self) -> usize {
        self.heights.len()
    }

    pub fn heights(&self) -> &[Vec<f64>] {
        &self.heights
    }

    pub fn line(&self, row: usize) -> &[f64] {
        &self.heights[row]
    }

    /// Height of line `row` at the mesh point nearest to `t`.
    pub fn value_at(&self, row: usize, t: f64) -> f64 {
        self.heights[row][self.grid.nearest_index(t)]
    }

    /// Gap `h_{i+1} - h_i` at column `col` for interface offset
    /// `iface = 0..=k` (0 pairs line 1 with the upper boundary, `k` pairs
    /// the lower boundary with line `k`). Returns `-inf` when the relevant
    /// boundary is absent.
    pub fn gap(&self, iface: usize, col: usize) -> f64 {
        let k = self.k();
        if iface == 0 {
            match &self.upper_samples {
                Some(f) => self.heights[0][col] - f[col],
                None => f64::NEG_INFINITY,
            }
        } else if iface == k {
            match &self.lower_samples {
                Some(g) => g[col] - self.heights[k - 1][col],
                None => f64::NEG_INFINITY,
            }
        } else {
            self.heights[iface][col] - self.heights[iface - 1][col]
        }
    }

    pub fn upper_samples(&self) -> Option<&[f64]> {
        self.upper_samples.as_deref()
    }

    pub fn lower_samples(&self) -> Option<&[f64]> {
        self.lower_samples.as_deref()
    }

    /// Replace the heights, keeping grid and boundary; validates endpoints.
    pub fn with_heights(&self, heights: Vec<Vec<f64>>) -> Result<Self> {
        LineEnsembleState::new(self.grid.clone(), heights, self.boundary.clone())
    }
}
