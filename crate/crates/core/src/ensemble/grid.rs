use crate::error::{Error, Result};

/// A finite uniform time mesh on `[left, right]` with `m` cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    left: f64,
    right: f64,
    points: Vec<f64>,
    delta: f64,
}

impl Grid {
    /// Uniform mesh with `m + 1` points.
    pub fn new(left: f64, right: f64, m: usize) -> Result<Self> {
        if !(left < right) {
            return Err(Error::invalid(format!(
                "grid endpoints must satisfy left < right, got [{left}, {right}]"
            )));
        }
        if m == 0 {
            return Err(Error::invalid("grid needs at least one cell"));
        }
        let delta = (right - left) / m as f64;
        let points: Vec<f64> = (0..=m)
            .map(|j| {
                if j == m {
                    right
                } else {
                    left + j as f64 * delta
                }
            })
            .collect();
        Ok(Grid {
            left,
            right,
            points,
            delta,
        })
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of cells (points minus one).
    pub fn cells(&self) -> usize {
        self.points.len() - 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the mesh point closest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let idx = ((t - self.left) / self.delta).round();
        (idx.max(0.0) as usize).min(self.cells())
    }
}

/// Free-function form of [`Grid::new`].
pub fn make_grid(left: f64, right: f64, m: usize) -> Result<Grid> {
    Grid::new(left, right, m)
}
