use std::fmt;
use std::sync::Arc;

use crate::ensemble::Grid;
use crate::error::{Error, Result};

/// An upper or lower boundary function. `Absent` encodes `+inf` (upper) or
/// `-inf` (lower): the corresponding interface contributes zero energy.
/// A floating sentinel is never used.
#[derive(Clone)]
pub enum BoundaryCurve {
    Absent,
    Curve(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl BoundaryCurve {
    pub fn absent() -> Self {
        BoundaryCurve::Absent
    }

    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        BoundaryCurve::Curve(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        Self::from_fn(move |_| c)
    }

    /// The parabola `-x^2/(2t) + level`, the common boundary in the Toda
    /// setting.
    pub fn parabola(t: f64, level: f64) -> Self {
        Self::from_fn(move |x| -x * x / (2.0 * t) + level)
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, BoundaryCurve::Absent)
    }

    /// Evaluate at all mesh points; `None` when absent.
    pub fn sample_on(&self, grid: &Grid) -> Option<Vec<f64>> {
        match self {
            BoundaryCurve::Absent => None,
            BoundaryCurve::Curve(f) => Some(grid.points().iter().map(|&x| f(x)).collect()),
        }
    }
}

impl fmt::Debug for BoundaryCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCurve::Absent => write!(f, "BoundaryCurve::Absent"),
            BoundaryCurve::Curve(_) => write!(f, "BoundaryCurve::Curve(..)"),
        }
    }
}

/// Boundary data for lines `k1..=k2` on `[left, right]`: endpoint height
/// vectors and the optional upper (`f`) and lower (`g`) boundary functions.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub k1: usize,
    pub k2: usize,
    pub x_vec: Vec<f64>,
    pub y_vec: Vec<f64>,
    pub upper: BoundaryCurve,
    pub lower: BoundaryCurve,
}

impl BoundaryData {
    pub fn new(
        k1: usize,
        k2: usize,
        x_vec: Vec<f64>,
        y_vec: Vec<f64>,
        upper: BoundaryCurve,
        lower: BoundaryCurve,
    ) -> Result<Self> {
        if k1 > k2 {
            return Err(Error::invalid(format!("k1 = {k1} must be <= k2 = {k2}")));
        }
        let k = k2 - k1 + 1;
        if x_vec.len() != k || y_vec.len() != k {
            return Err(Error::invalid(format!(
                "endpoint vectors must have length {k}, got {} and {}",
                x_vec.len(),
                y_vec.len()
            )));
        }
        if x_vec.iter().chain(y_vec.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("endpoint heights must be finite"));
        }
        Ok(BoundaryData {
            k1,
            k2,
            x_vec,
            y_vec,
            upper,
            lower,
        })
    }

    /// Single line from `x` to `y` with the given boundaries.
    pub fn single(x: f64, y: f64, upper: BoundaryCurve, lower: BoundaryCurve) -> Result<Self> {
        Self::new(1, 1, vec![x], vec![y], upper, lower)
    }

    /// Number of lines.
    pub fn k(&self) -> usize {
        self.k2 - self.k1 + 1
    }

    /// Number of interaction interfaces, including the two boundary ones.
    pub fn interfaces(&self) -> usize {
        self.k() + 1
    }
}
