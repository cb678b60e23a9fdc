use crate::error::{Error, Result};
use crate::numeric::integral_exp_linear;

/// `Phi(x) = e^x - 1 - x`, with a Taylor branch near zero to avoid
/// cancellation.
pub fn phi(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        x * x * (0.5 + x / 6.0)
    } else {
        x.exp() - 1.0 - x
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HamiltonianKind {
    /// `H(x) = e^x`.
    Exponential,
    /// `H_i(x) = w_i * Phi(x)` with per-interface weights.
    WeightedPhi,
    /// `H(x) = inf * 1(x >= 0)`, the non-intersection wall.
    HardWall,
    /// No interaction.
    Zero,
}

/// A scalar or per-interface vector of convex interaction functions.
///
/// Interface `i` runs over `k1-1 ..= k2`; `weights[idx]` is indexed by the
/// offset `idx = i - (k1 - 1)`. Only `WeightedPhi` carries weights.
#[derive(Clone, Debug)]
pub struct HamiltonianSpec {
    kind: HamiltonianKind,
    weights: Option<Vec<f64>>,
}

impl HamiltonianSpec {
    pub fn exponential() -> Self {
        HamiltonianSpec {
            kind: HamiltonianKind::Exponential,
            weights: None,
        }
    }

    pub fn zero() -> Self {
        HamiltonianSpec {
            kind: HamiltonianKind::Zero,
            weights: None,
        }
    }

    pub fn hard_wall() -> Self {
        HamiltonianSpec {
            kind: HamiltonianKind::HardWall,
            weights: None,
        }
    }

    pub fn weighted_phi(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("phi weights must be finite and >= 0"));
        }
        Ok(HamiltonianSpec {
            kind: HamiltonianKind::WeightedPhi,
            weights: Some(weights),
        })
    }

    pub fn kind(&self) -> HamiltonianKind {
        self.kind
    }

    fn weight(&self, interface: usize) -> f64 {
        match &self.weights {
            Some(w) => w.get(interface).copied().unwrap_or(0.0),
            None => 1.0,
        }
    }

    /// `H_i(x)`. `x = -inf` (absent boundary) always contributes zero.
    pub fn value(&self, interface: usize, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        match self.kind {
            HamiltonianKind::Zero => 0.0,
            HamiltonianKind::Exponential => x.exp(),
            HamiltonianKind::WeightedPhi => self.weight(interface) * phi(x),
            HamiltonianKind::HardWall => {
                if x >= 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    /// Exact derivative `H_i'(x)`; unsupported for the hard wall.
    pub fn derivative(&self, interface: usize, x: f64) -> Result<f64> {
        match self.kind {
            HamiltonianKind::HardWall => Err(Error::Unsupported(
                "hard wall Hamiltonian has no derivative".into(),
            )),
            HamiltonianKind::Zero => Ok(0.0),
            HamiltonianKind::Exponential => Ok(if x == f64::NEG_INFINITY { 0.0 } else { x.exp() }),
            HamiltonianKind::WeightedPhi => Ok(if x == f64::NEG_INFINITY {
                // Phi'(-inf) = -1, but an absent interface carries no energy.
                0.0
            } else {
                self.weight(interface) * (x.exp() - 1.0)
            }),
        }
    }

    /// Exact `int_cell H_i(linear)` for a cell of width `dx` where the gap is
    /// linear from `v1` to `v2`. Closed forms for the exponential-family
    /// kinds; the hard wall integrates to `0` or `inf`.
    pub fn cell_integral(&self, interface: usize, v1: f64, v2: f64, dx: f64) -> f64 {
        match self.kind {
            HamiltonianKind::Zero => 0.0,
            HamiltonianKind::Exponential => integral_exp_linear(v1, v2, dx),
            HamiltonianKind::WeightedPhi => {
                let w = self.weight(interface);
                if w == 0.0 {
                    0.0
                } else {
                    w * (integral_exp_linear(v1, v2, dx) - dx - dx * 0.5 * (v1 + v2))
                }
            }
            HamiltonianKind::HardWall => {
                if v1.max(v2) >= 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }
}
