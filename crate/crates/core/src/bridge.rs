//! Exact sampling and analytics of free Brownian bridges.
//!
//! The free measure on `k` lines is that of independent Brownian bridges
//! pinned at the boundary endpoint vectors. Sampling is exact at mesh points
//! via sequential conditioning, O(m) per path. The tube-probability oracle
//! is the alternating theta series for the two-sided exit problem.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::ensemble::{BoundaryData, Grid, LineEnsembleState};
use crate::error::{Error, Result};
use crate::numeric::trapezoid_uniform;
use crate::report::EstimateReport;
use crate::seeding::rng_from_seed;

/// A single bridge segment: pinned values at both ends of a time interval.
#[derive(Clone, Copy, Debug)]
pub struct BridgeSpec {
    pub left_time: f64,
    pub right_time: f64,
    pub left_value: f64,
    pub right_value: f64,
}

impl BridgeSpec {
    pub fn new(left_time: f64, right_time: f64, left_value: f64, right_value: f64) -> Result<Self> {
        if !(left_time < right_time) {
            return Err(Error::invalid("bridge requires left_time < right_time"));
        }
        Ok(BridgeSpec {
            left_time,
            right_time,
            left_value,
            right_value,
        })
    }
}

/// Covariance of the centered bridge on `[-T, T]` pinned to 0 at both ends:
/// `(T + x /\ y)(T - x \/ y)/(2T)`.
pub fn bridge_covariance(x: f64, y: f64, half_width: f64) -> Result<f64> {
    let t = half_width;
    if t <= 0.0 {
        return Err(Error::invalid("half-width must be positive"));
    }
    if x.abs() > t || y.abs() > t {
        return Err(Error::invalid(format!(
            "arguments ({x}, {y}) outside [-{t}, {t}]"
        )));
    }
    Ok((t + x.min(y)) * (t - x.max(y)) / (2.0 * t))
}

/// Sample one bridge path at the grid points by sequential conditioning.
/// Exact finite-dimensional law; endpoints are pinned bit-exactly.
pub fn sample_bridge_path<R: Rng>(spec: &BridgeSpec, grid: &Grid, rng: &mut R) -> Vec<f64> {
    let pts = grid.points();
    let m = grid.cells();
    let mut path = vec![0.0; m + 1];
    path[0] = spec.left_value;
    path[m] = spec.right_value;
    for j in 0..m.saturating_sub(1) {
        let remaining = spec.right_time - pts[j];
        let dt = pts[j + 1] - pts[j];
        let mean = path[j] + (spec.right_value - path[j]) * dt / remaining;
        let var = dt * (spec.right_time - pts[j + 1]) / remaining;
        let z: f64 = rng.sample(StandardNormal);
        path[j + 1] = mean + var.max(0.0).sqrt() * z;
    }
    path
}

/// Independent bridges for all lines of `boundary`, sampled on `grid`.
/// Deterministic given the seed.
pub fn sample_free_bridges(
    boundary: &BoundaryData,
    grid: &Grid,
    seed: u64,
) -> Result<LineEnsembleState> {
    let mut rng = rng_from_seed(seed);
    sample_free_bridges_with(boundary, grid, &mut rng)
}

/// As [`sample_free_bridges`] but drawing from a caller-owned RNG stream.
pub fn sample_free_bridges_with<R: Rng>(
    boundary: &BoundaryData,
    grid: &Grid,
    rng: &mut R,
) -> Result<LineEnsembleState> {
    let mut heights = Vec::with_capacity(boundary.k());
    for row in 0..boundary.k() {
        let spec = BridgeSpec::new(
            grid.left(),
            grid.right(),
            boundary.x_vec[row],
            boundary.y_vec[row],
        )?;
        heights.push(sample_bridge_path(&spec, grid, rng));
    }
    LineEnsembleState::new(grid.clone(), heights, boundary.clone())
}

/// Log density of the parabola-shifted bridge law against the unshifted one
/// for the shift `p(x) = (T^2 - x^2)/(2t)`:
/// `-T^3/(3 t^2) - (1/t) int_{-T}^{T} path(x) dx` (trapezoid integral).
pub fn cameron_martin_log_factor(path: &[f64], grid: &Grid, t: f64, half_width: f64) -> f64 {
    if half_width == 0.0 {
        return 0.0;
    }
    let integral = trapezoid_uniform(path, grid.delta());
    -half_width.powi(3) / (3.0 * t * t) - integral / t
}

/// Exact `P(sup_{s in [0, L]} |B_s| <= r)` for a bridge pinned at 0, via the
/// alternating theta series `1 + 2 sum_k (-1)^k exp(-2 k^2 r^2 / L)`.
///
/// The value depends on `L/r^2` only. For small `r^2/L` the direct series
/// cancels catastrophically, so the Jacobi-dual form
/// `sqrt(pi L/(2 r^2)) * 2 sum_{n>=0} exp(-pi^2 L (2n+1)^2 / (8 r^2))`
/// is used instead.
pub fn tube_probability_exact(length: f64, r: f64) -> Result<f64> {
    if length <= 0.0 || r <= 0.0 {
        return Err(Error::invalid("tube probability needs L > 0 and r > 0"));
    }
    let u = 2.0 * r * r / length;
    if u >= 20.0 {
        return Ok(1.0);
    }
    if u >= 1.0 {
        let mut sum = 1.0;
        let mut k = 1u32;
        loop {
            let term = 2.0 * (-u * (k as f64) * (k as f64)).exp();
            if term < 1e-15 {
                break;
            }
            sum += if k % 2 == 1 { -term } else { term };
            k += 1;
        }
        Ok(sum.max(0.0))
    } else {
        let prefactor = (std::f64::consts::PI / u).sqrt();
        let e = std::f64::consts::PI * std::f64::consts::PI / (4.0 * u);
        let mut sum = 0.0;
        let mut n = 0u32;
        loop {
            let odd = (2 * n + 1) as f64;
            let term = 2.0 * (-e * odd * odd).exp();
            sum += term;
            if term < 1e-300 || term < 1e-18 * sum {
                break;
            }
            n += 1;
        }
        Ok(prefactor * sum)
    }
}

/// Monte Carlo tube probability: fraction of bridges (monitored at `m_mesh`
/// mesh points) staying in `[-r, r]`, with binomial standard error.
///
/// Monitoring only at mesh points gives a small positive bias that shrinks
/// with mesh refinement; the theta series carries exactness.
pub fn tube_probability_mc(
    length: f64,
    r: f64,
    m_mesh: usize,
    n_samples: u64,
    seed: u64,
) -> Result<EstimateReport> {
    if n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let grid = Grid::new(0.0, length, m_mesh)?;
    let spec = BridgeSpec::new(0.0, length, 0.0, 0.0)?;
    let mut rng = rng_from_seed(seed);
    let mut hits = 0u64;
    for _ in 0..n_samples {
        let path = sample_bridge_path(&spec, &grid, &mut rng);
        if path.iter().all(|v| v.abs() <= r) {
            hits += 1;
        }
    }
    let p = hits as f64 / n_samples as f64;
    let se = (p * (1.0 - p) / n_samples as f64).sqrt();
    Ok(EstimateReport::new("tube_probability_mc", p, se, n_samples)
        .with_provenance("L", length)
        .with_provenance("r", r)
        .with_provenance("m_mesh", m_mesh)
        .with_provenance("seed", seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{make_grid, BoundaryCurve};
    use approx::assert_relative_eq;

    #[test]
    fn covariance_hand_values() {
        assert_relative_eq!(bridge_covariance(0.0, 0.0, 1.0).unwrap(), 0.5);
        assert_relative_eq!(bridge_covariance(1.0, 0.3, 1.0).unwrap(), 0.0);
        assert_relative_eq!(bridge_covariance(-1.0, 0.3, 1.0).unwrap(), 0.0);
        assert_relative_eq!(bridge_covariance(-0.5, 0.5, 1.0).unwrap(), 0.125);
        assert!(bridge_covariance(1.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn covariance_psd_on_mesh() {
        // Cholesky of the interior-mesh covariance matrix must succeed.
        let t = 1.0;
        let grid = make_grid(-t, t, 16).unwrap();
        let interior: Vec<f64> = grid.points()[1..16].to_vec();
        let n = interior.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = bridge_covariance(interior[i], interior[j], t).unwrap();
            }
        }
        // plain Cholesky
        let mut l = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    assert!(s > 0.0, "matrix not positive definite at {i}");
                    l[i][j] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
    }

    #[test]
    fn bridge_moments_match_kernel() {
        let grid = make_grid(-1.0, 1.0, 16).unwrap();
        let boundary =
            BoundaryData::single(0.0, 0.0, BoundaryCurve::absent(), BoundaryCurve::absent())
                .unwrap();
        let n = 100_000;
        let mut rng = rng_from_seed(42);
        let mut mid = Vec::with_capacity(n);
        for _ in 0..n {
            let s = sample_free_bridges_with(&boundary, &grid, &mut rng).unwrap();
            mid.push(s.value_at(0, 0.0));
        }
        let (mean, se) = crate::numeric::mean_and_se(&mid);
        assert!(mean.abs() <= 3.0 * se, "midpoint mean {mean} vs se {se}");
        let var = mid.iter().map(|x| x * x).sum::<f64>() / n as f64;
        // SE of a variance estimate of a Gaussian: var * sqrt(2/n)
        let var_se = 0.5 * (2.0 / n as f64).sqrt();
        assert!(
            (var - 0.5).abs() <= 3.0 * var_se,
            "midpoint variance {var} not within 3 SE of 0.5"
        );
    }

    #[test]
    fn shifted_endpoints_interpolate() {
        let grid = make_grid(-1.0, 1.0, 8).unwrap();
        let boundary =
            BoundaryData::single(2.0, 4.0, BoundaryCurve::absent(), BoundaryCurve::absent())
                .unwrap();
        let n = 100_000;
        let mut rng = rng_from_seed(7);
        let mut mid = Vec::with_capacity(n);
        for _ in 0..n {
            let s = sample_free_bridges_with(&boundary, &grid, &mut rng).unwrap();
            mid.push(s.value_at(0, 0.0));
        }
        let (mean, se) = crate::numeric::mean_and_se(&mid);
        assert!((mean - 3.0).abs() <= 3.0 * se);
    }

    #[test]
    fn sampling_is_deterministic_in_seed() {
        let grid = make_grid(-1.0, 1.0, 32).unwrap();
        let boundary =
            BoundaryData::single(0.0, 1.0, BoundaryCurve::absent(), BoundaryCurve::absent())
                .unwrap();
        let a = sample_free_bridges(&boundary, &grid, 11).unwrap();
        let b = sample_free_bridges(&boundary, &grid, 11).unwrap();
        let c = sample_free_bridges(&boundary, &grid, 12).unwrap();
        assert_eq!(a.line(0), b.line(0));
        assert_ne!(a.line(0), c.line(0));
    }

    #[test]
    fn cameron_martin_hand_values() {
        let grid = make_grid(-1.0, 1.0, 64).unwrap();
        let zero = vec![0.0; grid.len()];
        assert_relative_eq!(
            cameron_martin_log_factor(&zero, &grid, 1.0, 1.0),
            -1.0 / 3.0,
            epsilon = 1e-12
        );
        let c = 0.7;
        let constant = vec![c; grid.len()];
        assert_relative_eq!(
            cameron_martin_log_factor(&constant, &grid, 1.0, 1.0),
            -1.0 / 3.0 - 2.0 * c,
            epsilon = 1e-12
        );
    }

    #[test]
    fn tube_exact_values() {
        // wide tube: no constraint
        assert_relative_eq!(tube_probability_exact(1.0, 5.0).unwrap(), 1.0);
        // L = 1, r = 1: 1 - 2 e^{-2} + 2 e^{-8} - ...
        let expected = 1.0 - 2.0 * (-2.0f64).exp() + 2.0 * (-8.0f64).exp() - 2.0 * (-18.0f64).exp();
        assert_relative_eq!(
            tube_probability_exact(1.0, 1.0).unwrap(),
            expected,
            epsilon = 1e-12
        );
        // Brownian scaling: depends on L/r^2 only
        assert_relative_eq!(
            tube_probability_exact(4.0, 2.0).unwrap(),
            tube_probability_exact(1.0, 1.0).unwrap(),
            epsilon = 1e-12
        );
        // tight tube
        assert!(tube_probability_exact(1.0, 0.05).unwrap() < 1e-3);
        assert!(tube_probability_exact(1.0, 0.05).unwrap() > 0.0);
    }

    #[test]
    fn dual_and_direct_series_agree_at_crossover() {
        // u = 2 r^2 / L near 1: both branches must agree.
        for u in [0.8, 0.9, 0.99, 1.01, 1.1, 1.3] {
            let r = 1.0;
            let length = 2.0 * r * r / u;
            // direct series regardless of branch
            let mut direct = 1.0;
            for k in 1..200 {
                let term = 2.0 * (-u * (k as f64) * (k as f64)).exp();
                direct += if k % 2 == 1 { -term } else { term };
            }
            assert_relative_eq!(
                tube_probability_exact(length, r).unwrap(),
                direct,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn tube_mc_near_exact() {
        let exact = tube_probability_exact(1.0, 1.0).unwrap();
        let est = tube_probability_mc(1.0, 1.0, 2048, 20_000, 3).unwrap();
        // allow 3 SE plus the documented positive discretization bias
        assert!(est.value >= exact - 3.0 * est.standard_error);
        assert!(est.value <= exact + 3.0 * est.standard_error + 0.02);
    }

    #[test]
    fn tube_lower_bound_shape() {
        // For d > pi^2/8 there is c with P >= c exp(-d L / r^2), c fit at
        // L/r^2 = 1.
        let d = 1.5f64;
        let c = tube_probability_exact(1.0, 1.0).unwrap() / (-d).exp();
        let mut ratio = 1.0;
        while ratio <= 64.0 {
            let p = tube_probability_exact(ratio, 1.0).unwrap();
            assert!(
                p >= c * (-d * ratio).exp(),
                "bound fails at L/r^2 = {ratio}"
            );
            ratio *= 2.0;
        }
    }

    #[test]
    fn increment_covariance_chi_square() {
        // Whiten the first 7 of 8 bridge increments with the exact covariance
        // (all 8 sum to a constant, so the full set is rank-deficient); the
        // summed squares follow chi-square with n*7 degrees of freedom.
        let t = 1.0;
        let cells = 7;
        let grid = make_grid(-t, t, 8).unwrap();
        let pts = grid.points();
        let mut cov = vec![vec![0.0; cells]; cells];
        let kernel = |x: f64, y: f64| bridge_covariance(x, y, t).unwrap();
        for c in 0..cells {
            for d in 0..cells {
                cov[c][d] = kernel(pts[c + 1], pts[d + 1])
                    - kernel(pts[c + 1], pts[d])
                    - kernel(pts[c], pts[d + 1])
                    + kernel(pts[c], pts[d]);
            }
        }
        // Cholesky factor
        let mut l = vec![vec![0.0; cells]; cells];
        for i in 0..cells {
            for j in 0..=i {
                let mut s = cov[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    l[i][j] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        let boundary =
            BoundaryData::single(0.0, 0.0, BoundaryCurve::absent(), BoundaryCurve::absent())
                .unwrap();
        let n = 10_000usize;
        let mut rng = rng_from_seed(99);
        let mut chi2 = 0.0;
        for _ in 0..n {
            let s = sample_free_bridges_with(&boundary, &grid, &mut rng).unwrap();
            let inc: Vec<f64> = (0..cells)
                .map(|c| s.line(0)[c + 1] - s.line(0)[c])
                .collect();
            // forward-solve L z = inc
            let mut z = vec![0.0; cells];
            for i in 0..cells {
                let mut s = inc[i];
                for k in 0..i {
                    s -= l[i][k] * z[k];
                }
                z[i] = s / l[i][i];
            }
            chi2 += z.iter().map(|v| v * v).sum::<f64>();
        }
        let dof = (n * cells) as f64;
        // two-sided 1% normal approximation for chi-square
        let half_width = 2.5758 * (2.0 * dof).sqrt();
        assert!(
            (chi2 - dof).abs() <= half_width,
            "chi2 {chi2} vs dof {dof} +/- {half_width}"
        );
    }
}
