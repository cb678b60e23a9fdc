//! Numerical verification engines for the integration-by-parts identity,
//! the exponential gap moments, and the tail-probability functionals.

use crate::bridge::sample_free_bridges_with;
use crate::ensemble::{
    log_weight_discrete, BoundaryData, Grid, HamiltonianSpec, LineEnsembleState,
};
use crate::error::{Error, Result};
use crate::report::EstimateReport;
use crate::seeding::rng_from_seed;

/// `Cov^{T,a,b}(s) = (b /\ s + T)(T - b \/ s)/(2T) - (a /\ s + T)(T - a \/ s)/(2T)`.
pub fn cov_kernel(s: f64, half_width: f64, a: f64, b: f64) -> Result<f64> {
    let t = half_width;
    if t <= 0.0 || s.abs() > t || a.abs() > t || b.abs() > t {
        return Err(Error::invalid("cov_kernel arguments must lie in [-T, T]"));
    }
    if !(a < b) {
        return Err(Error::invalid("cov_kernel requires a < b"));
    }
    let term = |p: f64| (p.min(s) + t) * (t - p.max(s)) / (2.0 * t);
    Ok(term(b) - term(a))
}

/// `int_{-T}^{T} Cov^{T,a,b}(s) ds = (a^2 - b^2)/2`, independent of `T`.
pub fn cov_integral(half_width: f64, a: f64, b: f64) -> Result<f64> {
    if half_width <= 0.0 || a.abs() > half_width || b.abs() > half_width || !(a < b) {
        return Err(Error::invalid("cov_integral requires a < b in [-T, T]"));
    }
    Ok((a * a - b * b) / 2.0)
}

/// A bounded-derivative test function for the integration-by-parts check.
/// The identity entry clamps beyond |y| <= 1e6 so its derivative is bounded.
#[derive(Clone, Copy)]
pub struct TestFunction {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
    pub df: fn(f64) -> f64,
}

const CLAMP: f64 = 1e6;

pub const TEST_FUNCTIONS: &[TestFunction] = &[
    TestFunction {
        name: "identity",
        f: |y| y.clamp(-CLAMP, CLAMP),
        df: |y| if y.abs() < CLAMP { 1.0 } else { 0.0 },
    },
    TestFunction {
        name: "tanh",
        f: |y| y.tanh(),
        df: |y| {
            let c = y.cosh();
            1.0 / (c * c)
        },
    },
    TestFunction {
        name: "unit",
        f: |_| 1.0,
        df: |_| 0.0,
    },
];

pub fn test_function(name: &str) -> Result<&'static TestFunction> {
    TEST_FUNCTIONS
        .iter()
        .find(|tf| tf.name == name)
        .ok_or_else(|| Error::invalid(format!("unknown test function '{name}'")))
}

/// Window and test function for one integration-by-parts check on a single
/// line between deterministic boundaries.
#[derive(Clone, Copy)]
pub struct IbpSpec {
    pub a: f64,
    pub b: f64,
    pub half_width: f64,
    pub function: &'static TestFunction,
}

impl IbpSpec {
    pub fn new(a: f64, b: f64, half_width: f64, function_name: &str) -> Result<Self> {
        if !(a < b) || a < -half_width || b > half_width {
            return Err(Error::invalid("IbpSpec requires -T <= a < b <= T"));
        }
        Ok(IbpSpec {
            a,
            b,
            half_width,
            function: test_function(function_name)?,
        })
    }
}

/// Result of one integration-by-parts verification.
#[derive(Clone, Copy, Debug)]
pub struct IbpCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub se: f64,
    pub n_samples: u64,
}

/// Verify `E[(Y - mu) F(Y)] = E[F'(Y)] ((b-a) - (b-a)^2/(2T)) + sum-over-mesh
/// of Cov^{T,a,b} E[F(Y)(H'(gap below) - H'(gap above))]` for a single line
/// between deterministic boundaries, by self-normalized importance sampling
/// from the free bridge.
///
/// The interaction integral is evaluated as the mesh Riemann sum that defines
/// the discretized weight itself, so the identity is exact for the sampled
/// measure at any mesh size: the residual carries Monte Carlo noise only.
/// All terms share one sample set, and the standard error is that of the
/// per-sample residual functional.
pub fn ibp_check(
    boundary: &BoundaryData,
    ham: &HamiltonianSpec,
    grid: &Grid,
    spec: &IbpSpec,
    n_samples: u64,
    seed: u64,
) -> Result<IbpCheck> {
    if boundary.k() != 1 {
        return Err(Error::invalid("ibp_check runs on a single line"));
    }
    if n_samples < 100 {
        return Err(Error::invalid("ibp_check needs n_samples >= 100"));
    }
    // fail fast on non-differentiable Hamiltonians
    ham.derivative(0, -1.0)?;
    let t = spec.half_width;
    if (grid.left() + t).abs() > 1e-12 || (grid.right() - t).abs() > 1e-12 {
        return Err(Error::invalid("grid must span [-T, T]"));
    }
    let col_a = grid.nearest_index(spec.a);
    let col_b = grid.nearest_index(spec.b);
    if (grid.points()[col_a] - spec.a).abs() > 1e-9 || (grid.points()[col_b] - spec.b).abs() > 1e-9
    {
        return Err(Error::invalid("a and b must be mesh points"));
    }
    let mu = (boundary.y_vec[0] - boundary.x_vec[0]) * (spec.b - spec.a) / (2.0 * t);
    let gauss_var = (spec.b - spec.a) - (spec.b - spec.a).powi(2) / (2.0 * t);
    let delta = grid.delta();
    let cols = grid.len();
    // Cov kernel at interior mesh points, fixed across samples
    let cov: Vec<f64> = (1..cols - 1)
        .map(|c| cov_kernel(grid.points()[c], t, spec.a, spec.b))
        .collect::<Result<_>>()?;

    let mut rng = rng_from_seed(seed);
    let n = n_samples as usize;
    let mut log_w = Vec::with_capacity(n);
    let mut lhs_v = Vec::with_capacity(n);
    let mut rhs_v = Vec::with_capacity(n);
    for _ in 0..n {
        let state = sample_free_bridges_with(boundary, grid, &mut rng)?;
        log_w.push(log_weight_discrete(&state, ham));
        let y = state.line(0)[col_b] - state.line(0)[col_a];
        let f_y = (spec.function.f)(y);
        let mut interaction = 0.0;
        for (idx, c) in (1..cols - 1).enumerate() {
            let below = state.gap(1, c);
            let above = state.gap(0, c);
            let d = ham.derivative(1, below)? - ham.derivative(0, above)?;
            interaction += cov[idx] * d;
        }
        lhs_v.push((y - mu) * f_y);
        rhs_v.push((spec.function.df)(y) * gauss_var + f_y * delta * interaction);
    }
    let max_lw = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max_lw == f64::NEG_INFINITY {
        return Err(Error::DegenerateEstimate("all weights vanished".into()));
    }
    let w: Vec<f64> = log_w.iter().map(|lw| (lw - max_lw).exp()).collect();
    let w_sum: f64 = w.iter().sum();
    let wavg =
        |vals: &[f64]| -> f64 { w.iter().zip(vals).map(|(w, v)| w * v).sum::<f64>() / w_sum };
    let lhs = wavg(&lhs_v);
    let rhs = wavg(&rhs_v);
    let resid: Vec<f64> = lhs_v.iter().zip(&rhs_v).map(|(l, r)| l - r).collect();
    let residual = lhs - rhs;
    let se = w
        .iter()
        .zip(&resid)
        .map(|(w, r)| {
            let nw = w / w_sum;
            nw * nw * (r - residual) * (r - residual)
        })
        .sum::<f64>()
        .sqrt();
    Ok(IbpCheck {
        lhs,
        rhs,
        residual,
        se,
        n_samples,
    })
}

/// Exactness of the Gaussian reduction under chord-mirroring: with the zero
/// Hamiltonian and `F(y) = y`, pairing each bridge with its reflection about
/// the endpoint chord cancels the odd component of the identity exactly.
/// Returns the largest |per-pair odd residual|; it is zero up to rounding,
/// independent of the sample count.
pub fn gaussian_antithetic_residual(
    boundary: &BoundaryData,
    grid: &Grid,
    spec: &IbpSpec,
    n_pairs: u64,
    seed: u64,
) -> Result<f64> {
    if boundary.k() != 1 {
        return Err(Error::invalid("antithetic check runs on a single line"));
    }
    let col_a = grid.nearest_index(spec.a);
    let col_b = grid.nearest_index(spec.b);
    let t = spec.half_width;
    let mu = (boundary.y_vec[0] - boundary.x_vec[0]) * (spec.b - spec.a) / (2.0 * t);
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..n_pairs {
        let state = sample_free_bridges_with(boundary, grid, &mut rng)?;
        let chord = |c: usize| {
            let x = grid.points()[c];
            let s = (x - grid.left()) / (grid.right() - grid.left());
            boundary.x_vec[0] * (1.0 - s) + boundary.y_vec[0] * s
        };
        let y = state.line(0)[col_b] - state.line(0)[col_a];
        let y_mirror = (2.0 * chord(col_b) - state.line(0)[col_b])
            - (2.0 * chord(col_a) - state.line(0)[col_a]);
        // F(y) = y: the pair average of (Y - mu) F(Y) minus the per-sample
        // quadratic part (Y - mu)^2 isolates mu * (Y - mu), which mirrors to
        // its negative
        let odd = 0.5 * ((y - mu) * y - (y - mu) * (y - mu))
            + 0.5 * ((y_mirror - mu) * y_mirror - (y_mirror - mu) * (y_mirror - mu));
        worst = worst.max(odd.abs());
    }
    Ok(worst)
}

/// Mean of `exp(gap at the window center)` across interface `i` (1-based,
/// interior), with a 20-block jackknife standard error over the chain order.
pub fn gap_moment(samples: &[LineEnsembleState], interface: usize) -> Result<EstimateReport> {
    const BLOCKS: usize = 20;
    if samples.len() < 2 * BLOCKS {
        return Err(Error::invalid(format!(
            "gap_moment needs at least {} samples, got {}",
            2 * BLOCKS,
            samples.len()
        )));
    }
    let k = samples[0].k();
    if interface == 0 || interface >= k {
        return Err(Error::invalid(format!(
            "interface {interface} is not interior for {k} lines"
        )));
    }
    let center = samples[0]
        .grid()
        .nearest_index(0.5 * (samples[0].grid().left() + samples[0].grid().right()));
    let vals: Vec<f64> = samples
        .iter()
        .map(|s| s.gap(interface, center).exp())
        .collect();
    let n = vals.len();
    let mean = vals.iter().sum::<f64>() / n as f64;
    // block jackknife
    let block_len = n / BLOCKS;
    let used = block_len * BLOCKS;
    let total: f64 = vals[..used].iter().sum();
    let mut pseudo = Vec::with_capacity(BLOCKS);
    for b in 0..BLOCKS {
        let block_sum: f64 = vals[b * block_len..(b + 1) * block_len].iter().sum();
        pseudo.push((total - block_sum) / (used - block_len) as f64);
    }
    let pmean = pseudo.iter().sum::<f64>() / BLOCKS as f64;
    let var = pseudo
        .iter()
        .map(|p| (p - pmean) * (p - pmean))
        .sum::<f64>()
        * (BLOCKS as f64 - 1.0)
        / BLOCKS as f64;
    Ok(
        EstimateReport::new("gap_moment", mean, var.sqrt(), n as u64)
            .with_provenance("interface", interface),
    )
}

/// A binomial frequency with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct Frequency {
    pub value: f64,
    pub se: f64,
}

fn frequency(hits: u64, n: u64) -> Frequency {
    let p = hits as f64 / n as f64;
    Frequency {
        value: p,
        se: (p * (1.0 - p) / n as f64).sqrt(),
    }
}

/// The four tail functionals of a line in shifted coordinates:
/// `p_minus = P(h(0) <= -x)`, `p_plus = P(h(0) >= x)`,
/// `q_minus = P(sup h <= -x)`, `q_plus = P(inf h >= x)`.
#[derive(Clone, Copy, Debug)]
pub struct TailEstimates {
    pub p_minus: Frequency,
    pub p_plus: Frequency,
    pub q_minus: Frequency,
    pub q_plus: Frequency,
}

/// Empirical tail frequencies of line `row` over the sample window. The
/// sup/inf run over the sample grid, so `q_minus <= p_minus` and
/// `q_plus <= p_plus` hold exactly on every sample set.
pub fn tail_estimates(samples: &[LineEnsembleState], row: usize, x: f64) -> Result<TailEstimates> {
    if samples.is_empty() {
        return Err(Error::invalid("tail_estimates needs samples"));
    }
    let grid = samples[0].grid();
    let center = grid.nearest_index(0.5 * (grid.left() + grid.right()));
    let n = samples.len() as u64;
    let (mut pm, mut pp, mut qm, mut qp) = (0u64, 0u64, 0u64, 0u64);
    for s in samples {
        let line = s.line(row);
        let v0 = line[center];
        let sup = line.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let inf = line.iter().cloned().fold(f64::INFINITY, f64::min);
        if v0 <= -x {
            pm += 1;
        }
        if v0 >= x {
            pp += 1;
        }
        if sup <= -x {
            qm += 1;
        }
        if inf >= x {
            qp += 1;
        }
    }
    Ok(TailEstimates {
        p_minus: frequency(pm, n),
        p_plus: frequency(pp, n),
        q_minus: frequency(qm, n),
        q_plus: frequency(qp, n),
    })
}

/// The union-bound tail inequality: `p_plus(x) <= p1 + (n-1) exp(-x/(2n))`
/// with a caller-supplied estimate of the single-line tail at `x/2`.
pub fn markov_tail_bound(n: usize, x: f64, p1_plus_estimate: f64) -> f64 {
    p1_plus_estimate + (n as f64 - 1.0) * (-x / (2.0 * n as f64)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{make_grid, BoundaryCurve};
    use crate::numeric::composite_gl5;
    use crate::seeding::{rng_from_seed, split_seed};
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn cov_kernel_hand_values() {
        assert_relative_eq!(cov_kernel(0.0, 1.0, -1.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(cov_kernel(0.25, 1.0, 0.0, 0.5).unwrap(), -0.0625);
        assert!(cov_kernel(2.0, 1.0, 0.0, 0.5).is_err());
        assert!(cov_kernel(0.0, 1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn cov_kernel_piecewise_linear() {
        // kinks only at a and b: second differences vanish away from them
        let (t, a, b) = (2.0f64, -0.53f64, 0.91f64);
        let h = 1e-3f64;
        let mut s = -t + 2.0 * h;
        while s < t - 2.0 * h {
            let near_kink = (s - a).abs() < 2.0 * h || (s - b).abs() < 2.0 * h;
            if !near_kink {
                let second = cov_kernel(s - h, t, a, b).unwrap()
                    - 2.0 * cov_kernel(s, t, a, b).unwrap()
                    + cov_kernel(s + h, t, a, b).unwrap();
                assert!(second.abs() < 1e-12, "kink at unexpected s = {s}");
            }
            s += 0.037;
        }
    }

    #[test]
    fn cov_integral_hand_values() {
        assert_relative_eq!(cov_integral(1.0, 0.0, 0.5).unwrap(), -0.125);
        assert_relative_eq!(cov_integral(2.0, 0.0, 0.5).unwrap(), -0.125);
        assert_relative_eq!(cov_integral(3.0, -0.7, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn cov_integral_matches_quadrature_random_triples() {
        let mut rng = rng_from_seed(61);
        for _ in 0..100 {
            let t = 0.5 + 2.5 * rng.gen::<f64>();
            let a = -t + 2.0 * t * rng.gen::<f64>() * 0.49;
            let b = a + (t - a) * (0.02 + 0.97 * rng.gen::<f64>());
            let b = b.min(t);
            // integrate piecewise over the smooth pieces [-T,a],[a,b],[b,T]
            let f = |s: f64| cov_kernel(s, t, a, b).unwrap();
            let q = composite_gl5(-t, a, 64, f)
                + composite_gl5(a, b, 64, f)
                + composite_gl5(b, t, 64, f);
            assert_relative_eq!(q, cov_integral(t, a, b).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn registry_lookup() {
        assert!(test_function("tanh").is_ok());
        assert!(test_function("identity").is_ok());
        assert!(test_function("unit").is_ok());
        assert!(test_function("sin").is_err());
        let id = test_function("identity").unwrap();
        assert_eq!((id.f)(2e6), 1e6);
        assert_eq!((id.df)(2e6), 0.0);
    }

    fn single(x: f64, y: f64, lower: BoundaryCurve) -> BoundaryData {
        BoundaryData::single(x, y, BoundaryCurve::absent(), lower).unwrap()
    }

    #[test]
    fn ibp_zero_hamiltonian_identity_f() {
        // reduces to Var(Y) = (b-a) - (b-a)^2/(2T) = 0.5 at (1, 0, 1)
        let grid = make_grid(-1.0, 1.0, 64).unwrap();
        let spec = IbpSpec::new(0.0, 1.0, 1.0, "identity").unwrap();
        let b = single(0.0, 0.3, BoundaryCurve::absent());
        let check = ibp_check(&b, &HamiltonianSpec::zero(), &grid, &spec, 100_000, 7).unwrap();
        assert_relative_eq!(check.rhs, 0.5, epsilon = 1e-12);
        assert!(
            check.residual.abs() <= 3.0 * check.se,
            "residual {} vs se {}",
            check.residual,
            check.se
        );
    }

    #[test]
    fn ibp_zero_hamiltonian_unit_f() {
        let grid = make_grid(-1.0, 1.0, 64).unwrap();
        let spec = IbpSpec::new(-0.5, 0.5, 1.0, "unit").unwrap();
        let b = single(0.0, 0.0, BoundaryCurve::absent());
        let check = ibp_check(&b, &HamiltonianSpec::zero(), &grid, &spec, 20_000, 8).unwrap();
        assert_eq!(check.rhs, 0.0);
        assert!(check.residual.abs() <= 3.0 * check.se);
    }

    #[test]
    fn ibp_exponential_wall_tanh() {
        let grid = make_grid(-1.0, 1.0, 64).unwrap();
        let spec = IbpSpec::new(-0.5, 0.5, 1.0, "tanh").unwrap();
        let b = single(0.0, 0.0, BoundaryCurve::constant(0.0));
        let check = ibp_check(
            &b,
            &HamiltonianSpec::exponential(),
            &grid,
            &spec,
            100_000,
            9,
        )
        .unwrap();
        assert!(
            check.residual.abs() <= 3.0 * check.se,
            "residual {} vs se {}",
            check.residual,
            check.se
        );
    }

    #[test]
    fn ibp_randomized_configurations() {
        // 20 randomized (boundary, window, endpoint) setups, H = e^x
        let mut rng = rng_from_seed(71);
        let mut failures = 0;
        for trial in 0..20u64 {
            let m = 32;
            let grid = make_grid(-1.0, 1.0, m).unwrap();
            let pts = grid.points().to_vec();
            let ca = rng.gen_range(1..m / 2);
            let cb = rng.gen_range(m / 2 + 1..m);
            let x = rng.gen::<f64>() - 0.5;
            let y = rng.gen::<f64>() - 0.5;
            let level = -1.5 + rng.gen::<f64>();
            let slope = rng.gen::<f64>() - 0.5;
            let b = single(x, y, BoundaryCurve::from_fn(move |s| level + slope * s));
            let spec = IbpSpec::new(pts[ca], pts[cb], 1.0, "tanh").unwrap();
            let check = ibp_check(
                &b,
                &HamiltonianSpec::exponential(),
                &grid,
                &spec,
                30_000,
                split_seed(73, trial),
            )
            .unwrap();
            if check.residual.abs() > 3.0 * check.se {
                failures += 1;
            }
        }
        assert!(failures <= 1, "{failures}/20 configurations outside 3 SE");
    }

    #[test]
    fn ibp_rejects_bad_input() {
        let grid = make_grid(-1.0, 1.0, 16).unwrap();
        let spec = IbpSpec::new(0.0, 0.5, 1.0, "tanh").unwrap();
        let b = single(0.0, 0.0, BoundaryCurve::absent());
        assert!(ibp_check(&b, &HamiltonianSpec::hard_wall(), &grid, &spec, 1_000, 1).is_err());
        assert!(ibp_check(&b, &HamiltonianSpec::zero(), &grid, &spec, 99, 1).is_err());
    }

    #[test]
    fn antithetic_odd_component_vanishes() {
        let grid = make_grid(-1.0, 1.0, 64).unwrap();
        let spec = IbpSpec::new(0.0, 1.0, 1.0, "identity").unwrap();
        let b = single(0.2, -0.4, BoundaryCurve::absent());
        let worst = gaussian_antithetic_residual(&b, &grid, &spec, 1_000, 13).unwrap();
        assert!(worst <= 1e-12, "odd residual {worst}");
    }

    fn synthetic_samples(n: usize, gap_level: f64) -> Vec<LineEnsembleState> {
        let grid = make_grid(-1.0, 1.0, 8).unwrap();
        let boundary = BoundaryData::new(
            1,
            3,
            vec![0.0, gap_level, 2.0 * gap_level],
            vec![0.0, gap_level, 2.0 * gap_level],
            BoundaryCurve::absent(),
            BoundaryCurve::absent(),
        )
        .unwrap();
        let mut rng = rng_from_seed(83);
        (0..n)
            .map(|_| {
                let jitter: f64 = 0.01 * (rng.gen::<f64>() - 0.5);
                let mk = |lvl: f64| {
                    let mut v = vec![lvl; grid.len()];
                    for item in v.iter_mut().take(grid.len() - 1).skip(1) {
                        *item += jitter;
                    }
                    v
                };
                LineEnsembleState::new(
                    grid.clone(),
                    vec![mk(0.0), mk(gap_level), mk(2.0 * gap_level)],
                    boundary.clone(),
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn gap_moment_on_synthetic_stream() {
        // flat lines at gap -1: mean exp(gap) = e^{-1} up to the jitter
        let samples = synthetic_samples(400, -1.0);
        let r = gap_moment(&samples, 1).unwrap();
        assert_relative_eq!(r.value, (-1.0f64).exp(), max_relative = 0.01);
        assert!(r.standard_error >= 0.0);
        assert!(gap_moment(&samples, 0).is_err());
        assert!(gap_moment(&samples, 3).is_err());
        assert!(gap_moment(&samples[..30], 1).is_err());
    }

    #[test]
    fn tail_estimates_vacuous_and_ordering() {
        let samples = synthetic_samples(200, -1.0);
        let vac = tail_estimates(&samples, 0, -1e6).unwrap();
        assert_eq!(vac.p_plus.value, 1.0);
        assert_eq!(vac.q_plus.value, 1.0);
        let far = tail_estimates(&samples, 0, 1e6).unwrap();
        assert_eq!(far.p_minus.value, 0.0);
        assert_eq!(far.p_plus.value, 0.0);
        assert_eq!(far.q_minus.value, 0.0);
        assert_eq!(far.q_plus.value, 0.0);
        for x in [-2.0, -0.5, 0.0, 0.005, 0.5] {
            let te = tail_estimates(&samples, 1, x).unwrap();
            assert!(te.q_minus.value <= te.p_minus.value);
            assert!(te.q_plus.value <= te.p_plus.value);
        }
    }

    #[test]
    fn markov_bound_shape() {
        let p1 = 0.01;
        assert_relative_eq!(markov_tail_bound(1, 5.0, p1), p1);
        assert!(markov_tail_bound(4, 1e9, p1) <= p1 + 1e-12);
        assert!(markov_tail_bound(4, 6.0, p1) > p1);
    }
}
