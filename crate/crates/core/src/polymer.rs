//! Small-N O'Connell-Yor polymer partition functions, the line ensemble
//! built from their ratios, and the KPZ centering.
//!
//! An up-right path from (0, 1) to (t, N) is encoded by its nondecreasing
//! jump times `s_1 <= ... <= s_{N-1}` in [0, t]. An n-tuple of such paths is
//! non-intersecting (strictly ordered away from the shared endpoints) exactly
//! when `s^{(j)}_{i+1} <= s^{(j+1)}_i` for consecutive paths; this pins the
//! first `n - j` jumps of path `j` to 0 and its last `j - 1` jumps to `t`,
//! leaving `n (N - n)` free coordinates.

use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numeric::mean_and_se;
use crate::seeding::rng_from_seed;

const NODE_BUDGET: u64 = 100_000_000;

/// A fixed realization of `N` independent standard Brownian motions on a
/// fine mesh of `[0, s_max]`, evaluated by linear interpolation.
#[derive(Clone, Debug)]
pub struct NoisePath {
    step: f64,
    /// cumulative values per line, starting at 0
    lines: Vec<Vec<f64>>,
}

impl NoisePath {
    /// Gaussian increments of variance `step` per cell, one stream per line.
    pub fn generate(n_lines: usize, s_max: f64, step: f64, seed: u64) -> Result<Self> {
        if n_lines == 0 || s_max <= 0.0 || step <= 0.0 {
            return Err(Error::invalid("noise needs lines, s_max > 0, step > 0"));
        }
        let cells = (s_max / step).ceil() as usize;
        let mut rng = rng_from_seed(seed);
        let sd = step.sqrt();
        let mut lines = Vec::with_capacity(n_lines);
        for _ in 0..n_lines {
            let mut cum = Vec::with_capacity(cells + 1);
            cum.push(0.0);
            for c in 0..cells {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                cum.push(cum[c] + sd * z);
            }
            lines.push(cum);
        }
        Ok(NoisePath { step, lines })
    }

    /// Build from explicit cumulative values (testing hook).
    pub fn from_values(step: f64, lines: Vec<Vec<f64>>) -> Result<Self> {
        if step <= 0.0 || lines.is_empty() || lines.iter().any(|l| l.len() < 2) {
            return Err(Error::invalid("invalid explicit noise"));
        }
        Ok(NoisePath { step, lines })
    }

    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn s_max(&self) -> f64 {
        (self.lines[0].len() - 1) as f64 * self.step
    }

    /// `B_line(s)` by linear interpolation; errors outside `[0, s_max]`.
    pub fn value(&self, line: usize, s: f64) -> Result<f64> {
        if line >= self.lines.len() {
            return Err(Error::invalid(format!("no noise line {line}")));
        }
        if s < 0.0 || s > self.s_max() + 1e-12 {
            return Err(Error::invalid(format!(
                "time {s} outside noise domain [0, {}]",
                self.s_max()
            )));
        }
        let cum = &self.lines[line];
        let pos = (s / self.step).min((cum.len() - 1) as f64);
        let idx = (pos.floor() as usize).min(cum.len() - 2);
        let frac = pos - idx as f64;
        Ok(cum[idx] * (1.0 - frac) + cum[idx + 1] * frac)
    }

    /// Shift every increment up by `c * step` (monotonicity probe).
    pub fn tilted(&self, c: f64) -> NoisePath {
        let lines = self
            .lines
            .iter()
            .map(|l| {
                l.iter()
                    .enumerate()
                    .map(|(i, v)| v + c * self.step * i as f64)
                    .collect()
            })
            .collect();
        NoisePath {
            step: self.step,
            lines,
        }
    }
}

/// Level of the path with the given jump times at time `s`:
/// `1 + #{i : s_i <= s}`.
pub fn path_level(jumps: &[f64], s: f64) -> usize {
    1 + jumps.iter().filter(|&&j| j <= s).count()
}

/// Recover the jump times `s_i = inf{s : level > i}` of the step function
/// defined by a sorted jump vector: the bijection round-trip.
pub fn jump_times_from_level(jumps: &[f64], horizon: f64) -> Vec<f64> {
    let n_jumps = jumps.len();
    (1..=n_jumps)
        .map(|i| {
            // smallest time with level > i; scan the sorted candidates
            let mut t = horizon;
            for &cand in jumps {
                if path_level(jumps, cand) > i && cand < t {
                    t = cand;
                }
            }
            t
        })
        .collect()
}

/// `E(phi) = B_1(s_1) + (B_2(s_2) - B_2(s_1)) + ... + (B_N(s) - B_N(s_{N-1}))`
/// for the full (length N-1) jump vector of one path ending at time `s_end`.
pub fn path_energy(jumps: &[f64], noise: &NoisePath, s_end: f64) -> Result<f64> {
    let n_levels = jumps.len() + 1;
    if n_levels > noise.n_lines() {
        return Err(Error::invalid("noise has fewer lines than path levels"));
    }
    let mut energy = 0.0;
    let mut prev = 0.0;
    for (i, &s) in jumps.iter().enumerate() {
        energy += noise.value(i, s)? - noise.value(i, prev)?;
        prev = s;
    }
    energy += noise.value(n_levels - 1, s_end)? - noise.value(n_levels - 1, prev)?;
    Ok(energy)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolymerMethod {
    Quadrature,
    Mc,
}

impl PolymerMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(PolymerMethod::Quadrature),
            "mc" => Ok(PolymerMethod::Mc),
            other => Err(Error::invalid(format!("unknown polymer method '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PolymerEstimate {
    pub value: f64,
    pub se: f64,
}

/// Layout of the free jump coordinates for `n` non-intersecting paths to
/// level `N`: path `j` (1-based) has its first `n - j` jumps pinned to 0 and
/// last `j - 1` pinned to `t`.
fn assemble_jumps(big_n: usize, n: usize, t: f64, free: &[f64]) -> Vec<Vec<f64>> {
    let per_path = big_n - n;
    let mut paths = Vec::with_capacity(n);
    for j in 1..=n {
        let mut jumps = Vec::with_capacity(big_n - 1);
        for _ in 0..n - j {
            jumps.push(0.0);
        }
        jumps.extend_from_slice(&free[(j - 1) * per_path..j * per_path]);
        for _ in 0..j - 1 {
            jumps.push(t);
        }
        paths.push(jumps);
    }
    paths
}

fn admissible(paths: &[Vec<f64>]) -> bool {
    for p in paths {
        if p.windows(2).any(|w| w[0] > w[1]) {
            return false;
        }
    }
    for w in paths.windows(2) {
        let (upper, lower) = (&w[0], &w[1]);
        // strict interleaving away from the pinned boundary values
        for i in 0..upper.len() - 1 {
            if upper[i + 1] > lower[i] {
                return false;
            }
        }
    }
    true
}

/// `Z^N_n(t)`: integral of `exp(sum of path energies)` over the free jump
/// coordinates of the non-intersecting configuration polytope. Quadrature
/// uses a tensor-product Gauss-Legendre grid with `resolution` nodes per
/// dimension on the unit cube, mapped so that each coordinate ranges over
/// its admissible interval given the earlier ones (which absorbs both the
/// within-path ordering and the cross-path constraint, keeping the integrand
/// smooth). MC sorts uniform draws within each path and rejects on the
/// cross-path constraint.
pub fn oy_partition(
    big_n: usize,
    n: usize,
    t: f64,
    noise: &NoisePath,
    method: PolymerMethod,
    resolution: usize,
    seed: u64,
) -> Result<PolymerEstimate> {
    if n == 0 || n > big_n {
        return Err(Error::invalid("need 1 <= n <= N"));
    }
    if t <= 0.0 || t > noise.s_max() + 1e-12 {
        return Err(Error::invalid("t outside noise domain"));
    }
    let dims = n * (big_n - n);
    if dims == 0 {
        // fully packed: a single admissible configuration
        let paths = assemble_jumps(big_n, n, t, &[]);
        let mut e = 0.0;
        for p in &paths {
            e += path_energy(p, noise, t)?;
        }
        return Ok(PolymerEstimate {
            value: e.exp(),
            se: 0.0,
        });
    }
    match method {
        PolymerMethod::Quadrature => {
            if resolution == 0 {
                return Err(Error::invalid("resolution must be positive"));
            }
            let evals = (resolution as u64)
                .checked_pow(dims as u32)
                .unwrap_or(u64::MAX);
            if evals > NODE_BUDGET {
                return Err(Error::BudgetExceeded(format!(
                    "{resolution}^{dims} node evaluations exceed the {NODE_BUDGET} budget"
                )));
            }
            let (nodes, weights) = gauss_legendre_nodes(resolution, 0.0, 1.0);
            let per_path = big_n - n;
            let mut idx = vec![0usize; dims];
            let mut free = vec![0.0; dims];
            let mut total = 0.0;
            loop {
                let mut w = 1.0;
                // Map the unit-cube node into the polytope: coordinate
                // (path j, local i) lives in [max(previous jump of path j,
                // jump i+1 of path j-1), t].
                let mut empty = false;
                for d in 0..dims {
                    let j = d / per_path; // 0-based path
                    let i_local = d % per_path;
                    let mut lo: f64 = if i_local > 0 {
                        free[d - 1]
                    } else {
                        0.0 // leading jumps of path j are pinned to 0 or absent
                    };
                    if j > 0 {
                        // cross constraint: jump (i+1) of the path above;
                        // that path has one more pinned leading zero, so the
                        // bound is the same local slot of its free block
                        lo = lo.max(free[(j - 1) * per_path + i_local]);
                    }
                    let width = t - lo;
                    if width <= 0.0 {
                        empty = true;
                        break;
                    }
                    free[d] = lo + width * nodes[idx[d]];
                    w *= width * weights[idx[d]];
                }
                if !empty {
                    let paths = assemble_jumps(big_n, n, t, &free);
                    debug_assert!(admissible(&paths));
                    let mut e = 0.0;
                    for p in &paths {
                        e += path_energy(p, noise, t)?;
                    }
                    total += w * e.exp();
                }
                // odometer increment
                let mut d = 0;
                loop {
                    if d == dims {
                        return Ok(PolymerEstimate {
                            value: total,
                            se: 0.0,
                        });
                    }
                    idx[d] += 1;
                    if idx[d] < resolution {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
            }
        }
        PolymerMethod::Mc => {
            let samples = resolution as u64;
            if samples < 2 {
                return Err(Error::invalid("mc needs resolution >= 2 samples"));
            }
            if samples > NODE_BUDGET {
                return Err(Error::BudgetExceeded(format!(
                    "{samples} samples exceed the {NODE_BUDGET} budget"
                )));
            }
            let per_path = big_n - n;
            // volume of one path's ordered simplex
            let log_simplex = per_path as f64 * t.ln() - ln_gamma(per_path as f64 + 1.0);
            let scale = (n as f64 * log_simplex).exp();
            let mut rng = rng_from_seed(seed);
            let mut vals = Vec::with_capacity(samples as usize);
            let mut free = vec![0.0; dims];
            for _ in 0..samples {
                for j in 0..n {
                    let slot = &mut free[j * per_path..(j + 1) * per_path];
                    for v in slot.iter_mut() {
                        *v = t * rng.gen::<f64>();
                    }
                    slot.sort_by(|a, b| a.partial_cmp(b).unwrap());
                }
                let paths = assemble_jumps(big_n, n, t, &free);
                if admissible(&paths) {
                    let mut e = 0.0;
                    for p in &paths {
                        e += path_energy(p, noise, t)?;
                    }
                    vals.push(scale * e.exp());
                } else {
                    vals.push(0.0);
                }
            }
            let (mean, se) = mean_and_se(&vals);
            Ok(PolymerEstimate { value: mean, se })
        }
    }
}

/// Gauss-Legendre nodes/weights on [a, b]: the 5-point rule tiled over
/// enough equal panels to reach at least `count` nodes per dimension.
fn gauss_legendre_nodes(count: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    use crate::numeric::{GL5_NODES as X, GL5_WEIGHTS as W};
    let panels = count.div_ceil(5).max(1);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * 5);
    let mut weights = Vec::with_capacity(panels * 5);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for q in 0..5 {
            nodes.push(mid + 0.5 * h * X[q]);
            weights.push(0.5 * h * W[q]);
        }
    }
    (nodes, weights)
}

/// `X^N_n(s) = log(Z^N_n(s) / Z^N_{n-1}(s))`, with `Z^N_0 = 1`.
pub fn oy_line(
    big_n: usize,
    n: usize,
    s: f64,
    noise: &NoisePath,
    method: PolymerMethod,
    resolution: usize,
    seed: u64,
) -> Result<f64> {
    let z_n = oy_partition(big_n, n, s, noise, method, resolution, seed)?;
    if z_n.value <= 0.0 {
        return Err(Error::DegenerateEstimate(
            "partition function estimate is not positive".into(),
        ));
    }
    let z_prev = if n == 1 {
        1.0
    } else {
        let z = oy_partition(big_n, n - 1, s, noise, method, resolution, seed ^ 0x9e37)?;
        if z.value <= 0.0 {
            return Err(Error::DegenerateEstimate(
                "partition function estimate is not positive".into(),
            ));
        }
        z.value
    };
    Ok((z_n.value / z_prev).ln())
}

/// `log C(N, t, x) = (N-1)(log t - log N)/2 + N + (sqrt(tN) + x)/2 + x sqrt(N/t)`.
pub fn log_kpz_center(big_n: usize, t: f64, x: f64) -> Result<f64> {
    if big_n == 0 || t <= 0.0 {
        return Err(Error::invalid("centering needs N >= 1, t > 0"));
    }
    let nf = big_n as f64;
    Ok((nf - 1.0) * (t.ln() - nf.ln()) / 2.0
        + nf
        + ((t * nf).sqrt() + x) / 2.0
        + x * (nf / t).sqrt())
}

/// `H^{t,N}_n(x) = X^N_n(sqrt(tN) + x) - log C(N, t, x)`.
pub fn scaled_line(
    big_n: usize,
    t: f64,
    n: usize,
    x: f64,
    noise: &NoisePath,
    method: PolymerMethod,
    resolution: usize,
    seed: u64,
) -> Result<f64> {
    let s = (t * big_n as f64).sqrt() + x;
    if s <= 0.0 {
        return Err(Error::invalid(
            "evaluation time sqrt(tN) + x must be positive",
        ));
    }
    Ok(oy_line(big_n, n, s, noise, method, resolution, seed)? - log_kpz_center(big_n, t, x)?)
}

/// The alternate normalization: `H - log(t^{1-n} (n-1)!)`.
pub fn scaled_line_modified(
    big_n: usize,
    t: f64,
    n: usize,
    x: f64,
    noise: &NoisePath,
    method: PolymerMethod,
    resolution: usize,
    seed: u64,
) -> Result<f64> {
    let shift = (1.0 - n as f64) * t.ln() + ln_gamma(n as f64);
    Ok(scaled_line(big_n, t, n, x, noise, method, resolution, seed)? - shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn noise(seed: u64, lines: usize, s_max: f64) -> NoisePath {
        NoisePath::generate(lines, s_max, 1e-3 * s_max, seed).unwrap()
    }

    #[test]
    fn noise_basics() {
        let np = noise(1, 2, 2.0);
        assert_eq!(np.value(0, 0.0).unwrap(), 0.0);
        assert!(np.value(0, 3.0).is_err());
        assert!(np.value(5, 0.5).is_err());
    }

    #[test]
    fn path_energy_edge_cases() {
        let np = noise(2, 2, 1.0);
        // N = 1: empty telescope
        assert_relative_eq!(
            path_energy(&[], &np, 1.0).unwrap(),
            np.value(0, 1.0).unwrap()
        );
        // N = 2, jump at 0: B_2(s)
        assert_relative_eq!(
            path_energy(&[0.0], &np, 1.0).unwrap(),
            np.value(1, 1.0).unwrap()
        );
        // N = 2, jump at s: B_1(s)
        assert_relative_eq!(
            path_energy(&[1.0], &np, 1.0).unwrap(),
            np.value(0, 1.0).unwrap()
        );
    }

    #[test]
    fn bijection_round_trip() {
        let jumps = vec![0.0, 0.25, 0.25, 0.7];
        let rec = jump_times_from_level(&jumps, 1.0);
        assert_eq!(rec, jumps);
        assert_eq!(path_level(&jumps, 0.1), 2);
        assert_eq!(path_level(&jumps, 0.25), 4);
        assert_eq!(path_level(&jumps, 0.9), 5);
    }

    #[test]
    fn single_path_single_level_is_exp_noise() {
        let np = noise(3, 1, 1.5);
        for method in [PolymerMethod::Quadrature, PolymerMethod::Mc] {
            let z = oy_partition(1, 1, 1.5, &np, method, 10, 4).unwrap();
            assert_relative_eq!(z.value, np.value(0, 1.5).unwrap().exp(), epsilon = 1e-12);
            assert_eq!(z.se, 0.0);
        }
    }

    #[test]
    fn fully_packed_identity() {
        // n = N: Z = exp(sum_i B_i(t))
        let np = noise(4, 3, 1.0);
        let z = oy_partition(3, 3, 1.0, &np, PolymerMethod::Quadrature, 10, 4).unwrap();
        let expect =
            (np.value(0, 1.0).unwrap() + np.value(1, 1.0).unwrap() + np.value(2, 1.0).unwrap())
                .exp();
        assert_relative_eq!(z.value, expect, epsilon = 1e-10);
    }

    #[test]
    fn quadrature_vs_mc_small_cases() {
        // all (N, n) with N <= 3: cross-method agreement within 3 SE
        for seed in [7u64, 8] {
            for big_n in 1..=3usize {
                let np = noise(100 + seed, big_n, 1.0);
                for n in 1..=big_n {
                    let q = oy_partition(big_n, n, 1.0, &np, PolymerMethod::Quadrature, 300, 0)
                        .unwrap();
                    let mc =
                        oy_partition(big_n, n, 1.0, &np, PolymerMethod::Mc, 40_000, seed).unwrap();
                    let tol = 3.0 * mc.se + 1e-3 * q.value.abs();
                    assert!(
                        (q.value - mc.value).abs() <= tol,
                        "N={big_n} n={n}: quad {} vs mc {} +/- {}",
                        q.value,
                        mc.value,
                        mc.se
                    );
                }
            }
        }
    }

    #[test]
    fn n2_cross_method_ten_seeds() {
        for seed in 0..10u64 {
            let np = noise(200 + seed, 2, 1.0);
            let q = oy_partition(2, 1, 1.0, &np, PolymerMethod::Quadrature, 200, 0).unwrap();
            let mc = oy_partition(2, 1, 1.0, &np, PolymerMethod::Mc, 50_000, seed).unwrap();
            assert!(
                (q.value - mc.value).abs() <= 3.0 * mc.se,
                "seed {seed}: {} vs {} +/- {}",
                q.value,
                mc.value,
                mc.se
            );
        }
    }

    #[test]
    fn oy_line_identities() {
        let np = noise(11, 1, 2.0);
        // N = 1: X^1_1(s) = B_1(s)
        let x = oy_line(1, 1, 1.7, &np, PolymerMethod::Quadrature, 5, 0).unwrap();
        assert_relative_eq!(x, np.value(0, 1.7).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn monotone_in_noise() {
        let np = noise(13, 2, 1.0);
        let up = np.tilted(0.5);
        let z0 = oy_partition(2, 1, 1.0, &np, PolymerMethod::Quadrature, 60, 0).unwrap();
        let z1 = oy_partition(2, 1, 1.0, &up, PolymerMethod::Quadrature, 60, 0).unwrap();
        assert!(z1.value >= z0.value);
    }

    #[test]
    fn budget_guard() {
        let np = noise(17, 4, 1.0);
        // dims = 1 * 3 = 3; 1000^3 = 1e9 > budget
        let err = oy_partition(4, 1, 1.0, &np, PolymerMethod::Quadrature, 1000, 0);
        assert!(matches!(err, Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn kpz_center_values() {
        assert_relative_eq!(log_kpz_center(1, 1.0, 0.0).unwrap(), 1.5);
        let t = 2.3;
        assert_relative_eq!(
            log_kpz_center(1, t, 0.0).unwrap(),
            1.0 + t.sqrt() / 2.0,
            epsilon = 1e-12
        );
        // affine in x with slope 1/2 + sqrt(N/t)
        let (big_n, t) = (3usize, 0.7);
        let slope = 0.5 + (big_n as f64 / t).sqrt();
        let c0 = log_kpz_center(big_n, t, 0.2).unwrap();
        let c1 = log_kpz_center(big_n, t, 1.2).unwrap();
        assert_relative_eq!(c1 - c0, slope, epsilon = 1e-12);
    }

    #[test]
    fn scaled_line_smallest_case() {
        // N = 1, n = 1: H(0) = B_1(sqrt(t)) - 1 - sqrt(t)/2
        let t = 1.3f64;
        let np = noise(19, 1, 3.0);
        let h = scaled_line(1, t, 1, 0.0, &np, PolymerMethod::Quadrature, 5, 0).unwrap();
        assert_relative_eq!(
            h,
            np.value(0, t.sqrt()).unwrap() - 1.0 - t.sqrt() / 2.0,
            epsilon = 1e-12
        );
        // modified normalization differs by -log(t^{1-n}(n-1)!) = -0 for n=1? no:
        // n = 1: shift = (1-1) log t + log 0! = 0
        let hm = scaled_line_modified(1, t, 1, 0.0, &np, PolymerMethod::Quadrature, 5, 0).unwrap();
        assert_relative_eq!(hm, h, epsilon = 1e-12);
        // n = 2 shift at N = 2
        let np2 = noise(23, 2, 4.0);
        let h2 = scaled_line(2, t, 2, 0.0, &np2, PolymerMethod::Quadrature, 30, 0).unwrap();
        let hm2 =
            scaled_line_modified(2, t, 2, 0.0, &np2, PolymerMethod::Quadrature, 30, 0).unwrap();
        assert_relative_eq!(hm2 - h2, -((1.0f64 - 2.0) * t.ln() + 0.0), epsilon = 1e-12);
    }
}
