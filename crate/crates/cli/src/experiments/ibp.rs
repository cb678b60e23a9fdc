//! Integration-by-parts identity for a single line between deterministic
//! boundaries: the increment's Gaussian term balances the covariance-weighted
//! interaction-derivative sum. Replicas run independent importance-sampling
//! batches and merge by averaging.

use gibbs_lines_core::ensemble::{make_grid, BoundaryCurve, BoundaryData, HamiltonianSpec};
use gibbs_lines_core::identities::{ibp_check, IbpSpec};
use gibbs_lines_core::seeding::split_seed;
use gibbs_lines_core::{Error, EstimateReport, Result};

use super::{echo_config, fmt_f64, Experiment, Outcome, RunContext};
use crate::config::Config;

pub struct VerifyIbp;

impl Experiment for VerifyIbp {
    fn name(&self) -> &'static str {
        "verify-ibp"
    }

    fn required_keys(&self) -> &'static [&'static str] {
        &["a", "b"]
    }

    fn run(&self, cfg: &Config, ctx: &RunContext) -> Result<Outcome> {
        let start = std::time::Instant::now();
        let seed = cfg.get_u64("seed")?;
        let half_width = cfg.get_f64_or("half_width", 1.0)?;
        let a = cfg.get_f64("a")?;
        let b = cfg.get_f64("b")?;
        let function = cfg.get_str_or("function", "tanh");
        let ham = match cfg.get_str_or("hamiltonian", "exponential") {
            "exponential" => HamiltonianSpec::exponential(),
            "zero" => HamiltonianSpec::zero(),
            other => return Err(Error::invalid(format!("unsupported hamiltonian '{other}'"))),
        };
        let x = cfg.get_f64_or("x", 0.0)?;
        let y = cfg.get_f64_or("y", 0.0)?;
        let lower =
            match cfg.get_str_or("lower", "none") {
                "none" => BoundaryCurve::absent(),
                level => BoundaryCurve::constant(level.parse().map_err(|_| {
                    Error::invalid("config key 'lower' must be a number or 'none'")
                })?),
            };
        let cells = cfg.get_usize_or("cells", 64)?;
        let n_samples = cfg.get_u64_or("n_samples", 100_000)?;
        let replicas = cfg.get_usize_or("replicas", 8)?.max(1);

        let boundary = BoundaryData::single(x, y, BoundaryCurve::absent(), lower)?;
        let grid = make_grid(-half_width, half_width, cells)?;
        let spec = IbpSpec::new(a, b, half_width, function)?;
        let batch = n_samples.div_ceil(replicas as u64).max(100);

        let checks = ctx.parallel_map(replicas, |i| {
            ibp_check(
                &boundary,
                &ham,
                &grid,
                &spec,
                batch,
                split_seed(seed, i as u64),
            )
        })?;

        let rf = replicas as f64;
        let residual = checks.iter().map(|c| c.residual).sum::<f64>() / rf;
        let lhs = checks.iter().map(|c| c.lhs).sum::<f64>() / rf;
        let rhs = checks.iter().map(|c| c.rhs).sum::<f64>() / rf;
        let se = checks.iter().map(|c| c.se * c.se).sum::<f64>().sqrt() / rf;

        let csv_rows = checks
            .iter()
            .enumerate()
            .map(|(i, c)| {
                format!(
                    "{i},{},{},{},{}",
                    fmt_f64(c.lhs),
                    fmt_f64(c.rhs),
                    fmt_f64(c.residual),
                    fmt_f64(c.se)
                )
            })
            .collect();

        let report = echo_config(
            EstimateReport::new(
                "ibp_abs_residual",
                residual.abs(),
                se,
                batch * replicas as u64,
            )
            .with_provenance("lhs", lhs)
            .with_provenance("rhs", rhs)
            .with_threshold(3.0 * se)
            .with_wall_time(start.elapsed().as_secs_f64()),
            cfg,
        );
        Ok(Outcome {
            reports: vec![report],
            csv_header: "replica,lhs,rhs,residual,se".to_string(),
            csv_rows,
        })
    }
}
