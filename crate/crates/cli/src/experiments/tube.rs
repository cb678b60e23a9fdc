//! Tube probability: naive mesh-monitored Monte Carlo against the exact
//! theta-series oracle across a grid of length-to-width ratios.

use gibbs_lines_core::bridge::{tube_probability_exact, tube_probability_mc};
use gibbs_lines_core::seeding::split_seed;
use gibbs_lines_core::{EstimateReport, Result};

use super::{echo_config, fmt_f64, Experiment, Outcome, RunContext};
use crate::config::Config;

pub struct VerifyTube;

impl Experiment for VerifyTube {
    fn name(&self) -> &'static str {
        "verify-tube"
    }

    fn run(&self, cfg: &Config, ctx: &RunContext) -> Result<Outcome> {
        let start = std::time::Instant::now();
        let seed = cfg.get_u64("seed")?;
        let r = cfg.get_f64_or("r", 1.0)?;
        let ratios = cfg.get_f64_list_or("ratios", &[1.0, 4.0, 16.0])?;
        let mesh = cfg.get_usize_or("mesh", 4096)?;
        let n_samples = cfg.get_u64_or("n_samples", 100_000)?;
        let rel_tol = cfg.get_f64_or("rel_tol", 0.02)?;
        let replicas = cfg.get_usize_or("replicas", 8)?.max(1);
        let batch = n_samples.div_ceil(replicas as u64).max(1);

        // one replica unit per (ratio, batch); order is fixed so the CSV is
        // identical however many workers run them
        let jobs: Vec<(usize, usize)> = (0..ratios.len())
            .flat_map(|ri| (0..replicas).map(move |b| (ri, b)))
            .collect();
        let results = ctx.parallel_map(jobs.len(), |j| {
            let (ri, b) = jobs[j];
            let length = ratios[ri] * r * r;
            tube_probability_mc(
                length,
                r,
                mesh,
                batch,
                split_seed(seed, (ri * replicas + b) as u64),
            )
        })?;

        let mut reports = Vec::new();
        let mut csv_rows = Vec::new();
        for (ri, ratio) in ratios.iter().enumerate() {
            let length = ratio * r * r;
            let exact = tube_probability_exact(length, r)?;
            let batch_estimates: Vec<&EstimateReport> = jobs
                .iter()
                .zip(&results)
                .filter(|((i, _), _)| *i == ri)
                .map(|(_, est)| est)
                .collect();
            let total = batch * replicas as u64;
            let p_hat = batch_estimates.iter().map(|e| e.value).sum::<f64>() / replicas as f64;
            let se = (p_hat * (1.0 - p_hat) / total as f64).sqrt();
            let rel_err = (p_hat - exact).abs() / exact;
            for ((_, b), est) in jobs.iter().zip(&results).filter(|((i, _), _)| *i == ri) {
                csv_rows.push(format!(
                    "{},{b},{},{}",
                    fmt_f64(*ratio),
                    fmt_f64(est.value),
                    fmt_f64(est.standard_error)
                ));
            }
            reports.push(echo_config(
                EstimateReport::new(
                    format!("tube_rel_error_ratio_{ratio}"),
                    rel_err,
                    se / exact,
                    total,
                )
                .with_provenance("estimate", p_hat)
                .with_provenance("exact", exact)
                .with_provenance("length", length)
                .with_provenance("r", r)
                .with_threshold(rel_tol)
                .with_wall_time(start.elapsed().as_secs_f64()),
                cfg,
            ));
        }

        Ok(Outcome {
            reports,
            csv_header: "ratio,replica,estimate,se".to_string(),
            csv_rows,
        })
    }
}
