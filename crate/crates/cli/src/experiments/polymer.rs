//! Semi-discrete polymer cross-method check: quadrature and Monte Carlo
//! partition functions agree within Monte Carlo error across independent
//! noise realizations, and the single-line case matches its closed form.

use gibbs_lines_core::polymer::{oy_partition, NoisePath, PolymerMethod};
use gibbs_lines_core::seeding::split_seed;
use gibbs_lines_core::{EstimateReport, Result};

use super::{echo_config, fmt_f64, Experiment, Outcome, RunContext};
use crate::config::Config;

pub struct Polymer;

impl Experiment for Polymer {
    fn name(&self) -> &'static str {
        "polymer"
    }

    fn run(&self, cfg: &Config, ctx: &RunContext) -> Result<Outcome> {
        let start = std::time::Instant::now();
        let seed = cfg.get_u64("seed")?;
        let big_n = cfg.get_usize_or("N", 2)?;
        let n = cfg.get_usize_or("n", 1)?;
        let t = cfg.get_f64_or("t", 1.0)?;
        let noise_count = cfg.get_usize_or("noise_seeds", 10)?.max(1);
        let step_factor = cfg.get_f64_or("step_factor", 1e-3)?;
        let res_quad = cfg.get_usize_or("resolution_quad", 2_000)?;
        let res_mc = cfg.get_usize_or("resolution_mc", 50_000)?;

        let results = ctx.parallel_map(noise_count, |i| {
            let noise_seed = split_seed(seed, 1_000 + i as u64);
            let noise = NoisePath::generate(big_n, t, step_factor * t, noise_seed)?;
            let q = oy_partition(big_n, n, t, &noise, PolymerMethod::Quadrature, res_quad, 0)?;
            let mc = oy_partition(
                big_n,
                n,
                t,
                &noise,
                PolymerMethod::Mc,
                res_mc,
                split_seed(seed, i as u64),
            )?;
            Ok((q.value, mc.value, mc.se))
        })?;

        let mut failures = 0u64;
        let mut csv_rows = Vec::new();
        for (i, (q, mc, se)) in results.iter().enumerate() {
            let within = (q - mc).abs() <= 3.0 * se;
            if !within {
                failures += 1;
            }
            csv_rows.push(format!(
                "{i},{},{},{},{}",
                fmt_f64(*q),
                fmt_f64(*mc),
                fmt_f64(*se),
                u8::from(within)
            ));
        }

        // single-line closed form: Z^1_1(t) = exp(B_1(t)), exact for both
        // methods, checked on the first noise realization
        let noise1 = NoisePath::generate(1, t, step_factor * t, split_seed(seed, 1_000))?;
        let z = oy_partition(1, 1, t, &noise1, PolymerMethod::Quadrature, 5, 0)?;
        let exact = noise1.value(0, t)?.exp();
        let identity_err = (z.value - exact).abs() / exact.abs().max(1.0);

        let wall = start.elapsed().as_secs_f64();
        let reports = vec![
            echo_config(
                EstimateReport::new(
                    "polymer_cross_method_failures",
                    failures as f64,
                    0.0,
                    noise_count as u64,
                )
                .with_provenance("N", big_n)
                .with_provenance("n", n)
                .with_threshold(0.0)
                .with_wall_time(wall),
                cfg,
            ),
            echo_config(
                EstimateReport::new("polymer_single_line_identity_error", identity_err, 0.0, 1)
                    .with_threshold(1e-12),
                cfg,
            ),
        ];
        Ok(Outcome {
            reports,
            csv_header: "noise_seed_index,quadrature,mc,mc_se,within_3se".to_string(),
            csv_rows,
        })
    }
}
