//! Concentration trend of the shifted top line on the finite-window
//! surrogate: upper-tail frequencies of `sup` of the shifted top line decay
//! in the level, with a negative fitted exponent of log-frequency against
//! `a^2 / T`.

use statrs::distribution::{ContinuousCDF, StudentsT};

use gibbs_lines_core::mcmc::{chain_diagnostics, run_chain_fold};
use gibbs_lines_core::{Error, EstimateReport, Result};

use super::surrogate::{surrogate_chain, SurrogateSpec};
use super::{echo_config, fmt_f64, Experiment, Outcome, RunContext};
use crate::config::Config;

pub struct Concentration;

impl Experiment for Concentration {
    fn name(&self) -> &'static str {
        "concentration"
    }

    fn run(&self, cfg: &Config, _ctx: &RunContext) -> Result<Outcome> {
        let start = std::time::Instant::now();
        let n = cfg.get_usize_or("n", 8)?;
        let t = cfg.get_f64_or("t", 1.0)?;
        let half_width = cfg.get_f64_or("half_width", 2.0)?;
        let spec = SurrogateSpec {
            n,
            t,
            half_width,
            n_scale: cfg.get_u64_or("n_scale", 4)? as u32,
            event_budget: cfg.get_u64_or("event_budget", 120_000_000)?,
            burn_in: cfg.get_u64_or("burn_in", 20_000_000)?,
            thin: cfg.get_u64_or("thin", 10_000)?,
            seed: cfg.get_u64("seed")?,
        };
        let levels = cfg.get_f64_list_or("levels", &[0.4, 0.6, 0.8, 1.0, 1.2, 1.4])?;
        let p_max = cfg.get_f64_or("p_max", 0.01)?;
        let min_ess = cfg.get_f64_or("min_ess", 100.0)?;

        let (chain_cfg, profile) = surrogate_chain(&spec)?;
        let grid = chain_cfg.grid()?;
        let center = grid.nearest_index(0.0);
        // shifted coordinates: subtract the stationary parabola per line
        let f_top: Vec<f64> = profile.sample(1, &grid);
        let f_bottom_center = profile.f(n, 0.0);

        let mut sups = Vec::new();
        let mut centers = Vec::new();
        run_chain_fold(&chain_cfg, |walk| {
            let mut sup = f64::NEG_INFINITY;
            for c in 0..=walk.cells() {
                sup = sup.max(walk.real_height(0, c) - f_top[c]);
            }
            sups.push(sup);
            centers.push(walk.real_height(n - 1, center) - f_bottom_center);
        })?;

        let diag = chain_diagnostics(&sups)?;
        if diag.ess < min_ess {
            return Err(Error::DegenerateEstimate(format!(
                "effective sample size {:.1} below {min_ess}",
                diag.ess
            )));
        }

        let n_snap = sups.len() as f64;
        let mut freqs = Vec::new();
        for &a in &levels {
            let count = sups.iter().filter(|&&s| s >= a).count();
            freqs.push((a, count as f64 / n_snap));
        }
        // regression of log-frequency on a^2 / T over strictly positive tails
        let pts: Vec<(f64, f64)> = freqs
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(a, p)| (a * a / half_width, p.ln()))
            .collect();
        if pts.len() < 3 {
            return Err(Error::DegenerateEstimate(
                "fewer than 3 levels with nonzero tail frequency".into(),
            ));
        }
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let det = m * sxx - sx * sx;
        let slope = (m * sxy - sx * sy) / det;
        let intercept = (sy - slope * sx) / m;
        let ss_res: f64 = pts
            .iter()
            .map(|(x, y)| {
                let e = y - intercept - slope * x;
                e * e
            })
            .sum();
        let slope_se = (ss_res / (m - 2.0) * m / det).sqrt();
        let t_stat = slope / slope_se;
        let dist = StudentsT::new(0.0, 1.0, m - 2.0)
            .map_err(|e| Error::invalid(format!("t distribution: {e}")))?;
        let p_value = dist.cdf(t_stat); // one-sided: slope < 0

        let monotone = freqs.windows(2).all(|w| w[1].1 <= w[0].1);
        let mut centers_sorted = centers.clone();
        centers_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = centers_sorted[centers_sorted.len() / 2];

        let wall = start.elapsed().as_secs_f64();
        let mut slope_report =
            EstimateReport::new("concentration_slope", slope, slope_se, sups.len() as u64)
                .with_effective(diag.ess)
                .with_provenance("p_value", p_value)
                .with_provenance("pass_rule", format!("value < 0 with p < {p_max}"))
                .with_wall_time(wall);
        slope_report.pass = Some(slope < 0.0 && p_value < p_max);
        let mut mono_report = EstimateReport::new(
            "tail_monotone_violations",
            if monotone { 0.0 } else { 1.0 },
            0.0,
            levels.len() as u64,
        )
        .with_threshold(0.0);
        mono_report.pass = Some(monotone);
        let median_report =
            EstimateReport::new("center_line_median", median, 0.0, centers.len() as u64)
                .with_provenance(
                    "note",
                    "qualitative location check of the lowest shifted line",
                );

        let csv_rows = sups
            .iter()
            .zip(&centers)
            .enumerate()
            .map(|(i, (s, c))| format!("{i},{},{}", fmt_f64(*s), fmt_f64(*c)))
            .collect();

        Ok(Outcome {
            reports: vec![
                echo_config(slope_report, cfg),
                echo_config(mono_report, cfg),
                echo_config(median_report, cfg),
            ],
            csv_header: "snapshot,sup_top_shifted,center_bottom_shifted".to_string(),
            csv_rows,
        })
    }
}
