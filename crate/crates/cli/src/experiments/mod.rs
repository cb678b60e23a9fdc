//! Experiment registry: every verification campaign is a strategy object
//! behind the [`Experiment`] trait, registered by name and selected from the
//! command line.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use gibbs_lines_core::{Error, EstimateReport, Result};

use crate::config::Config;

mod concentration;
mod coupling;
mod gaps;
mod ibp;
mod partition;
mod polymer;
mod surrogate;
mod toda;
mod translated;
mod tube;

/// Shared run facilities: replica fan-out over a fixed worker count.
pub struct RunContext {
    pub threads: usize,
}

impl RunContext {
    /// Apply `f` to indices `0..n`, in parallel over `self.threads` workers.
    /// Results are returned in index order, so the merged output is
    /// independent of the worker count.
    pub fn parallel_map<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync,
    {
        if self.threads <= 1 || n <= 1 {
            return (0..n).map(&f).collect();
        }
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<T>>>> = (0..n).map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..self.threads.min(n) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= n {
                        break;
                    }
                    let out = f(i);
                    *slots[i].lock().unwrap() = Some(out);
                });
            }
        });
        slots
            .into_iter()
            .map(|slot| slot.into_inner().unwrap().expect("worker finished"))
            .collect()
    }
}

/// What an experiment produces: reports (JSON) and raw rows (CSV).
pub struct Outcome {
    pub reports: Vec<EstimateReport>,
    pub csv_header: String,
    pub csv_rows: Vec<String>,
}

impl Outcome {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass.unwrap_or(true))
    }
}

pub trait Experiment: Sync {
    fn name(&self) -> &'static str;
    /// Keys that must be present in the config (beyond the mandatory seed).
    fn required_keys(&self) -> &'static [&'static str] {
        &[]
    }
    fn run(&self, cfg: &Config, ctx: &RunContext) -> Result<Outcome>;
}

pub fn registry() -> Vec<Box<dyn Experiment>> {
    vec![
        Box::new(ibp::VerifyIbp),
        Box::new(gaps::VerifyGaps),
        Box::new(toda::VerifyToda),
        Box::new(coupling::VerifyCoupling),
        Box::new(translated::VerifyTranslatedWeight),
        Box::new(tube::VerifyTube),
        Box::new(partition::VerifyPartition),
        Box::new(concentration::Concentration),
        Box::new(polymer::Polymer),
    ]
}

pub fn find(name: &str) -> Result<Box<dyn Experiment>> {
    registry()
        .into_iter()
        .find(|e| e.name() == name)
        .ok_or_else(|| {
            let names: Vec<_> = registry().iter().map(|e| e.name().to_string()).collect();
            Error::invalid(format!(
                "unknown experiment '{name}'; available: {}",
                names.join(", ")
            ))
        })
}

/// Validate presence of the mandatory seed plus per-experiment keys.
pub fn validate_config(exp: &dyn Experiment, cfg: &Config) -> Result<()> {
    cfg.get_u64("seed")?;
    for key in exp.required_keys() {
        if !cfg.contains(key) {
            return Err(Error::invalid(format!(
                "experiment '{}' requires config key '{key}'",
                exp.name()
            )));
        }
    }
    Ok(())
}

/// 17-significant-digit float formatting for bit-exact CSV reproduction.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Echo the full configuration into a report's provenance.
pub fn echo_config(mut report: EstimateReport, cfg: &Config) -> EstimateReport {
    for (k, v) in cfg.entries() {
        report
            .provenance
            .insert(format!("config.{k}"), v.to_string());
    }
    report
}
