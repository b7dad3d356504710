//! Steady-state statistics and Monte-Carlo batches.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::sim::{run_simulation, RunRecord};

pub const DEFAULT_WINDOW: (f64, f64) = (4.0, 50.0);

/// Slack on the window edges so that `t = k·dt` rounding never drops an endpoint.
const WINDOW_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

/// Mean and population standard deviation of `values`.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn window_values(rec: &RunRecord, column: usize, t_start: f64, t_end: f64) -> Result<Vec<f64>> {
    if !(t_start <= t_end) {
        return Err(Error::EmptyWindow { start: t_start, end: t_end });
    }
    let values: Vec<f64> = rec
        .rows
        .iter()
        .filter(|r| r.t >= t_start - WINDOW_SLACK && r.t <= t_end + WINDOW_SLACK)
        .map(|r| r.values()[column])
        .collect();
    if values.is_empty() {
        return Err(Error::EmptyWindow { start: t_start, end: t_end });
    }
    Ok(values)
}

/// Statistics of an arbitrary CSV column over `[t_start, t_end]`.
pub fn column_stats(rec: &RunRecord, column: &str, t_start: f64, t_end: f64) -> Result<SummaryStats> {
    let idx = crate::sim::CSV_HEADER
        .iter()
        .position(|h| *h == column)
        .ok_or_else(|| Error::config(format!("unknown column {column}")))?;
    let values = window_values(rec, idx, t_start, t_end)?;
    let (mean, std) = mean_std(&values);
    Ok(SummaryStats { t_start, t_end, samples: values.len(), mean, std })
}

/// Statistics of the estimation error `‖R̃_o‖_I` over `[t_start, t_end]`.
pub fn steady_state_stats(rec: &RunRecord, t_start: f64, t_end: f64) -> Result<SummaryStats> {
    column_stats(rec, "Ro_dist", t_start, t_end)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub stats: SummaryStats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    /// Successful runs, sorted by seed.
    pub runs: Vec<SeedResult>,
    /// Failed runs, sorted by seed.
    pub failures: Vec<SeedFailure>,
    /// Pooled over every windowed sample of every successful run.
    pub pooled: Option<SummaryStats>,
    /// Mean and population std of the per-run means.
    pub mean_of_means: Option<(f64, f64)>,
}

/// Pools per-run statistics as if all windowed samples were one population.
pub fn pool(stats: &[SummaryStats]) -> Option<SummaryStats> {
    let first = stats.first()?;
    let n: usize = stats.iter().map(|s| s.samples).sum();
    let nf = n as f64;
    let mean = stats.iter().map(|s| s.mean * s.samples as f64).sum::<f64>() / nf;
    let second = stats.iter().map(|s| (s.std * s.std + s.mean * s.mean) * s.samples as f64).sum::<f64>() / nf;
    Some(SummaryStats {
        t_start: first.t_start,
        t_end: first.t_end,
        samples: n,
        mean,
        std: (second - mean * mean).max(0.0).sqrt(),
    })
}

fn summarize(mut results: Vec<(u64, Result<SummaryStats>)>) -> MonteCarloSummary {
    results.sort_by_key(|(seed, _)| *seed);
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (seed, r) in results {
        match r {
            Ok(stats) => runs.push(SeedResult { seed, stats }),
            Err(e) => failures.push(SeedFailure { seed, error: e.to_string() }),
        }
    }
    let per_run: Vec<SummaryStats> = runs.iter().map(|r| r.stats).collect();
    let means: Vec<f64> = per_run.iter().map(|s| s.mean).collect();
    MonteCarloSummary {
        pooled: pool(&per_run),
        mean_of_means: (!means.is_empty()).then(|| mean_std(&means)),
        runs,
        failures,
    }
}

fn one(cfg: &SimConfig, seed: u64, window: (f64, f64)) -> Result<SummaryStats> {
    let cfg = SimConfig { seed, ..cfg.clone() };
    let rec = run_simulation(&cfg)?;
    steady_state_stats(&rec, window.0, window.1)
}

/// Runs `cfg` once per seed in parallel. Failed runs are reported, not fatal.
pub fn monte_carlo(cfg: &SimConfig, seeds: &[u64], window: (f64, f64)) -> Result<MonteCarloSummary> {
    if seeds.is_empty() {
        return Err(Error::config("monte carlo needs at least one seed"));
    }
    cfg.build()?;
    let results = seeds.par_iter().map(|&s| (s, one(cfg, s, window))).collect();
    Ok(summarize(results))
}

/// Serial counterpart of [`monte_carlo`].
pub fn monte_carlo_serial(cfg: &SimConfig, seeds: &[u64], window: (f64, f64)) -> Result<MonteCarloSummary> {
    if seeds.is_empty() {
        return Err(Error::config("monte carlo needs at least one seed"));
    }
    cfg.build()?;
    let results = seeds.iter().map(|&s| (s, one(cfg, s, window))).collect();
    Ok(summarize(results))
}
