use std::path::{Path, PathBuf};
use std::process::ExitCode;

use att_nnsf::config::SimConfig;
use att_nnsf::control::{DhatSign, VectorSource};
use att_nnsf::export::{export_record, write_json, Format};
use att_nnsf::stats::{self, MonteCarloSummary, DEFAULT_WINDOW};
use att_nnsf::{Backend, Error};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "att-nnsf", version, about = "NN stochastic attitude filter and tracking controller simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single closed-loop run; writes the time-series CSV and a summary.
    Run(Common),
    /// Monte-Carlo batch over consecutive seeds.
    Mc(Common),
    /// Monte-Carlo batches over several neuron counts with shared seeds.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Neuron counts to compare.
        #[arg(long, value_delimiter = ',', default_value = "3,10,50")]
        neurons_list: Vec<usize>,
    },
}

#[derive(Args, Clone)]
#[command(allow_negative_numbers = true)]
struct Common {
    /// JSON configuration; omitted fields take the reference defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    neurons: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, value_parser = str::parse::<Backend>)]
    backend: Option<Backend>,
    #[arg(long)]
    noise_free: bool,
    #[arg(long, value_parser = str::parse::<VectorSource>)]
    innovation_source: Option<VectorSource>,
    #[arg(long, value_parser = str::parse::<DhatSign>)]
    dhat_sign: Option<DhatSign>,
    /// Truth integration substeps per control tick.
    #[arg(long)]
    truth_substeps: Option<usize>,
    /// Number of seeds for `mc` and `sweep`, starting at the base seed.
    #[arg(long, default_value_t = 10)]
    runs: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => Failure::Runtime(e.to_string()),
            e if e.is_config() => Failure::Config(e.to_string()),
            e => Failure::Runtime(e.to_string()),
        }
    }
}

impl Common {
    fn config(&self) -> Result<SimConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::load(path).map_err(|e| Failure::Config(e.to_string()))?,
            None => SimConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.neurons {
            cfg.neurons = v;
        }
        if let Some(v) = self.dt {
            cfg.dt = v;
        }
        if let Some(v) = self.duration {
            cfg.duration = v;
        }
        if let Some(v) = self.backend {
            cfg.backend = v;
        }
        if self.noise_free {
            cfg.noise_free = true;
        }
        if let Some(v) = self.innovation_source {
            cfg.innovation_source = v;
        }
        if let Some(v) = self.dhat_sign {
            cfg.dhat_sign = v;
        }
        if let Some(v) = self.truth_substeps {
            cfg.truth_substeps = v;
        }
        cfg.build()?;
        Ok(cfg)
    }

    fn seeds(&self, base: u64) -> Result<Vec<u64>, Failure> {
        if self.runs == 0 {
            return Err(Failure::Config("--runs must be at least 1".into()));
        }
        Ok((0..self.runs).map(|i| base.wrapping_add(i)).collect())
    }

    fn out_dir(&self) -> Result<&Path, Failure> {
        std::fs::create_dir_all(&self.out).map_err(|e| Failure::Runtime(format!("{}: {e}", self.out.display())))?;
        Ok(&self.out)
    }
}

#[derive(Serialize)]
struct RunSummary<'a> {
    config: &'a SimConfig,
    input_weights: &'a [[f64; 3]],
    /// Absent when the run ends before the window opens.
    steady_state: Option<stats::SummaryStats>,
    diagnostics: att_nnsf::sim::Diagnostics,
}

#[derive(Serialize)]
struct BatchSummary<'a> {
    config: &'a SimConfig,
    neurons: usize,
    #[serde(flatten)]
    result: &'a MonteCarloSummary,
}

fn run(c: &Common) -> Result<(), Failure> {
    let cfg = c.config()?;
    let out = c.out_dir()?;
    let rec = att_nnsf::run_simulation(&cfg)?;
    let stem = format!("run_q{}_seed{}", cfg.neurons, cfg.seed);
    let csv = out.join(format!("{stem}.csv"));
    export_record(&rec, &csv, Format::Csv)?;
    let (t0, t1) = (DEFAULT_WINDOW.0, DEFAULT_WINDOW.1.min(cfg.duration));
    let steady = if t1 > t0 { Some(stats::steady_state_stats(&rec, t0, t1)?) } else { None };
    let summary = RunSummary {
        config: &cfg,
        input_weights: &rec.input_weights,
        steady_state: steady,
        diagnostics: rec.diagnostics,
    };
    write_json(&summary, &out.join(format!("{stem}.json")))?;
    println!("{}", csv.display());
    if let Some(s) = steady {
        println!("Ro_dist over [{t0}, {t1}] s: mean {:e}, std {:e}", s.mean, s.std);
    }
    Ok(())
}

fn batch(cfg: &SimConfig, seeds: &[u64], out: &Path, name: &str) -> Result<MonteCarloSummary, Failure> {
    let window = (DEFAULT_WINDOW.0, DEFAULT_WINDOW.1.min(cfg.duration));
    let result = stats::monte_carlo(cfg, seeds, window)?;
    let summary = BatchSummary { config: cfg, neurons: cfg.neurons, result: &result };
    write_json(&summary, &out.join(format!("{name}.json")))?;
    match (&result.pooled, &result.mean_of_means) {
        (Some(p), Some((m, s))) => println!(
            "q={} runs={} failed={} pooled mean {:e} std {:e}; per-run means {:e} ± {:e}",
            cfg.neurons,
            result.runs.len(),
            result.failures.len(),
            p.mean,
            p.std,
            m,
            s
        ),
        _ => println!("q={} runs=0 failed={}", cfg.neurons, result.failures.len()),
    }
    for f in &result.failures {
        eprintln!("seed {}: {}", f.seed, f.error);
    }
    Ok(result)
}

fn mc(c: &Common) -> Result<(), Failure> {
    let cfg = c.config()?;
    let out = c.out_dir()?;
    let result = batch(&cfg, &c.seeds(cfg.seed)?, out, &format!("mc_q{}", cfg.neurons))?;
    if result.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("{} of {} runs failed", result.failures.len(), c.runs)))
    }
}

fn sweep(c: &Common, neurons: &[usize]) -> Result<(), Failure> {
    let base = c.config()?;
    let out = c.out_dir()?;
    let seeds = c.seeds(base.seed)?;
    let mut failed = 0;
    for &q in neurons {
        let cfg = SimConfig { neurons: q, ..base.clone() };
        cfg.build()?;
        failed += batch(&cfg, &seeds, out, &format!("sweep_q{q}"))?.failures.len();
        // One representative trajectory per neuron count for plotting.
        let rec = att_nnsf::run_simulation(&cfg)?;
        export_record(&rec, &out.join(format!("sweep_q{q}.csv")), Format::Csv)?;
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("{failed} runs failed")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => run(c),
        Command::Mc(c) => mc(c),
        Command::Sweep { common, neurons_list } => sweep(common, neurons_list),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
