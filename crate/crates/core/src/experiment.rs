//! Drivers behind the `generate`, `run` and `compare` commands.
//!
//! Every output is written to a temporary sibling and renamed into place,
//! so an interrupted command never leaves a half-written file behind.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::generator::{generate_substrate, generate_vnr_stream, GenError, GeneratorConfig};
use crate::metrics::{self, mean_std, CostMode, MetricsError, WindowMetrics};
use crate::model::{ModelError, SubstrateNetwork, VirtualNetworkRequest};
use crate::pso::PsoConfig;
use crate::sim::{run, SimConfig, SimError, SimulationTrace, Strategy};

pub const SUBSTRATE_FILE: &str = "substrate.json";
pub const WORKLOAD_FILE: &str = "workload.ndjson";
pub const TRACE_FILE: &str = "trace.ndjson";
pub const SERIES_FILE: &str = "metrics.csv";
pub const CUMULATIVE_FILE: &str = "cumulative.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Fraction of the horizon discarded before steady-state averaging.
pub const DEFAULT_WARMUP: f64 = 0.2;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Config(String),
    #[error("internal consistency failure: {0}")]
    Internal(#[from] SimError),
}

impl ExperimentError {
    /// 1 for usage and IO problems, 2 for unusable inputs, 3 when the
    /// simulator caught itself in an inconsistent state.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Usage(_) | ExperimentError::Io { .. } => 1,
            ExperimentError::Config(_) => 2,
            ExperimentError::Internal(_) => 3,
        }
    }
}

impl From<GenError> for ExperimentError {
    fn from(e: GenError) -> Self {
        ExperimentError::Config(e.to_string())
    }
}

impl From<MetricsError> for ExperimentError {
    fn from(e: MetricsError) -> Self {
        ExperimentError::Config(e.to_string())
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExperimentError + '_ {
    move |e| ExperimentError::Io { path: path.to_path_buf(), source: io::Error::other(e) }
}

/// Writes `path` via a temporary file in the same directory.
fn write_atomic<F>(path: &Path, fill: F) -> Result<(), ExperimentError>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> Result<(), ExperimentError>,
{
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    let file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    let mut out = BufWriter::new(file);
    fill(&mut out)?;
    out.flush().map_err(io_err(&tmp))?;
    drop(out);
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn ensure_dir(dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn load_config(path: &Path) -> Result<GeneratorConfig, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    GeneratorConfig::from_json(&text).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))
}

pub fn load_substrate(path: &Path) -> Result<SubstrateNetwork, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    SubstrateNetwork::from_json(&text).map_err(|e: ModelError| ExperimentError::Config(format!("{}: {e}", path.display())))
}

/// One request per non-empty line.
pub fn load_workload(path: &Path) -> Result<Vec<VirtualNetworkRequest>, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            VirtualNetworkRequest::from_json(l)
                .map_err(|e| ExperimentError::Config(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn write_workload<W: Write>(mut out: W, vnrs: &[VirtualNetworkRequest]) -> io::Result<()> {
    for v in vnrs {
        writeln!(out, "{}", v.to_json())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedFiles {
    pub substrate: PathBuf,
    pub workload: PathBuf,
    pub requests: usize,
}

/// Writes `substrate.json` and `workload.ndjson` into `out_dir`.
pub fn cmd_generate(cfg: &GeneratorConfig, horizon: f64, out_dir: &Path) -> Result<GeneratedFiles, ExperimentError> {
    cfg.validate()?;
    let net = generate_substrate(cfg)?;
    let vnrs = generate_vnr_stream(cfg, horizon)?;
    ensure_dir(out_dir)?;
    let substrate = out_dir.join(SUBSTRATE_FILE);
    let workload = out_dir.join(WORKLOAD_FILE);
    write_atomic(&substrate, |out| writeln!(out, "{}", net.to_json()).map_err(io_err(&substrate)))?;
    write_atomic(&workload, |out| write_workload(out, &vnrs).map_err(io_err(&workload)))?;
    Ok(GeneratedFiles { substrate, workload, requests: vnrs.len() })
}

/// Where a run gets its substrate and requests from.
#[derive(Debug, Clone)]
pub enum Inputs {
    /// Fixed files; seeds only vary strategy randomness.
    Files { substrate: PathBuf, workload: PathBuf },
    /// Generated in memory; each seed overrides `cfg.seed`.
    Generated(GeneratorConfig),
}

impl Inputs {
    fn load(&self, seed: u64, horizon: f64) -> Result<(SubstrateNetwork, Vec<VirtualNetworkRequest>), ExperimentError> {
        match self {
            Inputs::Files { substrate, workload } => Ok((load_substrate(substrate)?, load_workload(workload)?)),
            Inputs::Generated(cfg) => {
                let cfg = GeneratorConfig { seed, ..cfg.clone() };
                cfg.validate()?;
                Ok((generate_substrate(&cfg)?, generate_vnr_stream(&cfg, horizon)?))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: u64,
    pub sim: SimConfig,
    pub pso: PsoConfig,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: 1, sim: SimConfig::default(), pso: PsoConfig::default() }
    }
}

impl RunOptions {
    fn check(&self) -> Result<(), ExperimentError> {
        self.pso.validate().map_err(|e| ExperimentError::Config(e.to_string()))?;
        if !(self.sim.horizon > 0.0 && self.sim.horizon.is_finite()) {
            return Err(ExperimentError::Config(format!("horizon must be positive, got {}", self.sim.horizon)));
        }
        metrics::MetricsAccumulator::new(self.sim.window, self.sim.horizon)?;
        Ok(())
    }
}

pub fn simulate(
    inputs: &Inputs,
    strategy: Strategy,
    opts: &RunOptions,
) -> Result<SimulationTrace, ExperimentError> {
    opts.check()?;
    let (net, vnrs) = inputs.load(opts.seed, opts.sim.horizon)?;
    let embedder = strategy.build(opts.seed, &opts.pso);
    Ok(run(net, &vnrs, embedder.as_ref(), &opts.sim)?)
}

/// Writes `trace.ndjson`, `metrics.csv` and `cumulative.csv` into `out_dir`.
pub fn cmd_run(
    inputs: &Inputs,
    strategy: Strategy,
    opts: &RunOptions,
    out_dir: &Path,
) -> Result<SimulationTrace, ExperimentError> {
    let trace = simulate(inputs, strategy, opts)?;
    ensure_dir(out_dir)?;
    let trace_path = out_dir.join(TRACE_FILE);
    write_atomic(&trace_path, |out| trace.write_ndjson(out).map_err(io_err(&trace_path)))?;
    let series_path = out_dir.join(SERIES_FILE);
    write_atomic(&series_path, |out| metrics::write_series_csv(out, &trace.series).map_err(csv_err(&series_path)))?;
    let cumulative_path = out_dir.join(CUMULATIVE_FILE);
    write_atomic(&cumulative_path, |out| {
        metrics::write_cumulative_csv(out, &trace.cumulative).map_err(csv_err(&cumulative_path))
    })?;
    Ok(trace)
}

/// Post-warmup means of the per-window samples of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub acceptance: Option<f64>,
    pub revenue: Option<f64>,
    pub cost: Option<f64>,
    pub rc_ratio: Option<f64>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    mean_std(values).map(|(m, _)| m)
}

/// Averages windows starting at or after `warmup × horizon`; windows with
/// no sample for a metric are skipped for that metric.
pub fn steady_state(series: &[WindowMetrics], horizon: f64, warmup: f64) -> SteadyState {
    let cut = warmup * horizon;
    let kept: Vec<&WindowMetrics> = series.iter().filter(|w| w.window.t_start >= cut).collect();
    SteadyState {
        acceptance: mean(kept.iter().filter_map(|w| w.acceptance)),
        revenue: mean(kept.iter().map(|w| w.avg_revenue)),
        cost: mean(kept.iter().map(|w| w.avg_cost)),
        rc_ratio: mean(kept.iter().filter_map(|w| w.rc_ratio)),
    }
}

/// Steady-state figures of one strategy × seed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub strategy: Strategy,
    pub seed: u64,
    pub arrivals: usize,
    /// Under the configured cost mode.
    pub metrics: SteadyState,
    pub rc_hop: Option<f64>,
    pub rc_literal: Option<f64>,
}

pub fn summarize(trace: &SimulationTrace, strategy: Strategy, seed: u64, warmup: f64) -> Result<RunSummary, ExperimentError> {
    let cfg = &trace.config;
    let in_mode = |mode| -> Result<Option<f64>, ExperimentError> {
        let series = trace.windowed_series(cfg.window, cfg.revenue_weights, mode)?;
        Ok(steady_state(&series, cfg.horizon, warmup).rc_ratio)
    };
    Ok(RunSummary {
        strategy,
        seed,
        arrivals: trace.arrivals().count(),
        metrics: steady_state(&trace.series, cfg.horizon, warmup),
        rc_hop: in_mode(CostMode::HopWeighted)?,
        rc_literal: in_mode(CostMode::Literal)?,
    })
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub strategies: Vec<Strategy>,
    pub seeds: Vec<u64>,
    pub run: RunOptions,
    pub warmup: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            strategies: Strategy::ALL.to_vec(),
            seeds: (1..=5).collect(),
            run: RunOptions::default(),
            warmup: DEFAULT_WARMUP,
        }
    }
}

/// Runs every strategy × seed pair concurrently, ordered by strategy then seed.
pub fn compare_runs(inputs: &Inputs, opts: &CompareOptions) -> Result<Vec<RunSummary>, ExperimentError> {
    if opts.strategies.is_empty() || opts.seeds.is_empty() {
        return Err(ExperimentError::Usage("compare needs at least one strategy and one seed".into()));
    }
    if !(0.0..1.0).contains(&opts.warmup) {
        return Err(ExperimentError::Config(format!("warmup must lie in [0, 1), got {}", opts.warmup)));
    }
    opts.run.check()?;
    let jobs: Vec<(Strategy, u64)> = opts
        .strategies
        .iter()
        .flat_map(|&st| opts.seeds.iter().map(move |&s| (st, s)))
        .collect();
    jobs.par_iter()
        .map(|&(strategy, seed)| {
            let run_opts = RunOptions { seed, ..opts.run.clone() };
            let trace = simulate(inputs, strategy, &run_opts)?;
            summarize(&trace, strategy, seed, opts.warmup)
        })
        .collect()
}

const METRIC_TABLES: [&str; 4] = ["acceptance", "revenue", "cost", "rc_ratio"];

fn pick(s: &RunSummary, metric: &str) -> Option<f64> {
    match metric {
        "acceptance" => s.metrics.acceptance,
        "revenue" => s.metrics.revenue,
        "cost" => s.metrics.cost,
        "rc_ratio" => s.metrics.rc_ratio,
        "rc_ratio_hop" => s.rc_hop,
        "rc_ratio_literal" => s.rc_literal,
        _ => unreachable!("unknown metric {metric}"),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes one CSV per metric (strategy rows, one column per seed plus mean
/// and std) and `summary.csv` with both cost modes.
pub fn cmd_compare(inputs: &Inputs, opts: &CompareOptions, out_dir: &Path) -> Result<Vec<RunSummary>, ExperimentError> {
    let runs = compare_runs(inputs, opts)?;
    ensure_dir(out_dir)?;
    let rows_of = |st: Strategy| runs.iter().filter(move |r| r.strategy == st);

    for metric in METRIC_TABLES {
        let path = out_dir.join(format!("{metric}.csv"));
        write_atomic(&path, |out| {
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec!["strategy".to_string(), "mean".into(), "std".into()];
            header.extend(opts.seeds.iter().map(|s| format!("seed_{s}")));
            w.write_record(&header).map_err(csv_err(&path))?;
            for &st in &opts.strategies {
                let values: Vec<Option<f64>> = rows_of(st).map(|r| pick(r, metric)).collect();
                let stats = mean_std(values.iter().flatten().copied());
                let mut rec = vec![
                    st.name().to_string(),
                    fmt_opt(stats.map(|s| s.0)),
                    fmt_opt(stats.map(|s| s.1)),
                ];
                rec.extend(values.into_iter().map(fmt_opt));
                w.write_record(&rec).map_err(csv_err(&path))?;
            }
            w.flush().map_err(io_err(&path))
        })?;
    }

    let path = out_dir.join(SUMMARY_FILE);
    write_atomic(&path, |out| {
        let columns = ["acceptance", "revenue", "cost", "rc_ratio_hop", "rc_ratio_literal"];
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["strategy".to_string(), "runs".into()];
        for c in columns {
            header.push(format!("{c}_mean"));
            header.push(format!("{c}_std"));
        }
        w.write_record(&header).map_err(csv_err(&path))?;
        for &st in &opts.strategies {
            let mut rec = vec![st.name().to_string(), rows_of(st).count().to_string()];
            for c in columns {
                let stats = mean_std(rows_of(st).filter_map(|r| pick(r, c)));
                rec.push(fmt_opt(stats.map(|s| s.0)));
                rec.push(fmt_opt(stats.map(|s| s.1)));
            }
            w.write_record(&rec).map_err(csv_err(&path))?;
        }
        w.flush().map_err(io_err(&path))
    })?;
    Ok(runs)
}
