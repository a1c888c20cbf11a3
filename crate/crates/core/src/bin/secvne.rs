use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use secvne::engine::HopTerm;
use secvne::experiment::{
    cmd_compare, cmd_generate, cmd_run, load_config, CompareOptions, ExperimentError, Inputs, RunOptions,
    DEFAULT_WARMUP,
};
use secvne::metrics::CostMode;
use secvne::{GeneratorConfig, PsoConfig, SimConfig, Strategy};

#[derive(Parser)]
#[command(name = "secvne", version, about = "Security-aware multi-domain virtual network embedding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a substrate and a request stream from a generator config.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 50_000.0)]
        horizon: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Simulate one strategy and write the trace and windowed metrics.
    Run {
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long, default_value = "stec-iot")]
        strategy: Strategy,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run strategies over several seeds and tabulate steady-state means.
    Compare {
        #[command(flatten)]
        inputs: InputArgs,
        /// Comma-separated strategies.
        #[arg(long, value_delimiter = ',', default_value = "stec-iot,greedy,random")]
        strategy: Vec<Strategy>,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        seed: Vec<u64>,
        /// Fraction of the horizon excluded from steady-state means.
        #[arg(long, default_value_t = DEFAULT_WARMUP)]
        warmup: f64,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GenArgs {
    /// Generator config (JSON); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Use the unswapped CPU ranges for substrate and requests.
    #[arg(long)]
    literal_table1: bool,
}

impl GenArgs {
    fn resolve(&self) -> Result<GeneratorConfig, ExperimentError> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => GeneratorConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.literal_table1 |= self.literal_table1;
        Ok(cfg)
    }
}

#[derive(Args)]
struct InputArgs {
    /// Generator config used when no substrate/workload files are given.
    #[arg(long, conflicts_with_all = ["substrate", "workload"])]
    config: Option<PathBuf>,
    #[arg(long, requires = "workload")]
    substrate: Option<PathBuf>,
    #[arg(long, requires = "substrate")]
    workload: Option<PathBuf>,
    #[arg(long)]
    literal_table1: bool,
}

impl InputArgs {
    fn resolve(&self) -> Result<Inputs, ExperimentError> {
        match (&self.substrate, &self.workload) {
            (Some(substrate), Some(workload)) => {
                if self.literal_table1 {
                    return Err(ExperimentError::Usage("--literal-table1 only applies to generated inputs".into()));
                }
                Ok(Inputs::Files { substrate: substrate.clone(), workload: workload.clone() })
            }
            _ => {
                let mut cfg = match &self.config {
                    Some(path) => load_config(path)?,
                    None => GeneratorConfig::default(),
                };
                cfg.literal_table1 |= self.literal_table1;
                Ok(Inputs::Generated(cfg))
            }
        }
    }
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value_t = 2_500.0)]
    window: f64,
    #[arg(long, default_value_t = 50_000.0)]
    horizon: f64,
    #[arg(long, default_value = "hop")]
    cost_mode: CostMode,
    /// Score distant nodes higher instead of boundary-near ones.
    #[arg(long)]
    eq20_literal: bool,
}

impl SimArgs {
    fn options(&self, seed: u64, parallel_pso: bool) -> RunOptions {
        let mut pso = PsoConfig { parallel: parallel_pso, ..PsoConfig::default() };
        if self.eq20_literal {
            pso.weights.hop_term = HopTerm::Literal;
        }
        RunOptions {
            seed,
            sim: SimConfig {
                horizon: self.horizon,
                window: self.window,
                cost_mode: self.cost_mode,
                ..SimConfig::default()
            },
            pso,
        }
    }
}

fn execute(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Generate { gen, horizon, out } => {
            let files = cmd_generate(&gen.resolve()?, horizon, &out)?;
            println!(
                "wrote {} and {} ({} requests)",
                files.substrate.display(),
                files.workload.display(),
                files.requests
            );
        }
        Command::Run { inputs, strategy, seed, sim, out } => {
            let trace = cmd_run(&inputs.resolve()?, strategy, &sim.options(seed, true), &out)?;
            let arrived = trace.arrivals().count();
            let accepted = trace.accepted().count();
            println!("{strategy}: accepted {accepted}/{arrived}, outputs in {}", out.display());
        }
        Command::Compare { inputs, strategy, seed, warmup, sim, out } => {
            let opts = CompareOptions { strategies: strategy, seeds: seed, run: sim.options(0, false), warmup };
            let runs = cmd_compare(&inputs.resolve()?, &opts, &out)?;
            println!("{} runs summarized in {}", runs.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
