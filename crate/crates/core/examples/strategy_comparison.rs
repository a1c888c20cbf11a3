// Compares all three strategies over three seeds and prints their
// steady-state means.

use std::error::Error;

use secvne::experiment::{compare_runs, CompareOptions, Inputs, RunOptions, RunSummary};
use secvne::metrics::mean_std;
use secvne::{GeneratorConfig, SimConfig, Strategy};

pub fn run_example() -> Result<Vec<RunSummary>, Box<dyn Error>> {
    let opts = CompareOptions {
        seeds: vec![1, 2, 3],
        run: RunOptions { sim: SimConfig { horizon: 6_000.0, window: 500.0, ..SimConfig::default() }, ..RunOptions::default() },
        ..CompareOptions::default()
    };
    let runs = compare_runs(&Inputs::Generated(GeneratorConfig::miniature()), &opts)?;

    println!("{:<9} {:>10} {:>10} {:>10}", "strategy", "accept", "rc(hop)", "rc(lit)");
    for st in Strategy::ALL {
        let of = |f: fn(&RunSummary) -> Option<f64>| {
            mean_std(runs.iter().filter(|r| r.strategy == st).filter_map(f)).map_or(f64::NAN, |m| m.0)
        };
        println!(
            "{:<9} {:>10.3} {:>10.3} {:>10.3}",
            st.name(),
            of(|r| r.metrics.acceptance),
            of(|r| r.rc_hop),
            of(|r| r.rc_literal)
        );
    }
    Ok(runs)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
