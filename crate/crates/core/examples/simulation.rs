// Runs the swarm strategy through the event simulator on a small
// two-domain setup and prints the windowed metric series.

use std::error::Error;

use secvne::metrics::write_series_csv;
use secvne::sim::StecIot;
use secvne::{generate_substrate, generate_vnr_stream, run, GeneratorConfig, SimConfig, SimulationTrace};

pub fn run_example() -> Result<SimulationTrace, Box<dyn Error>> {
    let cfg = GeneratorConfig::miniature();
    let net = generate_substrate(&cfg)?;
    let sim = SimConfig { horizon: 4_000.0, window: 500.0, audit_every: 1, ..SimConfig::default() };
    let stream = generate_vnr_stream(&cfg, sim.horizon)?;

    let trace = run(net.clone(), &stream, &StecIot::default(), &sim)?;
    println!(
        "{} arrivals, {} accepted, substrate restored: {}",
        trace.arrivals().count(),
        trace.accepted().count(),
        trace.final_network == net
    );
    write_series_csv(std::io::stdout().lock(), &trace.series)?;
    Ok(trace)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
