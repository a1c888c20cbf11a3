// Optimizes one generated request with the particle swarm and compares
// its cost with the plain node-mapping placement it starts from.

use std::error::Error;

use secvne::pso::fitness;
use secvne::{generate_substrate, generate_vnr_stream, map_nodes, optimize, GeneratorConfig, PsoConfig};

pub struct SwarmSummary {
    pub seed_fitness: f64,
    pub best_fitness: f64,
    pub history: Vec<f64>,
}

pub fn run_example() -> Result<SwarmSummary, Box<dyn Error>> {
    let cfg = GeneratorConfig { seed: 11, ..GeneratorConfig::default() };
    let net = generate_substrate(&cfg)?;
    let stream = generate_vnr_stream(&cfg, 2_000.0)?;
    let pso = PsoConfig::default();

    // first request with at least four nodes that the swarm can embed
    for vnr in stream.iter().filter(|v| v.nodes.len() >= 4) {
        let Ok(outcome) = optimize(vnr, &net, &pso) else { continue };
        let seeded = map_nodes(vnr, &net, &pso.weights)?;
        let seed_fitness = fitness(&seeded.assignment, vnr, &net);
        println!(
            "request {} ({} nodes, {} links): node mapping alone costs {seed_fitness}, swarm best {} after {} placements",
            vnr.id,
            vnr.nodes.len(),
            vnr.links.len(),
            outcome.gbest_fitness,
            outcome.evaluations
        );
        let curve: Vec<String> = outcome.history.iter().step_by(10).map(|f| f.to_string()).collect();
        println!("gbest every 10 iterations: {}", curve.join(" "));
        return Ok(SwarmSummary { seed_fitness, best_fitness: outcome.gbest_fitness, history: outcome.history });
    }
    Err("no embeddable request in the sample".into())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
