// Generates the default four-domain substrate and a request stream, then
// round-trips both through their JSON forms.

use std::error::Error;

use secvne::model::{SubstrateNetwork, VirtualNetworkRequest};
use secvne::{generate_substrate, generate_vnr_stream, GeneratorConfig};

pub struct GenerationSummary {
    pub nodes: usize,
    pub domains: usize,
    pub boundary_nodes: usize,
    pub requests: usize,
}

pub fn run_example() -> Result<GenerationSummary, Box<dyn Error>> {
    let cfg = GeneratorConfig { seed: 7, ..GeneratorConfig::default() };
    let net = generate_substrate(&cfg)?;
    let stream = generate_vnr_stream(&cfg, 10_000.0)?;

    let boundary_nodes = net.nodes().iter().filter(|n| net.is_boundary(n.id)).count();
    println!(
        "substrate: {} nodes, {} links, {} boundary nodes, farthest node {} hops from a boundary",
        net.node_count(),
        net.links().len(),
        boundary_nodes,
        net.max_boundary_hop()
    );
    println!("workload: {} requests over 10000 time units", stream.len());

    let reloaded = SubstrateNetwork::from_json(&net.to_json())?;
    assert_eq!(reloaded, net);
    for vnr in &stream {
        assert_eq!(&VirtualNetworkRequest::from_json(&vnr.to_json())?, vnr);
    }

    Ok(GenerationSummary {
        nodes: net.node_count(),
        domains: net.domain_count(),
        boundary_nodes,
        requests: stream.len(),
    })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
