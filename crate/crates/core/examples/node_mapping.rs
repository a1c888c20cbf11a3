// Scores substrate candidates for each virtual node, places the request
// greedily by priority and routes its links over min-hop paths.

use std::collections::BTreeSet;
use std::error::Error;

use secvne::engine::{candidate_nodes, placement_order, score_candidates};
use secvne::model::{DomainId, LinkSpec, NodeSpec, VirtualLink, VirtualNode, VnrId};
use secvne::routing::route_all_links;
use secvne::{map_nodes, PriorityWeights, SubstrateNetwork, VirtualNetworkRequest};

fn substrate() -> Result<SubstrateNetwork, Box<dyn Error>> {
    // two domains of four nodes, joined by a single inter-domain link 3-4
    let specs = [(0, 80, 3, 0), (0, 60, 1, 0), (0, 90, 2, 1), (0, 70, 4, 0), (1, 95, 2, 0), (1, 50, 3, 2), (1, 75, 1, 0), (1, 85, 4, 1)];
    let nodes: Vec<NodeSpec> = specs
        .iter()
        .enumerate()
        .map(|(id, &(domain, cpu, ssl, ssd))| NodeSpec { id, domain, cpu, ssl, ssd })
        .collect();
    let edges = [(0, 1), (1, 2), (2, 3), (0, 3), (3, 4), (4, 5), (5, 6), (6, 7), (4, 7)];
    let links: Vec<LinkSpec> = edges.iter().map(|&(u, v)| LinkSpec { u, v, bw: 100 }).collect();
    Ok(SubstrateNetwork::new(2, &nodes, &links)?)
}

fn request() -> Result<VirtualNetworkRequest, Box<dyn Error>> {
    let vnode = |id, cpu_demand, vsd, vsl, cd: &[usize]| VirtualNode {
        id,
        cpu_demand,
        vsd,
        vsl,
        cd: cd.iter().map(|&d| DomainId(d)).collect::<BTreeSet<_>>(),
    };
    let nodes = vec![vnode(0, 30, 2, 1, &[0]), vnode(1, 20, 1, 2, &[0, 1]), vnode(2, 40, 3, 2, &[1])];
    let links = vec![VirtualLink { u: 0, v: 1, bw_demand: 10 }, VirtualLink { u: 1, v: 2, bw_demand: 5 }];
    Ok(VirtualNetworkRequest::new(VnrId(0), nodes, links, 0.0, 100.0)?)
}

pub fn run_example() -> Result<Vec<usize>, Box<dyn Error>> {
    let net = substrate()?;
    let vnr = request()?;
    let weights = PriorityWeights::default();

    println!("placement order: {:?}", placement_order(&vnr));
    for v in &vnr.nodes {
        let cands = candidate_nodes(v, &net);
        let scores = score_candidates(&net, v, &weights, &cands);
        let listed: Vec<String> = cands.iter().zip(&scores).map(|(c, s)| format!("{c}={s:.3}")).collect();
        println!("virtual node {}: {}", v.id, listed.join(" "));
    }

    let mapping = map_nodes(&vnr, &net, &weights)?;
    let routed = route_all_links(&vnr, &mapping.assignment, &net)?;
    for (l, path) in vnr.links.iter().zip(&routed.paths) {
        let hops: Vec<String> = path.nodes.iter().map(|n| n.to_string()).collect();
        println!("virtual link {}-{}: {}", l.u, l.v, hops.join(" -> "));
    }
    println!("bandwidth cost: {}", routed.total_bw_cost);
    Ok(mapping.assignment.iter().map(|n| n.0).collect())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
