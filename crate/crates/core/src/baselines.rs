//! Comparison strategies.
//!
//! `greedy_embed` approximates a step-wise greedy secure embedder: it honours
//! the same candidate and security rules but always takes the host with the
//! most free CPU. `random_embed` draws feasible placements at random and
//! serves as an experimental floor. Neither reproduces any published
//! algorithm beyond that selection policy.

use thiserror::Error;

use crate::engine::candidate_nodes;
use crate::model::{Embedding, NodeId, SubstrateNetwork, VirtualNetworkRequest};
use crate::pso::random_injective;
use crate::rng::{stream_rng, Stream};
use crate::routing::route_all_links;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error("no feasible embedding: {0}")]
    EmbeddingInfeasible(String),
}

/// Heaviest virtual node first, each onto the unused candidate with the
/// largest residual CPU (smaller id on ties), then min-hop routing.
pub fn greedy_embed(vnr: &VirtualNetworkRequest, net: &SubstrateNetwork) -> Result<Embedding, BaselineError> {
    let mut order: Vec<usize> = (0..vnr.nodes.len()).collect();
    order.sort_by(|&a, &b| {
        vnr.nodes[b]
            .cpu_demand
            .cmp(&vnr.nodes[a].cpu_demand)
            .then(a.cmp(&b))
    });
    let mut assignment: Vec<Option<NodeId>> = vec![None; vnr.nodes.len()];
    let mut used = vec![false; net.node_count()];
    for vid in order {
        let host = candidate_nodes(&vnr.nodes[vid], net)
            .into_iter()
            .filter(|c| !used[c.0])
            .fold(None::<NodeId>, |best, c| match best {
                Some(b) if net.node(b).cpu_residual >= net.node(c).cpu_residual => Some(b),
                _ => Some(c),
            })
            .ok_or_else(|| BaselineError::EmbeddingInfeasible(format!("virtual node {vid} has no free candidate")))?;
        used[host.0] = true;
        assignment[vid] = Some(host);
    }
    let assignment: Vec<NodeId> = assignment.into_iter().map(|a| a.expect("all placed")).collect();
    let routed = route_all_links(vnr, &assignment, net).map_err(|e| BaselineError::EmbeddingInfeasible(e.to_string()))?;
    Ok(Embedding::new(vnr, assignment, routed.paths))
}

const RANDOM_RETRIES: usize = 10;

/// Uniform injective placement from the candidate sets, retried up to ten
/// times when routing fails. Reproducible per `(seed, request id)`.
pub fn random_embed(
    vnr: &VirtualNetworkRequest,
    net: &SubstrateNetwork,
    seed: u64,
) -> Result<Embedding, BaselineError> {
    let candidates: Vec<Vec<NodeId>> = vnr.nodes.iter().map(|v| candidate_nodes(v, net)).collect();
    if let Some(vid) = candidates.iter().position(|c| c.is_empty()) {
        return Err(BaselineError::EmbeddingInfeasible(format!("virtual node {vid} has no candidate")));
    }
    let mut rng = stream_rng(seed, Stream::RandomBaseline, vnr.id.0);
    for _ in 0..=RANDOM_RETRIES {
        let assignment = random_injective(&candidates, &mut rng)
            .ok_or_else(|| BaselineError::EmbeddingInfeasible("no injective placement exists".into()))?;
        if let Ok(routed) = route_all_links(vnr, &assignment, net) {
            return Ok(Embedding::new(vnr, assignment, routed.paths));
        }
    }
    Err(BaselineError::EmbeddingInfeasible(format!("routing failed {} times", RANDOM_RETRIES + 1)))
}
