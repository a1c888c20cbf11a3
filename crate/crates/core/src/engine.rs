//! Candidate selection and priority-driven node mapping.
//!
//! Virtual nodes are ranked by `vsd × cpu` so that security-critical, heavy
//! nodes are placed first. Each then takes the best-scoring substrate
//! candidate, where the score blends security slack, CPU slack and proximity
//! to the domain boundary. Each blended term is min–max normalized over the
//! candidate set so the weights act as a precedence order rather than being
//! swamped by the term with the largest raw magnitude.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{NodeId, SubstrateNetwork, SubstrateNode, VirtualNetworkRequest, VirtualNode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("{0} is not a candidate for this virtual node")]
    NotACandidate(NodeId),
    #[error("no unused candidate left for virtual node {0}")]
    NodeMappingInfeasible(usize),
    #[error("invalid priority weights: {0}")]
    InvalidWeights(String),
}

/// How the boundary-distance term enters the substrate score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HopTerm {
    /// Nodes closer to a boundary node score higher.
    #[default]
    PreferBoundary,
    /// Raw hop count added as-is, so distant nodes score higher.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorityWeights {
    pub gamma: f64,
    pub delta: f64,
    pub theta: f64,
    pub hop_term: HopTerm,
}

impl Default for PriorityWeights {
    fn default() -> Self {
        PriorityWeights {
            gamma: 0.5,
            delta: 0.3,
            theta: 0.2,
            hop_term: HopTerm::PreferBoundary,
        }
    }
}

impl PriorityWeights {
    pub fn new(gamma: f64, delta: f64, theta: f64, hop_term: HopTerm) -> Result<Self, EngineError> {
        let all = [gamma, delta, theta];
        if all.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(EngineError::InvalidWeights(format!("weights must be non-negative, got {all:?}")));
        }
        if (gamma + delta + theta - 1.0).abs() > 1e-9 {
            return Err(EngineError::InvalidWeights(format!("weights must sum to 1, got {all:?}")));
        }
        Ok(PriorityWeights { gamma, delta, theta, hop_term })
    }
}

/// `vsd × cpu_demand`.
pub fn virtual_node_priority(v: &VirtualNode) -> u64 {
    v.vsd as u64 * v.cpu_demand as u64
}

/// Virtual node ids in placement order: priority descending, id ascending.
pub fn placement_order(vnr: &VirtualNetworkRequest) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vnr.nodes.len()).collect();
    order.sort_by(|&a, &b| {
        virtual_node_priority(&vnr.nodes[b])
            .cmp(&virtual_node_priority(&vnr.nodes[a]))
            .then(a.cmp(&b))
    });
    order
}

pub fn is_candidate(s: &SubstrateNode, v: &VirtualNode) -> bool {
    v.cd.contains(&s.domain) && s.cpu_residual >= v.cpu_demand && s.ssl >= v.vsd && v.vsl >= s.ssd
}

/// Substrate nodes that may host `v`, in ascending id order.
pub fn candidate_nodes(v: &VirtualNode, net: &SubstrateNetwork) -> Vec<NodeId> {
    net.nodes()
        .iter()
        .filter(|s| is_candidate(s, v))
        .map(|s| s.id)
        .collect()
}

fn normalize(x: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (x - lo) / (hi - lo)
    } else {
        0.0
    }
}

/// Scores every candidate of `v`, returned in candidate order.
pub fn score_candidates(
    net: &SubstrateNetwork,
    v: &VirtualNode,
    w: &PriorityWeights,
    candidates: &[NodeId],
) -> Vec<f64> {
    if candidates.is_empty() {
        return Vec::new();
    }
    let raw: Vec<[f64; 3]> = candidates
        .iter()
        .map(|&id| {
            let s = net.node(id);
            [
                s.ssl as f64 - v.vsd as f64,
                s.cpu_residual as f64 - v.cpu_demand as f64,
                s.hop_to_boundary as f64,
            ]
        })
        .collect();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for r in &raw {
        for k in 0..3 {
            lo[k] = lo[k].min(r[k]);
            hi[k] = hi[k].max(r[k]);
        }
    }
    raw.iter()
        .map(|r| {
            let hop = match w.hop_term {
                // max_hop - hop, normalized
                HopTerm::PreferBoundary => normalize(hi[2] - r[2], 0.0, hi[2] - lo[2]),
                HopTerm::Literal => normalize(r[2], lo[2], hi[2]),
            };
            w.gamma * normalize(r[0], lo[0], hi[0]) + w.delta * normalize(r[1], lo[1], hi[1]) + w.theta * hop
        })
        .collect()
}

/// Score of substrate node `s` for hosting `v`, normalized over `candidates`.
pub fn substrate_node_priority(
    net: &SubstrateNetwork,
    s: NodeId,
    v: &VirtualNode,
    w: &PriorityWeights,
    candidates: &[NodeId],
) -> Result<f64, EngineError> {
    let pos = candidates
        .iter()
        .position(|&c| c == s)
        .ok_or(EngineError::NotACandidate(s))?;
    Ok(score_candidates(net, v, w, candidates)[pos])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeMappingResult {
    /// Host of each virtual node, indexed by virtual node id.
    pub assignment: Vec<NodeId>,
    /// Order in which virtual nodes were placed.
    pub ordered_virtual_nodes: Vec<usize>,
}

/// Greedy placement by priority. No backtracking: the first virtual node
/// whose candidates are all taken aborts the whole request.
pub fn map_nodes(
    vnr: &VirtualNetworkRequest,
    net: &SubstrateNetwork,
    w: &PriorityWeights,
) -> Result<NodeMappingResult, EngineError> {
    let order = placement_order(vnr);
    let mut assignment = vec![None; vnr.nodes.len()];
    let mut used = vec![false; net.node_count()];
    for &vid in &order {
        let v = &vnr.nodes[vid];
        let candidates = candidate_nodes(v, net);
        let scores = score_candidates(net, v, w, &candidates);
        // candidates ascend by id, so strict > keeps the smallest id on ties
        let mut best: Option<(NodeId, f64)> = None;
        for (&c, &score) in candidates.iter().zip(&scores) {
            if used[c.0] {
                continue;
            }
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((c, score));
            }
        }
        let (host, _) = best.ok_or(EngineError::NodeMappingInfeasible(vid))?;
        used[host.0] = true;
        assignment[vid] = Some(host);
    }
    Ok(NodeMappingResult {
        assignment: assignment.into_iter().map(|a| a.expect("every node placed")).collect(),
        ordered_virtual_nodes: order,
    })
}
