//! Unsplittable min-hop routing of virtual links over residual bandwidth.

use std::collections::VecDeque;

use thiserror::Error;

use crate::model::{Bandwidth, NodeId, SubstrateNetwork, SubstratePath, VirtualNetworkRequest};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RoutingError {
    #[error("no path from {0} to {1} with enough residual bandwidth")]
    NoFeasiblePath(NodeId, NodeId),
    #[error("virtual link {0} cannot be routed")]
    LinkMappingInfeasible(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingResult {
    /// Path per virtual link, indexed like the request's links.
    pub paths: Vec<SubstratePath>,
    /// Σ bandwidth demand × hop count.
    pub total_bw_cost: u64,
}

/// Min-hop path from `src` to `dst` using only links whose entry in
/// `residual` is at least `bw`. Among equally short paths the one with the
/// lexicographically smallest node sequence wins.
pub fn route_with_residuals(
    net: &SubstrateNetwork,
    residual: &[Bandwidth],
    src: NodeId,
    dst: NodeId,
    bw: Bandwidth,
) -> Result<SubstratePath, RoutingError> {
    if src == dst {
        return Err(RoutingError::NoFeasiblePath(src, dst));
    }
    // BFS backwards from dst until src is labelled; every node closer to
    // dst than src is labelled by then.
    let mut dist = vec![u32::MAX; net.node_count()];
    dist[dst.0] = 0;
    let mut queue = VecDeque::from([dst]);
    'bfs: while let Some(cur) = queue.pop_front() {
        let next = dist[cur.0] + 1;
        for &(nb, link) in net.neighbours(cur) {
            if dist[nb.0] == u32::MAX && residual[link.0] >= bw {
                dist[nb.0] = next;
                if nb == src {
                    break 'bfs;
                }
                queue.push_back(nb);
            }
        }
    }
    if dist[src.0] == u32::MAX {
        return Err(RoutingError::NoFeasiblePath(src, dst));
    }
    let mut nodes = vec![src];
    let mut links = Vec::with_capacity(dist[src.0] as usize);
    let mut cur = src;
    while cur != dst {
        let want = dist[cur.0] - 1;
        // neighbours are sorted by id, so the first match is the smallest
        let &(nb, link) = net
            .neighbours(cur)
            .iter()
            .find(|&&(nb, link)| dist[nb.0] == want && residual[link.0] >= bw)
            .expect("a labelled node always has a labelled predecessor");
        nodes.push(nb);
        links.push(link);
        cur = nb;
    }
    Ok(SubstratePath { nodes, links })
}

/// Min-hop feasible path against the network's current residuals.
pub fn route_link(
    net: &SubstrateNetwork,
    src: NodeId,
    dst: NodeId,
    bw: Bandwidth,
) -> Result<SubstratePath, RoutingError> {
    route_with_residuals(net, &net.link_residuals(), src, dst, bw)
}

/// Routes all virtual links of `vnr` given the node `assignment`, largest
/// demand first, debiting a scratch copy of the residuals as it goes.
pub fn route_all_links(
    vnr: &VirtualNetworkRequest,
    assignment: &[NodeId],
    net: &SubstrateNetwork,
) -> Result<RoutingResult, RoutingError> {
    let mut order: Vec<usize> = (0..vnr.links.len()).collect();
    order.sort_by(|&a, &b| vnr.links[b].bw_demand.cmp(&vnr.links[a].bw_demand).then(a.cmp(&b)));

    let mut residual = net.link_residuals();
    let mut paths: Vec<Option<SubstratePath>> = vec![None; vnr.links.len()];
    let mut total = 0u64;
    for lid in order {
        let vl = &vnr.links[lid];
        let (src, dst) = (assignment[vl.u], assignment[vl.v]);
        let path = route_with_residuals(net, &residual, src, dst, vl.bw_demand)
            .map_err(|_| RoutingError::LinkMappingInfeasible(lid))?;
        for link in &path.links {
            residual[link.0] -= vl.bw_demand;
        }
        total += vl.bw_demand as u64 * path.hops() as u64;
        paths[lid] = Some(path);
    }
    Ok(RoutingResult {
        paths: paths.into_iter().map(|p| p.expect("every link routed")).collect(),
        total_bw_cost: total,
    })
}
