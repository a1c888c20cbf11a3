//! Independent re-checker for embeddings.
//!
//! Shares no code with the mapping algorithms: it recomputes every node,
//! link and security constraint directly from the request, the embedding
//! and the network's current residuals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::model::{Embedding, NodeId, SubstrateNetwork, VirtualNetworkRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// Host residual CPU below the demand placed on it.
    Cpu,
    /// A virtual node without exactly one host, or a host shared by two
    /// virtual nodes of the same request.
    Injectivity,
    /// Host outside the virtual node's candidate domains.
    CandidateDomain,
    /// Cumulative bandwidth on a substrate link above its residual.
    Bandwidth,
    /// Both ends of a virtual link on the same substrate node.
    Loop,
    /// Missing, broken or non-simple path for a virtual link.
    SinglePath,
    /// Host demands more security than the virtual node offers (`ssd > vsl`).
    SecurityForward,
    /// Virtual node demands more security than the host offers (`vsd > ssl`).
    SecurityBackward,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

/// Returns one record per failed constraint; empty iff the embedding is
/// feasible against the network's current residuals.
pub fn validate_embedding(
    net: &SubstrateNetwork,
    vnr: &VirtualNetworkRequest,
    emb: &Embedding,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, detail: String| out.push(Violation { kind, detail });

    if emb.node_map.len() != vnr.nodes.len() {
        push(
            ViolationKind::Injectivity,
            format!("{} virtual nodes but {} placements", vnr.nodes.len(), emb.node_map.len()),
        );
    }

    let mut hosted: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    let mut cpu_load: BTreeMap<NodeId, u64> = BTreeMap::new();
    for (vid, (vnode, &host)) in vnr.nodes.iter().zip(&emb.node_map).enumerate() {
        if host.0 >= net.node_count() {
            push(ViolationKind::Injectivity, format!("virtual node {vid} placed on unknown {host}"));
            continue;
        }
        let snode = net.node(host);
        hosted.entry(host).or_default().push(vid);
        *cpu_load.entry(host).or_default() += vnode.cpu_demand as u64;
        if !vnode.cd.contains(&snode.domain) {
            push(
                ViolationKind::CandidateDomain,
                format!("virtual node {vid} on {host} in {} outside its candidate domains", snode.domain),
            );
        }
        if snode.ssd > vnode.vsl {
            push(
                ViolationKind::SecurityForward,
                format!("{host} demands level {} but virtual node {vid} offers {}", snode.ssd, vnode.vsl),
            );
        }
        if vnode.vsd > snode.ssl {
            push(
                ViolationKind::SecurityBackward,
                format!("virtual node {vid} demands level {} but {host} offers {}", vnode.vsd, snode.ssl),
            );
        }
    }
    for (host, guests) in &hosted {
        if guests.len() > 1 {
            push(ViolationKind::Injectivity, format!("{host} hosts virtual nodes {guests:?}"));
        }
    }
    for (&host, &load) in &cpu_load {
        let residual = net.node(host).cpu_residual as u64;
        if load > residual {
            push(ViolationKind::Cpu, format!("{host} has {residual} CPU, needs {load}"));
        }
    }

    if emb.link_map.len() != vnr.links.len() {
        push(
            ViolationKind::SinglePath,
            format!("{} virtual links but {} paths", vnr.links.len(), emb.link_map.len()),
        );
    }
    let mut bw_load: BTreeMap<usize, u64> = BTreeMap::new();
    for (lid, (vlink, path)) in vnr.links.iter().zip(&emb.link_map).enumerate() {
        let (Some(&src), Some(&dst)) = (emb.node_map.get(vlink.u), emb.node_map.get(vlink.v)) else {
            continue;
        };
        if src == dst {
            push(ViolationKind::Loop, format!("virtual link {lid} has both ends on {src}"));
            continue;
        }
        if let Err(why) = check_path(net, path, src, dst) {
            push(ViolationKind::SinglePath, format!("virtual link {lid}: {why}"));
            continue;
        }
        for link in &path.links {
            *bw_load.entry(link.0).or_default() += vlink.bw_demand as u64;
        }
    }
    for (&link, &load) in &bw_load {
        let residual = net.links()[link].bw_residual as u64;
        if load > residual {
            push(ViolationKind::Bandwidth, format!("link {link} has {residual} bandwidth, needs {load}"));
        }
    }
    out
}

fn check_path(
    net: &SubstrateNetwork,
    path: &crate::model::SubstratePath,
    src: NodeId,
    dst: NodeId,
) -> Result<(), String> {
    if path.nodes.first() != Some(&src) || path.nodes.last() != Some(&dst) {
        return Err(format!("path does not run from {src} to {dst}"));
    }
    if path.links.len() + 1 != path.nodes.len() {
        return Err("node walk and link list disagree in length".into());
    }
    let distinct: BTreeSet<_> = path.nodes.iter().collect();
    if distinct.len() != path.nodes.len() {
        return Err("path revisits a node".into());
    }
    for (pair, &link) in path.nodes.windows(2).zip(&path.links) {
        if net.link_between(pair[0], pair[1]) != Some(link) {
            return Err(format!("no substrate link {} between {} and {}", link.0, pair[0], pair[1]));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::{Embedding, SubstratePath};

    fn kinds(v: &[Violation]) -> Vec<ViolationKind> {
        let mut k: Vec<_> = v.iter().map(|x| x.kind).collect();
        k.sort();
        k.dedup();
        k
    }

    /// Two virtual nodes (vsd 1, vsl 1, both domains) joined by a bw-10 link.
    fn base() -> (crate::model::SubstrateNetwork, crate::model::VirtualNetworkRequest, Embedding) {
        let net = two_domain_line();
        let req = vnr(
            0,
            vec![vnode(0, 20, 1, 1, &[0, 1]), vnode(1, 10, 1, 1, &[0, 1])],
            vec![vlink(0, 1, 10)],
        );
        let emb = Embedding::new(&req, vec![NodeId(1), NodeId(0)], vec![path_of(&net, &[1, 0])]);
        (net, req, emb)
    }

    #[test]
    fn feasible_embedding_has_no_violations() {
        let (net, req, emb) = base();
        assert!(validate_embedding(&net, &req, &emb).is_empty());
    }

    #[test]
    fn shared_host_is_an_injectivity_violation() {
        let (net, mut req, _) = base();
        req.links.clear();
        let emb = Embedding::new(&req, vec![NodeId(1), NodeId(1)], vec![]);
        assert_eq!(kinds(&validate_embedding(&net, &req, &emb)), vec![ViolationKind::Injectivity]);
    }

    #[test]
    fn under_secured_host_violates_backward_security() {
        let (net, mut req, emb) = base();
        req.nodes[0].vsd = 4;
        assert_eq!(kinds(&validate_embedding(&net, &req, &emb)), vec![ViolationKind::SecurityBackward]);
    }

    #[test]
    fn demanding_host_violates_forward_security() {
        let nodes = vec![node(0, 0, 50, 2, 3), node(1, 0, 50, 2, 0)];
        let net = crate::model::SubstrateNetwork::new(1, &nodes, &[link(0, 1, 100)]).unwrap();
        let req = vnr(0, vec![vnode(0, 20, 1, 1, &[0]), vnode(1, 10, 1, 1, &[0])], vec![vlink(0, 1, 10)]);
        let emb = Embedding::new(&req, vec![NodeId(0), NodeId(1)], vec![path_of(&net, &[0, 1])]);
        assert_eq!(kinds(&validate_embedding(&net, &req, &emb)), vec![ViolationKind::SecurityForward]);
    }

    #[test]
    fn cpu_overdraft() {
        let (net, mut req, emb) = base();
        req.nodes[0].cpu_demand = 51;
        let emb = Embedding::new(&req, emb.node_map.clone(), emb.link_map.clone());
        assert_eq!(kinds(&validate_embedding(&net, &req, &emb)), vec![ViolationKind::Cpu]);
    }

    #[test]
    fn wrong_domain() {
        let (net, mut req, emb) = base();
        req.nodes[1].cd = [crate::model::DomainId(1)].into();
        assert_eq!(kinds(&validate_embedding(&net, &req, &emb)), vec![ViolationKind::CandidateDomain]);
    }

    #[test]
    fn bandwidth_overdraft_is_cumulative() {
        let net = two_domain_line();
        // Three nodes on 0,1,2: links 0-1 and 0-2 both cross substrate link 0-1.
        let req = vnr(
            0,
            vec![vnode(0, 1, 0, 0, &[0]), vnode(1, 1, 0, 0, &[0]), vnode(2, 1, 0, 0, &[0])],
            vec![vlink(0, 1, 60), vlink(0, 2, 60)],
        );
        let emb = Embedding::new(
            &req,
            vec![NodeId(0), NodeId(1), NodeId(2)],
            vec![path_of(&net, &[0, 1]), path_of(&net, &[0, 1, 2])],
        );
        assert_eq!(kinds(&validate_embedding(&net, &req, &emb)), vec![ViolationKind::Bandwidth]);
    }

    #[test]
    fn loop_mapping() {
        let (net, req, _) = base();
        let emb = Embedding::new(
            &req,
            vec![NodeId(1), NodeId(1)],
            vec![SubstratePath { nodes: vec![NodeId(1)], links: vec![] }],
        );
        assert_eq!(
            kinds(&validate_embedding(&net, &req, &emb)),
            vec![ViolationKind::Injectivity, ViolationKind::Loop]
        );
    }

    #[test]
    fn broken_paths() {
        let (net, req, emb) = base();
        let mut wrong_end = emb.clone();
        wrong_end.link_map[0] = path_of(&net, &[1, 2]);
        assert_eq!(kinds(&validate_embedding(&net, &req, &wrong_end)), vec![ViolationKind::SinglePath]);

        let mut missing = emb.clone();
        missing.link_map.clear();
        assert_eq!(kinds(&validate_embedding(&net, &req, &missing)), vec![ViolationKind::SinglePath]);

        let mut non_simple = emb;
        non_simple.link_map[0] = path_of(&net, &[1, 2, 1, 0]);
        assert_eq!(kinds(&validate_embedding(&net, &req, &non_simple)), vec![ViolationKind::SinglePath]);
    }
}
