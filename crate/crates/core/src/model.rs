//! Substrate and virtual network types, residual bookkeeping and structural
//! queries.
//!
//! A [`SubstrateNetwork`] is partitioned into domains. Links between nodes of
//! the same domain are intra-domain links; links crossing domains are
//! inter-domain links, and their endpoints are *boundary nodes*. Every node
//! caches its intra-domain hop distance to the nearest boundary node.
//!
//! Capacities and residuals are kept side by side. [`SubstrateNetwork::allocate`]
//! and [`SubstrateNetwork::release`] are exact inverses over integer resources.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Cpu = u32;
pub type Bandwidth = u32;
pub type SecurityLevel = u8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VnrId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.0)
    }
}

impl fmt::Display for VnrId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vnr{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("insufficient resources: {0}")]
    InsufficientResources(String),
    #[error("{0} is not currently allocated")]
    DoubleRelease(VnrId),
    #[error("{0} is already allocated")]
    AlreadyAllocated(VnrId),
    #[error("domain {0} has no node attached to an inter-domain link")]
    NoBoundaryNode(DomainId),
    #[error("invalid network: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkKind {
    IntraDomain,
    InterDomain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubstrateNode {
    pub id: NodeId,
    pub domain: DomainId,
    pub cpu_capacity: Cpu,
    pub cpu_residual: Cpu,
    /// Security level offered to hosted virtual nodes.
    pub ssl: SecurityLevel,
    /// Minimum security level demanded from hosted virtual nodes.
    pub ssd: SecurityLevel,
    pub hop_to_boundary: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubstrateLink {
    pub id: LinkId,
    /// Stored with the smaller node id first.
    pub endpoints: (NodeId, NodeId),
    pub bw_capacity: Bandwidth,
    pub bw_residual: Bandwidth,
    pub kind: LinkKind,
}

impl SubstrateLink {
    pub fn other(&self, node: NodeId) -> NodeId {
        if self.endpoints.0 == node {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }
}

/// Node description used to build a network; residual starts at capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: usize,
    pub domain: usize,
    pub cpu: Cpu,
    pub ssl: SecurityLevel,
    pub ssd: SecurityLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub u: usize,
    pub v: usize,
    pub bw: Bandwidth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubstrateNetwork {
    domains: usize,
    nodes: Vec<SubstrateNode>,
    links: Vec<SubstrateLink>,
    /// Per node, `(neighbour, link)` sorted by neighbour id.
    adjacency: Vec<Vec<(NodeId, LinkId)>>,
    link_index: HashMap<(NodeId, NodeId), LinkId>,
    active: BTreeSet<VnrId>,
}

impl SubstrateNetwork {
    /// Builds a network from node and link descriptions.
    ///
    /// Node ids must be `0..n` in order, domains `0..domains`. With more than
    /// one domain, every domain needs at least one boundary node so the hop
    /// cache can be filled.
    pub fn new(domains: usize, nodes: &[NodeSpec], links: &[LinkSpec]) -> Result<Self, ModelError> {
        if domains == 0 {
            return Err(ModelError::Invalid("domain count must be positive".into()));
        }
        let mut built = Vec::with_capacity(nodes.len());
        for (idx, spec) in nodes.iter().enumerate() {
            if spec.id != idx {
                return Err(ModelError::Invalid(format!(
                    "node ids must be contiguous from 0; position {idx} holds id {}",
                    spec.id
                )));
            }
            if spec.domain >= domains {
                return Err(ModelError::Invalid(format!(
                    "node {} lies in domain {} but only {domains} domains exist",
                    spec.id, spec.domain
                )));
            }
            built.push(SubstrateNode {
                id: NodeId(spec.id),
                domain: DomainId(spec.domain),
                cpu_capacity: spec.cpu,
                cpu_residual: spec.cpu,
                ssl: spec.ssl,
                ssd: spec.ssd,
                hop_to_boundary: 0,
            });
        }

        let mut adjacency = vec![Vec::new(); built.len()];
        let mut link_index = HashMap::with_capacity(links.len());
        let mut built_links = Vec::with_capacity(links.len());
        for spec in links {
            if spec.u >= built.len() || spec.v >= built.len() {
                return Err(ModelError::Invalid(format!(
                    "link ({}, {}) references an unknown node",
                    spec.u, spec.v
                )));
            }
            if spec.u == spec.v {
                return Err(ModelError::Invalid(format!("self-loop on node {}", spec.u)));
            }
            let (a, b) = (NodeId(spec.u.min(spec.v)), NodeId(spec.u.max(spec.v)));
            let id = LinkId(built_links.len());
            if link_index.insert((a, b), id).is_some() {
                return Err(ModelError::Invalid(format!("duplicate link ({}, {})", a.0, b.0)));
            }
            let kind = if built[a.0].domain == built[b.0].domain {
                LinkKind::IntraDomain
            } else {
                LinkKind::InterDomain
            };
            adjacency[a.0].push((b, id));
            adjacency[b.0].push((a, id));
            built_links.push(SubstrateLink {
                id,
                endpoints: (a, b),
                bw_capacity: spec.bw,
                bw_residual: spec.bw,
                kind,
            });
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let mut net = SubstrateNetwork {
            domains,
            nodes: built,
            links: built_links,
            adjacency,
            link_index,
            active: BTreeSet::new(),
        };
        if domains > 1 {
            net.refresh_boundary_hops()?;
        }
        Ok(net)
    }

    pub fn domain_count(&self) -> usize {
        self.domains
    }

    pub fn nodes(&self) -> &[SubstrateNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[SubstrateLink] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> &SubstrateNode {
        &self.nodes[id.0]
    }

    pub fn link(&self, id: LinkId) -> &SubstrateLink {
        &self.links[id.0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn neighbours(&self, id: NodeId) -> &[(NodeId, LinkId)] {
        &self.adjacency[id.0]
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.link_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn nodes_in(&self, domain: DomainId) -> impl Iterator<Item = &SubstrateNode> {
        self.nodes.iter().filter(move |n| n.domain == domain)
    }

    pub fn is_boundary(&self, id: NodeId) -> bool {
        self.adjacency[id.0]
            .iter()
            .any(|&(_, l)| self.links[l.0].kind == LinkKind::InterDomain)
    }

    pub fn link_residuals(&self) -> Vec<Bandwidth> {
        self.links.iter().map(|l| l.bw_residual).collect()
    }

    pub fn is_active(&self, vnr: VnrId) -> bool {
        self.active.contains(&vnr)
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    /// True when every residual equals its capacity.
    pub fn is_pristine(&self) -> bool {
        self.nodes.iter().all(|n| n.cpu_residual == n.cpu_capacity)
            && self.links.iter().all(|l| l.bw_residual == l.bw_capacity)
    }

    /// Residual state as a flat vector (node CPU then link bandwidth).
    pub fn residual_snapshot(&self) -> Vec<u32> {
        self.nodes
            .iter()
            .map(|n| n.cpu_residual)
            .chain(self.links.iter().map(|l| l.bw_residual))
            .collect()
    }

    /// Intra-domain BFS distance from every node to its domain's nearest
    /// boundary node. Inter-domain links mark boundary membership but are
    /// never traversed.
    pub fn compute_boundary_hops(&self) -> Result<Vec<u32>, ModelError> {
        let mut hops = vec![u32::MAX; self.nodes.len()];
        let mut queue = VecDeque::new();
        for node in &self.nodes {
            if self.is_boundary(node.id) {
                hops[node.id.0] = 0;
                queue.push_back(node.id);
            }
        }
        for d in 0..self.domains {
            let domain = DomainId(d);
            let mut members = self.nodes_in(domain).peekable();
            if members.peek().is_some() && !members.any(|n| hops[n.id.0] == 0) {
                return Err(ModelError::NoBoundaryNode(domain));
            }
        }
        while let Some(cur) = queue.pop_front() {
            let next = hops[cur.0] + 1;
            for &(nb, link) in &self.adjacency[cur.0] {
                if self.links[link.0].kind == LinkKind::IntraDomain && hops[nb.0] == u32::MAX {
                    hops[nb.0] = next;
                    queue.push_back(nb);
                }
            }
        }
        if let Some(stranded) = self.nodes.iter().find(|n| hops[n.id.0] == u32::MAX) {
            // A domain that is internally disconnected can leave a component
            // without a boundary node.
            return Err(ModelError::NoBoundaryNode(stranded.domain));
        }
        Ok(hops)
    }

    pub fn refresh_boundary_hops(&mut self) -> Result<(), ModelError> {
        let hops = self.compute_boundary_hops()?;
        for (node, h) in self.nodes.iter_mut().zip(hops) {
            node.hop_to_boundary = h;
        }
        Ok(())
    }

    pub fn max_boundary_hop(&self) -> u32 {
        self.nodes.iter().map(|n| n.hop_to_boundary).max().unwrap_or(0)
    }

    /// Debits the embedding's demands from residuals. On error nothing changes.
    pub fn allocate(&mut self, emb: &Embedding) -> Result<(), ModelError> {
        if self.active.contains(&emb.vnr_id) {
            return Err(ModelError::AlreadyAllocated(emb.vnr_id));
        }
        let (cpu, bw) = self.demand_totals(emb)?;
        for (&node, &demand) in &cpu {
            let residual = self.nodes[node.0].cpu_residual;
            if demand > residual as u64 {
                return Err(ModelError::InsufficientResources(format!(
                    "{node} has {residual} CPU left, {} requests {demand}",
                    emb.vnr_id
                )));
            }
        }
        for (&link, &demand) in &bw {
            let residual = self.links[link.0].bw_residual;
            if demand > residual as u64 {
                return Err(ModelError::InsufficientResources(format!(
                    "link {} has {residual} bandwidth left, {} requests {demand}",
                    link.0, emb.vnr_id
                )));
            }
        }
        for (node, demand) in cpu {
            self.nodes[node.0].cpu_residual -= demand as Cpu;
        }
        for (link, demand) in bw {
            self.links[link.0].bw_residual -= demand as Bandwidth;
        }
        self.active.insert(emb.vnr_id);
        Ok(())
    }

    /// Exact inverse of [`allocate`](Self::allocate).
    pub fn release(&mut self, emb: &Embedding) -> Result<(), ModelError> {
        if !self.active.contains(&emb.vnr_id) {
            return Err(ModelError::DoubleRelease(emb.vnr_id));
        }
        let (cpu, bw) = self.demand_totals(emb)?;
        for (&node, &demand) in &cpu {
            let n = &self.nodes[node.0];
            if n.cpu_residual as u64 + demand > n.cpu_capacity as u64 {
                return Err(ModelError::Invalid(format!(
                    "releasing {} would push {node} above capacity",
                    emb.vnr_id
                )));
            }
        }
        for (&link, &demand) in &bw {
            let l = &self.links[link.0];
            if l.bw_residual as u64 + demand > l.bw_capacity as u64 {
                return Err(ModelError::Invalid(format!(
                    "releasing {} would push link {} above capacity",
                    emb.vnr_id, link.0
                )));
            }
        }
        for (node, demand) in cpu {
            self.nodes[node.0].cpu_residual += demand as Cpu;
        }
        for (link, demand) in bw {
            self.links[link.0].bw_residual += demand as Bandwidth;
        }
        self.active.remove(&emb.vnr_id);
        Ok(())
    }

    #[allow(clippy::type_complexity)]
    fn demand_totals(
        &self,
        emb: &Embedding,
    ) -> Result<(HashMap<NodeId, u64>, HashMap<LinkId, u64>), ModelError> {
        if emb.node_map.len() != emb.cpu_demands.len() || emb.link_map.len() != emb.bw_demands.len() {
            return Err(ModelError::Invalid(format!(
                "embedding for {} has mismatched demand vectors",
                emb.vnr_id
            )));
        }
        let mut cpu: HashMap<NodeId, u64> = HashMap::new();
        for (&node, &demand) in emb.node_map.iter().zip(&emb.cpu_demands) {
            if node.0 >= self.nodes.len() {
                return Err(ModelError::Invalid(format!("unknown substrate node {node}")));
            }
            *cpu.entry(node).or_default() += demand as u64;
        }
        let mut bw: HashMap<LinkId, u64> = HashMap::new();
        for (path, &demand) in emb.link_map.iter().zip(&emb.bw_demands) {
            for &link in &path.links {
                if link.0 >= self.links.len() {
                    return Err(ModelError::Invalid(format!("unknown substrate link {}", link.0)));
                }
                *bw.entry(link).or_default() += demand as u64;
            }
        }
        Ok((cpu, bw))
    }

    /// Serializable description of the topology and capacities.
    pub fn to_doc(&self) -> SubstrateDoc {
        SubstrateDoc {
            domains: self.domains,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeSpec {
                    id: n.id.0,
                    domain: n.domain.0,
                    cpu: n.cpu_capacity,
                    ssl: n.ssl,
                    ssd: n.ssd,
                })
                .collect(),
            links: self
                .links
                .iter()
                .map(|l| LinkSpec {
                    u: l.endpoints.0 .0,
                    v: l.endpoints.1 .0,
                    bw: l.bw_capacity,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("substrate document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: SubstrateDoc =
            serde_json::from_str(text.trim()).map_err(|e| ModelError::Invalid(e.to_string()))?;
        SubstrateNetwork::new(doc.domains, &doc.nodes, &doc.links)
    }
}

/// On-disk substrate format: one JSON object on a single line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstrateDoc {
    pub domains: usize,
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VirtualNode {
    pub id: usize,
    #[serde(rename = "cpu")]
    pub cpu_demand: Cpu,
    /// Minimum security level the node demands from its host.
    pub vsd: SecurityLevel,
    /// Security level the node itself offers to its host.
    pub vsl: SecurityLevel,
    /// Candidate domains the node may be placed in.
    pub cd: BTreeSet<DomainId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VirtualLink {
    pub u: usize,
    pub v: usize,
    #[serde(rename = "bw")]
    pub bw_demand: Bandwidth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VnrDoc", into = "VnrDoc")]
pub struct VirtualNetworkRequest {
    pub id: VnrId,
    pub nodes: Vec<VirtualNode>,
    pub links: Vec<VirtualLink>,
    pub arrival_time: f64,
    pub lifetime: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VnrDoc {
    id: VnrId,
    arrival: f64,
    lifetime: f64,
    nodes: Vec<VirtualNode>,
    links: Vec<VirtualLink>,
}

impl TryFrom<VnrDoc> for VirtualNetworkRequest {
    type Error = ModelError;

    fn try_from(doc: VnrDoc) -> Result<Self, Self::Error> {
        VirtualNetworkRequest::new(doc.id, doc.nodes, doc.links, doc.arrival, doc.lifetime)
    }
}

impl From<VirtualNetworkRequest> for VnrDoc {
    fn from(vnr: VirtualNetworkRequest) -> Self {
        VnrDoc {
            id: vnr.id,
            arrival: vnr.arrival_time,
            lifetime: vnr.lifetime,
            nodes: vnr.nodes,
            links: vnr.links,
        }
    }
}

impl VirtualNetworkRequest {
    pub fn new(
        id: VnrId,
        nodes: Vec<VirtualNode>,
        links: Vec<VirtualLink>,
        arrival_time: f64,
        lifetime: f64,
    ) -> Result<Self, ModelError> {
        let bad = |msg: String| Err(ModelError::Invalid(format!("{id}: {msg}")));
        if nodes.is_empty() {
            return bad("a request needs at least one node".into());
        }
        if !(lifetime > 0.0 && lifetime.is_finite()) {
            return bad(format!("lifetime must be positive, got {lifetime}"));
        }
        if !(arrival_time >= 0.0 && arrival_time.is_finite()) {
            return bad(format!("arrival time must be non-negative, got {arrival_time}"));
        }
        for (idx, node) in nodes.iter().enumerate() {
            if node.id != idx {
                return bad(format!("virtual node ids must be contiguous; position {idx} holds {}", node.id));
            }
            if node.cpu_demand == 0 {
                return bad(format!("virtual node {idx} has zero CPU demand"));
            }
            if node.cd.is_empty() {
                return bad(format!("virtual node {idx} has no candidate domain"));
            }
        }
        let mut seen = BTreeSet::new();
        for link in &links {
            if link.u >= nodes.len() || link.v >= nodes.len() || link.u == link.v {
                return bad(format!("invalid virtual link ({}, {})", link.u, link.v));
            }
            if link.bw_demand == 0 {
                return bad(format!("virtual link ({}, {}) has zero bandwidth", link.u, link.v));
            }
            if !seen.insert((link.u.min(link.v), link.u.max(link.v))) {
                return bad(format!("duplicate virtual link ({}, {})", link.u, link.v));
            }
        }
        if !is_connected(nodes.len(), links.iter().map(|l| (l.u, l.v))) {
            return bad("virtual graph is disconnected".into());
        }
        Ok(VirtualNetworkRequest {
            id,
            nodes,
            links,
            arrival_time,
            lifetime,
        })
    }

    pub fn departure_time(&self) -> f64 {
        self.arrival_time + self.lifetime
    }

    pub fn total_cpu(&self) -> u64 {
        self.nodes.iter().map(|n| n.cpu_demand as u64).sum()
    }

    pub fn total_bw(&self) -> u64 {
        self.links.iter().map(|l| l.bw_demand as u64).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text.trim()).map_err(|e| ModelError::Invalid(e.to_string()))
    }
}

pub(crate) fn is_connected(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for (a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(cur) = stack.pop() {
        for &nb in &adj[cur] {
            if !seen[nb] {
                seen[nb] = true;
                count += 1;
                stack.push(nb);
            }
        }
    }
    count == n
}

/// A simple substrate path given both as a node walk and as the links it uses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubstratePath {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
}

impl SubstratePath {
    pub fn hops(&self) -> usize {
        self.links.len()
    }
}

/// A complete mapping of one request: node placement plus one path per
/// virtual link. Demands are copied in so the embedding can be allocated and
/// released on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub vnr_id: VnrId,
    /// Host of each virtual node, indexed by virtual node id.
    pub node_map: Vec<NodeId>,
    /// Path of each virtual link, indexed like the request's `links`.
    pub link_map: Vec<SubstratePath>,
    pub cpu_demands: Vec<Cpu>,
    pub bw_demands: Vec<Bandwidth>,
    /// Revenue with equal node/link weights.
    pub revenue: f64,
    /// Hop-weighted resource consumption.
    pub cost: f64,
}

impl Embedding {
    pub fn new(vnr: &VirtualNetworkRequest, node_map: Vec<NodeId>, link_map: Vec<SubstratePath>) -> Self {
        let cpu_demands: Vec<Cpu> = vnr.nodes.iter().map(|n| n.cpu_demand).collect();
        let bw_demands: Vec<Bandwidth> = vnr.links.iter().map(|l| l.bw_demand).collect();
        let mut emb = Embedding {
            vnr_id: vnr.id,
            node_map,
            link_map,
            cpu_demands,
            bw_demands,
            revenue: 0.0,
            cost: 0.0,
        };
        emb.revenue = crate::metrics::revenue(vnr, crate::metrics::RevenueWeights::default());
        emb.cost = crate::metrics::cost(&emb, crate::metrics::CostMode::HopWeighted);
        emb
    }

    pub fn total_cpu(&self) -> u64 {
        self.cpu_demands.iter().map(|&c| c as u64).sum()
    }

    pub fn total_bw(&self) -> u64 {
        self.bw_demands.iter().map(|&b| b as u64).sum()
    }

    /// Sum of bandwidth demand times path length.
    pub fn bw_hops(&self) -> u64 {
        self.link_map
            .iter()
            .zip(&self.bw_demands)
            .map(|(p, &bw)| bw as u64 * p.hops() as u64)
            .sum()
    }
}
