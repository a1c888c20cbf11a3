//! Seeded substrate and workload generation.
//!
//! Substrates are per-domain Erdős–Rényi graphs (repaired to connectivity)
//! joined by a fixed number of inter-domain links per domain pair. Workloads
//! are Poisson arrival streams with exponential lifetimes.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    DomainId, LinkSpec, ModelError, NodeSpec, SubstrateNetwork, VirtualLink, VirtualNetworkRequest,
    VirtualNode, VnrId,
};
use crate::rng::{stream_rng, SimRng, Stream};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Closed integer range `[lo, hi]`, written as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange(pub u32, pub u32);

impl IntRange {
    pub fn lo(&self) -> u32 {
        self.0
    }

    pub fn hi(&self) -> u32 {
        self.1
    }

    pub fn contains(&self, x: u32) -> bool {
        self.0 <= x && x <= self.1
    }

    fn draw(&self, rng: &mut SimRng) -> u32 {
        rng.random_range(self.0..=self.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub domain_count: usize,
    pub node_count: usize,
    pub intra_link_rate: f64,
    pub substrate_cpu_range: IntRange,
    /// Used for both intra- and inter-domain links.
    pub substrate_bw_range: IntRange,
    pub security_range: IntRange,
    pub vnr_node_range: IntRange,
    pub vnr_cpu_range: IntRange,
    pub vnr_bw_range: IntRange,
    pub vnr_link_probability: f64,
    pub vnr_arrival_rate: f64,
    pub vnr_mean_lifetime: f64,
    pub cd_size_range: IntRange,
    pub inter_link_count_per_domain_pair: usize,
    /// Swap back to the raw parameter table CPU ranges (substrate `[0,50]`,
    /// virtual `[50,100]`), under which nearly every request is infeasible.
    pub literal_table1: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 1,
            domain_count: 4,
            node_count: 120,
            intra_link_rate: 0.6,
            substrate_cpu_range: IntRange(50, 100),
            substrate_bw_range: IntRange(1000, 3000),
            security_range: IntRange(0, 4),
            vnr_node_range: IntRange(2, 10),
            vnr_cpu_range: IntRange(1, 50),
            vnr_bw_range: IntRange(1, 10),
            vnr_link_probability: 0.5,
            vnr_arrival_rate: 0.05,
            vnr_mean_lifetime: 1000.0,
            cd_size_range: IntRange(1, 4),
            inter_link_count_per_domain_pair: 2,
            literal_table1: false,
        }
    }
}

impl GeneratorConfig {
    /// Parses a JSON config; unknown keys are rejected by name.
    pub fn from_json(text: &str) -> Result<Self, GenError> {
        let cfg: GeneratorConfig =
            serde_json::from_str(text).map_err(|e| GenError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// A small two-domain setup for smoke tests and examples.
    pub fn miniature() -> Self {
        GeneratorConfig {
            domain_count: 2,
            node_count: 12,
            vnr_node_range: IntRange(2, 4),
            vnr_arrival_rate: 0.05,
            vnr_mean_lifetime: 200.0,
            inter_link_count_per_domain_pair: 2,
            cd_size_range: IntRange(1, 2),
            ..GeneratorConfig::default()
        }
    }

    /// CPU ranges actually used for generation.
    pub fn cpu_ranges(&self) -> (IntRange, IntRange) {
        if self.literal_table1 {
            (IntRange(0, 50), IntRange(50, 100))
        } else {
            (self.substrate_cpu_range, self.vnr_cpu_range)
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |key: &str, why: String| Err(GenError::InvalidConfig(format!("{key}: {why}")));
        let ranges = [
            ("substrate_cpu_range", self.substrate_cpu_range),
            ("substrate_bw_range", self.substrate_bw_range),
            ("security_range", self.security_range),
            ("vnr_node_range", self.vnr_node_range),
            ("vnr_cpu_range", self.vnr_cpu_range),
            ("vnr_bw_range", self.vnr_bw_range),
            ("cd_size_range", self.cd_size_range),
        ];
        for (key, r) in ranges {
            if r.0 > r.1 {
                return bad(key, format!("min {} exceeds max {}", r.0, r.1));
            }
        }
        if self.domain_count == 0 {
            return bad("domain_count", "must be positive".into());
        }
        if self.node_count < self.domain_count {
            return bad("node_count", format!("{} nodes cannot fill {} domains", self.node_count, self.domain_count));
        }
        if !(0.0..=1.0).contains(&self.intra_link_rate) {
            return bad("intra_link_rate", format!("{} is not a probability", self.intra_link_rate));
        }
        if !(0.0..=1.0).contains(&self.vnr_link_probability) {
            return bad("vnr_link_probability", format!("{} is not a probability", self.vnr_link_probability));
        }
        if !(self.vnr_arrival_rate > 0.0 && self.vnr_arrival_rate.is_finite()) {
            return bad("vnr_arrival_rate", "must be positive".into());
        }
        if !(self.vnr_mean_lifetime > 0.0 && self.vnr_mean_lifetime.is_finite()) {
            return bad("vnr_mean_lifetime", "must be positive".into());
        }
        if self.security_range.1 > u8::MAX as u32 {
            return bad("security_range", "levels must fit in 0..=255".into());
        }
        if self.vnr_node_range.0 == 0 {
            return bad("vnr_node_range", "requests need at least one node".into());
        }
        if self.vnr_bw_range.0 == 0 {
            return bad("vnr_bw_range", "virtual links need positive bandwidth".into());
        }
        if self.cd_size_range.0 == 0 || self.cd_size_range.1 as usize > self.domain_count {
            return bad(
                "cd_size_range",
                format!("sizes must lie in [1, {}]", self.domain_count),
            );
        }
        if self.domain_count > 1 {
            if self.inter_link_count_per_domain_pair == 0 {
                return bad("inter_link_count_per_domain_pair", "every domain needs a boundary node".into());
            }
            let smallest = self.node_count / self.domain_count;
            if self.inter_link_count_per_domain_pair > smallest * smallest {
                return bad(
                    "inter_link_count_per_domain_pair",
                    format!("at most {} distinct links fit between two domains", smallest * smallest),
                );
            }
        }
        Ok(())
    }

    /// Contiguous node id ranges per domain; the remainder goes to the
    /// lowest-numbered domains.
    pub fn domain_slices(&self) -> Vec<std::ops::Range<usize>> {
        let base = self.node_count / self.domain_count;
        let extra = self.node_count % self.domain_count;
        let mut start = 0;
        (0..self.domain_count)
            .map(|d| {
                let len = base + usize::from(d < extra);
                let r = start..start + len;
                start += len;
                r
            })
            .collect()
    }
}

/// Links `nodes` into one component. Pairs are taken in lexicographic order
/// and kept with probability `p`; any leftover components are chained
/// together through uniformly chosen members.
fn random_connected_graph(n: usize, p: f64, rng: &mut SimRng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    let comps = components(n, &edges);
    for pair in comps.windows(2) {
        let a = pair[0][rng.random_range(0..pair[0].len())];
        let b = pair[1][rng.random_range(0..pair[1].len())];
        edges.push((a.min(b), a.max(b)));
    }
    edges
}

/// Connected components, each sorted, ordered by smallest member.
fn components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for x in 0..n {
        let r = find(&mut parent, x);
        groups.entry(r).or_default().push(x);
    }
    groups.into_values().collect()
}

/// Generates the substrate network described by `cfg`.
pub fn generate_substrate(cfg: &GeneratorConfig) -> Result<SubstrateNetwork, GenError> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, Stream::Substrate, 0);
    let (cpu_range, _) = cfg.cpu_ranges();
    let slices = cfg.domain_slices();

    let mut nodes = Vec::with_capacity(cfg.node_count);
    let mut links = Vec::new();
    for (d, slice) in slices.iter().enumerate() {
        for id in slice.clone() {
            nodes.push(NodeSpec {
                id,
                domain: d,
                cpu: cpu_range.draw(&mut rng),
                ssl: cfg.security_range.draw(&mut rng) as u8,
                ssd: cfg.security_range.draw(&mut rng) as u8,
            });
        }
        for (a, b) in random_connected_graph(slice.len(), cfg.intra_link_rate, &mut rng) {
            links.push(LinkSpec {
                u: slice.start + a,
                v: slice.start + b,
                bw: cfg.substrate_bw_range.draw(&mut rng),
            });
        }
    }
    for a in 0..slices.len() {
        for b in a + 1..slices.len() {
            let mut placed = BTreeSet::new();
            while placed.len() < cfg.inter_link_count_per_domain_pair {
                let u = rng.random_range(slices[a].clone());
                let v = rng.random_range(slices[b].clone());
                if placed.insert((u, v)) {
                    links.push(LinkSpec {
                        u,
                        v,
                        bw: cfg.substrate_bw_range.draw(&mut rng),
                    });
                }
            }
        }
    }
    Ok(SubstrateNetwork::new(cfg.domain_count, &nodes, &links)?)
}

/// Generates every request arriving in `[0, horizon)`, ids from 0.
pub fn generate_vnr_stream(cfg: &GeneratorConfig, horizon: f64) -> Result<Vec<VirtualNetworkRequest>, GenError> {
    cfg.validate()?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(GenError::InvalidConfig(format!("horizon: {horizon} is not a finite non-negative time")));
    }
    let mut rng = stream_rng(cfg.seed, Stream::Workload, 0);
    let (_, vcpu) = cfg.cpu_ranges();
    let vcpu = IntRange(vcpu.0.max(1), vcpu.1.max(1));
    let inter_arrival = Exp::new(cfg.vnr_arrival_rate).expect("validated rate");
    let lifetime = Exp::new(1.0 / cfg.vnr_mean_lifetime).expect("validated lifetime");

    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        t += inter_arrival.sample(&mut rng);
        if t >= horizon {
            break;
        }
        let mut life = lifetime.sample(&mut rng);
        if life <= 0.0 {
            life = f64::MIN_POSITIVE;
        }
        let n = cfg.vnr_node_range.draw(&mut rng) as usize;
        let nodes = (0..n)
            .map(|id| {
                let cpu_demand = vcpu.draw(&mut rng);
                let vsd = cfg.security_range.draw(&mut rng) as u8;
                let vsl = cfg.security_range.draw(&mut rng) as u8;
                let size = cfg.cd_size_range.draw(&mut rng) as usize;
                let cd = sample(&mut rng, cfg.domain_count, size)
                    .into_iter()
                    .map(DomainId)
                    .collect();
                VirtualNode { id, cpu_demand, vsd, vsl, cd }
            })
            .collect();
        let links = random_connected_graph(n, cfg.vnr_link_probability, &mut rng)
            .into_iter()
            .map(|(u, v)| VirtualLink {
                u,
                v,
                bw_demand: cfg.vnr_bw_range.draw(&mut rng),
            })
            .collect();
        let id = VnrId(out.len() as u64);
        out.push(VirtualNetworkRequest::new(id, nodes, links, t, life)?);
    }
    Ok(out)
}
