//! Discrete-event simulation of request arrivals and departures.
//!
//! On arrival the configured strategy proposes an embedding against the
//! current residual network; accepted embeddings are allocated and a
//! departure is scheduled at `arrival + lifetime`. Rejected requests are
//! dropped. At equal timestamps departures run before arrivals, then lower
//! request ids first.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{greedy_embed, random_embed};
use crate::metrics::{self, CostMode, CumulativeMetrics, MetricsAccumulator, MetricsError, RevenueWeights, WindowMetrics};
use crate::model::{Embedding, ModelError, SubstrateNetwork, VirtualNetworkRequest, VnrId};
use crate::pso::{optimize, PsoConfig};
use crate::validate::{validate_embedding, Violation};

/// Something that can propose an embedding for a request.
pub trait Embedder: Sync {
    fn name(&self) -> &str;

    /// Proposes an embedding against `net`, or explains the rejection.
    fn embed(&self, vnr: &VirtualNetworkRequest, net: &SubstrateNetwork) -> Result<Embedding, String>;
}

/// Priority node mapping seeding a particle swarm over placements.
#[derive(Debug, Clone, Default)]
pub struct StecIot {
    pub pso: PsoConfig,
}

impl Embedder for StecIot {
    fn name(&self) -> &str {
        "stec-iot"
    }

    fn embed(&self, vnr: &VirtualNetworkRequest, net: &SubstrateNetwork) -> Result<Embedding, String> {
        optimize(vnr, net, &self.pso)
            .map(|o| o.embedding)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy;

impl Embedder for Greedy {
    fn name(&self) -> &str {
        "greedy"
    }

    fn embed(&self, vnr: &VirtualNetworkRequest, net: &SubstrateNetwork) -> Result<Embedding, String> {
        greedy_embed(vnr, net).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RandomFeasible {
    pub seed: u64,
}

impl Embedder for RandomFeasible {
    fn name(&self) -> &str {
        "random"
    }

    fn embed(&self, vnr: &VirtualNetworkRequest, net: &SubstrateNetwork) -> Result<Embedding, String> {
        random_embed(vnr, net, self.seed).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    StecIot,
    Greedy,
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::StecIot, Strategy::Greedy, Strategy::Random];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::StecIot => "stec-iot",
            Strategy::Greedy => "greedy",
            Strategy::Random => "random",
        }
    }

    /// Instantiates the strategy; `seed` drives its randomness, if any.
    pub fn build(&self, seed: u64, pso: &PsoConfig) -> Box<dyn Embedder> {
        match self {
            Strategy::StecIot => Box::new(StecIot {
                pso: PsoConfig { seed, ..pso.clone() },
            }),
            Strategy::Greedy => Box::new(Greedy),
            Strategy::Random => Box::new(RandomFeasible { seed }),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown strategy '{s}' (expected stec-iot, greedy or random)"))
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("validator rejected the embedding accepted for {vnr}: {violations:?}")]
    ValidatorDisagreement { vnr: VnrId, violations: Vec<Violation> },
    #[error("resource bookkeeping failed for {vnr}: {source}")]
    Bookkeeping { vnr: VnrId, source: ModelError },
    #[error("audit failed at t={time}: {detail}")]
    AuditMismatch { time: f64, detail: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Requests arriving at or after the horizon are ignored; departures
    /// are always drained.
    pub horizon: f64,
    /// Width of the streaming metric windows.
    pub window: f64,
    pub revenue_weights: RevenueWeights,
    pub cost_mode: CostMode,
    /// Re-validate every n-th acceptance (0 = never).
    pub validate_every: u64,
    /// Recompute residuals from the active set every n-th event (0 = never).
    pub audit_every: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon: 50_000.0,
            window: 2_500.0,
            revenue_weights: RevenueWeights::default(),
            cost_mode: CostMode::HopWeighted,
            validate_every: 1,
            audit_every: 0,
        }
    }
}

impl SimConfig {
    /// Sampled validation, no audits.
    pub fn benchmark(horizon: f64, window: f64) -> Self {
        SimConfig {
            horizon,
            window,
            validate_every: 100,
            ..SimConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Arrival,
    Departure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Accepted,
    Rejected,
    Released,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: EventKind,
    pub vnr_id: VnrId,
    pub outcome: Outcome,
    pub embedding: Option<Embedding>,
    pub revenue: Option<f64>,
    pub cost: Option<f64>,
    /// Whether the independent validator ran on this acceptance.
    pub validated: bool,
    pub reason: Option<String>,
}

/// One line of the exported trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: f64,
    pub kind: EventKind,
    pub vnr_id: VnrId,
    pub outcome: Outcome,
    pub revenue: Option<f64>,
    pub cost: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulationTrace {
    pub strategy: String,
    pub config: SimConfig,
    pub events: Vec<TraceEvent>,
    pub final_network: SubstrateNetwork,
    /// Windowed metrics accumulated while the simulation ran.
    pub series: Vec<WindowMetrics>,
    pub cumulative: Vec<CumulativeMetrics>,
}

impl SimulationTrace {
    pub fn arrivals(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(|e| e.kind == EventKind::Arrival)
    }

    pub fn accepted(&self) -> impl Iterator<Item = &TraceEvent> {
        self.arrivals().filter(|e| e.outcome == Outcome::Accepted)
    }

    pub fn records(&self) -> impl Iterator<Item = TraceRecord> + '_ {
        self.events.iter().map(|e| TraceRecord {
            time: e.time,
            kind: e.kind,
            vnr_id: e.vnr_id,
            outcome: e.outcome,
            revenue: e.revenue,
            cost: e.cost,
        })
    }

    /// Newline-delimited JSON, one record per event.
    pub fn write_ndjson<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for rec in self.records() {
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Re-aggregates the trace with another window or weighting.
    pub fn windowed_series(
        &self,
        width: f64,
        weights: RevenueWeights,
        mode: CostMode,
    ) -> Result<Vec<WindowMetrics>, MetricsError> {
        Ok(self.reaggregate(width, weights, mode)?.series())
    }

    pub fn cumulative_series(
        &self,
        width: f64,
        weights: RevenueWeights,
        mode: CostMode,
    ) -> Result<Vec<CumulativeMetrics>, MetricsError> {
        Ok(self.reaggregate(width, weights, mode)?.cumulative())
    }

    fn reaggregate(&self, width: f64, weights: RevenueWeights, mode: CostMode) -> Result<MetricsAccumulator, MetricsError> {
        let mut acc = MetricsAccumulator::new(width, self.config.horizon)?;
        for e in self.arrivals() {
            let booked = e
                .embedding
                .as_ref()
                .map(|emb| (metrics::embedding_revenue(emb, weights), metrics::cost(emb, mode)));
            acc.record_arrival(e.time, booked);
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Scheduled {
    time: f64,
    kind: EventKind,
    vnr: VnrId,
    /// Index into the request slice.
    slot: usize,
}

impl Scheduled {
    fn key(&self) -> (f64, u8, VnrId) {
        let rank = match self.kind {
            EventKind::Departure => 0,
            EventKind::Arrival => 1,
        };
        (self.time, rank, self.vnr)
    }
}

impl Eq for Scheduled {}

impl Ord for Scheduled {
    // reversed so BinaryHeap pops the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        let (ta, ra, ia) = self.key();
        let (tb, rb, ib) = other.key();
        tb.total_cmp(&ta).then(rb.cmp(&ra)).then(ib.cmp(&ia))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Runs `vnrs` through `strategy` on `net` and returns the full trace.
pub fn run(
    mut net: SubstrateNetwork,
    vnrs: &[VirtualNetworkRequest],
    strategy: &dyn Embedder,
    cfg: &SimConfig,
) -> Result<SimulationTrace, SimError> {
    let mut acc = MetricsAccumulator::new(cfg.window, cfg.horizon)?;
    let mut queue: BinaryHeap<Scheduled> = vnrs
        .iter()
        .enumerate()
        .filter(|(_, v)| v.arrival_time < cfg.horizon)
        .map(|(slot, v)| Scheduled {
            time: v.arrival_time,
            kind: EventKind::Arrival,
            vnr: v.id,
            slot,
        })
        .collect();
    let mut active: BTreeMap<VnrId, Embedding> = BTreeMap::new();
    let mut events = Vec::new();
    let mut accepted_count = 0u64;

    while let Some(ev) = queue.pop() {
        let vnr = &vnrs[ev.slot];
        match ev.kind {
            EventKind::Arrival => {
                let before = (cfg.audit_every > 0).then(|| net.residual_snapshot());
                match strategy.embed(vnr, &net) {
                    Ok(emb) => {
                        accepted_count += 1;
                        let validate = cfg.validate_every > 0 && (accepted_count - 1).is_multiple_of(cfg.validate_every);
                        if validate {
                            let violations = validate_embedding(&net, vnr, &emb);
                            if !violations.is_empty() {
                                return Err(SimError::ValidatorDisagreement { vnr: vnr.id, violations });
                            }
                        }
                        net.allocate(&emb)
                            .map_err(|source| SimError::Bookkeeping { vnr: vnr.id, source })?;
                        let revenue = metrics::embedding_revenue(&emb, cfg.revenue_weights);
                        let cost = metrics::cost(&emb, cfg.cost_mode);
                        acc.record_arrival(ev.time, Some((revenue, cost)));
                        queue.push(Scheduled {
                            time: vnr.departure_time(),
                            kind: EventKind::Departure,
                            vnr: vnr.id,
                            slot: ev.slot,
                        });
                        events.push(TraceEvent {
                            time: ev.time,
                            kind: EventKind::Arrival,
                            vnr_id: vnr.id,
                            outcome: Outcome::Accepted,
                            embedding: Some(emb.clone()),
                            revenue: Some(revenue),
                            cost: Some(cost),
                            validated: validate,
                            reason: None,
                        });
                        active.insert(vnr.id, emb);
                    }
                    Err(reason) => {
                        if let Some(before) = before {
                            if before != net.residual_snapshot() {
                                return Err(SimError::AuditMismatch {
                                    time: ev.time,
                                    detail: format!("rejecting {} changed the substrate", vnr.id),
                                });
                            }
                        }
                        acc.record_arrival(ev.time, None);
                        events.push(TraceEvent {
                            time: ev.time,
                            kind: EventKind::Arrival,
                            vnr_id: vnr.id,
                            outcome: Outcome::Rejected,
                            embedding: None,
                            revenue: None,
                            cost: None,
                            validated: false,
                            reason: Some(reason),
                        });
                    }
                }
            }
            EventKind::Departure => {
                let emb = active.remove(&ev.vnr).expect("departures are scheduled only for accepted requests");
                net.release(&emb)
                    .map_err(|source| SimError::Bookkeeping { vnr: ev.vnr, source })?;
                events.push(TraceEvent {
                    time: ev.time,
                    kind: EventKind::Departure,
                    vnr_id: ev.vnr,
                    outcome: Outcome::Released,
                    embedding: None,
                    revenue: None,
                    cost: None,
                    validated: false,
                    reason: None,
                });
            }
        }
        if cfg.audit_every > 0 && (events.len() as u64).is_multiple_of(cfg.audit_every) {
            audit(&net, &active).map_err(|detail| SimError::AuditMismatch { time: ev.time, detail })?;
        }
    }

    Ok(SimulationTrace {
        strategy: strategy.name().to_string(),
        config: cfg.clone(),
        events,
        final_network: net,
        series: acc.series(),
        cumulative: acc.cumulative(),
    })
}

/// Checks `capacity = residual + Σ active demand` on every node and link.
pub fn audit(net: &SubstrateNetwork, active: &BTreeMap<VnrId, Embedding>) -> Result<(), String> {
    let mut cpu = vec![0u64; net.node_count()];
    let mut bw = vec![0u64; net.links().len()];
    for emb in active.values() {
        for (host, &d) in emb.node_map.iter().zip(&emb.cpu_demands) {
            cpu[host.0] += d as u64;
        }
        for (path, &d) in emb.link_map.iter().zip(&emb.bw_demands) {
            for l in &path.links {
                bw[l.0] += d as u64;
            }
        }
    }
    for n in net.nodes() {
        if n.cpu_residual as u64 + cpu[n.id.0] != n.cpu_capacity as u64 {
            return Err(format!("{}: residual {} + allocated {} != capacity {}", n.id, n.cpu_residual, cpu[n.id.0], n.cpu_capacity));
        }
    }
    for l in net.links() {
        if l.bw_residual as u64 + bw[l.id.0] != l.bw_capacity as u64 {
            return Err(format!("link {}: residual {} + allocated {} != capacity {}", l.id.0, l.bw_residual, bw[l.id.0], l.bw_capacity));
        }
    }
    Ok(())
}
