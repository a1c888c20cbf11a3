//! Discrete particle swarm search over node placements.
//!
//! A particle's position assigns one substrate node to every virtual node;
//! its velocity is a keep/redraw mask of the same length. Each iteration:
//!
//! 1. `s_k = ω·v_k + r1·c1·[pbest_k = x_k] + r2·c2·[gbest_k = x_k]`, and the
//!    new mask bit is `s_k` rounded half-up, clamped to `{0, 1}`.
//! 2. Components with bit 1 are kept; components with bit 0 are redrawn
//!    uniformly from their candidates, skipping hosts already taken.
//! 3. Fitness is the routed resource cost (CPU plus bandwidth × hops), or
//!    infinity when the links cannot be routed; personal and global bests
//!    move only on strict improvement.
//!
//! ω falls linearly from `inertia_start` to `inertia_end` over the run. All
//! particles of one iteration see the global best from the start of that
//! iteration, so the per-iteration fitness evaluations are independent.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{candidate_nodes, map_nodes, PriorityWeights};
use crate::model::{Embedding, NodeId, SubstrateNetwork, VirtualNetworkRequest};
use crate::rng::{stream_rng, SimRng, Stream};
use crate::routing::route_all_links;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PsoError {
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no feasible embedding found")]
    EmbeddingInfeasible,
    #[error("invalid PSO config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub particle_count: usize,
    pub iterations: usize,
    pub inertia_start: f64,
    pub inertia_end: f64,
    pub c1: f64,
    pub c2: f64,
    pub seed: u64,
    /// Weights for the node-mapping seed particle.
    pub weights: PriorityWeights,
    /// Evaluate a swarm's fitness values on the rayon pool.
    pub parallel: bool,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            particle_count: 10,
            iterations: 50,
            inertia_start: 0.9,
            inertia_end: 0.1,
            c1: 1.5,
            c2: 1.5,
            seed: 0,
            weights: PriorityWeights::default(),
            parallel: false,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<(), PsoError> {
        if self.particle_count == 0 || self.iterations == 0 {
            return Err(PsoError::InvalidConfig("particle and iteration counts must be positive".into()));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(PsoError::InvalidConfig("c1 and c2 must be positive".into()));
        }
        Ok(())
    }

    /// Inertia weight at iteration `t` (0-based).
    pub fn inertia(&self, t: usize) -> f64 {
        if self.iterations <= 1 {
            return self.inertia_start;
        }
        let frac = t as f64 / (self.iterations - 1) as f64;
        self.inertia_start + (self.inertia_end - self.inertia_start) * frac
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<NodeId>,
    pub velocity: Vec<u8>,
    pub pbest_position: Vec<NodeId>,
    pub pbest_fitness: f64,
    pub current_fitness: f64,
}

/// Component-wise equality indicator: 1 where the placements agree.
pub fn position_subtract(a: &[NodeId], b: &[NodeId]) -> Result<Vec<u8>, PsoError> {
    if a.len() != b.len() {
        return Err(PsoError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| u8::from(x == y)).collect())
}

fn round_to_bit(s: f64) -> u8 {
    // half-up rounding, then clamp to {0, 1}
    u8::from((s + 0.5).floor() >= 1.0)
}

#[allow(clippy::too_many_arguments)]
pub fn velocity_update(
    particle: &Particle,
    gbest: &[NodeId],
    inertia: f64,
    r1: f64,
    r2: f64,
    c1: f64,
    c2: f64,
) -> Result<Vec<u8>, PsoError> {
    if particle.velocity.len() != particle.position.len() {
        return Err(PsoError::LengthMismatch(particle.velocity.len(), particle.position.len()));
    }
    let to_pbest = position_subtract(&particle.pbest_position, &particle.position)?;
    let to_gbest = position_subtract(gbest, &particle.position)?;
    Ok(particle
        .velocity
        .iter()
        .zip(to_pbest.iter().zip(&to_gbest))
        .map(|(&v, (&pb, &gb))| {
            round_to_bit(inertia * v as f64 + r1 * c1 * pb as f64 + r2 * c2 * gb as f64)
        })
        .collect())
}

/// Uniform sequential draw without host reuse; falls back to a randomized
/// augmenting-path matching when the sequential draws keep dead-ending.
/// `None` only when no injective assignment exists at all.
pub fn random_injective(candidates: &[Vec<NodeId>], rng: &mut SimRng) -> Option<Vec<NodeId>> {
    const ATTEMPTS: usize = 16;
    'attempt: for _ in 0..ATTEMPTS {
        let mut out = Vec::with_capacity(candidates.len());
        for cands in candidates {
            let pool: Vec<NodeId> = cands.iter().copied().filter(|c| !out.contains(c)).collect();
            if pool.is_empty() {
                continue 'attempt;
            }
            out.push(pool[rng.random_range(0..pool.len())]);
        }
        return Some(out);
    }
    let mut shuffled: Vec<Vec<NodeId>> = candidates.to_vec();
    for list in &mut shuffled {
        list.shuffle(rng);
    }
    perfect_matching(&shuffled)
}

/// Kuhn's augmenting-path matching of virtual nodes onto hosts.
fn perfect_matching(candidates: &[Vec<NodeId>]) -> Option<Vec<NodeId>> {
    fn augment(
        v: usize,
        candidates: &[Vec<NodeId>],
        owner: &mut HashMap<NodeId, usize>,
        seen: &mut Vec<NodeId>,
    ) -> bool {
        for &host in &candidates[v] {
            if seen.contains(&host) {
                continue;
            }
            seen.push(host);
            let free = match owner.get(&host) {
                None => true,
                Some(&other) => augment(other, candidates, owner, seen),
            };
            if free {
                owner.insert(host, v);
                return true;
            }
        }
        false
    }
    let mut owner = HashMap::new();
    for v in 0..candidates.len() {
        if !augment(v, candidates, &mut owner, &mut Vec::new()) {
            return None;
        }
    }
    let mut out = vec![NodeId(0); candidates.len()];
    for (host, v) in owner {
        out[v] = host;
    }
    Some(out)
}

/// Keeps components whose mask bit is 1 and redraws the others, in
/// ascending component order, from candidates not already taken. If some
/// component has nothing left to draw from, the whole particle is resampled.
pub fn position_update(
    position: &[NodeId],
    mask: &[u8],
    candidates: &[Vec<NodeId>],
    rng: &mut SimRng,
) -> Vec<NodeId> {
    let mut next: Vec<Option<NodeId>> = position
        .iter()
        .zip(mask)
        .map(|(&p, &bit)| (bit == 1).then_some(p))
        .collect();
    let mut taken: Vec<NodeId> = next.iter().flatten().copied().collect();
    for k in 0..next.len() {
        if next[k].is_some() {
            continue;
        }
        let pool: Vec<NodeId> = candidates[k].iter().copied().filter(|c| !taken.contains(c)).collect();
        if pool.is_empty() {
            return random_injective(candidates, rng).unwrap_or_else(|| position.to_vec());
        }
        let pick = pool[rng.random_range(0..pool.len())];
        taken.push(pick);
        next[k] = Some(pick);
    }
    next.into_iter().map(|p| p.expect("filled above")).collect()
}

/// Σ cpu demand + Σ bandwidth × hops of the routed placement; infinity when
/// routing fails.
pub fn fitness(position: &[NodeId], vnr: &VirtualNetworkRequest, net: &SubstrateNetwork) -> f64 {
    match route_all_links(vnr, position, net) {
        Ok(r) => (vnr.total_cpu() + r.total_bw_cost) as f64,
        Err(_) => f64::INFINITY,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome {
    pub embedding: Embedding,
    pub gbest_fitness: f64,
    /// Global best after initialization, then after each iteration.
    pub history: Vec<f64>,
    /// Distinct placements routed.
    pub evaluations: usize,
}

struct FitnessCache<'a> {
    vnr: &'a VirtualNetworkRequest,
    net: &'a SubstrateNetwork,
    parallel: bool,
    seen: HashMap<Vec<NodeId>, f64>,
}

impl FitnessCache<'_> {
    fn evaluate(&mut self, positions: &[Vec<NodeId>]) -> Vec<f64> {
        let mut fresh: Vec<&Vec<NodeId>> = Vec::new();
        for p in positions {
            if !self.seen.contains_key(p) && !fresh.contains(&p) {
                fresh.push(p);
            }
        }
        let (vnr, net) = (self.vnr, self.net);
        let values: Vec<f64> = if self.parallel && fresh.len() > 1 {
            fresh.par_iter().map(|p| fitness(p, vnr, net)).collect()
        } else {
            fresh.iter().map(|p| fitness(p, vnr, net)).collect()
        };
        for (p, f) in fresh.into_iter().zip(values) {
            self.seen.insert(p.clone(), f);
        }
        positions.iter().map(|p| self.seen[p]).collect()
    }
}

/// Runs the swarm for one request against a fixed network snapshot.
///
/// Particle 0 starts from the priority-driven node mapping when that
/// succeeds; the rest start from random injective placements.
pub fn optimize(
    vnr: &VirtualNetworkRequest,
    net: &SubstrateNetwork,
    cfg: &PsoConfig,
) -> Result<PsoOutcome, PsoError> {
    cfg.validate()?;
    let candidates: Vec<Vec<NodeId>> = vnr.nodes.iter().map(|v| candidate_nodes(v, net)).collect();
    if candidates.iter().any(|c| c.is_empty()) {
        return Err(PsoError::EmbeddingInfeasible);
    }
    let mut rng = stream_rng(cfg.seed, Stream::Pso, vnr.id.0);
    let n = vnr.nodes.len();

    let seeded = map_nodes(vnr, net, &cfg.weights).ok().map(|m| m.assignment);
    let mut positions = Vec::with_capacity(cfg.particle_count);
    for i in 0..cfg.particle_count {
        let pos = match (&seeded, i) {
            (Some(s), 0) => s.clone(),
            _ => random_injective(&candidates, &mut rng).ok_or(PsoError::EmbeddingInfeasible)?,
        };
        positions.push(pos);
    }
    let mut cache = FitnessCache {
        vnr,
        net,
        parallel: cfg.parallel,
        seen: HashMap::new(),
    };
    let initial = cache.evaluate(&positions);
    let mut swarm: Vec<Particle> = positions
        .into_iter()
        .zip(initial)
        .map(|(position, f)| Particle {
            velocity: (0..n).map(|_| rng.random_range(0..=1u8)).collect(),
            pbest_position: position.clone(),
            position,
            pbest_fitness: f,
            current_fitness: f,
        })
        .collect();

    let mut gbest = swarm[0].pbest_position.clone();
    let mut gbest_fitness = swarm[0].pbest_fitness;
    for p in &swarm[1..] {
        if gbest_fitness > p.pbest_fitness {
            gbest = p.pbest_position.clone();
            gbest_fitness = p.pbest_fitness;
        }
    }
    let mut history = Vec::with_capacity(cfg.iterations + 1);
    history.push(gbest_fitness);

    for t in 0..cfg.iterations {
        let inertia = cfg.inertia(t);
        for p in &mut swarm {
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let mask = velocity_update(p, &gbest, inertia, r1, r2, cfg.c1, cfg.c2)?;
            p.position = position_update(&p.position, &mask, &candidates, &mut rng);
            p.velocity = mask;
        }
        let positions: Vec<Vec<NodeId>> = swarm.iter().map(|p| p.position.clone()).collect();
        let values = cache.evaluate(&positions);
        for (p, f) in swarm.iter_mut().zip(values) {
            p.current_fitness = f;
            if p.pbest_fitness > f {
                p.pbest_position = p.position.clone();
                p.pbest_fitness = f;
            }
            if gbest_fitness > p.pbest_fitness {
                gbest = p.pbest_position.clone();
                gbest_fitness = p.pbest_fitness;
            }
        }
        history.push(gbest_fitness);
    }

    if !gbest_fitness.is_finite() {
        return Err(PsoError::EmbeddingInfeasible);
    }
    let routed = route_all_links(vnr, &gbest, net).map_err(|_| PsoError::EmbeddingInfeasible)?;
    Ok(PsoOutcome {
        embedding: Embedding::new(vnr, gbest, routed.paths),
        gbest_fitness,
        history,
        evaluations: cache.seen.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::rng::from_seed;
    use crate::validate::validate_embedding;

    fn ids(v: &[usize]) -> Vec<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn subtraction_marks_agreement() {
        assert_eq!(position_subtract(&ids(&[1, 2, 3]), &ids(&[1, 5, 3])).unwrap(), vec![1, 0, 1]);
        assert_eq!(position_subtract(&ids(&[4, 5]), &ids(&[4, 5])).unwrap(), vec![1, 1]);
        assert_eq!(position_subtract(&ids(&[1, 2]), &ids(&[3, 4])).unwrap(), vec![0, 0]);
        assert_eq!(position_subtract(&ids(&[1]), &ids(&[1, 2])), Err(PsoError::LengthMismatch(1, 2)));
    }

    fn particle(pos: &[usize], vel: &[u8], pbest: &[usize]) -> Particle {
        Particle {
            position: ids(pos),
            velocity: vel.to_vec(),
            pbest_position: ids(pbest),
            pbest_fitness: 0.0,
            current_fitness: 0.0,
        }
    }

    #[test]
    fn velocity_rounding() {
        // s = 0.5*1 + 0.6*1.5*1 + 0.3*1.5*0 = 1.4 -> 1
        let p = particle(&[3], &[1], &[3]);
        assert_eq!(velocity_update(&p, &ids(&[9]), 0.5, 0.6, 0.3, 1.5, 1.5).unwrap(), vec![1]);
        // everything zero -> 0
        let p = particle(&[3], &[0], &[4]);
        assert_eq!(velocity_update(&p, &ids(&[5]), 0.9, 1.0, 1.0, 1.5, 1.5).unwrap(), vec![0]);
        // agreement with both bests, r1 = r2 = 1 -> s = 3.0 -> 1
        let p = particle(&[3], &[0], &[3]);
        assert_eq!(velocity_update(&p, &ids(&[3]), 0.9, 1.0, 1.0, 1.5, 1.5).unwrap(), vec![1]);
        // exactly one half rounds up, just below rounds down
        assert_eq!(round_to_bit(0.5), 1);
        assert_eq!(round_to_bit(0.49999), 0);
        assert_eq!(round_to_bit(2.7), 1);
    }

    #[test]
    fn all_ones_mask_keeps_position() {
        let cands = vec![ids(&[0, 1, 2]), ids(&[0, 1, 2])];
        let mut rng = from_seed(1);
        assert_eq!(position_update(&ids(&[2, 0]), &[1, 1], &cands, &mut rng), ids(&[2, 0]));
    }

    #[test]
    fn all_zeros_mask_resamples_injectively() {
        let cands = vec![ids(&[0, 1, 2]), ids(&[0, 1, 2]), ids(&[1, 2])];
        let mut rng = from_seed(3);
        for _ in 0..50 {
            let next = position_update(&ids(&[0, 1, 2]), &[0, 0, 0], &cands, &mut rng);
            let distinct: std::collections::BTreeSet<_> = next.iter().collect();
            assert_eq!(distinct.len(), 3);
            assert!(next.iter().zip(&cands).all(|(n, c)| c.contains(n)));
        }
    }

    #[test]
    fn redraw_skips_kept_host() {
        // component 0 keeps node 1, the only host it shares with component 1
        let cands = vec![ids(&[1]), ids(&[1, 4, 5])];
        let mut rng = from_seed(9);
        for _ in 0..50 {
            let next = position_update(&ids(&[1, 4]), &[1, 0], &cands, &mut rng);
            assert_eq!(next[0], NodeId(1));
            assert!(next[1] == NodeId(4) || next[1] == NodeId(5));
        }
    }

    #[test]
    fn matching_fallback_finds_tight_assignment() {
        // only one injective assignment exists: 0->2, 1->1, 2->0
        let cands = vec![ids(&[0, 1, 2]), ids(&[0, 1]), ids(&[0])];
        let mut rng = from_seed(5);
        assert_eq!(random_injective(&cands, &mut rng), Some(ids(&[2, 1, 0])));
        assert_eq!(random_injective(&[ids(&[0]), ids(&[0])], &mut rng), None);
    }

    #[test]
    fn fitness_is_routed_cost() {
        let net = two_domain_line();
        let req = vnr(0, vec![vnode(0, 10, 0, 0, &[0]), vnode(1, 20, 0, 0, &[0])], vec![vlink(0, 1, 10)]);
        assert_eq!(fitness(&ids(&[0, 2]), &req, &net), 50.0);
        // same host for both ends cannot be routed
        assert_eq!(fitness(&ids(&[0, 0]), &req, &net), f64::INFINITY);
        let lone = vnr(1, vec![vnode(0, 10, 0, 0, &[0])], vec![]);
        assert_eq!(fitness(&ids(&[2]), &lone, &net), 10.0);
    }

    #[test]
    fn single_feasible_assignment_is_found() {
        let net = two_domain_line();
        // vsd 2 everywhere but only domain 1 allowed for node 0, domain 0 for node 1,
        // and cpu 50 only fits untouched nodes 3 and 0 respectively via cd + cpu
        let req = vnr(
            0,
            vec![vnode(0, 50, 2, 0, &[1]), vnode(1, 50, 2, 0, &[0])],
            vec![vlink(0, 1, 5)],
        );
        let mut small = net.clone();
        // shrink every node except 3 and 0
        let holder = vnr(99, (0..4).map(|i| vnode(i, 1, 0, 0, &[0, 1])).collect(), vec![vlink(0, 1, 1), vlink(1, 2, 1), vlink(2, 3, 1)]);
        let emb = Embedding::new(
            &holder,
            ids(&[1, 2, 4, 5]),
            vec![path_of(&net, &[1, 2]), path_of(&net, &[2, 1, 0, 3, 4]), path_of(&net, &[4, 5])],
        );
        small.allocate(&emb).unwrap();
        let out = optimize(&req, &small, &PsoConfig::default()).unwrap();
        assert_eq!(out.embedding.node_map, ids(&[3, 0]));
        assert!(validate_embedding(&small, &req, &out.embedding).is_empty());
    }

    #[test]
    fn history_never_increases_and_is_deterministic() {
        let net = crate::generator::generate_substrate(&crate::generator::GeneratorConfig::miniature()).unwrap();
        let req = vnr(
            5,
            vec![vnode(0, 10, 1, 3, &[0, 1]), vnode(1, 10, 0, 4, &[0, 1]), vnode(2, 5, 2, 4, &[0, 1])],
            vec![vlink(0, 1, 3), vlink(1, 2, 4)],
        );
        let cfg = PsoConfig { seed: 11, ..Default::default() };
        let a = optimize(&req, &net, &cfg).unwrap();
        let b = optimize(&req, &net, &PsoConfig { parallel: true, ..cfg }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.history.len(), 51);
        assert!(a.history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*a.history.last().unwrap(), a.gbest_fitness);
        assert!(validate_embedding(&net, &req, &a.embedding).is_empty());
    }

    #[test]
    fn missing_candidates_fail() {
        let net = two_domain_line();
        let req = vnr(0, vec![vnode(0, 10, 4, 0, &[0])], vec![]);
        assert_eq!(optimize(&req, &net, &PsoConfig::default()), Err(PsoError::EmbeddingInfeasible));
    }

    #[test]
    fn inertia_schedule() {
        let cfg = PsoConfig::default();
        assert_eq!(cfg.inertia(0), 0.9);
        assert!((cfg.inertia(49) - 0.1).abs() < 1e-12);
        assert!(cfg.inertia(25) < cfg.inertia(24));
    }
}
