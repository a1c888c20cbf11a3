//! Security-aware virtual network embedding on multi-domain substrates.
//!
//! The crate covers the whole experimental pipeline:
//!
//! * [`model`]: substrate and virtual network types with residual
//!   bookkeeping, plus [`validate`], an independent constraint checker.
//! * [`generator`]: seeded substrate topologies and Poisson request streams.
//! * [`engine`]: candidate filtering, node priorities and greedy node mapping.
//! * [`routing`]: unsplittable min-hop routing over residual bandwidth.
//! * [`pso`]: discrete particle swarm search over node placements.
//! * [`baselines`]: greedy and random comparison strategies.
//! * [`metrics`]: acceptance, revenue, cost and revenue/cost over windows.
//! * [`sim`]: the discrete-event simulator.
//! * [`experiment`]: the generate / run / compare drivers behind the CLI.

pub mod baselines;
pub mod engine;
pub mod experiment;
pub mod generator;
pub mod metrics;
pub mod model;
pub mod pso;
pub mod rng;
pub mod routing;
pub mod sim;
pub mod validate;

pub use engine::{map_nodes, PriorityWeights};
pub use generator::{generate_substrate, generate_vnr_stream, GeneratorConfig};
pub use model::{Embedding, SubstrateNetwork, VirtualNetworkRequest};
pub use pso::{optimize, PsoConfig};
pub use sim::{run, SimConfig, SimulationTrace, Strategy};
pub use validate::validate_embedding;
