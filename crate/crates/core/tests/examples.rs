//! Runs every example's `run_example` and checks what it reports.

macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }
    };
}

example!(substrate_generation);
example!(node_mapping);
example!(pso_embedding);
example!(constraint_validation);
example!(simulation);
example!(strategy_comparison);

use secvne::validate::ViolationKind;
use secvne::Strategy;

#[test]
fn substrate_generation_runs() {
    let s = substrate_generation::run_example().unwrap();
    assert_eq!((s.nodes, s.domains), (120, 4));
    assert!(s.boundary_nodes >= 4 && s.requests > 0);
}

#[test]
fn node_mapping_runs() {
    let hosts = node_mapping::run_example().unwrap();
    assert_eq!(hosts.len(), 3);
    assert!(hosts[0] < 4 && hosts[2] >= 4);
}

#[test]
fn pso_embedding_runs() {
    let s = pso_embedding::run_example().unwrap();
    assert!(s.best_fitness <= s.seed_fitness);
    assert!(s.history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn constraint_validation_runs() {
    let kinds = constraint_validation::run_example().unwrap();
    assert!(kinds.contains(&ViolationKind::Bandwidth));
    assert!(kinds.iter().any(|k| matches!(k, ViolationKind::SecurityForward | ViolationKind::SecurityBackward)));
}

#[test]
fn simulation_runs() {
    let trace = simulation::run_example().unwrap();
    assert!(trace.accepted().count() > 0);
    assert!(trace.final_network.is_pristine());
}

#[test]
fn strategy_comparison_runs() {
    let runs = strategy_comparison::run_example().unwrap();
    assert_eq!(runs.len(), 3 * Strategy::ALL.len());
}
