// Shows the independent validator catching a security violation and an
// over-committed link in hand-built embeddings.

use std::collections::BTreeSet;
use std::error::Error;

use secvne::model::{DomainId, LinkSpec, NodeId, NodeSpec, SubstratePath, VirtualLink, VirtualNode, VnrId};
use secvne::validate::ViolationKind;
use secvne::{validate_embedding, Embedding, SubstrateNetwork, VirtualNetworkRequest};

pub fn run_example() -> Result<Vec<ViolationKind>, Box<dyn Error>> {
    let nodes = [
        NodeSpec { id: 0, domain: 0, cpu: 50, ssl: 3, ssd: 0 },
        NodeSpec { id: 1, domain: 0, cpu: 50, ssl: 1, ssd: 0 },
        NodeSpec { id: 2, domain: 0, cpu: 50, ssl: 3, ssd: 0 },
    ];
    let links = [LinkSpec { u: 0, v: 1, bw: 20 }, LinkSpec { u: 1, v: 2, bw: 5 }];
    let net = SubstrateNetwork::new(1, &nodes, &links)?;
    let cd: BTreeSet<DomainId> = [DomainId(0)].into();
    let vnr = VirtualNetworkRequest::new(
        VnrId(1),
        vec![
            VirtualNode { id: 0, cpu_demand: 10, vsd: 2, vsl: 0, cd: cd.clone() },
            VirtualNode { id: 1, cpu_demand: 10, vsd: 2, vsl: 0, cd },
        ],
        vec![VirtualLink { u: 0, v: 1, bw_demand: 10 }],
        0.0,
        50.0,
    )?;
    let path = |ids: &[usize]| -> SubstratePath {
        let nodes: Vec<NodeId> = ids.iter().map(|&i| NodeId(i)).collect();
        let links = nodes.windows(2).map(|w| net.link_between(w[0], w[1]).expect("adjacent")).collect();
        SubstratePath { nodes, links }
    };

    let thin = Embedding::new(&vnr, vec![NodeId(0), NodeId(2)], vec![path(&[0, 1, 2])]);
    let insecure = Embedding::new(&vnr, vec![NodeId(0), NodeId(1)], vec![path(&[0, 1])]);

    let mut found = Vec::new();
    for (label, emb) in [("through the thin link", &thin), ("onto the weak host", &insecure)] {
        let violations = validate_embedding(&net, &vnr, emb);
        println!("{label}: {} violation(s)", violations.len());
        for v in &violations {
            println!("  {v}");
            found.push(v.kind);
        }
    }
    Ok(found)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
