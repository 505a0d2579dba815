//! Heterogeneous ligand–pocket interaction graph with typed radius edges
//! (5 Å ligand–ligand, 10 Å ligand–pocket, 15 Å pocket–pocket) plus all
//! covalent ligand bonds.

use crate::molgraph::{Molecule, Pocket};

pub const LIGAND_LIGAND_CUTOFF: f64 = 5.0;
pub const LIGAND_POCKET_CUTOFF: f64 = 10.0;
pub const POCKET_POCKET_CUTOFF: f64 = 15.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TypedEdge {
    pub from: usize,
    pub to: usize,
    pub distance: f64,
    pub covalent: bool,
}

/// Typed edge sets of the complex graph. `ll` and `pp` hold unordered
/// pairs (from < to); `lp` and `pl` are mirrored directed sets.
#[derive(Debug, Clone, Default)]
pub struct HeteroGraph {
    pub ll: Vec<TypedEdge>,
    pub lp: Vec<TypedEdge>,
    pub pl: Vec<TypedEdge>,
    pub pp: Vec<TypedEdge>,
}

/// Radius edges at the 5/10/15 Å thresholds (inclusive); covalent ligand
/// bonds are kept as `ll` edges regardless of distance.
pub fn build_complex_graph(ligand: &Molecule, pocket: &Pocket) -> HeteroGraph {
    let mut graph = HeteroGraph::default();
    let nl = ligand.atoms().len();

    for i in 0..nl {
        for j in i + 1..nl {
            let distance = (ligand.atom(i).coord - ligand.atom(j).coord).norm();
            let covalent = ligand.bond_between(i, j).is_some();
            if covalent || distance <= LIGAND_LIGAND_CUTOFF {
                graph.ll.push(TypedEdge {
                    from: i,
                    to: j,
                    distance,
                    covalent,
                });
            }
        }
    }

    for (i, latom) in ligand.atoms().iter().enumerate() {
        for (j, patom) in pocket.atoms().iter().enumerate() {
            let distance = (latom.coord - patom.coord).norm();
            if distance <= LIGAND_POCKET_CUTOFF {
                graph.lp.push(TypedEdge {
                    from: i,
                    to: j,
                    distance,
                    covalent: false,
                });
                graph.pl.push(TypedEdge {
                    from: j,
                    to: i,
                    distance,
                    covalent: false,
                });
            }
        }
    }

    let np = pocket.atoms().len();
    for i in 0..np {
        for j in i + 1..np {
            let distance = (pocket.atoms()[i].coord - pocket.atoms()[j].coord).norm();
            if distance <= POCKET_POCKET_CUTOFF {
                graph.pp.push(TypedEdge {
                    from: i,
                    to: j,
                    distance,
                    covalent: false,
                });
            }
        }
    }

    graph
}
