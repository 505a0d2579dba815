use super::*;
use crate::fixtures;
use crate::molgraph::Element;

fn bond_index(mol: &Molecule, a: usize, b: usize) -> usize {
    mol.bond_between(a, b).expect("bond exists")
}

#[test]
fn butane_has_one_rotatable_bond() {
    let butane = fixtures::butane_anti();
    let rotatable = find_rotatable_bonds(&butane);
    assert_eq!(rotatable, vec![bond_index(&butane, 1, 2)]);
}

#[test]
fn propane_has_none() {
    assert!(find_rotatable_bonds(&fixtures::propane()).is_empty());
}

#[test]
fn benzene_has_none() {
    assert!(find_rotatable_bonds(&fixtures::benzene()).is_empty());
}

#[test]
fn ethylbenzene_fragments_into_ring_and_chain() {
    let result = fragment(&fixtures::ethylbenzene()).unwrap();
    assert_eq!(result.fragments.len(), 2);
    assert_eq!(result.severed_bonds.len(), 1);
    let kinds: Vec<MotifKind> = result.fragments.iter().map(|f| f.motif.kind()).collect();
    assert!(kinds.contains(&MotifKind::RingLike));
    assert!(kinds.contains(&MotifKind::ChainLike));
    let chain = result
        .fragments
        .iter()
        .find(|f| f.motif.kind() == MotifKind::ChainLike)
        .unwrap();
    assert_eq!(chain.motif.graph().dummy_indices().len(), 1);
    assert_eq!(chain.motif.heavy_atom_count(), 2);
    let ring = result
        .fragments
        .iter()
        .find(|f| f.motif.kind() == MotifKind::RingLike)
        .unwrap();
    assert!(!ring.motif.graph().has_dummies());
    assert_eq!(ring.motif.graph().atoms().len(), 6);
}

#[test]
fn benzene_fragments_whole() {
    let result = fragment(&fixtures::benzene()).unwrap();
    assert_eq!(result.fragments.len(), 1);
    assert!(result.severed_bonds.is_empty());
    assert_eq!(result.fragments[0].motif.kind(), MotifKind::RingLike);
}

#[test]
fn biphenyl_fragments_into_two_rings() {
    let result = fragment(&fixtures::biphenyl(45.0)).unwrap();
    assert_eq!(result.fragments.len(), 2);
    assert_eq!(result.severed_bonds.len(), 1);
    assert!(result
        .fragments
        .iter()
        .all(|f| f.motif.kind() == MotifKind::RingLike && !f.motif.graph().has_dummies()));
    let severed = &result.severed_bonds[0];
    assert!(severed.torsion.is_some(), "ring sides are off-axis");
}

#[test]
fn naphthalene_decomposes_into_two_rings() {
    let naph = fixtures::naphthalene();
    let result = fragment(&naph).unwrap();
    assert_eq!(result.fragments.len(), 2);
    assert!(result.severed_bonds.is_empty());
    for piece in &result.fragments {
        assert_eq!(piece.motif.kind(), MotifKind::RingLike);
        assert_eq!(piece.motif.graph().atoms().len(), 6);
    }
    // The shared bond's atoms appear in both fragments.
    let shared: Vec<usize> = (0..result.fragments[0].source_atoms.len())
        .filter_map(|i| {
            let src = result.fragments[0].source_atoms[i];
            result.fragments[1]
                .source_atoms
                .contains(&src)
                .then_some(src)
        })
        .collect();
    assert_eq!(shared.len(), 2);
}

#[test]
fn fused_six_five_shares_two_atoms() {
    let result = fragment(&fixtures::fused_six_five()).unwrap();
    assert_eq!(result.fragments.len(), 2);
    let sizes: Vec<usize> = result
        .fragments
        .iter()
        .map(|f| f.motif.graph().atoms().len())
        .collect();
    assert!(sizes.contains(&6) && sizes.contains(&5), "sizes: {sizes:?}");
}

#[test]
fn decompose_rejects_non_fused() {
    let benzene = fixtures::benzene();
    let rings = crate::molgraph::perceive_rings(&benzene);
    assert!(decompose_fused(&benzene, &rings).is_err());
}

#[test]
fn augment_chain_dummy_counts() {
    // Ethyl piece of ethylbenzene: atoms 6 and 7 in fixture indexing.
    let mol = fixtures::ethylbenzene();
    let motif = augment_chain(&mol, &[6, 7]).unwrap();
    assert_eq!(motif.kind(), MotifKind::ChainLike);
    assert_eq!(motif.heavy_atom_count(), 2);
    assert_eq!(motif.graph().dummy_indices().len(), 1);

    // A lone chain has no external neighbors, hence no dummies.
    let butane = fixtures::butane_anti();
    let whole = augment_chain(&butane, &[0, 1, 2, 3]).unwrap();
    assert_eq!(whole.graph().dummy_indices().len(), 0);

    // A middle CH2 severed on both sides gains two dummies.
    let mid = augment_chain(&butane, &[1]).unwrap();
    assert_eq!(mid.graph().dummy_indices().len(), 2);
    assert_eq!(mid.heavy_atom_count(), 1);
}

#[test]
fn dummy_positions_are_source_neighbor_positions() {
    let mol = fixtures::ethylbenzene();
    let result = fragment(&mol).unwrap();
    let chain = result
        .fragments
        .iter()
        .find(|f| f.motif.kind() == MotifKind::ChainLike)
        .unwrap();
    for (local, &src) in chain.source_atoms.iter().enumerate() {
        let atom = chain.motif.graph().atom(local);
        let delta = (atom.coord - mol.atom(src).coord).norm();
        assert!(delta < 1e-12, "atom {local} sits {delta} from source");
    }
}

#[test]
fn vocabulary_accumulates_isomorphic_motifs() {
    let corpus = vec![fixtures::ethylbenzene(), fixtures::propylbenzene()];
    let vocab = extract_vocabulary(&corpus, 1).unwrap();
    let benzene_key = canonical_key(&fixtures::benzene());
    let idx = vocab.find_by_key(&benzene_key).expect("benzene motif");
    assert_eq!(vocab.motifs()[idx].frequency(), 2);

    // The shared *-CH2-CH3 piece also reaches frequency 2; the lone
    // *-CH2-* piece of propylbenzene stays at 1 and drops at threshold 2.
    let filtered = extract_vocabulary(&corpus, 2).unwrap();
    assert_eq!(filtered.len(), 2, "benzene and the shared ethyl piece");
    assert!(filtered.motifs().iter().all(|m| m.frequency() >= 2));
}

#[test]
fn single_molecule_vocabulary() {
    let vocab = extract_vocabulary(&[fixtures::benzene()], 1).unwrap();
    assert_eq!(vocab.len(), 1);
    assert_eq!(vocab.motifs()[0].frequency(), 1);
    assert_eq!(vocab.kind_split(), (1, 0));
}

#[test]
fn vocabulary_serialization_is_deterministic() {
    let corpus = fixtures::corpus();
    let a = extract_vocabulary(&corpus, 1).unwrap().write();
    let b = extract_vocabulary(&corpus, 1).unwrap().write();
    assert_eq!(a, b);
}

#[test]
fn ring_like_rejects_dummies() {
    let graph = fixtures::methyl_motif().graph().clone();
    assert!(Motif::new(graph, MotifKind::RingLike).is_err());
}

#[test]
fn reconstruct_butane_round_trips() {
    let butane = fixtures::butane_anti();
    let result = fragment(&butane).unwrap();
    assert_eq!(result.fragments.len(), 2);
    let rebuilt = reconstruct(&result).unwrap();
    assert_eq!(rebuilt.atoms().len(), 4);
    let rmsd = crate::geom3d::rmsd(&rebuilt.coords(), &butane.coords(), true).unwrap();
    assert!(rmsd <= 1e-6, "rmsd {rmsd}");
}

#[test]
fn reconstruct_benzene_unchanged() {
    let benzene = fixtures::benzene();
    let rebuilt = reconstruct(&fragment(&benzene).unwrap()).unwrap();
    assert_eq!(rebuilt.atoms().len(), 6);
    let rmsd = crate::geom3d::rmsd(&rebuilt.coords(), &benzene.coords(), false).unwrap();
    assert!(rmsd <= 1e-9);
}

#[test]
fn fragments_are_valence_valid_with_dummies() {
    for mol in fixtures::corpus() {
        let result = fragment(&mol).unwrap();
        for piece in &result.fragments {
            // Construction through Molecule::new already enforces the
            // valence cap; spot-check free valence non-negativity.
            let graph = piece.motif.graph();
            for i in 0..graph.atoms().len() {
                let _ = graph.free_valence(i);
            }
        }
    }
}

#[test]
fn chain_dummy_label_uniform() {
    let mol = fixtures::chain(
        "ether",
        &[Element::C, Element::C, Element::O, Element::C, Element::C],
        &[180.0, 60.0],
    );
    let result = fragment(&mol).unwrap();
    for piece in &result.fragments {
        for d in piece.motif.graph().dummy_indices() {
            assert_eq!(piece.motif.graph().atom(d).element, Element::Dummy);
            assert_eq!(piece.motif.graph().atom(d).charge, 0);
        }
    }
}
