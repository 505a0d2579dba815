//! Fragmentation against independent oracles: brute-force rotatable
//! bonds and round-trip reconstruction over the whole corpus.

mod common;

use common::{brute_force_rotatable, isomorphic};
use confrag::fixtures;
use confrag::geom3d::rmsd;
use confrag::motif::{extract_vocabulary, fragment, reconstruct};

#[test]
fn rotatable_bonds_match_brute_force_on_every_corpus_molecule() {
    for mol in fixtures::corpus() {
        let fast = confrag::motif::find_rotatable_bonds(&mol);
        let brute = brute_force_rotatable(&mol);
        assert_eq!(fast, brute, "disagreement on {}", mol.name());
    }
}

#[test]
fn fragmentation_round_trips_on_every_corpus_molecule() {
    for mol in fixtures::corpus() {
        let result = fragment(&mol).expect("fragmentation succeeds");
        let rebuilt = reconstruct(&result).expect("reconstruction succeeds");
        assert!(
            isomorphic(&mol, &rebuilt),
            "graph mismatch after round trip for {}",
            mol.name()
        );
        let aligned = rmsd(&rebuilt.coords(), &source_coords_in_rebuilt_order(&mol, &rebuilt), true)
            .expect("same atom count");
        assert!(
            aligned <= 1e-6,
            "{}: round-trip rmsd {aligned}",
            mol.name()
        );
    }
}

/// The reassembled atom order generally differs from the source order;
/// both coordinate sets should coincide, so nearest-neighbor matching
/// by position recovers the correspondence. The match must be a
/// bijection, which fails loudly if any atom landed away from a source
/// position.
fn source_coords_in_rebuilt_order(
    source: &confrag::molgraph::Molecule,
    rebuilt: &confrag::molgraph::Molecule,
) -> Vec<confrag::molgraph::Vec3> {
    let source_coords = source.coords();
    let mut taken = vec![false; source_coords.len()];
    rebuilt
        .coords()
        .iter()
        .map(|p| {
            let (idx, coord) = source_coords
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    (*a - p).norm().partial_cmp(&(*b - p).norm()).unwrap()
                })
                .unwrap();
            assert!(!taken[idx], "two rebuilt atoms map onto source atom {idx}");
            taken[idx] = true;
            *coord
        })
        .collect()
}

#[test]
fn severed_torsions_are_recorded_for_corpus_bonds() {
    for mol in fixtures::corpus() {
        let result = fragment(&mol).unwrap();
        for severed in &result.severed_bonds {
            assert!(
                severed.torsion.is_some(),
                "{}: severed bond {}-{} lacks a torsion",
                mol.name(),
                severed.a,
                severed.b
            );
        }
    }
}

#[test]
fn vocabulary_extraction_is_byte_deterministic() {
    let corpus = fixtures::corpus();
    let a = extract_vocabulary(&corpus, 1).unwrap().write();
    let b = extract_vocabulary(&corpus, 1).unwrap().write();
    assert_eq!(a, b);

    // Vocabulary file round trip is also byte-stable.
    let reread = confrag::motif::Vocabulary::read(&a).unwrap();
    assert_eq!(reread.write(), a);
}

#[test]
fn min_frequency_drops_rare_motifs() {
    let corpus = fixtures::corpus();
    let all = extract_vocabulary(&corpus, 1).unwrap();
    let common_only = extract_vocabulary(&corpus, 3).unwrap();
    assert!(common_only.len() < all.len());
    assert!(common_only.motifs().iter().all(|m| m.frequency() >= 3));
    // Dropping never reorders survivors.
    let survivors: Vec<_> = all
        .motifs()
        .iter()
        .filter(|m| m.frequency() >= 3)
        .map(|m| m.key().clone())
        .collect();
    let kept: Vec<_> = common_only.motifs().iter().map(|m| m.key().clone()).collect();
    assert_eq!(survivors, kept);
}
