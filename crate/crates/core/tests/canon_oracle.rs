//! Canonical-key correctness against the exhaustive VF2 oracle.

mod common;

use common::{isomorphic, permute_molecule, Lcg};
use confrag::fixtures;
use confrag::molgraph::{canonical_key, Atom, Bond, BondOrder, Element, Molecule, Vec3};

/// All connected single-bond graphs on up to 4 vertices with C/N labels
/// that satisfy the valence rules.
fn enumerate_small_graphs() -> Vec<Molecule> {
    let mut out = Vec::new();
    for n in 1..=4usize {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        for mask in 0..(1u32 << pairs.len()) {
            let bonds: Vec<Bond> = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &(a, b))| Bond {
                    a,
                    b,
                    order: BondOrder::Single,
                })
                .collect();
            for labels in 0..(1u32 << n) {
                let atoms: Vec<Atom> = (0..n)
                    .map(|i| {
                        let element = if labels >> i & 1 == 1 {
                            Element::N
                        } else {
                            Element::C
                        };
                        // Coordinates are irrelevant for graph tests.
                        Atom::new(element, 0, Vec3::new(i as f64 * 1.5, 0.0, 0.0))
                    })
                    .collect();
                if let Ok(mol) = Molecule::new("enum", atoms, bonds.clone()) {
                    out.push(mol);
                }
            }
        }
    }
    out
}

#[test]
fn canonical_key_distinguishes_exactly_the_isomorphism_classes() {
    let graphs = enumerate_small_graphs();
    assert!(graphs.len() > 12, "enumeration is non-trivial");

    // Group by VF2 into classes.
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        match classes
            .iter_mut()
            .find(|class| isomorphic(&graphs[class[0]], g))
        {
            Some(class) => class.push(i),
            None => classes.push(vec![i]),
        }
    }
    assert!(classes.len() >= 12, "expected at least 12 classes");

    // Keys agree within classes and differ across them.
    for class in &classes {
        let key = canonical_key(&graphs[class[0]]);
        for &i in class {
            assert_eq!(canonical_key(&graphs[i]), key, "within-class key mismatch");
        }
    }
    for a in 0..classes.len() {
        for b in a + 1..classes.len() {
            assert_ne!(
                canonical_key(&graphs[classes[a][0]]),
                canonical_key(&graphs[classes[b][0]]),
                "cross-class key collision"
            );
        }
    }
}

#[test]
fn keys_invariant_under_1000_random_permutations() {
    let mut rng = Lcg(0x5eed);
    for mol in [
        fixtures::ethylbenzene(),
        fixtures::naphthalene(),
        fixtures::pyridine(),
    ] {
        let reference = canonical_key(&mol);
        for _ in 0..1000 {
            let perm = rng.permutation(mol.atoms().len());
            let shuffled = permute_molecule(&mol, &perm);
            assert_eq!(canonical_key(&shuffled), reference);
        }
    }
}

#[test]
fn benzene_vs_pyridine_differ() {
    assert_ne!(
        canonical_key(&fixtures::benzene()),
        canonical_key(&fixtures::pyridine())
    );
}
