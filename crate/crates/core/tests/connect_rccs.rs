//! Connection-site enumeration and equivalence-class reduction against
//! the VF2 oracle, including the attachment-product soundness check.

mod common;

use common::{isomorphic, isomorphic_marked, permute_molecule, Lcg};
use confrag::connect::{
    enumerate_ccs_fragment, enumerate_ccs_motif, equivalence_classes, ConnectionSite,
    EquivalenceClasses,
};
use confrag::fixtures;
use confrag::molgraph::{Atom, Bond, BondOrder, Element, Molecule, Vec3};
use confrag::motif::Motif;

#[test]
fn benzene_fragment_ccs_counts() {
    let benzene = fixtures::benzene();
    let sites = enumerate_ccs_fragment(&benzene, &[]);
    let atoms = sites.iter().filter(|s| matches!(s, ConnectionSite::Atom { .. })).count();
    let bonds = sites.iter().filter(|s| matches!(s, ConnectionSite::Bond { .. })).count();
    assert_eq!(atoms, 6);
    assert_eq!(bonds, 12);
}

#[test]
fn fully_substituted_ring_has_no_sites() {
    let mol = fixtures::hexafluorobenzene();
    assert!(enumerate_ccs_fragment(&mol, &[]).is_empty());
}

#[test]
fn chain_fragment_exposes_only_slots() {
    // An ethyl piece with one unconsumed placeholder: exactly one site.
    let slots = vec![confrag::connect::OpenSlot {
        anchor: 0,
        position: Vec3::new(1.51, 0.0, 0.0),
    }];
    let mut b = fixtures::MolBuilder::new();
    let c1 = b.atom_at(Element::C, Vec3::zeros());
    let c2 = b.atom_at(Element::C, Vec3::new(-0.5, 1.3, 0.0));
    b.bond(c1, c2, BondOrder::Single);
    let ligand = b.build("ethyl-partial");
    let sites = enumerate_ccs_fragment(&ligand, &slots);
    assert_eq!(sites.len(), 1);
    assert!(matches!(sites[0], ConnectionSite::Slot { slot: 0, anchor: 0 }));
}

#[test]
fn motif_ccs_counts() {
    let ethyl = fixtures::ethyl_motif();
    let sites = enumerate_ccs_motif(&ethyl);
    assert_eq!(sites.len(), 1, "one dummy site on *-CH2-CH3");

    let benzene = fixtures::benzene_motif();
    let sites = enumerate_ccs_motif(&benzene);
    assert_eq!(sites.len(), 6 + 12);

    let pyridine = fixtures::pyridine_motif();
    let sites = enumerate_ccs_motif(&pyridine);
    let atoms = sites.iter().filter(|s| s.kind() == confrag::connect::SiteKind::Atom).count();
    assert_eq!(atoms, 5, "nitrogen has no free valence");
}

#[test]
fn benzene_reduces_to_one_atom_and_one_bond_class() {
    let motif = fixtures::benzene_motif();
    let classes = confrag::connect::equivalence_classes_of_motif(&motif);
    assert_eq!(classes.atom_classes.len(), 1);
    assert_eq!(classes.atom_classes[0].members.len(), 6);
    assert_eq!(classes.bond_classes.len(), 1);
    assert_eq!(classes.bond_classes[0].members.len(), 12);
}

#[test]
fn pyridine_has_three_atom_classes() {
    let motif = fixtures::pyridine_motif();
    let classes = confrag::connect::equivalence_classes_of_motif(&motif);
    assert_eq!(classes.atom_classes.len(), 3, "ortho, meta, para carbons");
    let sizes: Vec<usize> = classes.atom_classes.iter().map(|c| c.members.len()).collect();
    let mut sorted = sizes.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![1, 2, 2], "para is unique, ortho/meta paired");
}

#[test]
fn single_site_chain_is_one_class() {
    let motif = fixtures::ethyl_motif();
    let classes = confrag::connect::equivalence_classes_of_motif(&motif);
    assert_eq!(classes.atom_classes.len(), 1);
    assert_eq!(classes.bond_classes.len(), 0);
}

fn fixture_motifs() -> Vec<Motif> {
    let corpus = fixtures::corpus();
    let vocab = confrag::motif::extract_vocabulary(&corpus, 1).unwrap();
    vocab
        .motifs()
        .iter()
        .filter(|m| m.heavy_atom_count() <= 12)
        .cloned()
        .collect()
}

/// Marked-graph equivalence agrees with exhaustive VF2 on every fixture
/// motif, which also certifies reflexivity/symmetry/transitivity (VF2
/// equivalence inherits them from graph isomorphism).
#[test]
fn classes_agree_with_pairwise_vf2() {
    for motif in fixture_motifs() {
        let graph = motif.graph();
        let sites = enumerate_ccs_motif(&motif);
        let classes = equivalence_classes(&motif, &sites);
        let class_of = |site: &ConnectionSite| classes.class_of(site).expect("member of a class");
        for (i, a) in sites.iter().enumerate() {
            for b in &sites[i..] {
                if a.kind() != b.kind() {
                    continue;
                }
                let same_class = class_of(a) == class_of(b);
                let vf2_equivalent = isomorphic_marked(graph, graph, &marks(a), &marks(b));
                assert_eq!(
                    same_class,
                    vf2_equivalent,
                    "class/VF2 disagreement on {:?} vs {:?} in motif {}",
                    a,
                    b,
                    motif.key().to_hex()
                );
            }
        }
    }
}

fn marks(site: &ConnectionSite) -> Vec<(usize, u8)> {
    match *site {
        ConnectionSite::Atom { atom } => vec![(atom, 1)],
        ConnectionSite::Dummy { dummy, .. } => vec![(dummy, 1)],
        ConnectionSite::Bond { from, to } => vec![(from, 1), (to, 2)],
        ConnectionSite::Slot { .. } => unreachable!("motif sites only"),
    }
}

/// Graph-surgery product of attaching a probe at a site. Pure test
/// machinery, independent of the production attachment path.
fn attach_product(motif: &Motif, site: &ConnectionSite, atom_probe: &Molecule, bond_probe: &Molecule) -> Option<Molecule> {
    let graph = motif.graph();
    let fake_coord = |i: usize| Vec3::new(i as f64 * 1.6, (i % 3) as f64, ((i * 7) % 5) as f64);
    match *site {
        ConnectionSite::Atom { atom } | ConnectionSite::Dummy { anchor: atom, .. } => {
            let consumed = match site {
                ConnectionSite::Dummy { dummy, .. } => Some(*dummy),
                _ => None,
            };
            let mut atoms = Vec::new();
            let mut map = vec![usize::MAX; graph.atoms().len()];
            for (i, a) in graph.atoms().iter().enumerate() {
                if Some(i) == consumed {
                    continue;
                }
                map[i] = atoms.len();
                atoms.push(Atom::new(a.element, a.charge, fake_coord(atoms.len())));
            }
            let mut bonds: Vec<Bond> = graph
                .bonds()
                .iter()
                .filter(|b| Some(b.a) != consumed && Some(b.b) != consumed)
                .map(|b| Bond {
                    a: map[b.a],
                    b: map[b.b],
                    order: b.order,
                })
                .collect();
            let offset = atoms.len();
            for (i, a) in atom_probe.atoms().iter().enumerate() {
                atoms.push(Atom::new(a.element, a.charge, fake_coord(offset + i)));
            }
            for b in atom_probe.bonds() {
                bonds.push(Bond {
                    a: offset + b.a,
                    b: offset + b.b,
                    order: b.order,
                });
            }
            bonds.push(Bond {
                a: map[atom],
                b: offset,
                order: BondOrder::Single,
            });
            Molecule::new("product", atoms, bonds).ok()
        }
        ConnectionSite::Bond { from, to } => {
            // The probe ring fuses its bond (0, 1) onto (from, to).
            let probe_bond = bond_probe.bond_between(0, 1)?;
            let site_bond = graph.bond_between(from, to)?;
            if bond_probe.bonds()[probe_bond].order != graph.bonds()[site_bond].order {
                return None;
            }
            let mut atoms: Vec<Atom> = graph
                .atoms()
                .iter()
                .enumerate()
                .map(|(i, a)| Atom::new(a.element, a.charge, fake_coord(i)))
                .collect();
            let mut bonds: Vec<Bond> = graph.bonds().to_vec();
            let base = atoms.len();
            let mut probe_map = vec![usize::MAX; bond_probe.atoms().len()];
            probe_map[0] = from;
            probe_map[1] = to;
            for (i, a) in bond_probe.atoms().iter().enumerate().skip(2) {
                probe_map[i] = atoms.len();
                atoms.push(Atom::new(a.element, a.charge, fake_coord(base + i)));
            }
            for (bi, b) in bond_probe.bonds().iter().enumerate() {
                if bi == probe_bond {
                    continue; // collapses onto the site bond
                }
                bonds.push(Bond {
                    a: probe_map[b.a],
                    b: probe_map[b.b],
                    order: b.order,
                });
            }
            Molecule::new("product", atoms, bonds).ok()
        }
        ConnectionSite::Slot { .. } => None,
    }
}

/// Asymmetric chain probe C-N-O (attaches via its first atom).
fn atom_probe() -> Molecule {
    let mut b = fixtures::MolBuilder::new();
    let c = b.atom_at(Element::C, Vec3::zeros());
    let n = b.atom_at(Element::N, Vec3::new(1.47, 0.0, 0.0));
    let o = b.atom_at(Element::O, Vec3::new(2.2, 1.1, 0.0));
    b.bond(c, n, BondOrder::Single);
    b.bond(n, o, BondOrder::Single);
    b.build("probe-chain")
}

/// Five-ring probe whose (0, 1) bond matches aromatic ring bonds, with
/// a nitrogen to break its own symmetry.
fn bond_probe() -> Molecule {
    let mut b = fixtures::MolBuilder::new();
    let ids: Vec<usize> = (0..5)
        .map(|i| {
            let e = if i == 2 { Element::N } else { Element::C };
            b.atom_at(e, Vec3::new(i as f64, (i % 2) as f64, 0.3 * i as f64))
        })
        .collect();
    for i in 0..5 {
        let order = if i == 0 {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        };
        b.bond(ids[i], ids[(i + 1) % 5], order);
    }
    b.build("probe-ring")
}

#[test]
fn same_class_products_isomorphic_cross_class_not() {
    let a_probe = atom_probe();
    let b_probe = bond_probe();
    for motif in fixture_motifs() {
        let sites = enumerate_ccs_motif(&motif);
        let classes = equivalence_classes(&motif, &sites);
        let mut class_products: Vec<(confrag::connect::SiteKind, Vec<Molecule>)> = Vec::new();
        for class in classes.atom_classes.iter().chain(&classes.bond_classes) {
            let kind = class.representative.kind();
            let products: Vec<Molecule> = class
                .members
                .iter()
                .filter_map(|s| attach_product(&motif, s, &a_probe, &b_probe))
                .collect();
            // Within a class every product is isomorphic to the first.
            for p in products.iter().skip(1) {
                assert!(
                    isomorphic(&products[0], p),
                    "same-class products differ in motif {}",
                    motif.key().to_hex()
                );
            }
            if !products.is_empty() {
                class_products.push((kind, products));
            }
        }
        // Across classes of the same kind, the representatives must
        // produce non-isomorphic results.
        for i in 0..class_products.len() {
            for j in i + 1..class_products.len() {
                let (ka, pa) = &class_products[i];
                let (kb, pb) = &class_products[j];
                if ka != kb {
                    continue;
                }
                assert!(
                    !isomorphic(&pa[0], &pb[0]),
                    "cross-class products isomorphic in motif {}",
                    motif.key().to_hex()
                );
            }
        }
    }
}

#[test]
fn representatives_stable_across_atom_orderings() {
    let mut rng = Lcg(0xabc);
    for motif in [
        fixtures::benzene_motif(),
        fixtures::pyridine_motif(),
        fixtures::ethyl_motif(),
    ] {
        let baseline = confrag::connect::equivalence_classes_of_motif(&motif);
        let signature = class_signature(&baseline);
        for _ in 0..20 {
            let perm = rng.permutation(motif.graph().atoms().len());
            let permuted_graph = permute_molecule(motif.graph(), &perm);
            let permuted = Motif::new(permuted_graph, motif.kind()).unwrap();
            let classes = confrag::connect::equivalence_classes_of_motif(&permuted);
            assert_eq!(class_signature(&classes), signature);
        }
    }
}

/// Ordering-invariant fingerprint: per class, (marked key, size), in
/// class order.
fn class_signature(classes: &EquivalenceClasses) -> Vec<(String, usize)> {
    classes
        .atom_classes
        .iter()
        .chain(&classes.bond_classes)
        .map(|c| (c.key.to_hex(), c.members.len()))
        .collect()
}
