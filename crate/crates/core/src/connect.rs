//! Connection-site calculus: enumerate candidate connection sites on
//! partial ligands and motifs, and reduce motif sites to equivalence
//! classes under graph isomorphism.
//!
//! Two atoms of a motif are equivalent when marking either one with a
//! distinguished label yields isomorphic graphs; directed bonds are
//! equivalent when both ordered endpoints are, tested with both marks
//! applied simultaneously. Production code compares canonical keys of
//! the marked graphs; the pairwise VF2 check lives in the test suite as
//! an independent oracle.

use crate::molgraph::{
    canonical_key_marked, canonical_ranks, perceive_rings, CanonicalKey, Molecule, Vec3,
};
use crate::motif::{Motif, MotifKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SiteKind {
    Atom,
    Bond,
}

/// An attachment point: an atom (free-valence ring atom, chain dummy, or
/// recorded open slot) or a directed ring bond.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConnectionSite {
    /// Ring atom with free valence.
    Atom { atom: usize },
    /// Chain-motif dummy placeholder; `anchor` is its heavy neighbor.
    Dummy { dummy: usize, anchor: usize },
    /// Open attachment slot recorded on a partial ligand; `anchor` is
    /// the ligand atom that will form the new bond.
    Slot { slot: usize, anchor: usize },
    /// Directed ring bond `from` → `to`.
    Bond { from: usize, to: usize },
}

impl ConnectionSite {
    pub fn kind(&self) -> SiteKind {
        match self {
            ConnectionSite::Bond { .. } => SiteKind::Bond,
            _ => SiteKind::Atom,
        }
    }

    /// The atom that participates in the new bond (bond sites have two;
    /// this returns `from`).
    pub fn anchor(&self) -> usize {
        match *self {
            ConnectionSite::Atom { atom } => atom,
            ConnectionSite::Dummy { anchor, .. } => anchor,
            ConnectionSite::Slot { anchor, .. } => anchor,
            ConnectionSite::Bond { from, .. } => from,
        }
    }
}

/// Recorded placeholder on a partial ligand: where a dummy atom of an
/// attached chain motif sat before it was folded into bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenSlot {
    pub anchor: usize,
    pub position: Vec3,
}

/// Candidate connection sites of a partial ligand: open slots first,
/// then free-valence ring atoms, then qualifying directed ring bonds.
/// No equivalence reduction is applied on the fragment side.
pub fn enumerate_ccs_fragment(ligand: &Molecule, open_slots: &[OpenSlot]) -> Vec<ConnectionSite> {
    let mut sites: Vec<ConnectionSite> = open_slots
        .iter()
        .enumerate()
        .map(|(slot, s)| ConnectionSite::Slot {
            slot,
            anchor: s.anchor,
        })
        .collect();
    sites.extend(ring_sites(ligand));
    sites
}

/// Candidate connection sites of a vocabulary motif: dummies for
/// chain-like motifs, ring atoms and directed ring bonds for ring-like.
pub fn enumerate_ccs_motif(motif: &Motif) -> Vec<ConnectionSite> {
    match motif.kind() {
        MotifKind::ChainLike => motif
            .graph()
            .dummy_indices()
            .into_iter()
            .map(|dummy| ConnectionSite::Dummy {
                dummy,
                anchor: motif.graph().neighbors(dummy)[0].0,
            })
            .collect(),
        MotifKind::RingLike => ring_sites(motif.graph()),
    }
}

fn ring_sites(mol: &Molecule) -> Vec<ConnectionSite> {
    let rings = perceive_rings(mol);
    if rings.is_empty() {
        return Vec::new();
    }
    let mut ring_atoms: Vec<usize> = Vec::new();
    for ring in &rings.rings {
        for &a in ring {
            if !ring_atoms.contains(&a) {
                ring_atoms.push(a);
            }
        }
    }
    ring_atoms.sort_unstable();
    let qualifies = |a: usize| mol.free_valence(a) >= 1;
    let mut sites: Vec<ConnectionSite> = ring_atoms
        .iter()
        .filter(|&&a| qualifies(a))
        .map(|&atom| ConnectionSite::Atom { atom })
        .collect();
    let mut bond_pairs: Vec<(usize, usize)> = Vec::new();
    for &bond_idx in &rings.ring_bonds {
        let bond = mol.bonds()[bond_idx];
        if qualifies(bond.a) && qualifies(bond.b) {
            bond_pairs.push((bond.a.min(bond.b), bond.a.max(bond.b)));
        }
    }
    bond_pairs.sort_unstable();
    for (a, b) in bond_pairs {
        sites.push(ConnectionSite::Bond { from: a, to: b });
        sites.push(ConnectionSite::Bond { from: b, to: a });
    }
    sites
}

/// One equivalence class of connection sites.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteClass {
    /// Marked-graph canonical key shared by all members.
    pub key: CanonicalKey,
    pub members: Vec<ConnectionSite>,
    /// Deterministic class representative (lowest canonical rank).
    pub representative: ConnectionSite,
}

/// Atom-site and directed-bond-site partitions of a motif's CCS.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EquivalenceClasses {
    pub atom_classes: Vec<SiteClass>,
    pub bond_classes: Vec<SiteClass>,
}

impl EquivalenceClasses {
    /// Class representatives, atoms first, in class order.
    pub fn representatives(&self) -> Vec<ConnectionSite> {
        self.atom_classes
            .iter()
            .chain(&self.bond_classes)
            .map(|c| c.representative)
            .collect()
    }

    /// Class id (atom classes then bond classes) containing a site.
    pub fn class_of(&self, site: &ConnectionSite) -> Option<usize> {
        self.atom_classes
            .iter()
            .chain(&self.bond_classes)
            .position(|c| c.members.contains(site))
    }
}

/// Partition motif connection sites into equivalence classes by marked
/// canonical keys.
pub fn equivalence_classes(motif: &Motif, sites: &[ConnectionSite]) -> EquivalenceClasses {
    let graph = motif.graph();
    let ranks = canonical_ranks(graph);

    let mut atom_groups: Vec<(CanonicalKey, Vec<ConnectionSite>)> = Vec::new();
    let mut bond_groups: Vec<(CanonicalKey, Vec<ConnectionSite>)> = Vec::new();
    for &site in sites {
        match site {
            ConnectionSite::Atom { atom } => {
                let key = canonical_key_marked(graph, &[(atom, 1)]);
                push_group(&mut atom_groups, key, site);
            }
            ConnectionSite::Dummy { dummy, .. } => {
                let key = canonical_key_marked(graph, &[(dummy, 1)]);
                push_group(&mut atom_groups, key, site);
            }
            ConnectionSite::Bond { from, to } => {
                let key = canonical_key_marked(graph, &[(from, 1), (to, 2)]);
                push_group(&mut bond_groups, key, site);
            }
            ConnectionSite::Slot { .. } => {
                // Fragment-side bookkeeping never reaches motif reduction.
            }
        }
    }

    EquivalenceClasses {
        atom_classes: finish_groups(atom_groups, &ranks),
        bond_classes: finish_groups(bond_groups, &ranks),
    }
}

/// Enumerate and classify in one go; used to precompute vocabulary RCCS
/// tables.
pub fn equivalence_classes_of_motif(motif: &Motif) -> EquivalenceClasses {
    let sites = enumerate_ccs_motif(motif);
    equivalence_classes(motif, &sites)
}

fn push_group(
    groups: &mut Vec<(CanonicalKey, Vec<ConnectionSite>)>,
    key: CanonicalKey,
    site: ConnectionSite,
) {
    match groups.iter_mut().find(|(k, _)| *k == key) {
        Some((_, members)) => members.push(site),
        None => groups.push((key, vec![site])),
    }
}

fn finish_groups(
    mut groups: Vec<(CanonicalKey, Vec<ConnectionSite>)>,
    ranks: &[usize],
) -> Vec<SiteClass> {
    // Class order follows the marked keys so it is independent of the
    // motif's input atom order.
    groups.sort_by(|(a, _), (b, _)| a.cmp(b));
    groups
        .into_iter()
        .map(|(key, members)| {
            let representative = *members
                .iter()
                .min_by_key(|site| site_rank(site, ranks))
                .expect("class has at least one member");
            SiteClass {
                key,
                members,
                representative,
            }
        })
        .collect()
}

fn site_rank(site: &ConnectionSite, ranks: &[usize]) -> (usize, usize) {
    match *site {
        ConnectionSite::Atom { atom } => (ranks[atom], usize::MAX),
        ConnectionSite::Dummy { dummy, .. } => (ranks[dummy], usize::MAX),
        ConnectionSite::Slot { slot, .. } => (slot, usize::MAX),
        ConnectionSite::Bond { from, to } => (ranks[from], ranks[to]),
    }
}
