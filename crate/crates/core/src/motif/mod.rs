//! Conformal motif extraction.
//!
//! Molecules are broken at freely rotatable bonds; the resulting pieces
//! keep their source conformation. Fused ring systems decompose into one
//! motif per SSSR ring (shared atoms duplicated), chains gain dummy
//! placeholder atoms at the positions of their severed neighbors, and
//! everything else enters the vocabulary as-is. A bond is freely
//! rotatable when it is a single non-ring bond whose removal leaves two
//! components that each hold at least one atom off the bond axis.

mod vocabfile;

use std::collections::BTreeMap;

use crate::connect::{self, EquivalenceClasses};
use crate::error::{Error, Result};
use crate::exec;
use crate::geom3d;
use crate::molgraph::{
    canonical_key, perceive_rings, Atom, Bond, BondOrder, CanonicalKey, Element, Molecule,
    RingInfo, Vec3,
};

/// Perpendicular distance from the bond line above which an atom counts
/// as off-axis.
pub const OFF_AXIS_TOLERANCE: f64 = 0.1;

/// Stored-conformation bond lengths must fall in this range (Å).
const BOND_LENGTH_RANGE: (f64, f64) = (0.9, 2.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MotifKind {
    RingLike,
    ChainLike,
}

impl MotifKind {
    pub fn code(&self) -> &'static str {
        match self {
            MotifKind::RingLike => "ring_like",
            MotifKind::ChainLike => "chain_like",
        }
    }

    pub fn from_code(code: &str) -> Option<MotifKind> {
        match code {
            "ring_like" => Some(MotifKind::RingLike),
            "chain_like" => Some(MotifKind::ChainLike),
            _ => None,
        }
    }
}

/// Canonical fragment graph with its stored conformation and corpus
/// frequency. Dummy atoms appear only on chain-like motifs.
#[derive(Debug, Clone)]
pub struct Motif {
    graph: Molecule,
    kind: MotifKind,
    key: CanonicalKey,
    frequency: u64,
}

impl Motif {
    pub fn new(graph: Molecule, kind: MotifKind) -> Result<Motif> {
        let invalid = |msg: String| Error::InvalidMolecule {
            name: graph.name().to_string(),
            msg,
        };
        match kind {
            MotifKind::RingLike => {
                if graph.has_dummies() {
                    return Err(invalid("ring-like motif contains dummy atoms".into()));
                }
            }
            MotifKind::ChainLike => {
                for d in graph.dummy_indices() {
                    let neighbors = graph.neighbors(d);
                    if neighbors.len() != 1 {
                        return Err(invalid(format!(
                            "dummy atom {d} has {} bonds, expected 1",
                            neighbors.len()
                        )));
                    }
                    if graph.atom(neighbors[0].0).element.is_dummy() {
                        return Err(invalid(format!("dummy atom {d} bonds to a dummy")));
                    }
                }
            }
        }
        for bond in graph.bonds() {
            let length = (graph.atom(bond.a).coord - graph.atom(bond.b).coord).norm();
            if !(BOND_LENGTH_RANGE.0..=BOND_LENGTH_RANGE.1).contains(&length) {
                return Err(invalid(format!(
                    "stored bond {}-{} length {length:.3} Å outside [{}, {}]",
                    bond.a, bond.b, BOND_LENGTH_RANGE.0, BOND_LENGTH_RANGE.1
                )));
            }
        }
        let key = canonical_key(&graph);
        Ok(Motif {
            graph,
            kind,
            key,
            frequency: 1,
        })
    }

    pub fn graph(&self) -> &Molecule {
        &self.graph
    }

    pub fn kind(&self) -> MotifKind {
        self.kind
    }

    pub fn key(&self) -> &CanonicalKey {
        &self.key
    }

    pub fn frequency(&self) -> u64 {
        self.frequency
    }

    /// Heavy (non-dummy) atom count.
    pub fn heavy_atom_count(&self) -> usize {
        self.graph
            .atoms()
            .iter()
            .filter(|a| !a.element.is_dummy())
            .count()
    }

    /// Heavy-atom weight plus implicit hydrogens; dummies are free slots,
    /// not hydrogens, so they contribute nothing.
    pub fn molecular_weight(&self) -> f64 {
        let mut total = self.graph.molecular_weight();
        // Dummy bonds consume one valence unit of their anchor, which
        // molecular_weight counted as a missing hydrogen. Restore it:
        // an unconsumed slot will either gain a heavy bond later or stay
        // an implicit hydrogen.
        total += self.graph.dummy_indices().len() as f64 * 1.008;
        total
    }
}

/// One fragmentation piece: the motif plus the map from its atoms back
/// to source atom indices. Dummy entries map to the neighbor atom the
/// dummy stands for.
#[derive(Debug, Clone)]
pub struct Fragment {
    pub motif: Motif,
    pub source_atoms: Vec<usize>,
}

/// A severed freely rotatable bond, with the dihedral recorded at
/// severance. Reference atoms are source indices: the lowest-index
/// off-axis neighbor of each endpoint. `None` marks an axially
/// degenerate junction (every neighbor collinear with the bond).
#[derive(Debug, Clone)]
pub struct SeveredBond {
    pub a: usize,
    pub b: usize,
    pub torsion: Option<f64>,
    pub ref_a: Option<usize>,
    pub ref_b: Option<usize>,
}

/// Output of [`fragment`]: the motif pieces and the severed bonds that
/// reconnect them.
#[derive(Debug, Clone)]
pub struct FragmentationResult {
    pub source_name: String,
    pub source_atom_count: usize,
    pub fragments: Vec<Fragment>,
    pub severed_bonds: Vec<SeveredBond>,
}

/// Single non-ring bonds whose removal yields two components, each with
/// at least one atom farther than [`OFF_AXIS_TOLERANCE`] from the bond
/// line. Returned in ascending bond-index order.
pub fn find_rotatable_bonds(mol: &Molecule) -> Vec<usize> {
    let rings = perceive_rings(mol);
    let mut out = Vec::new();
    for (idx, bond) in mol.bonds().iter().enumerate() {
        if bond.order != BondOrder::Single || rings.bond_in_ring(idx) {
            continue;
        }
        // A non-ring bond of a connected graph is a bridge; removing it
        // yields exactly two components.
        let side_a = component_without_bond(mol, bond.a, idx);
        let side_b = component_without_bond(mol, bond.b, idx);
        let pa = mol.atom(bond.a).coord;
        let pb = mol.atom(bond.b).coord;
        if has_off_axis_atom(mol, &side_a, pa, pb) && has_off_axis_atom(mol, &side_b, pa, pb) {
            out.push(idx);
        }
    }
    out
}

fn component_without_bond(mol: &Molecule, start: usize, skip_bond: usize) -> Vec<usize> {
    let mut seen = vec![false; mol.atoms().len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut members = vec![start];
    while let Some(i) = stack.pop() {
        for &(j, b) in mol.neighbors(i) {
            if b == skip_bond || seen[j] {
                continue;
            }
            seen[j] = true;
            members.push(j);
            stack.push(j);
        }
    }
    members.sort_unstable();
    members
}

fn has_off_axis_atom(mol: &Molecule, members: &[usize], pa: Vec3, pb: Vec3) -> bool {
    members
        .iter()
        .any(|&i| perp_distance(mol.atom(i).coord, pa, pb) > OFF_AXIS_TOLERANCE)
}

fn perp_distance(p: Vec3, line_a: Vec3, line_b: Vec3) -> f64 {
    let dir = line_b - line_a;
    let norm = dir.norm();
    if norm < 1e-12 {
        return (p - line_a).norm();
    }
    (p - line_a).cross(&(dir / norm)).norm()
}

/// Break a molecule at its freely rotatable bonds and classify every
/// piece. Pieces and severed bonds come out in deterministic order.
pub fn fragment(mol: &Molecule) -> Result<FragmentationResult> {
    let rotatable = find_rotatable_bonds(mol);
    let pieces = pieces_after_severing(mol, &rotatable);

    let mut fragments = Vec::new();
    for piece_atoms in &pieces {
        fragments.extend(classify_piece(mol, piece_atoms)?);
    }

    let severed_bonds = rotatable
        .iter()
        .map(|&idx| record_severed_bond(mol, idx))
        .collect();

    Ok(FragmentationResult {
        source_name: mol.name().to_string(),
        source_atom_count: mol.atoms().len(),
        fragments,
        severed_bonds,
    })
}

/// Connected components after removing the given bonds, each sorted,
/// ordered by smallest member.
pub(crate) fn pieces_after_severing(mol: &Molecule, severed: &[usize]) -> Vec<Vec<usize>> {
    let n = mol.atoms().len();
    let mut assigned = vec![false; n];
    let mut pieces = Vec::new();
    for start in 0..n {
        if assigned[start] {
            continue;
        }
        let mut members = vec![start];
        let mut stack = vec![start];
        assigned[start] = true;
        while let Some(i) = stack.pop() {
            for &(j, b) in mol.neighbors(i) {
                if assigned[j] || severed.contains(&b) {
                    continue;
                }
                assigned[j] = true;
                members.push(j);
                stack.push(j);
            }
        }
        members.sort_unstable();
        pieces.push(members);
    }
    pieces
}

fn classify_piece(source: &Molecule, piece_atoms: &[usize]) -> Result<Vec<Fragment>> {
    let piece = induced_molecule(source, piece_atoms)?;
    let rings = perceive_rings(&piece);
    if rings.is_empty() {
        let (motif, map) = augment_chain_indexed(source, piece_atoms)?;
        return Ok(vec![Fragment {
            motif,
            source_atoms: map,
        }]);
    }
    if is_single_fused_system(&rings) {
        let parts = decompose_fused_indexed(&piece, &rings)?;
        return parts
            .into_iter()
            .map(|(graph, local_map)| {
                let source_atoms = local_map.iter().map(|&i| piece_atoms[i]).collect();
                Ok(Fragment {
                    motif: Motif::new(graph, MotifKind::RingLike)?,
                    source_atoms,
                })
            })
            .collect();
    }
    // Single ring system (or several ring systems joined by unbreakable
    // bonds): kept whole.
    Ok(vec![Fragment {
        motif: Motif::new(piece, MotifKind::RingLike)?,
        source_atoms: piece_atoms.to_vec(),
    }])
}

/// True when the piece is one fused system of at least two rings (every
/// SSSR ring in a single bond-sharing component).
fn is_single_fused_system(rings: &RingInfo) -> bool {
    rings.fused_components.len() == 1 && rings.rings.len() >= 2
}

fn induced_molecule(source: &Molecule, atoms: &[usize]) -> Result<Molecule> {
    let mut local = BTreeMap::new();
    for (i, &a) in atoms.iter().enumerate() {
        local.insert(a, i);
    }
    let sub_atoms: Vec<Atom> = atoms.iter().map(|&a| source.atom(a).clone()).collect();
    let sub_bonds: Vec<Bond> = source
        .bonds()
        .iter()
        .filter_map(|b| match (local.get(&b.a), local.get(&b.b)) {
            (Some(&x), Some(&y)) => Some(Bond {
                a: x,
                b: y,
                order: b.order,
            }),
            _ => None,
        })
        .collect();
    Molecule::new(source.name(), sub_atoms, sub_bonds)
}

/// Decompose a fused ring system into one ring-like motif per SSSR ring.
///
/// Atoms and bonds shared between rings are duplicated into each
/// containing ring's motif; pendant substituents stay with the ring(s)
/// their anchor atom belongs to. No bonds are severed.
pub fn decompose_fused(fragment: &Molecule, rings: &RingInfo) -> Result<Vec<Motif>> {
    if !is_single_fused_system(rings) {
        return Err(Error::InvalidMolecule {
            name: fragment.name().to_string(),
            msg: "not a fused ring system (need ≥ 2 rings sharing bonds)".into(),
        });
    }
    decompose_fused_indexed(fragment, rings)?
        .into_iter()
        .map(|(graph, _)| Motif::new(graph, MotifKind::RingLike))
        .collect()
}

fn decompose_fused_indexed(
    piece: &Molecule,
    rings: &RingInfo,
) -> Result<Vec<(Molecule, Vec<usize>)>> {
    let n = piece.atoms().len();
    let ring_atom = {
        let mut v = vec![false; n];
        for ring in &rings.rings {
            for &a in ring {
                v[a] = true;
            }
        }
        v
    };

    // Pendant components hang off exactly one ring anchor each (a second
    // anchor would close another cycle).
    let mut pendant_of_anchor: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut seen = ring_atom.clone();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut members = vec![start];
        let mut stack = vec![start];
        seen[start] = true;
        let mut anchors = Vec::new();
        while let Some(i) = stack.pop() {
            for &(j, _) in piece.neighbors(i) {
                if ring_atom[j] {
                    if !anchors.contains(&j) {
                        anchors.push(j);
                    }
                } else if !seen[j] {
                    seen[j] = true;
                    members.push(j);
                    stack.push(j);
                }
            }
        }
        if anchors.len() != 1 {
            return Err(Error::InvalidMolecule {
                name: piece.name().to_string(),
                msg: format!("pendant group with {} ring anchors", anchors.len()),
            });
        }
        pendant_of_anchor.entry(anchors[0]).or_default().extend(members);
    }

    // One motif per ring, ordered by smallest ring atom.
    let mut ring_order: Vec<usize> = (0..rings.rings.len()).collect();
    ring_order.sort_by_key(|&r| *rings.rings[r].iter().min().unwrap());

    let mut out = Vec::new();
    for r in ring_order {
        let mut atom_set: Vec<usize> = rings.rings[r].clone();
        for &a in &rings.rings[r] {
            if let Some(pendant) = pendant_of_anchor.get(&a) {
                atom_set.extend(pendant.iter().copied());
            }
        }
        atom_set.sort_unstable();
        atom_set.dedup();
        let graph = induced_molecule(piece, &atom_set)?;
        out.push((graph, atom_set));
    }
    Ok(out)
}

/// Augment an acyclic piece with dummy placeholders: every source
/// neighbor of a piece atom becomes a `*` atom at its source position,
/// bonded to the piece atom.
pub fn augment_chain(source: &Molecule, piece_atoms: &[usize]) -> Result<Motif> {
    augment_chain_indexed(source, piece_atoms).map(|(motif, _)| motif)
}

fn augment_chain_indexed(source: &Molecule, piece_atoms: &[usize]) -> Result<(Motif, Vec<usize>)> {
    let in_piece = |a: usize| piece_atoms.binary_search(&a).is_ok();
    let mut atoms: Vec<Atom> = piece_atoms.iter().map(|&a| source.atom(a).clone()).collect();
    let mut source_map: Vec<usize> = piece_atoms.to_vec();
    let mut bonds = Vec::new();
    let mut local = BTreeMap::new();
    for (i, &a) in piece_atoms.iter().enumerate() {
        local.insert(a, i);
    }
    for bond in source.bonds() {
        if let (Some(&x), Some(&y)) = (local.get(&bond.a), local.get(&bond.b)) {
            bonds.push(Bond {
                a: x,
                b: y,
                order: bond.order,
            });
        }
    }
    for (i, &a) in piece_atoms.iter().enumerate() {
        let mut outside: Vec<usize> = source
            .neighbors(a)
            .iter()
            .map(|&(j, _)| j)
            .filter(|&j| !in_piece(j))
            .collect();
        outside.sort_unstable();
        for j in outside {
            let dummy_idx = atoms.len();
            atoms.push(Atom::new(Element::Dummy, 0, source.atom(j).coord));
            source_map.push(j);
            bonds.push(Bond {
                a: i,
                b: dummy_idx,
                order: BondOrder::Single,
            });
        }
    }
    let graph = Molecule::new(source.name(), atoms, bonds)?;
    let motif = Motif::new(graph, MotifKind::ChainLike)?;
    Ok((motif, source_map))
}

fn record_severed_bond(mol: &Molecule, bond_idx: usize) -> SeveredBond {
    let bond = mol.bonds()[bond_idx];
    let pa = mol.atom(bond.a).coord;
    let pb = mol.atom(bond.b).coord;
    let ref_a = neighbor_reference(mol, bond.a, bond.b, pa, pb);
    let ref_b = neighbor_reference(mol, bond.b, bond.a, pa, pb);
    let torsion = match (ref_a, ref_b) {
        (Some(ra), Some(rb)) => {
            geom3d::dihedral(mol.atom(ra).coord, pa, pb, mol.atom(rb).coord).ok()
        }
        _ => None,
    };
    SeveredBond {
        a: bond.a,
        b: bond.b,
        torsion,
        ref_a,
        ref_b,
    }
}

/// Lowest-index off-axis neighbor of `endpoint`, excluding the other
/// bond end. Adjacent references keep the recorded dihedral invariant
/// under rotations about every other bond.
fn neighbor_reference(
    mol: &Molecule,
    endpoint: usize,
    other: usize,
    pa: Vec3,
    pb: Vec3,
) -> Option<usize> {
    let mut neighbors: Vec<usize> = mol
        .neighbors(endpoint)
        .iter()
        .map(|&(n, _)| n)
        .filter(|&n| n != other)
        .collect();
    neighbors.sort_unstable();
    neighbors
        .into_iter()
        .find(|&n| perp_distance(mol.atom(n).coord, pa, pb) > OFF_AXIS_TOLERANCE)
}

/// Motif vocabulary: deduplicated motifs with summed frequencies, sorted
/// by descending frequency then key, with per-motif connection-site
/// equivalence classes precomputed.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    motifs: Vec<Motif>,
    min_frequency: u64,
    site_classes: Vec<EquivalenceClasses>,
}

impl Vocabulary {
    pub fn new(mut motifs: Vec<Motif>, min_frequency: u64) -> Vocabulary {
        motifs.retain(|m| m.frequency >= min_frequency);
        motifs.sort_by(|x, y| {
            y.frequency
                .cmp(&x.frequency)
                .then_with(|| x.key.cmp(&y.key))
        });
        let site_classes = exec::map_collect(&motifs, connect::equivalence_classes_of_motif);
        Vocabulary {
            motifs,
            min_frequency,
            site_classes,
        }
    }

    pub fn motifs(&self) -> &[Motif] {
        &self.motifs
    }

    pub fn min_frequency(&self) -> u64 {
        self.min_frequency
    }

    pub fn site_classes(&self, motif_index: usize) -> &EquivalenceClasses {
        &self.site_classes[motif_index]
    }

    pub fn find_by_key(&self, key: &CanonicalKey) -> Option<usize> {
        self.motifs.iter().position(|m| &m.key == key)
    }

    pub fn is_empty(&self) -> bool {
        self.motifs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.motifs.len()
    }

    /// Ring-like/chain-like counts.
    pub fn kind_split(&self) -> (usize, usize) {
        let rings = self
            .motifs
            .iter()
            .filter(|m| m.kind == MotifKind::RingLike)
            .count();
        (rings, self.motifs.len() - rings)
    }

    pub fn write(&self) -> Vec<u8> {
        vocabfile::write(self)
    }

    pub fn read(bytes: &[u8]) -> Result<Vocabulary> {
        vocabfile::read(bytes)
    }
}

/// Fragment every corpus molecule and accumulate the deduplicated motif
/// vocabulary. Each retained motif stores the conformation of its first
/// corpus occurrence.
pub fn extract_vocabulary(corpus: &[Molecule], min_frequency: u64) -> Result<Vocabulary> {
    let per_molecule: Vec<Result<FragmentationResult>> = exec::map_collect(corpus, fragment);
    let mut by_key: BTreeMap<CanonicalKey, Motif> = BTreeMap::new();
    for result in per_molecule {
        for piece in result?.fragments {
            match by_key.get_mut(piece.motif.key()) {
                Some(existing) => existing.frequency += piece.motif.frequency,
                None => {
                    by_key.insert(piece.motif.key().clone(), piece.motif);
                }
            }
        }
    }
    Ok(Vocabulary::new(
        by_key.into_values().collect(),
        min_frequency,
    ))
}

/// Rebuild the source molecule from a fragmentation result by
/// reattaching pieces at the severed bonds (and re-merging decomposed
/// fused rings), replaying the recorded torsions.
pub fn reconstruct(result: &FragmentationResult) -> Result<Molecule> {
    super::assemble::reassemble(result)
}

#[cfg(test)]
mod tests;
