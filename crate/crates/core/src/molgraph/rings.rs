//! Ring perception: smallest set of smallest rings.
//!
//! Candidate cycles come from a per-ring-bond BFS (shortest cycle through
//! each ring bond); the SSSR basis is then picked greedily by length with
//! GF(2) independence over bond-incidence vectors. The basis size always
//! equals the cyclomatic number `bonds - atoms + 1` of the connected graph.

use std::collections::VecDeque;

use super::Molecule;

/// Rings, ring bonds and fused systems of one molecule.
#[derive(Debug, Clone, Default)]
pub struct RingInfo {
    /// SSSR cycle basis; each ring is a closed walk of atom indices.
    pub rings: Vec<Vec<usize>>,
    /// Bond indices lying on any SSSR ring.
    pub ring_bonds: Vec<usize>,
    /// Partition of ring indices into maximal bond-sharing fused systems.
    pub fused_components: Vec<Vec<usize>>,
}

impl RingInfo {
    pub fn is_empty(&self) -> bool {
        self.rings.is_empty()
    }

    pub fn atom_in_ring(&self, atom: usize) -> bool {
        self.rings.iter().any(|r| r.contains(&atom))
    }

    pub fn bond_in_ring(&self, bond: usize) -> bool {
        self.ring_bonds.contains(&bond)
    }

    /// Rings (by index) that contain the bond `a`-`b`.
    pub fn rings_with_bond(&self, a: usize, b: usize) -> Vec<usize> {
        self.rings
            .iter()
            .enumerate()
            .filter(|(_, ring)| ring_has_edge(ring, a, b))
            .map(|(i, _)| i)
            .collect()
    }
}

fn ring_has_edge(ring: &[usize], a: usize, b: usize) -> bool {
    let n = ring.len();
    (0..n).any(|i| {
        let (x, y) = (ring[i], ring[(i + 1) % n]);
        (x == a && y == b) || (x == b && y == a)
    })
}

/// Compute the SSSR basis and fused-ring systems of a connected molecule.
pub fn perceive_rings(mol: &Molecule) -> RingInfo {
    let n_atoms = mol.atoms().len();
    let n_bonds = mol.bonds().len();
    let expected = n_bonds as isize - n_atoms as isize + 1;
    if expected <= 0 {
        return RingInfo::default();
    }
    let expected = expected as usize;

    // Prune non-ring atoms so cycle searches stay on the ring skeleton.
    let mut degree: Vec<usize> = (0..n_atoms).map(|i| mol.neighbors(i).len()).collect();
    let mut pruned = vec![false; n_atoms];
    let mut queue: VecDeque<usize> = (0..n_atoms).filter(|&i| degree[i] <= 1).collect();
    while let Some(i) = queue.pop_front() {
        if pruned[i] {
            continue;
        }
        pruned[i] = true;
        for &(j, _) in mol.neighbors(i) {
            if !pruned[j] {
                degree[j] -= 1;
                if degree[j] <= 1 {
                    queue.push_back(j);
                }
            }
        }
    }

    // Shortest cycle through every surviving bond.
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for (bond_idx, bond) in mol.bonds().iter().enumerate() {
        if pruned[bond.a] || pruned[bond.b] {
            continue;
        }
        if let Some(path) = shortest_path_avoiding(mol, bond.a, bond.b, bond_idx, &pruned) {
            let mut ring = path;
            normalize_ring(&mut ring);
            if !candidates.contains(&ring) {
                candidates.push(ring);
            }
        }
    }
    candidates.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    // Greedy GF(2)-independent selection by increasing length.
    let words = n_bonds.div_ceil(64);
    let mut basis: Vec<Vec<u64>> = Vec::new();
    let mut rings: Vec<Vec<usize>> = Vec::new();
    for ring in candidates {
        if rings.len() == expected {
            break;
        }
        let mut vec = ring_bond_vector(mol, &ring, words);
        let mut reduced = vec.clone();
        for b in &basis {
            if let Some(pivot) = leading_bit(b) {
                if bit(&reduced, pivot) {
                    xor_into(&mut reduced, b);
                }
            }
        }
        if reduced.iter().any(|&w| w != 0) {
            // Keep the reduced vector in echelon form for later pivots.
            for b in &basis {
                if let Some(pivot) = leading_bit(b) {
                    if bit(&vec, pivot) {
                        xor_into(&mut vec, b);
                    }
                }
            }
            basis.push(vec);
            rings.push(ring);
        }
    }

    let mut ring_bonds: Vec<usize> = Vec::new();
    for ring in &rings {
        let k = ring.len();
        for i in 0..k {
            let bond = mol
                .bond_between(ring[i], ring[(i + 1) % k])
                .expect("ring edge must be a bond");
            if !ring_bonds.contains(&bond) {
                ring_bonds.push(bond);
            }
        }
    }
    ring_bonds.sort_unstable();

    let fused_components = fused_systems(mol, &rings);
    RingInfo {
        rings,
        ring_bonds,
        fused_components,
    }
}

fn shortest_path_avoiding(
    mol: &Molecule,
    from: usize,
    to: usize,
    skip_bond: usize,
    pruned: &[bool],
) -> Option<Vec<usize>> {
    let n = mol.atoms().len();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    queue.push_back(from);
    seen[from] = true;
    while let Some(i) = queue.pop_front() {
        if i == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &(j, b) in mol.neighbors(i) {
            if b == skip_bond || seen[j] || pruned[j] {
                continue;
            }
            seen[j] = true;
            prev[j] = i;
            queue.push_back(j);
        }
    }
    None
}

fn normalize_ring(ring: &mut Vec<usize>) {
    let n = ring.len();
    let min_pos = (0..n).min_by_key(|&i| ring[i]).unwrap();
    ring.rotate_left(min_pos);
    if n > 2 && ring[1] > ring[n - 1] {
        ring[1..].reverse();
    }
}

fn ring_bond_vector(mol: &Molecule, ring: &[usize], words: usize) -> Vec<u64> {
    let mut v = vec![0u64; words];
    let k = ring.len();
    for i in 0..k {
        let bond = mol.bond_between(ring[i], ring[(i + 1) % k]).unwrap();
        v[bond / 64] |= 1 << (bond % 64);
    }
    v
}

fn leading_bit(v: &[u64]) -> Option<usize> {
    for (w, &word) in v.iter().enumerate() {
        if word != 0 {
            return Some(w * 64 + word.trailing_zeros() as usize);
        }
    }
    None
}

fn bit(v: &[u64], i: usize) -> bool {
    v[i / 64] >> (i % 64) & 1 == 1
}

fn xor_into(target: &mut [u64], other: &[u64]) {
    for (t, o) in target.iter_mut().zip(other) {
        *t ^= o;
    }
}

fn fused_systems(mol: &Molecule, rings: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let k = rings.len();
    let bond_sets: Vec<Vec<usize>> = rings
        .iter()
        .map(|ring| {
            let n = ring.len();
            (0..n)
                .map(|i| mol.bond_between(ring[i], ring[(i + 1) % n]).unwrap())
                .collect()
        })
        .collect();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..k {
        for j in i + 1..k {
            if bond_sets[i].iter().any(|b| bond_sets[j].contains(b)) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..k {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{Atom, Bond, BondOrder, Element, Vec3};

    fn chain(n: usize) -> Molecule {
        let atoms = (0..n)
            .map(|i| Atom::new(Element::C, 0, Vec3::new(1.5 * i as f64, 0.0, 0.0)))
            .collect();
        let bonds = (0..n - 1)
            .map(|i| Bond {
                a: i,
                b: i + 1,
                order: BondOrder::Single,
            })
            .collect();
        Molecule::new("chain", atoms, bonds).unwrap()
    }

    fn cycle(n: usize) -> Molecule {
        let atoms = (0..n)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Atom::new(Element::C, 0, Vec3::new(th.cos(), th.sin(), 0.0) * 1.4)
            })
            .collect();
        let bonds = (0..n)
            .map(|i| Bond {
                a: i,
                b: (i + 1) % n,
                order: BondOrder::Single,
            })
            .collect();
        Molecule::new("cycle", atoms, bonds).unwrap()
    }

    #[test]
    fn butane_has_no_rings() {
        let info = perceive_rings(&chain(4));
        assert!(info.is_empty());
    }

    #[test]
    fn single_ring() {
        let info = perceive_rings(&cycle(6));
        assert_eq!(info.rings.len(), 1);
        assert_eq!(info.rings[0].len(), 6);
        assert_eq!(info.fused_components, vec![vec![0]]);
        assert_eq!(info.ring_bonds.len(), 6);
    }

    #[test]
    fn bicyclic_shares_bond() {
        // Two six-rings sharing the 0-1 bond (naphthalene skeleton).
        let mut atoms = Vec::new();
        for i in 0..10 {
            atoms.push(Atom::new(
                Element::C,
                0,
                Vec3::new(i as f64, (i % 2) as f64, 0.0),
            ));
        }
        let edges = [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 0),
            (1, 6),
            (6, 7),
            (7, 8),
            (8, 9),
            (9, 0),
        ];
        let bonds = edges
            .iter()
            .map(|&(a, b)| Bond {
                a,
                b,
                order: BondOrder::Single,
            })
            .collect();
        let mol = Molecule::new("bicycle", atoms, bonds).unwrap();
        let info = perceive_rings(&mol);
        assert_eq!(info.rings.len(), 2);
        assert!(info.rings.iter().all(|r| r.len() == 6));
        assert_eq!(info.fused_components.len(), 1);
        // Shared bond 0-1 is in both rings.
        assert_eq!(info.rings_with_bond(0, 1).len(), 2);
    }
}
