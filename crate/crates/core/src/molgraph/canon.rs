//! Canonical labeling of small labeled graphs.
//!
//! Iterative color refinement with individualization on ties: refine the
//! vertex partition by (color, sorted neighbor signatures) until stable;
//! when cells remain, branch on each vertex of the first non-singleton
//! cell and take the lexicographically smallest leaf certificate. The
//! certificate is invariant under vertex permutation, so two labeled
//! graphs compare equal exactly when they are isomorphic under atom
//! labels (element, charge, mark) and bond labels (order).
//!
//! Vertex marks let callers distinguish otherwise-identical atoms; the
//! connection-site equivalence test runs on marked copies of a motif.

use super::Molecule;

/// Opaque permutation-invariant fingerprint of a labeled graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(hex: &str) -> Option<CanonicalKey> {
        if hex.len() % 2 != 0 {
            return None;
        }
        let mut bytes = Vec::with_capacity(hex.len() / 2);
        for i in (0..hex.len()).step_by(2) {
            bytes.push(u8::from_str_radix(&hex[i..i + 2], 16).ok()?);
        }
        Some(CanonicalKey(bytes))
    }
}

/// Canonical key of a molecule under (element, charge) atom labels and
/// bond-order labels.
pub fn canonical_key(mol: &Molecule) -> CanonicalKey {
    canonical_key_marked(mol, &[])
}

/// Canonical key with extra per-atom marks folded into the atom labels.
/// `marks` holds `(atom index, mark)` pairs; unlisted atoms carry mark 0.
pub fn canonical_key_marked(mol: &Molecule, marks: &[(usize, u8)]) -> CanonicalKey {
    let graph = LabeledGraph::from_molecule(mol, marks);
    CanonicalKey(graph.canonical().certificate)
}

/// Position of every atom in the canonical vertex order.
///
/// Ranks are stable across runs; for symmetric graphs the assignment is
/// determined up to graph automorphism, which is as stable as any
/// ordering of interchangeable atoms can be.
pub fn canonical_ranks(mol: &Molecule) -> Vec<usize> {
    let graph = LabeledGraph::from_molecule(mol, &[]);
    graph.canonical().ranks
}

struct LabeledGraph {
    /// Per-vertex label bytes: (element tag, charge byte, mark).
    labels: Vec<[u8; 3]>,
    /// Adjacency as (neighbor, bond label).
    adj: Vec<Vec<(usize, u8)>>,
    edges: Vec<(usize, usize, u8)>,
}

struct CanonicalForm {
    certificate: Vec<u8>,
    ranks: Vec<usize>,
}

impl LabeledGraph {
    fn from_molecule(mol: &Molecule, marks: &[(usize, u8)]) -> LabeledGraph {
        let n = mol.atoms().len();
        let mut mark_of = vec![0u8; n];
        for &(i, m) in marks {
            mark_of[i] = m;
        }
        let labels = mol
            .atoms()
            .iter()
            .enumerate()
            .map(|(i, a)| [element_tag(a.element), a.charge as u8, mark_of[i]])
            .collect();
        let mut adj = vec![Vec::new(); n];
        let mut edges = Vec::new();
        for bond in mol.bonds() {
            adj[bond.a].push((bond.b, bond.order.label()));
            adj[bond.b].push((bond.a, bond.order.label()));
            edges.push((bond.a.min(bond.b), bond.a.max(bond.b), bond.order.label()));
        }
        LabeledGraph { labels, adj, edges }
    }

    fn canonical(&self) -> CanonicalForm {
        let n = self.labels.len();
        // Initial colors from sorted distinct labels, so the coloring is
        // independent of input vertex order.
        let mut distinct: Vec<[u8; 3]> = self.labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let colors: Vec<usize> = self
            .labels
            .iter()
            .map(|l| distinct.binary_search(l).unwrap())
            .collect();

        let mut best: Option<(Vec<u8>, Vec<usize>)> = None;
        self.search(colors, &mut best);
        let (certificate, ranks) = best.expect("at least one leaf");
        let _ = n;
        CanonicalForm { certificate, ranks }
    }

    fn search(&self, mut colors: Vec<usize>, best: &mut Option<(Vec<u8>, Vec<usize>)>) {
        self.refine(&mut colors);
        match first_non_singleton_cell(&colors) {
            None => {
                let (cert, ranks) = self.certificate(&colors);
                if best.as_ref().is_none_or(|(b, _)| cert < *b) {
                    *best = Some((cert, ranks));
                }
            }
            Some(cell) => {
                for &v in &cell {
                    let mut branched = colors.clone();
                    // Individualize: every color c becomes 2c+1 and the
                    // chosen vertex drops to 2c, placing it alone in a
                    // cell just below its former cell mates.
                    for c in branched.iter_mut() {
                        *c = *c * 2 + 1;
                    }
                    branched[v] -= 1;
                    self.search(branched, best);
                }
            }
        }
    }

    /// 1-WL refinement with bond labels until the partition is stable.
    fn refine(&self, colors: &mut Vec<usize>) {
        loop {
            let mut signatures: Vec<(usize, Vec<(u8, usize)>)> = (0..colors.len())
                .map(|v| {
                    let mut neigh: Vec<(u8, usize)> = self.adj[v]
                        .iter()
                        .map(|&(w, label)| (label, colors[w]))
                        .collect();
                    neigh.sort_unstable();
                    (colors[v], neigh)
                })
                .collect();
            let mut sorted = signatures.clone();
            sorted.sort_unstable();
            sorted.dedup();
            let next: Vec<usize> = signatures
                .drain(..)
                .map(|sig| sorted.binary_search(&sig).unwrap())
                .collect();
            if next == *colors {
                return;
            }
            *colors = next;
        }
    }

    fn certificate(&self, colors: &[usize]) -> (Vec<u8>, Vec<usize>) {
        let n = colors.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| colors[v]);
        let mut ranks = vec![0usize; n];
        for (rank, &v) in order.iter().enumerate() {
            ranks[v] = rank;
        }
        let mut cert = Vec::with_capacity(3 * n + 5 * self.edges.len() + 4);
        cert.extend_from_slice(&(n as u16).to_be_bytes());
        for &v in &order {
            cert.extend_from_slice(&self.labels[v]);
        }
        let mut edges: Vec<(usize, usize, u8)> = self
            .edges
            .iter()
            .map(|&(a, b, l)| {
                let (ra, rb) = (ranks[a], ranks[b]);
                (ra.min(rb), ra.max(rb), l)
            })
            .collect();
        edges.sort_unstable();
        cert.extend_from_slice(&(edges.len() as u16).to_be_bytes());
        for (a, b, l) in edges {
            cert.extend_from_slice(&(a as u16).to_be_bytes());
            cert.extend_from_slice(&(b as u16).to_be_bytes());
            cert.push(l);
        }
        (cert, ranks)
    }
}

fn element_tag(e: super::Element) -> u8 {
    use super::Element::*;
    match e {
        B => 1,
        C => 2,
        N => 3,
        O => 4,
        F => 5,
        P => 6,
        S => 7,
        Cl => 8,
        Br => 9,
        I => 10,
        Dummy => 11,
    }
}

fn first_non_singleton_cell(colors: &[usize]) -> Option<Vec<usize>> {
    let max = *colors.iter().max()?;
    for color in 0..=max {
        let cell: Vec<usize> = (0..colors.len()).filter(|&v| colors[v] == color).collect();
        if cell.len() > 1 {
            return Some(cell);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{Atom, Bond, BondOrder, Element, Vec3};

    fn ring(elements: &[Element], order: BondOrder) -> Molecule {
        let n = elements.len();
        let atoms = elements
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Atom::new(e, 0, Vec3::new(th.cos(), th.sin(), 0.0) * 1.39)
            })
            .collect();
        let bonds = (0..n)
            .map(|i| Bond {
                a: i,
                b: (i + 1) % n,
                order,
            })
            .collect();
        Molecule::new("ring", atoms, bonds).unwrap()
    }

    #[test]
    fn permutation_invariance() {
        let benzene = ring(&[Element::C; 6], BondOrder::Aromatic);
        // Rebuild with a rotated atom order.
        let atoms: Vec<Atom> = (0..6).map(|i| benzene.atom((i + 2) % 6).clone()).collect();
        let bonds: Vec<Bond> = benzene
            .bonds()
            .iter()
            .map(|b| Bond {
                a: (b.a + 4) % 6,
                b: (b.b + 4) % 6,
                order: b.order,
            })
            .collect();
        let rotated = Molecule::new("rot", atoms, bonds).unwrap();
        assert_eq!(canonical_key(&benzene), canonical_key(&rotated));
    }

    #[test]
    fn different_labels_differ() {
        let benzene = ring(&[Element::C; 6], BondOrder::Aromatic);
        let pyridine = ring(
            &[
                Element::N,
                Element::C,
                Element::C,
                Element::C,
                Element::C,
                Element::C,
            ],
            BondOrder::Aromatic,
        );
        assert_ne!(canonical_key(&benzene), canonical_key(&pyridine));
    }

    #[test]
    fn marks_split_symmetry() {
        let benzene = ring(&[Element::C; 6], BondOrder::Aromatic);
        // All atoms are equivalent: marking any single one gives one key.
        let k0 = canonical_key_marked(&benzene, &[(0, 1)]);
        let k3 = canonical_key_marked(&benzene, &[(3, 1)]);
        assert_eq!(k0, k3);
        // Ortho vs para mark pairs are different graphs.
        let ortho = canonical_key_marked(&benzene, &[(0, 1), (1, 2)]);
        let para = canonical_key_marked(&benzene, &[(0, 1), (3, 2)]);
        assert_ne!(ortho, para);
    }

    #[test]
    fn hex_round_trip() {
        let benzene = ring(&[Element::C; 6], BondOrder::Aromatic);
        let key = canonical_key(&benzene);
        assert_eq!(CanonicalKey::from_hex(&key.to_hex()).unwrap(), key);
    }

    #[test]
    fn ranks_are_a_permutation() {
        let pyridine = ring(
            &[
                Element::N,
                Element::C,
                Element::C,
                Element::C,
                Element::C,
                Element::C,
            ],
            BondOrder::Aromatic,
        );
        let mut ranks = canonical_ranks(&pyridine);
        ranks.sort_unstable();
        assert_eq!(ranks, (0..6).collect::<Vec<_>>());
    }
}
