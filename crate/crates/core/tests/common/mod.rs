//! Shared test oracles, independent of the production implementations:
//! labeled-graph VF2 isomorphism, brute-force rotatable bonds, and a
//! brute-force complex graph.

#![allow(dead_code)]

use confrag::molgraph::{Molecule, Pocket, Vec3};

/// Labeled-graph isomorphism by exhaustive backtracking (VF2 style).
/// Atom labels are (element, charge, mark); bond labels are the order.
pub fn isomorphic_marked(
    a: &Molecule,
    b: &Molecule,
    marks_a: &[(usize, u8)],
    marks_b: &[(usize, u8)],
) -> bool {
    let na = a.atoms().len();
    let nb = b.atoms().len();
    if na != nb || a.bonds().len() != b.bonds().len() {
        return false;
    }
    let mark_vec = |marks: &[(usize, u8)], n: usize| {
        let mut v = vec![0u8; n];
        for &(i, m) in marks {
            v[i] = m;
        }
        v
    };
    let ma = mark_vec(marks_a, na);
    let mb = mark_vec(marks_b, nb);
    let label = |mol: &Molecule, marks: &[u8], i: usize| {
        (
            mol.atom(i).element,
            mol.atom(i).charge,
            marks[i],
            mol.neighbors(i).len(),
        )
    };

    let mut mapping = vec![usize::MAX; na];
    let mut used = vec![false; nb];

    fn extend(
        a: &Molecule,
        b: &Molecule,
        ma: &[u8],
        mb: &[u8],
        mapping: &mut Vec<usize>,
        used: &mut Vec<bool>,
        depth: usize,
    ) -> bool {
        let na = a.atoms().len();
        if depth == na {
            return true;
        }
        // Prefer a vertex adjacent to the mapped region for pruning.
        let next = (0..na)
            .filter(|&i| mapping[i] == usize::MAX)
            .max_by_key(|&i| {
                a.neighbors(i)
                    .iter()
                    .filter(|&&(j, _)| mapping[j] != usize::MAX)
                    .count()
            })
            .expect("unmapped vertex exists");
        for candidate in 0..b.atoms().len() {
            if used[candidate] {
                continue;
            }
            if a.atom(next).element != b.atom(candidate).element
                || a.atom(next).charge != b.atom(candidate).charge
                || ma[next] != mb[candidate]
                || a.neighbors(next).len() != b.neighbors(candidate).len()
            {
                continue;
            }
            // Edge consistency against already-mapped vertices.
            let mut ok = true;
            for &(j, bond_idx) in a.neighbors(next) {
                if mapping[j] == usize::MAX {
                    continue;
                }
                match b.bond_between(candidate, mapping[j]) {
                    Some(bb) => {
                        if b.bonds()[bb].order != a.bonds()[bond_idx].order {
                            ok = false;
                            break;
                        }
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            mapping[next] = candidate;
            used[candidate] = true;
            if extend(a, b, ma, mb, mapping, used, depth + 1) {
                return true;
            }
            mapping[next] = usize::MAX;
            used[candidate] = false;
        }
        false
    }

    // Quick label-multiset screen.
    let mut la: Vec<_> = (0..na).map(|i| label(a, &ma, i)).collect();
    let mut lb: Vec<_> = (0..nb).map(|i| label(b, &mb, i)).collect();
    la.sort_unstable();
    lb.sort_unstable();
    if la != lb {
        return false;
    }

    extend(a, b, &ma, &mb, &mut mapping, &mut used, 0)
}

pub fn isomorphic(a: &Molecule, b: &Molecule) -> bool {
    isomorphic_marked(a, b, &[], &[])
}

/// Literal Appendix-style rotatable-bond check: remove each single
/// non-ring bond, compute the two components, and require an off-axis
/// atom (> 0.1 Å from the bond line) on each side.
pub fn brute_force_rotatable(mol: &Molecule) -> Vec<usize> {
    let mut out = Vec::new();
    for (idx, bond) in mol.bonds().iter().enumerate() {
        if bond.order != confrag::molgraph::BondOrder::Single {
            continue;
        }
        let comp_a = component(mol, bond.a, idx);
        if comp_a.contains(&bond.b) {
            continue; // ring bond: removal does not disconnect
        }
        let comp_b = component(mol, bond.b, idx);
        let pa = mol.atom(bond.a).coord;
        let pb = mol.atom(bond.b).coord;
        if off_axis_exists(mol, &comp_a, pa, pb) && off_axis_exists(mol, &comp_b, pa, pb) {
            out.push(idx);
        }
    }
    out
}

fn component(mol: &Molecule, start: usize, skip: usize) -> Vec<usize> {
    let mut seen = vec![false; mol.atoms().len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut members = vec![start];
    while let Some(i) = stack.pop() {
        for &(j, b) in mol.neighbors(i) {
            if b != skip && !seen[j] {
                seen[j] = true;
                members.push(j);
                stack.push(j);
            }
        }
    }
    members
}

fn off_axis_exists(mol: &Molecule, members: &[usize], pa: Vec3, pb: Vec3) -> bool {
    let dir = (pb - pa).normalize();
    members
        .iter()
        .any(|&i| (mol.atom(i).coord - pa).cross(&dir).norm() > 0.1)
}

/// O(n²) double-loop reimplementation of the complex-graph edge sets.
pub struct BruteEdges {
    pub ll: Vec<(usize, usize)>,
    pub lp: Vec<(usize, usize)>,
    pub pl: Vec<(usize, usize)>,
    pub pp: Vec<(usize, usize)>,
}

pub fn brute_force_complex(ligand: &Molecule, pocket: &Pocket) -> BruteEdges {
    let mut edges = BruteEdges {
        ll: Vec::new(),
        lp: Vec::new(),
        pl: Vec::new(),
        pp: Vec::new(),
    };
    let nl = ligand.atoms().len();
    for i in 0..nl {
        for j in i + 1..nl {
            let d = (ligand.atom(i).coord - ligand.atom(j).coord).norm();
            if d <= 5.0 || ligand.bond_between(i, j).is_some() {
                edges.ll.push((i, j));
            }
        }
    }
    for i in 0..nl {
        for (j, p) in pocket.atoms().iter().enumerate() {
            if (ligand.atom(i).coord - p.coord).norm() <= 10.0 {
                edges.lp.push((i, j));
                edges.pl.push((j, i));
            }
        }
    }
    let np = pocket.atoms().len();
    for i in 0..np {
        for j in i + 1..np {
            if (pocket.atoms()[i].coord - pocket.atoms()[j].coord).norm() <= 15.0 {
                edges.pp.push((i, j));
            }
        }
    }
    edges
}

/// Random atom-order permutation of a molecule (labels and bonds follow).
pub fn permute_molecule(mol: &Molecule, perm: &[usize]) -> Molecule {
    let n = mol.atoms().len();
    assert_eq!(perm.len(), n);
    // perm[i] = new index of old atom i.
    let mut atoms = vec![None; n];
    for (old, &new) in perm.iter().enumerate() {
        atoms[new] = Some(mol.atom(old).clone());
    }
    let atoms: Vec<_> = atoms.into_iter().map(|a| a.unwrap()).collect();
    let bonds = mol
        .bonds()
        .iter()
        .map(|b| confrag::molgraph::Bond {
            a: perm[b.a],
            b: perm[b.b],
            order: b.order,
        })
        .collect();
    Molecule::new(mol.name(), atoms, bonds).expect("permutation preserves validity")
}

/// Deterministic pseudo-random permutations from a small LCG.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below(i + 1);
            perm.swap(i, j);
        }
        perm
    }
}
