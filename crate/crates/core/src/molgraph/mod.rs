//! Molecular and pocket data model.
//!
//! Molecules are connected heavy-atom graphs with one 3D conformation.
//! Hydrogens are implicit: they are stripped on parse and their count is
//! recovered from free valence. Aromatic bonds contribute 1.5 to valence
//! sums; Kekulé inputs are accepted as-is without aromatization.

mod canon;
mod pdb;
mod rings;
mod sdf;

pub use canon::{canonical_key, canonical_key_marked, canonical_ranks, CanonicalKey};
pub use pdb::parse_pocket_pdb;
pub use rings::{perceive_rings, RingInfo};
pub use sdf::{parse_sdf, write_sdf};

use crate::error::{Error, Result};

/// 3D coordinate in Å.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Heavy-atom element set, plus the `*` dummy placeholder used by
/// chain-like motifs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    B,
    C,
    N,
    O,
    F,
    P,
    S,
    Cl,
    Br,
    I,
    Dummy,
}

impl Element {
    pub fn from_symbol(sym: &str) -> Option<Element> {
        match sym {
            "B" => Some(Element::B),
            "C" => Some(Element::C),
            "N" => Some(Element::N),
            "O" => Some(Element::O),
            "F" => Some(Element::F),
            "P" => Some(Element::P),
            "S" => Some(Element::S),
            "Cl" => Some(Element::Cl),
            "Br" => Some(Element::Br),
            "I" => Some(Element::I),
            "*" => Some(Element::Dummy),
            _ => None,
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::P => "P",
            Element::S => "S",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
            Element::Dummy => "*",
        }
    }

    /// Standard atomic weight in Da. Dummies weigh nothing.
    pub fn weight(&self) -> f64 {
        match self {
            Element::B => 10.811,
            Element::C => 12.011,
            Element::N => 14.007,
            Element::O => 15.999,
            Element::F => 18.998,
            Element::P => 30.974,
            Element::S => 32.06,
            Element::Cl => 35.45,
            Element::Br => 79.904,
            Element::I => 126.904,
            Element::Dummy => 0.0,
        }
    }

    /// Maximum bond-order sum. Charge shifts N and O
    /// (N⁺ binds 4, O⁻ binds 1); other elements use their base value.
    pub fn max_valence(&self, charge: i8) -> f64 {
        let base = match self {
            Element::B => 3.0,
            Element::C => 4.0,
            Element::N => 3.0,
            Element::O => 2.0,
            Element::F | Element::Cl | Element::Br | Element::I => 1.0,
            Element::P => 5.0,
            Element::S => 6.0,
            Element::Dummy => 1.0,
        };
        match self {
            Element::N => (base + f64::from(charge)).clamp(0.0, 4.0),
            Element::O => (base + f64::from(charge)).clamp(0.0, 3.0),
            _ => base,
        }
    }

    pub fn is_dummy(&self) -> bool {
        matches!(self, Element::Dummy)
    }
}

/// Covalent bond order. Aromatic is its own label, counted 1.5 in
/// valence sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    pub fn valence_units(&self) -> f64 {
        match self {
            BondOrder::Single => 1.0,
            BondOrder::Double => 2.0,
            BondOrder::Triple => 3.0,
            BondOrder::Aromatic => 1.5,
        }
    }

    pub(crate) fn label(&self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            BondOrder::Single => "1",
            BondOrder::Double => "2",
            BondOrder::Triple => "3",
            BondOrder::Aromatic => "ar",
        }
    }

    pub fn from_code(code: &str) -> Option<BondOrder> {
        match code {
            "1" => Some(BondOrder::Single),
            "2" => Some(BondOrder::Double),
            "3" => Some(BondOrder::Triple),
            "ar" | "4" => Some(BondOrder::Aromatic),
            _ => None,
        }
    }
}

/// One heavy atom (or dummy placeholder) with its 3D position.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub element: Element,
    pub charge: i8,
    pub coord: Vec3,
}

impl Atom {
    pub fn new(element: Element, charge: i8, coord: Vec3) -> Atom {
        Atom {
            element,
            charge,
            coord,
        }
    }
}

/// Undirected bond between atom indices `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if atom == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Connected heavy-atom molecular graph plus one conformation.
///
/// Construction validates every structural invariant: distinct in-range
/// bond endpoints, no duplicate bonds, connectivity, finite coordinates,
/// and the valence cap for every atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    name: String,
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Molecule {
    pub fn new(name: impl Into<String>, atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Molecule> {
        let name = name.into();
        let n = atoms.len();
        if n == 0 {
            return Err(Error::InvalidMolecule {
                name,
                msg: "no atoms".into(),
            });
        }
        for atom in &atoms {
            if !atom.coord.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidMolecule {
                    name,
                    msg: "non-finite coordinate".into(),
                });
            }
        }
        let mut seen = std::collections::HashSet::new();
        for bond in &bonds {
            if bond.a >= n || bond.b >= n {
                return Err(Error::InvalidMolecule {
                    name,
                    msg: format!("bond index out of range: {}-{}", bond.a, bond.b),
                });
            }
            if bond.a == bond.b {
                return Err(Error::InvalidMolecule {
                    name,
                    msg: format!("self-bond on atom {}", bond.a),
                });
            }
            let key = (bond.a.min(bond.b), bond.a.max(bond.b));
            if !seen.insert(key) {
                return Err(Error::InvalidMolecule {
                    name,
                    msg: format!("duplicate bond {}-{}", key.0, key.1),
                });
            }
        }
        let adjacency = build_adjacency(n, &bonds);
        let mol = Molecule {
            name,
            atoms,
            bonds,
            adjacency,
        };
        if !mol.is_connected() {
            return Err(Error::InvalidMolecule {
                name: mol.name,
                msg: "graph is not connected".into(),
            });
        }
        mol.check_valences()?;
        Ok(mol)
    }

    fn check_valences(&self) -> Result<()> {
        for i in 0..self.atoms.len() {
            let sum = self.bond_order_sum(i);
            let max = self.atoms[i].element.max_valence(self.atoms[i].charge);
            if sum > max + 1e-9 {
                return Err(Error::InvalidMolecule {
                    name: self.name.clone(),
                    msg: format!(
                        "valence exceeded on atom {} ({}): bond-order sum {} > {}",
                        i,
                        self.atoms[i].element.symbol(),
                        sum,
                        max
                    ),
                });
            }
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.atoms.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &(j, _) in &self.adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == self.atoms.len()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    /// Neighbor atoms of `i` as `(atom index, bond index)` pairs.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|&&(j, _)| j == b)
            .map(|&(_, idx)| idx)
    }

    /// Sum of bond valence units incident to atom `i`.
    pub fn bond_order_sum(&self, i: usize) -> f64 {
        self.adjacency[i]
            .iter()
            .map(|&(_, b)| self.bonds[b].order.valence_units())
            .sum()
    }

    /// Remaining bonding capacity of atom `i`, floored at zero.
    ///
    /// This doubles as the implicit hydrogen count.
    pub fn free_valence(&self, i: usize) -> u32 {
        let atom = &self.atoms[i];
        let max = atom.element.max_valence(atom.charge);
        let free = max - self.bond_order_sum(i);
        free.max(0.0).floor() as u32
    }

    /// Heavy-atom weight plus implicit hydrogens, in Da.
    pub fn molecular_weight(&self) -> f64 {
        let mut total = 0.0;
        for (i, atom) in self.atoms.iter().enumerate() {
            if atom.element.is_dummy() {
                continue;
            }
            total += atom.element.weight();
            total += f64::from(self.free_valence(i)) * 1.008;
        }
        total
    }

    pub fn has_dummies(&self) -> bool {
        self.atoms.iter().any(|a| a.element.is_dummy())
    }

    pub fn dummy_indices(&self) -> Vec<usize> {
        (0..self.atoms.len())
            .filter(|&i| self.atoms[i].element.is_dummy())
            .collect()
    }

    pub fn coords(&self) -> Vec<Vec3> {
        self.atoms.iter().map(|a| a.coord).collect()
    }

    /// Replace the conformation. Atom count must match.
    pub fn set_coords(&mut self, coords: &[Vec3]) -> Result<()> {
        if coords.len() != self.atoms.len() {
            return Err(Error::Geometry(format!(
                "coordinate count {} does not match atom count {}",
                coords.len(),
                self.atoms.len()
            )));
        }
        for (atom, c) in self.atoms.iter_mut().zip(coords) {
            atom.coord = *c;
        }
        Ok(())
    }

    pub fn centroid(&self) -> Vec3 {
        let mut sum = Vec3::zeros();
        for atom in &self.atoms {
            sum += atom.coord;
        }
        sum / self.atoms.len() as f64
    }

    /// Same element sequence, charges and bond list (order-sensitive).
    ///
    /// Stricter than isomorphism: used to pair externally optimized
    /// conformers with their source records.
    pub fn same_graph(&self, other: &Molecule) -> bool {
        self.atoms.len() == other.atoms.len()
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|(a, b)| a.element == b.element && a.charge == b.charge)
            && self.bonds.len() == other.bonds.len()
            && {
                let key = |b: &Bond| (b.a.min(b.b), b.a.max(b.b), b.order);
                let mut x: Vec<_> = self.bonds.iter().map(key).collect();
                let mut y: Vec<_> = other.bonds.iter().map(key).collect();
                x.sort_unstable();
                y.sort_unstable();
                x == y
            }
    }
}

pub(crate) fn build_adjacency(n: usize, bonds: &[Bond]) -> Vec<Vec<(usize, usize)>> {
    let mut adjacency = vec![Vec::new(); n];
    for (idx, bond) in bonds.iter().enumerate() {
        adjacency[bond.a].push((bond.b, idx));
        adjacency[bond.b].push((bond.a, idx));
    }
    adjacency
}

/// One pocket heavy atom. The element is kept as a plain symbol: pockets
/// never enter valence bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PocketAtom {
    pub element: String,
    pub coord: Vec3,
    pub residue_name: String,
    pub residue_seq: i32,
    pub chain_id: char,
    pub is_backbone: bool,
}

/// Protein pocket: heavy atoms with residue metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Pocket {
    atoms: Vec<PocketAtom>,
}

impl Pocket {
    pub fn new(atoms: Vec<PocketAtom>) -> Result<Pocket> {
        if atoms.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "pocket has no atoms".into(),
            });
        }
        for atom in &atoms {
            if !atom.coord.iter().all(|c| c.is_finite()) {
                return Err(Error::Parse {
                    line: 0,
                    msg: "non-finite pocket coordinate".into(),
                });
            }
        }
        Ok(Pocket { atoms })
    }

    pub fn atoms(&self) -> &[PocketAtom] {
        &self.atoms
    }

    pub fn centroid(&self) -> Vec3 {
        let mut sum = Vec3::zeros();
        for atom in &self.atoms {
            sum += atom.coord;
        }
        sum / self.atoms.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn methane() -> Molecule {
        Molecule::new(
            "methane",
            vec![Atom::new(Element::C, 0, Vec3::zeros())],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn isolated_carbon_free_valence() {
        let m = methane();
        assert_eq!(m.free_valence(0), 4);
        assert!((m.molecular_weight() - 16.04).abs() < 0.01);
    }

    #[test]
    fn isolated_nitrogen_weight() {
        let m = Molecule::new(
            "ammonia",
            vec![Atom::new(Element::N, 0, Vec3::zeros())],
            vec![],
        )
        .unwrap();
        assert!((m.molecular_weight() - 17.03).abs() < 0.01);
    }

    #[test]
    fn duplicate_bond_rejected() {
        let atoms = vec![
            Atom::new(Element::C, 0, Vec3::zeros()),
            Atom::new(Element::C, 0, Vec3::new(1.5, 0.0, 0.0)),
        ];
        let bonds = vec![
            Bond {
                a: 0,
                b: 1,
                order: BondOrder::Single,
            },
            Bond {
                a: 1,
                b: 0,
                order: BondOrder::Single,
            },
        ];
        assert!(Molecule::new("x", atoms, bonds).is_err());
    }

    #[test]
    fn valence_violation_names_atom() {
        let atoms = vec![
            Atom::new(Element::O, 0, Vec3::zeros()),
            Atom::new(Element::C, 0, Vec3::new(1.2, 0.0, 0.0)),
        ];
        let bonds = vec![Bond {
            a: 0,
            b: 1,
            order: BondOrder::Triple,
        }];
        let err = Molecule::new("bad", atoms, bonds).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("atom 0"), "got: {msg}");
    }

    #[test]
    fn disconnected_rejected() {
        let atoms = vec![
            Atom::new(Element::C, 0, Vec3::zeros()),
            Atom::new(Element::C, 0, Vec3::new(5.0, 0.0, 0.0)),
        ];
        assert!(Molecule::new("x", atoms, vec![]).is_err());
    }

    #[test]
    fn charged_valences() {
        // N⁺ supports four bonds, O⁻ only one.
        assert_eq!(Element::N.max_valence(1), 4.0);
        assert_eq!(Element::O.max_valence(-1), 1.0);
        assert_eq!(Element::S.max_valence(0), 6.0);
    }
}
