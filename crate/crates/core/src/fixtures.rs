//! Deterministic molecule and pocket builders for tests and benches
//! (enabled by the `fixtures` feature).
//!
//! Geometry is ideal: single bonds use the attachment table lengths,
//! sp3 centers use tetrahedral angles, rings are regular polygons. The
//! reattachment path synthesizes new bonds at the table lengths, so
//! fixtures built this way round-trip through fragmentation exactly.

use std::f64::consts::TAU;

use crate::molgraph::{Atom, Bond, BondOrder, Element, Molecule, Pocket, PocketAtom, Vec3};
use crate::motif::{Motif, MotifKind};

pub const CC: f64 = 1.51;
pub const CN: f64 = 1.47;
pub const CO: f64 = 1.43;
pub const CS: f64 = 1.81;
pub const AROMATIC: f64 = 1.39;
pub const TETRAHEDRAL: f64 = 109.4712206344907;

/// Incremental molecule builder with internal-coordinate placement.
#[derive(Default)]
pub struct MolBuilder {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
}

impl MolBuilder {
    pub fn new() -> MolBuilder {
        MolBuilder::default()
    }

    pub fn atom_at(&mut self, element: Element, coord: Vec3) -> usize {
        self.atoms.push(Atom::new(element, 0, coord));
        self.atoms.len() - 1
    }

    pub fn charged_atom_at(&mut self, element: Element, charge: i8, coord: Vec3) -> usize {
        self.atoms.push(Atom::new(element, charge, coord));
        self.atoms.len() - 1
    }

    pub fn bond(&mut self, a: usize, b: usize, order: BondOrder) {
        self.bonds.push(Bond { a, b, order });
    }

    /// Place a new atom bonded to `a` using internal coordinates: bond
    /// length to `a`, angle at `a` against `b`, and dihedral against
    /// `c` (degrees).
    #[allow(clippy::too_many_arguments)]
    pub fn extend(
        &mut self,
        element: Element,
        a: usize,
        b: usize,
        c: usize,
        length: f64,
        angle_deg: f64,
        dihedral_deg: f64,
        order: BondOrder,
    ) -> usize {
        let coord = place_atom(
            self.atoms[a].coord,
            self.atoms[b].coord,
            self.atoms[c].coord,
            length,
            angle_deg.to_radians(),
            dihedral_deg.to_radians(),
        );
        let idx = self.atom_at(element, coord);
        self.bond(a, idx, order);
        idx
    }

    pub fn coord(&self, i: usize) -> Vec3 {
        self.atoms[i].coord
    }

    pub fn set_coord(&mut self, i: usize, coord: Vec3) {
        self.atoms[i].coord = coord;
    }

    pub fn build(self, name: &str) -> Molecule {
        Molecule::new(name, self.atoms, self.bonds).expect("fixture must be valid")
    }
}

/// Position D with |D-A| = r, angle(D,A,B) = theta, and
/// dihedral(D, A, B, C) = phi.
pub fn place_atom(a: Vec3, b: Vec3, c: Vec3, r: f64, theta: f64, phi: f64) -> Vec3 {
    let u = (b - a).normalize();
    let cb = c - b;
    let perp = cb - u * cb.dot(&u);
    let t = if perp.norm() > 1e-9 {
        perp.normalize()
    } else {
        fallback_perpendicular(u)
    };
    let w = t.cross(&u);
    let dir = u * theta.cos() + (t * phi.cos() + w * phi.sin()) * theta.sin();
    a + dir * r
}

fn fallback_perpendicular(u: Vec3) -> Vec3 {
    let trial = if u.x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    u.cross(&trial).normalize()
}

fn regular_ring(
    builder: &mut MolBuilder,
    elements: &[Element],
    side: f64,
    center: Vec3,
) -> Vec<usize> {
    let n = elements.len();
    let circum = side / (2.0 * (std::f64::consts::PI / n as f64).sin());
    elements
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let th = TAU * i as f64 / n as f64;
            builder.atom_at(e, center + Vec3::new(th.cos(), th.sin(), 0.0) * circum)
        })
        .collect()
}

/// Aromatic benzene (six aromatic bonds).
pub fn benzene() -> Molecule {
    let mut b = MolBuilder::new();
    let ring = regular_ring(&mut b, &[Element::C; 6], AROMATIC, Vec3::zeros());
    for i in 0..6 {
        b.bond(ring[i], ring[(i + 1) % 6], BondOrder::Aromatic);
    }
    b.build("benzene")
}

/// Kekulé benzene (alternating single/double bonds).
pub fn benzene_kekule() -> Molecule {
    let mut b = MolBuilder::new();
    let ring = regular_ring(&mut b, &[Element::C; 6], AROMATIC, Vec3::zeros());
    for i in 0..6 {
        let order = if i % 2 == 0 {
            BondOrder::Double
        } else {
            BondOrder::Single
        };
        b.bond(ring[i], ring[(i + 1) % 6], order);
    }
    b.build("benzene-kekule")
}

/// Aromatic pyridine (N at position 0).
pub fn pyridine() -> Molecule {
    let mut b = MolBuilder::new();
    let elements = [
        Element::N,
        Element::C,
        Element::C,
        Element::C,
        Element::C,
        Element::C,
    ];
    let ring = regular_ring(&mut b, &elements, AROMATIC, Vec3::zeros());
    for i in 0..6 {
        b.bond(ring[i], ring[(i + 1) % 6], BondOrder::Aromatic);
    }
    b.build("pyridine")
}

/// Hexafluorobenzene: every ring carbon fully substituted.
pub fn hexafluorobenzene() -> Molecule {
    let mut b = MolBuilder::new();
    let ring = regular_ring(&mut b, &[Element::C; 6], AROMATIC, Vec3::zeros());
    for i in 0..6 {
        b.bond(ring[i], ring[(i + 1) % 6], BondOrder::Aromatic);
    }
    for i in 0..6 {
        let th = TAU * i as f64 / 6.0;
        let outward = Vec3::new(th.cos(), th.sin(), 0.0);
        let f = b.atom_at(Element::F, b.coord(ring[i]) + outward * 1.34);
        b.bond(ring[i], f, BondOrder::Single);
    }
    b.build("hexafluorobenzene")
}

fn table_length(a: Element, b: Element) -> f64 {
    crate::assemble::bond_length_lookup(a, b)
}

/// Linear heavy-atom chain with tetrahedral angles. `dihedrals[i]` sets
/// the torsion of atom i+3 about the (i+1, i+2) bond; bond lengths come
/// from the standard table.
pub fn chain(name: &str, elements: &[Element], dihedrals: &[f64]) -> Molecule {
    assert!(elements.len() >= 2);
    let mut b = MolBuilder::new();
    let first = b.atom_at(elements[0], Vec3::zeros());
    let second = b.atom_at(
        elements[1],
        Vec3::new(table_length(elements[0], elements[1]), 0.0, 0.0),
    );
    b.bond(first, second, BondOrder::Single);
    let mut chain_atoms = vec![first, second];
    for (k, &element) in elements.iter().enumerate().skip(2) {
        let length = table_length(elements[k - 1], element);
        let prev = chain_atoms[k - 1];
        let prev2 = chain_atoms[k - 2];
        let idx = if k == 2 {
            let coord = place_atom(
                b.coord(prev),
                b.coord(prev2),
                b.coord(prev2) + Vec3::new(0.0, 0.0, 1.0),
                length,
                TETRAHEDRAL.to_radians(),
                90_f64.to_radians(),
            );
            let idx = b.atom_at(element, coord);
            b.bond(prev, idx, BondOrder::Single);
            idx
        } else {
            let prev3 = chain_atoms[k - 3];
            let phi = dihedrals.get(k - 3).copied().unwrap_or(180.0);
            b.extend(
                element,
                prev,
                prev2,
                prev3,
                length,
                TETRAHEDRAL,
                phi,
                BondOrder::Single,
            )
        };
        chain_atoms.push(idx);
    }
    b.build(name)
}

pub fn propane() -> Molecule {
    chain("propane", &[Element::C; 3], &[])
}

pub fn butane_anti() -> Molecule {
    chain("butane-anti", &[Element::C; 4], &[180.0])
}

pub fn butane_gauche() -> Molecule {
    chain("butane-gauche", &[Element::C; 4], &[60.0])
}

pub fn pentane() -> Molecule {
    chain("pentane", &[Element::C; 5], &[180.0, 180.0])
}

/// Acetone: CH3-C(=O)-CH3, sp2 carbonyl.
pub fn acetone() -> Molecule {
    let mut b = MolBuilder::new();
    let c2 = b.atom_at(Element::C, Vec3::zeros());
    let c1 = b.atom_at(Element::C, Vec3::new(CC, 0.0, 0.0));
    b.bond(c2, c1, BondOrder::Single);
    let c3 = b.extend(Element::C, c2, c1, c1, CC, 120.0, 0.0, BondOrder::Single);
    let o_pos = place_atom(
        b.coord(c2),
        b.coord(c1),
        b.coord(c3),
        1.23,
        120.0_f64.to_radians(),
        std::f64::consts::PI,
    );
    let o = b.atom_at(Element::O, o_pos);
    b.bond(c2, o, BondOrder::Double);
    b.build("acetone")
}

/// Benzene ring with one substituent chain attached along the ring
/// bisector at the table bond length; chain torsions are configurable.
pub fn substituted_benzene(name: &str, chain_elements: &[Element], dihedrals: &[f64]) -> Molecule {
    let mut b = MolBuilder::new();
    let ring = regular_ring(&mut b, &[Element::C; 6], AROMATIC, Vec3::zeros());
    for i in 0..6 {
        b.bond(ring[i], ring[(i + 1) % 6], BondOrder::Aromatic);
    }
    if chain_elements.is_empty() {
        return b.build(name);
    }
    let anchor = ring[0];
    let outward = b.coord(anchor).normalize();
    let first = b.atom_at(
        chain_elements[0],
        b.coord(anchor) + outward * table_length(Element::C, chain_elements[0]),
    );
    b.bond(anchor, first, BondOrder::Single);
    let mut grown = vec![ring[1], anchor, first];
    for (k, &element) in chain_elements.iter().enumerate().skip(1) {
        let len = grown.len();
        let phi = dihedrals.get(k - 1).copied().unwrap_or(180.0);
        let idx = b.extend(
            element,
            grown[len - 1],
            grown[len - 2],
            grown[len - 3],
            table_length(chain_elements[k - 1], element),
            TETRAHEDRAL,
            phi,
            BondOrder::Single,
        );
        grown.push(idx);
    }
    b.build(name)
}

pub fn toluene() -> Molecule {
    substituted_benzene("toluene", &[Element::C], &[])
}

pub fn ethylbenzene() -> Molecule {
    substituted_benzene("ethylbenzene", &[Element::C, Element::C], &[75.0])
}

pub fn propylbenzene() -> Molecule {
    substituted_benzene("propylbenzene", &[Element::C; 3], &[75.0, 180.0])
}

/// Two benzene rings joined by a rotatable single bond, twisted by the
/// given dihedral.
pub fn biphenyl(twist_deg: f64) -> Molecule {
    let mut b = MolBuilder::new();
    let ring_a = regular_ring(&mut b, &[Element::C; 6], AROMATIC, Vec3::zeros());
    for i in 0..6 {
        b.bond(ring_a[i], ring_a[(i + 1) % 6], BondOrder::Aromatic);
    }
    let anchor = ring_a[0];
    let outward = b.coord(anchor).normalize();
    let center_b = b.coord(anchor) + outward * (CC + AROMATIC / (2.0 * (std::f64::consts::PI / 6.0).sin()));
    let ring_b = regular_ring(&mut b, &[Element::C; 6], AROMATIC, center_b);
    for i in 0..6 {
        b.bond(ring_b[i], ring_b[(i + 1) % 6], BondOrder::Aromatic);
    }
    // ring_b[3] is the vertex facing ring A along -x from center_b.
    let far = ring_b[3];
    b.bond(anchor, far, BondOrder::Single);
    let mut mol = b.build("biphenyl");
    if twist_deg != 0.0 {
        let moving: Vec<usize> = ring_b.iter().copied().filter(|&i| i != far).collect();
        let coords = crate::geom3d::rotate_about_bond(
            &mol.coords(),
            &moving,
            (anchor, far),
            twist_deg.to_radians(),
        )
        .expect("valid axis");
        mol.set_coords(&coords).expect("same atom count");
    }
    mol
}

/// Planar naphthalene in a valence-correct Kekulé form (the shared bond
/// is double).
pub fn naphthalene() -> Molecule {
    fused_bicyclic("naphthalene", 6)
}

/// Planar 6-5 all-carbon fused system (indene-like skeleton).
pub fn fused_six_five() -> Molecule {
    fused_bicyclic("fused-6-5", 5)
}

fn fused_bicyclic(name: &str, second_ring: usize) -> Molecule {
    let mut b = MolBuilder::new();
    let side = AROMATIC;
    let circum6 = side / (2.0 * (std::f64::consts::PI / 6.0).sin());
    // Hexagon rotated so its right edge is vertical.
    let hexagon: Vec<usize> = (0..6)
        .map(|i| {
            let th = TAU * (i as f64 + 0.5) / 6.0;
            b.atom_at(Element::C, Vec3::new(th.cos(), th.sin(), 0.0) * circum6)
        })
        .collect();
    let (top, bottom) = (hexagon[0], hexagon[5]);
    let mid = (b.coord(top) + b.coord(bottom)) * 0.5;
    let k = second_ring;
    let circum_k = side / (2.0 * (std::f64::consts::PI / k as f64).sin());
    let apothem_k = circum_k * (std::f64::consts::PI / k as f64).cos();
    let center_k = Vec3::new(mid.x + apothem_k, 0.0, 0.0);
    // Second-ring vertices other than the two shared ones, walking from
    // the top shared vertex around the far side.
    let top_angle = (b.coord(top) - center_k).y.atan2((b.coord(top) - center_k).x);
    let others: Vec<usize> = (1..k - 1)
        .map(|i| {
            let th = top_angle - TAU * i as f64 / k as f64;
            b.atom_at(
                Element::C,
                center_k + Vec3::new(th.cos(), th.sin(), 0.0) * circum_k,
            )
        })
        .collect();

    // Kekulé orders: shared bond double, alternating outward on both
    // cycles. Odd cycles end on two adjacent singles, which stays
    // valence-correct.
    b.bond(top, bottom, BondOrder::Double);
    let kekule_path = |b: &mut MolBuilder, path: &[usize]| {
        let last = path.len() - 2;
        for (i, pair) in path.windows(2).enumerate() {
            // Alternate outward from the shared double bond; the final
            // bond back into a bridgehead stays single.
            let order = if i % 2 == 1 && i != last {
                BondOrder::Double
            } else {
                BondOrder::Single
            };
            b.bond(pair[0], pair[1], order);
        }
    };
    let mut cycle_a = vec![bottom];
    cycle_a.extend(hexagon[1..5].iter().rev().copied());
    cycle_a.push(top);
    kekule_path(&mut b, &cycle_a);
    let mut cycle_b = vec![top];
    cycle_b.extend(others.iter().copied());
    cycle_b.push(bottom);
    kekule_path(&mut b, &cycle_b);
    b.build(name)
}

/// Chain motif `*-CH3`: one carbon with a dummy placeholder.
pub fn methyl_motif() -> Motif {
    let mut b = MolBuilder::new();
    let c = b.atom_at(Element::C, Vec3::zeros());
    let d = b.atom_at(Element::Dummy, Vec3::new(CC, 0.0, 0.0));
    b.bond(c, d, BondOrder::Single);
    Motif::new(b.build("methyl"), MotifKind::ChainLike).expect("valid motif")
}

/// Chain motif `*-CH2-CH3`.
pub fn ethyl_motif() -> Motif {
    let mut b = MolBuilder::new();
    let c1 = b.atom_at(Element::C, Vec3::zeros());
    let d = b.atom_at(Element::Dummy, Vec3::new(CC, 0.0, 0.0));
    let c2_pos = place_atom(
        Vec3::zeros(),
        Vec3::new(CC, 0.0, 0.0),
        Vec3::new(CC + 1.0, 1.0, 0.0),
        CC,
        TETRAHEDRAL.to_radians(),
        0.0,
    );
    let c2 = b.atom_at(Element::C, c2_pos);
    b.bond(c1, d, BondOrder::Single);
    b.bond(c1, c2, BondOrder::Single);
    Motif::new(b.build("ethyl"), MotifKind::ChainLike).expect("valid motif")
}

pub fn benzene_motif() -> Motif {
    Motif::new(benzene(), MotifKind::RingLike).expect("valid motif")
}

pub fn benzene_kekule_motif() -> Motif {
    Motif::new(benzene_kekule(), MotifKind::RingLike).expect("valid motif")
}

pub fn pyridine_motif() -> Motif {
    Motif::new(pyridine(), MotifKind::RingLike).expect("valid motif")
}

/// Deterministic 50-molecule corpus with ideal geometry. Rotatable
/// bonds sit exactly at the table lengths, fused systems are planar.
pub fn corpus() -> Vec<Molecule> {
    let mut out: Vec<Molecule> = vec![
        benzene(),
        benzene_kekule(),
        pyridine(),
        hexafluorobenzene(),
        propane(),
        butane_anti(),
        butane_gauche(),
        pentane(),
        acetone(),
        toluene(),
        ethylbenzene(),
        propylbenzene(),
        biphenyl(45.0),
        biphenyl(70.0),
        naphthalene(),
        fused_six_five(),
    ];

    use Element::{C, N, O, S};
    let hetero_chains: [(&str, &[Element]); 10] = [
        ("aminoethanol", &[N, C, C, O]),
        ("propanol", &[C, C, C, O]),
        ("butanol", &[C, C, C, C, O]),
        ("propylamine", &[C, C, C, N]),
        ("methylthio-propane", &[C, S, C, C]),
        ("propanediamine", &[N, C, C, C, N]),
        ("propanediol", &[O, C, C, C, O]),
        ("mercaptoethanol", &[S, C, C, O]),
        ("pentanol", &[C, C, C, C, C, O]),
        ("hexane", &[C, C, C, C, C, C]),
    ];
    for (i, (name, elements)) in hetero_chains.iter().enumerate() {
        let phi = [180.0, 60.0, -60.0, 150.0][i % 4];
        let dihedrals: Vec<f64> = (0..elements.len().saturating_sub(3))
            .map(|k| if k % 2 == 0 { phi } else { 180.0 })
            .collect();
        out.push(chain(name, elements, &dihedrals));
    }

    let substituents: [(&str, &[Element]); 8] = [
        ("benzyl-alcohol", &[C, O]),
        ("phenethylamine", &[C, C, N]),
        ("propylbenzene-gauche", &[C, C, C]),
        ("thioanisole-ethyl", &[S, C]),
        ("phenetole", &[O, C, C]),
        ("n-methylaniline", &[N, C]),
        ("butylbenzene", &[C, C, C, C]),
        ("propoxybenzene", &[O, C, C, C]),
    ];
    for (i, (name, elements)) in substituents.iter().enumerate() {
        let phi = [180.0, 65.0, -70.0, 120.0][i % 4];
        let dihedrals: Vec<f64> = (0..elements.len())
            .map(|k| if k % 2 == 0 { phi } else { 180.0 })
            .collect();
        out.push(substituted_benzene(name, elements, &dihedrals));
    }

    // Pyridines carrying chains of varying length and torsion.
    for i in 0..6usize {
        let mut b = MolBuilder::new();
        let elements = [
            Element::N,
            Element::C,
            Element::C,
            Element::C,
            Element::C,
            Element::C,
        ];
        let ring = regular_ring(&mut b, &elements, AROMATIC, Vec3::zeros());
        for k in 0..6 {
            b.bond(ring[k], ring[(k + 1) % 6], BondOrder::Aromatic);
        }
        let anchor = ring[3];
        let outward = b.coord(anchor).normalize();
        let first = b.atom_at(C, b.coord(anchor) + outward * CC);
        b.bond(anchor, first, BondOrder::Single);
        let mut grown = vec![ring[2], anchor, first];
        let tail = 1 + i % 3;
        for k in 0..tail {
            let last = k + 1 == tail;
            let element = if last { O } else { C };
            let len = grown.len();
            let idx = b.extend(
                element,
                grown[len - 1],
                grown[len - 2],
                grown[len - 3],
                if last { CO } else { CC },
                TETRAHEDRAL,
                140.0 - 35.0 * i as f64,
                BondOrder::Single,
            );
            grown.push(idx);
        }
        out.push(b.build(&format!("pyridyl-chain-{i}")));
    }

    // Branched alkanes/ethers.
    for i in 0..6usize {
        let mut b = MolBuilder::new();
        let c0 = b.atom_at(C, Vec3::zeros());
        let c1 = b.atom_at(C, Vec3::new(CC, 0.0, 0.0));
        b.bond(c0, c1, BondOrder::Single);
        let c2 = {
            let coord = place_atom(
                b.coord(c1),
                b.coord(c0),
                b.coord(c0) + Vec3::new(0.0, 0.0, 1.0),
                CC,
                TETRAHEDRAL.to_radians(),
                90_f64.to_radians(),
            );
            let idx = b.atom_at(C, coord);
            b.bond(c1, idx, BondOrder::Single);
            idx
        };
        let c3 = b.extend(
            C,
            c2,
            c1,
            c0,
            CC,
            TETRAHEDRAL,
            170.0 - 20.0 * i as f64,
            BondOrder::Single,
        );
        let branch_elem = if i % 2 == 0 { C } else { O };
        b.extend(
            branch_elem,
            c2,
            c1,
            c0,
            table_length(C, branch_elem),
            TETRAHEDRAL,
            50.0 - 20.0 * i as f64,
            BondOrder::Single,
        );
        b.extend(C, c3, c2, c1, CC, TETRAHEDRAL, 180.0, BondOrder::Single);
        out.push(b.build(&format!("branched-{i}")));
    }

    // Ring-CH2-CH2-ring bridges with varied twist.
    for i in 0..4usize {
        let mut b = MolBuilder::new();
        let ring_a = regular_ring(&mut b, &[Element::C; 6], AROMATIC, Vec3::zeros());
        for k in 0..6 {
            b.bond(ring_a[k], ring_a[(k + 1) % 6], BondOrder::Aromatic);
        }
        let anchor = ring_a[0];
        let outward = b.coord(anchor).normalize();
        let c1 = b.atom_at(C, b.coord(anchor) + outward * CC);
        b.bond(anchor, c1, BondOrder::Single);
        let c2 = b.extend(
            C,
            c1,
            anchor,
            ring_a[1],
            CC,
            TETRAHEDRAL,
            60.0 + 40.0 * i as f64,
            BondOrder::Single,
        );
        // Second ring grown so its nearest vertex bonds c2 at the table
        // length, along the tetrahedral continuation direction.
        let attach_dir = (place_atom(
            b.coord(c2),
            b.coord(c1),
            b.coord(anchor),
            1.0,
            TETRAHEDRAL.to_radians(),
            (180.0 - 25.0 * i as f64).to_radians(),
        ) - b.coord(c2))
        .normalize();
        let near_vertex = b.coord(c2) + attach_dir * CC;
        let circum6 = AROMATIC / (2.0 * (std::f64::consts::PI / 6.0).sin());
        let center_b = near_vertex + attach_dir * circum6;
        let ring_b = regular_ring(&mut b, &[Element::C; 6], AROMATIC, center_b);
        for k in 0..6 {
            b.bond(ring_b[k], ring_b[(k + 1) % 6], BondOrder::Aromatic);
        }
        // Move the ring so one vertex lands exactly on near_vertex.
        let nearest = ring_b
            .iter()
            .copied()
            .min_by(|&x, &y| {
                let dx = (b.coord(x) - near_vertex).norm();
                let dy = (b.coord(y) - near_vertex).norm();
                dx.partial_cmp(&dy).unwrap()
            })
            .unwrap();
        let shift = near_vertex - b.coord(nearest);
        for &atom in &ring_b {
            let p = b.coord(atom) + shift;
            b.set_coord(atom, p);
        }
        b.bond(c2, nearest, BondOrder::Single);
        out.push(b.build(&format!("bridged-rings-{i}")));
    }

    assert_eq!(out.len(), 50, "corpus must hold exactly 50 molecules");
    out
}

/// Hollow spherical pocket: `n` carbon atoms on a sphere (Fibonacci
/// lattice) centered at the origin. The interior is clash-free.
pub fn shell_pocket(radius: f64, n: usize) -> Pocket {
    let atoms = (0..n)
        .map(|i| {
            let golden = (1.0 + 5_f64.sqrt()) / 2.0;
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r_xy = (1.0 - z * z).sqrt();
            let th = TAU * ((i as f64 / golden) % 1.0);
            PocketAtom {
                element: "C".into(),
                coord: Vec3::new(r_xy * th.cos(), r_xy * th.sin(), z) * radius,
                residue_name: "ALA".into(),
                residue_seq: i as i32 + 1,
                chain_id: 'A',
                is_backbone: false,
            }
        })
        .collect();
    Pocket::new(atoms).expect("non-empty pocket")
}

/// Dense cubic grid pocket (spacing in Å) with no clash-free interior.
pub fn dense_grid_pocket(half_extent: i32, spacing: f64) -> Pocket {
    let mut atoms = Vec::new();
    let mut seq = 0;
    for x in -half_extent..=half_extent {
        for y in -half_extent..=half_extent {
            for z in -half_extent..=half_extent {
                seq += 1;
                atoms.push(PocketAtom {
                    element: "C".into(),
                    coord: Vec3::new(f64::from(x), f64::from(y), f64::from(z)) * spacing,
                    residue_name: "GLY".into(),
                    residue_seq: seq,
                    chain_id: 'A',
                    is_backbone: false,
                });
            }
        }
    }
    Pocket::new(atoms).expect("non-empty pocket")
}

/// Serialize a pocket as minimal PDB ATOM records (for CLI fixtures).
pub fn pocket_to_pdb(pocket: &Pocket) -> String {
    let mut out = String::new();
    for (i, atom) in pocket.atoms().iter().enumerate() {
        let name = if atom.is_backbone { "CA" } else { "CB" };
        out.push_str(&format!(
            "ATOM  {:>5} {:<4} {:<3} {}{:>4}    {:8.3}{:8.3}{:8.3}  1.00  0.00          {:>2}\n",
            i + 1,
            name,
            atom.residue_name,
            atom.chain_id,
            atom.residue_seq,
            atom.coord.x,
            atom.coord.y,
            atom.coord.z,
            atom.element
        ));
    }
    out.push_str("END\n");
    out
}
