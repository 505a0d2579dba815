//! Rigid attachment geometry.
//!
//! Atom–atom: the incoming motif is rigidly mapped so its anchor atom
//! sits at the fragment site's recorded direction at the table bond
//! length, then rotated about the new bond to hit the requested torsion.
//! Bond–bond: the motif's directed ring bond is Kabsch-aligned onto the
//! fragment's directed bond plus a target ring normal, shared atoms are
//! merged and the duplicate bond collapses into a fused system.
//!
//! Every function here is pure molecule-in/molecule-out; steric clash
//! checks against the pocket and open-slot bookkeeping live in the
//! assembly state machine.

use crate::error::{Error, Result};
use crate::geom3d::{self, RigidTransform};
use crate::molgraph::{Atom, Bond, BondOrder, Element, Molecule, RingInfo, Vec3};

/// New single-bond lengths by element pair (Å).
pub fn bond_length_lookup(a: Element, b: Element) -> f64 {
    use Element::*;
    let pair = if a <= b { (a, b) } else { (b, a) };
    match pair {
        (C, C) => 1.51,
        (C, N) => 1.47,
        (C, O) => 1.43,
        (C, S) => 1.81,
        (N, N) => 1.45,
        _ => 1.50,
    }
}

/// Torsion target for the newly formed bond: set
/// `dihedral(fragment_ref, fragment_atom, anchor, motif_ref)` to `value`.
#[derive(Debug, Clone, Copy)]
pub struct TorsionSpec {
    pub value: f64,
    /// Off-axis reference position on the fragment side.
    pub fragment_ref: Vec3,
    /// Off-axis reference atom on the motif side (motif-local index;
    /// dummy placeholders are valid references).
    pub motif_ref: usize,
}

#[derive(Debug, Clone)]
pub struct AtomAttachSpec {
    /// Fragment atom forming the new bond.
    pub fragment_atom: usize,
    /// Outgoing bond direction on the fragment side (need not be unit).
    pub fragment_direction: Vec3,
    /// Motif-local heavy atom forming the new bond.
    pub motif_anchor: usize,
    /// Direction from the anchor toward the incoming neighbor, in the
    /// motif's stored frame.
    pub motif_direction: Vec3,
    pub bond_length: f64,
    pub torsion: Option<TorsionSpec>,
}

#[derive(Debug, Clone)]
pub struct BondAttachSpec {
    /// Directed fragment bond (m, n); must exist with the same order as
    /// the motif bond.
    pub fragment_bond: (usize, usize),
    /// Directed motif bond (i, j); i merges onto m, j onto n.
    pub motif_bond: (usize, usize),
    /// Ring normal of the motif bond's ring (traversal i→j), motif frame.
    pub motif_normal: Vec3,
    /// Desired direction of that normal after placement.
    pub target_normal: Vec3,
    /// Additional (motif-local, fragment) atom identifications beyond
    /// the bond endpoints (used when re-merging decomposed fused rings).
    pub extra_merges: Vec<(usize, usize)>,
}

/// Result of a geometric attachment.
#[derive(Debug, Clone)]
pub struct AttachedGeometry {
    pub molecule: Molecule,
    /// Rigid map from the motif's stored frame to its placement;
    /// applying it to the stored conformation reproduces the placed
    /// coordinates exactly.
    pub transform: RigidTransform,
    /// Motif-local index → merged-molecule index. Dummies map to `None`.
    pub motif_atom_map: Vec<Option<usize>>,
    /// All motif atoms (dummies included) in placed coordinates.
    pub placed_coords: Vec<Vec3>,
    /// The newly formed bond (atom–atom) as merged-molecule indices.
    pub new_bond: Option<(usize, usize)>,
}

pub fn attach_atom_atom(
    fragment: &Molecule,
    motif: &Molecule,
    spec: &AtomAttachSpec,
) -> Result<AttachedGeometry> {
    let frag_pos = fragment.atom(spec.fragment_atom).coord;
    let anchor_pos = motif.atom(spec.motif_anchor).coord;
    if motif.atom(spec.motif_anchor).element.is_dummy() {
        return Err(Error::Attach("motif anchor is a dummy atom".into()));
    }
    let u_f = unit(spec.fragment_direction, "fragment site direction")?;
    let u_m = unit(spec.motif_direction, "motif site direction")?;
    let target_anchor = frag_pos + u_f * spec.bond_length;

    // Align the motif's outgoing direction against the fragment's, then
    // pin the anchor onto its target position.
    let rotation = RigidTransform::rotation_between(u_m, -u_f)?;
    let align = RigidTransform {
        rotation,
        translation: target_anchor - rotation * anchor_pos,
    };

    let transform = match spec.torsion {
        None => align,
        Some(ts) => {
            let ref_f = ts.fragment_ref;
            let ref_m = align.apply(motif.atom(ts.motif_ref).coord);
            let current = geom3d::dihedral(ref_f, frag_pos, target_anchor, ref_m)?;
            let twist = RigidTransform::about_axis(
                frag_pos,
                target_anchor - frag_pos,
                ts.value - current,
            )?;
            twist.compose(&align)
        }
    };

    let placed_coords: Vec<Vec3> = motif.atoms().iter().map(|a| transform.apply(a.coord)).collect();

    let mut atoms: Vec<Atom> = fragment.atoms().to_vec();
    let mut bonds: Vec<Bond> = fragment.bonds().to_vec();
    let mut motif_atom_map: Vec<Option<usize>> = vec![None; motif.atoms().len()];
    for (i, atom) in motif.atoms().iter().enumerate() {
        if atom.element.is_dummy() {
            continue;
        }
        motif_atom_map[i] = Some(atoms.len());
        atoms.push(Atom::new(atom.element, atom.charge, placed_coords[i]));
    }
    for bond in motif.bonds() {
        if let (Some(a), Some(b)) = (motif_atom_map[bond.a], motif_atom_map[bond.b]) {
            bonds.push(Bond {
                a,
                b,
                order: bond.order,
            });
        }
    }
    let anchor_new = motif_atom_map[spec.motif_anchor].expect("anchor is heavy");
    bonds.push(Bond {
        a: spec.fragment_atom,
        b: anchor_new,
        order: BondOrder::Single,
    });

    let molecule = Molecule::new(fragment.name(), atoms, bonds)
        .map_err(|e| Error::Attach(format!("attachment breaks molecule invariants: {e}")))?;
    Ok(AttachedGeometry {
        molecule,
        transform,
        motif_atom_map,
        placed_coords,
        new_bond: Some((spec.fragment_atom, anchor_new)),
    })
}

pub fn attach_bond_bond(
    fragment: &Molecule,
    motif: &Molecule,
    spec: &BondAttachSpec,
) -> Result<AttachedGeometry> {
    let (m, n) = spec.fragment_bond;
    let (i, j) = spec.motif_bond;
    let frag_bond = fragment
        .bond_between(m, n)
        .ok_or_else(|| Error::Attach(format!("fragment atoms {m}-{n} are not bonded")))?;
    let motif_bond = motif
        .bond_between(i, j)
        .ok_or_else(|| Error::Attach(format!("motif atoms {i}-{j} are not bonded")))?;
    let frag_order = fragment.bonds()[frag_bond].order;
    let motif_order = motif.bonds()[motif_bond].order;
    if frag_order != motif_order {
        return Err(Error::Attach(format!(
            "bond orders differ on the fused bond: {} vs {}",
            frag_order.code(),
            motif_order.code()
        )));
    }

    let n_m = unit(spec.motif_normal, "motif ring normal")?;
    let n_t = unit(spec.target_normal, "target ring normal")?;
    let (pi, pj) = (motif.atom(i).coord, motif.atom(j).coord);
    let (pm, pn) = (fragment.atom(m).coord, fragment.atom(n).coord);
    let mid_motif = (pi + pj) * 0.5;
    let mid_frag = (pm + pn) * 0.5;
    let source = [pi, pj, mid_motif + n_m];
    let target = [pm, pn, mid_frag + n_t];
    let (transform, _) = geom3d::kabsch(&source, &target)?;

    let placed_coords: Vec<Vec3> = motif.atoms().iter().map(|a| transform.apply(a.coord)).collect();

    let mut merge: Vec<Option<usize>> = vec![None; motif.atoms().len()];
    merge[i] = Some(m);
    merge[j] = Some(n);
    for &(local, frag_idx) in &spec.extra_merges {
        if frag_idx >= fragment.atoms().len() || local >= motif.atoms().len() {
            return Err(Error::Attach("merge index out of range".into()));
        }
        merge[local] = Some(frag_idx);
    }

    let mut atoms: Vec<Atom> = fragment.atoms().to_vec();
    let mut bonds: Vec<Bond> = fragment.bonds().to_vec();
    let mut motif_atom_map: Vec<Option<usize>> = vec![None; motif.atoms().len()];
    for (local, atom) in motif.atoms().iter().enumerate() {
        if atom.element.is_dummy() {
            return Err(Error::Attach(
                "bond attachment requires a ring motif without dummies".into(),
            ));
        }
        match merge[local] {
            Some(existing) => {
                if atoms[existing].element != atom.element {
                    return Err(Error::Attach(format!(
                        "merged atoms disagree on element: {} vs {}",
                        atoms[existing].element.symbol(),
                        atom.element.symbol()
                    )));
                }
                motif_atom_map[local] = Some(existing);
            }
            None => {
                motif_atom_map[local] = Some(atoms.len());
                atoms.push(Atom::new(atom.element, atom.charge, placed_coords[local]));
            }
        }
    }
    for bond in motif.bonds() {
        let a = motif_atom_map[bond.a].unwrap();
        let b = motif_atom_map[bond.b].unwrap();
        match fragment_bond_between(&bonds, fragment.bonds().len(), a, b) {
            Some(existing_order) => {
                if existing_order != bond.order {
                    return Err(Error::Attach(format!(
                        "bond orders differ on merged bond {a}-{b}: {} vs {}",
                        existing_order.code(),
                        bond.order.code()
                    )));
                }
            }
            None => bonds.push(Bond {
                a,
                b,
                order: bond.order,
            }),
        }
    }

    let molecule = Molecule::new(fragment.name(), atoms, bonds)
        .map_err(|e| Error::Attach(format!("fusion breaks molecule invariants: {e}")))?;
    Ok(AttachedGeometry {
        molecule,
        transform,
        motif_atom_map,
        placed_coords,
        new_bond: None,
    })
}

/// Order of the pre-existing fragment bond between merged endpoints, if
/// any. Only the original fragment bonds count as duplicates.
fn fragment_bond_between(bonds: &[Bond], fragment_len: usize, a: usize, b: usize) -> Option<BondOrder> {
    bonds[..fragment_len]
        .iter()
        .find(|bd| (bd.a == a && bd.b == b) || (bd.a == b && bd.b == a))
        .map(|bd| bd.order)
}

/// Unit ring normal (Newell's method, centered) of the ring containing
/// the directed edge `from`→`to`, traversed in that direction.
pub fn ring_normal_for_bond(
    mol: &Molecule,
    rings: &RingInfo,
    from: usize,
    to: usize,
) -> Result<Vec3> {
    let containing = rings.rings_with_bond(from, to);
    let ring = containing
        .first()
        .map(|&r| &rings.rings[r])
        .ok_or_else(|| Error::Attach(format!("bond {from}-{to} lies on no ring")))?;
    let oriented = orient_ring(ring, from, to);
    let coords: Vec<Vec3> = oriented.iter().map(|&a| mol.atom(a).coord).collect();
    ring_normal(&coords)
}

/// Newell normal of an ordered planar-ish polygon.
pub fn ring_normal(coords: &[Vec3]) -> Result<Vec3> {
    let k = coords.len();
    let centroid = coords.iter().sum::<Vec3>() / k as f64;
    let mut normal = Vec3::zeros();
    for idx in 0..k {
        let a = coords[idx] - centroid;
        let b = coords[(idx + 1) % k] - centroid;
        normal += a.cross(&b);
    }
    unit(normal, "ring normal (degenerate ring geometry)")
}

/// Rotate/reverse the cycle so it starts at `from` and continues to `to`.
fn orient_ring(ring: &[usize], from: usize, to: usize) -> Vec<usize> {
    let k = ring.len();
    let pos = ring
        .iter()
        .position(|&a| a == from)
        .expect("edge endpoint in ring");
    let mut out: Vec<usize> = (0..k).map(|d| ring[(pos + d) % k]).collect();
    if out[1] != to {
        // Walk the other way round.
        out = (0..k).map(|d| ring[(pos + k - d) % k]).collect();
    }
    debug_assert_eq!(out[1], to);
    out
}

fn unit(v: Vec3, what: &str) -> Result<Vec3> {
    let norm = v.norm();
    if norm < 1e-9 {
        return Err(Error::Attach(format!("{what} has zero length")));
    }
    Ok(v / norm)
}
