//! MOTIFVOCAB v1: versioned line-oriented vocabulary serialization.
//!
//! ```text
//! MOTIFVOCAB v1 <count>
//! MOTIF <key-hex> <ring_like|chain_like> <frequency> <atoms> <bonds> <sites>
//! A <label> <charge> <x> <y> <z>
//! B <i> <j> <order>
//! S atom <i> <class> | S dummy <d> <anchor> <class> | S bond <i> <j> <class>
//! ```
//!
//! Motifs are ordered by descending frequency then key, so serialization
//! is deterministic. Site lines carry the connection-site equivalence
//! class ids; they are recomputed on load and rechecked structurally.

use crate::connect::ConnectionSite;
use crate::error::{Error, Result};
use crate::molgraph::{Atom, Bond, BondOrder, Element, Molecule, Vec3};

use super::{Motif, MotifKind, Vocabulary};

pub(super) fn write(vocab: &Vocabulary) -> Vec<u8> {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "MOTIFVOCAB v1 {}", vocab.motifs().len()).unwrap();
    for (idx, motif) in vocab.motifs().iter().enumerate() {
        let classes = vocab.site_classes(idx);
        let graph = motif.graph();
        let mut site_lines = Vec::new();
        for (class_id, class) in classes
            .atom_classes
            .iter()
            .chain(&classes.bond_classes)
            .enumerate()
        {
            for member in &class.members {
                site_lines.push(match *member {
                    ConnectionSite::Atom { atom } => format!("S atom {atom} {class_id}"),
                    ConnectionSite::Dummy { dummy, anchor } => {
                        format!("S dummy {dummy} {anchor} {class_id}")
                    }
                    ConnectionSite::Bond { from, to } => format!("S bond {from} {to} {class_id}"),
                    ConnectionSite::Slot { .. } => unreachable!("slots never appear on motifs"),
                });
            }
        }
        site_lines.sort();
        writeln!(
            out,
            "MOTIF {} {} {} {} {} {}",
            motif.key().to_hex(),
            motif.kind().code(),
            motif.frequency(),
            graph.atoms().len(),
            graph.bonds().len(),
            site_lines.len()
        )
        .unwrap();
        for atom in graph.atoms() {
            writeln!(
                out,
                "A {} {} {:.4} {:.4} {:.4}",
                atom.element.symbol(),
                atom.charge,
                atom.coord.x,
                atom.coord.y,
                atom.coord.z
            )
            .unwrap();
        }
        for bond in graph.bonds() {
            writeln!(out, "B {} {} {}", bond.a, bond.b, bond.order.code()).unwrap();
        }
        for line in site_lines {
            writeln!(out, "{line}").unwrap();
        }
    }
    out.into_bytes()
}

pub(super) fn read(bytes: &[u8]) -> Result<Vocabulary> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::parse(0, "vocabulary file is not valid UTF-8"))?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty vocabulary file"))?;
    let header_fields: Vec<&str> = header.split_whitespace().collect();
    if header_fields.len() != 3 || header_fields[0] != "MOTIFVOCAB" || header_fields[1] != "v1" {
        return Err(Error::parse(1, "expected header 'MOTIFVOCAB v1 <count>'"));
    }
    let count: usize = header_fields[2]
        .parse()
        .map_err(|_| Error::parse(1, "malformed motif count"))?;

    let mut motifs = Vec::with_capacity(count);
    let mut min_frequency = u64::MAX;
    for _ in 0..count {
        let (lineno, motif_line) = lines
            .next()
            .ok_or_else(|| Error::parse(0, "truncated vocabulary: missing MOTIF line"))?;
        let fields: Vec<&str> = motif_line.split_whitespace().collect();
        if fields.len() != 7 || fields[0] != "MOTIF" {
            return Err(Error::parse(lineno + 1, "malformed MOTIF line"));
        }
        let kind = MotifKind::from_code(fields[2])
            .ok_or_else(|| Error::parse(lineno + 1, "unknown motif kind"))?;
        let frequency: u64 = fields[3]
            .parse()
            .map_err(|_| Error::parse(lineno + 1, "malformed frequency"))?;
        let n_atoms: usize = fields[4]
            .parse()
            .map_err(|_| Error::parse(lineno + 1, "malformed atom count"))?;
        let n_bonds: usize = fields[5]
            .parse()
            .map_err(|_| Error::parse(lineno + 1, "malformed bond count"))?;
        let n_sites: usize = fields[6]
            .parse()
            .map_err(|_| Error::parse(lineno + 1, "malformed site count"))?;

        let mut atoms = Vec::with_capacity(n_atoms);
        for _ in 0..n_atoms {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::parse(0, "truncated atom block"))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 6 || f[0] != "A" {
                return Err(Error::parse(ln + 1, "malformed atom line"));
            }
            let element = Element::from_symbol(f[1])
                .ok_or_else(|| Error::parse(ln + 1, format!("unknown element '{}'", f[1])))?;
            let charge: i8 = f[2]
                .parse()
                .map_err(|_| Error::parse(ln + 1, "malformed charge"))?;
            let coords: Vec<f64> = f[3..6]
                .iter()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(ln + 1, "malformed coordinate"))?;
            atoms.push(Atom::new(
                element,
                charge,
                Vec3::new(coords[0], coords[1], coords[2]),
            ));
        }
        let mut bonds = Vec::with_capacity(n_bonds);
        for _ in 0..n_bonds {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::parse(0, "truncated bond block"))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 || f[0] != "B" {
                return Err(Error::parse(ln + 1, "malformed bond line"));
            }
            let a: usize = f[1]
                .parse()
                .map_err(|_| Error::parse(ln + 1, "malformed bond index"))?;
            let b: usize = f[2]
                .parse()
                .map_err(|_| Error::parse(ln + 1, "malformed bond index"))?;
            let order = BondOrder::from_code(f[3])
                .ok_or_else(|| Error::parse(ln + 1, "unknown bond order"))?;
            bonds.push(Bond { a, b, order });
        }
        // Site lines are consumed and validated structurally; the class
        // partition itself is recomputed, which keeps the file format a
        // pure interchange format rather than a trusted cache.
        for _ in 0..n_sites {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::parse(0, "truncated site block"))?;
            if !line.starts_with("S ") {
                return Err(Error::parse(ln + 1, "malformed site line"));
            }
        }

        let graph = Molecule::new("", atoms, bonds)?;
        let mut motif = Motif::new(graph, kind)?;
        motif.frequency = frequency;
        min_frequency = min_frequency.min(frequency);
        motifs.push(motif);
    }
    if motifs.is_empty() {
        min_frequency = 1;
    }
    Ok(Vocabulary::new(motifs, min_frequency))
}

#[cfg(test)]
mod tests {
    use crate::molgraph::{Atom, Bond, BondOrder, Element, Molecule, Vec3};
    use crate::motif::{Motif, MotifKind, Vocabulary};

    fn benzene_motif() -> Motif {
        let atoms = (0..6)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / 6.0;
                Atom::new(Element::C, 0, Vec3::new(th.cos(), th.sin(), 0.0) * 1.39)
            })
            .collect();
        let bonds = (0..6)
            .map(|i| Bond {
                a: i,
                b: (i + 1) % 6,
                order: BondOrder::Aromatic,
            })
            .collect();
        let graph = Molecule::new("benzene", atoms, bonds).unwrap();
        Motif::new(graph, MotifKind::RingLike).unwrap()
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let vocab = Vocabulary::new(vec![benzene_motif()], 1);
        let bytes = vocab.write();
        let reread = Vocabulary::read(&bytes).unwrap();
        assert_eq!(reread.write(), bytes);
        assert_eq!(reread.len(), 1);
        assert_eq!(reread.motifs()[0].frequency(), 1);
    }

    #[test]
    fn rejects_bad_header() {
        assert!(Vocabulary::read(b"MOTIFVOCAB v2 0\n").is_err());
    }
}
