//! Pocket extraction from PDB ATOM/HETATM records.

use super::{Pocket, PocketAtom, Vec3};
use crate::error::{Error, Result};

const WATER_RESIDUES: [&str; 3] = ["HOH", "WAT", "DOD"];
const BACKBONE_NAMES: [&str; 4] = ["N", "CA", "C", "O"];

/// Parse the fixed-column subset of PDB ATOM/HETATM records into a
/// Pocket. Hydrogens and waters are excluded; the backbone flag is set
/// for atom names N, CA, C and O.
pub fn parse_pocket_pdb(input: &[u8]) -> Result<Pocket> {
    let text = std::str::from_utf8(input)
        .map_err(|_| Error::parse(0, "input is not valid UTF-8"))?;
    let mut atoms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if !(line.starts_with("ATOM") || line.starts_with("HETATM")) {
            continue;
        }
        if line.len() < 54 {
            return Err(Error::parse(i + 1, "ATOM record shorter than 54 columns"));
        }
        let atom_name = line[12..16].trim();
        let residue_name = line[17..20].trim().to_string();
        if WATER_RESIDUES.contains(&residue_name.as_str()) {
            continue;
        }
        let chain_id = line.as_bytes()[21] as char;
        let residue_seq: i32 = line[22..26]
            .trim()
            .parse()
            .map_err(|_| Error::parse(i + 1, "malformed residue sequence number"))?;
        let x: f64 = line[30..38]
            .trim()
            .parse()
            .map_err(|_| Error::parse(i + 1, "malformed x coordinate"))?;
        let y: f64 = line[38..46]
            .trim()
            .parse()
            .map_err(|_| Error::parse(i + 1, "malformed y coordinate"))?;
        let z: f64 = line[46..54]
            .trim()
            .parse()
            .map_err(|_| Error::parse(i + 1, "malformed z coordinate"))?;
        let element = element_of(line, atom_name);
        if element == "H" || element == "D" {
            continue;
        }
        atoms.push(PocketAtom {
            element,
            coord: Vec3::new(x, y, z),
            residue_name,
            residue_seq,
            chain_id,
            is_backbone: BACKBONE_NAMES.contains(&atom_name),
        });
    }
    if atoms.is_empty() {
        return Err(Error::parse(0, "no parsable ATOM/HETATM records"));
    }
    Pocket::new(atoms)
}

/// Element symbol from columns 77-78 when present, else from the first
/// alphabetic character of the atom name.
fn element_of(line: &str, atom_name: &str) -> String {
    if line.len() >= 78 {
        let field = line[76..78].trim();
        if !field.is_empty() {
            let mut sym = field.to_string();
            if sym.len() == 2 {
                sym = format!(
                    "{}{}",
                    &sym[0..1],
                    sym[1..2].to_ascii_lowercase()
                );
            }
            return sym;
        }
    }
    atom_name
        .chars()
        .find(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_string())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_backbone_atom() {
        let line = "ATOM      2  CA  ALA A   1      11.000  22.000  33.000  1.00  0.00           C\n";
        let pocket = parse_pocket_pdb(line.as_bytes()).unwrap();
        assert_eq!(pocket.atoms().len(), 1);
        let atom = pocket.atoms()[0].clone();
        assert!(atom.is_backbone);
        assert_eq!(atom.element, "C");
        assert_eq!(atom.residue_name, "ALA");
        assert!((atom.coord.x - 11.0).abs() < 1e-9);
    }

    #[test]
    fn waters_excluded() {
        let text = "\
ATOM      1  N   GLY A   1       1.000   2.000   3.000  1.00  0.00           N
HETATM    2  O   HOH A 101       5.000   5.000   5.000  1.00  0.00           O
";
        let pocket = parse_pocket_pdb(text.as_bytes()).unwrap();
        assert_eq!(pocket.atoms().len(), 1);
        assert_eq!(pocket.atoms()[0].element, "N");
    }

    #[test]
    fn hydrogens_excluded() {
        let text = "\
ATOM      1  CB  ALA A   1       1.000   2.000   3.000  1.00  0.00           C
ATOM      2  HB1 ALA A   1       1.500   2.500   3.500  1.00  0.00           H
";
        let pocket = parse_pocket_pdb(text.as_bytes()).unwrap();
        assert_eq!(pocket.atoms().len(), 1);
        assert!(!pocket.atoms()[0].is_backbone);
    }

    #[test]
    fn empty_input_errors() {
        assert!(parse_pocket_pdb(b"REMARK nothing here\n").is_err());
    }
}
