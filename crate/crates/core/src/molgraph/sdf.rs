//! V2000 SDF/MOL reading and writing.
//!
//! Hydrogens are dropped on parse; their count is recovered later from
//! free valence. Multi-component records (salts) are split into one
//! Molecule per connected component. Coordinates are read and written at
//! four decimals.

use super::{build_adjacency, Atom, Bond, BondOrder, Element, Molecule, Vec3};
use crate::error::{Error, Result};

/// Parse V2000 SDF text into one Molecule per connected component per
/// record.
pub fn parse_sdf(input: &[u8]) -> Result<Vec<Molecule>> {
    let text = std::str::from_utf8(input)
        .map_err(|_| Error::parse(0, "input is not valid UTF-8"))?;
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let mut molecules = Vec::new();
    let mut pos = 0;
    while pos < lines.len() {
        // Skip blank padding between records.
        while pos < lines.len() && lines[pos].trim().is_empty() {
            pos += 1;
        }
        if pos >= lines.len() {
            break;
        }
        let record_start = pos;
        let mut record_end = record_start;
        while record_end < lines.len() && lines[record_end].trim() != "$$$$" {
            record_end += 1;
        }
        parse_record(&lines[record_start..record_end], record_start, &mut molecules)?;
        pos = record_end + 1;
    }
    Ok(molecules)
}

fn parse_record(lines: &[&str], offset: usize, out: &mut Vec<Molecule>) -> Result<()> {
    // Line numbers in errors are 1-based over the whole file.
    let lineno = |i: usize| offset + i + 1;
    if lines.len() < 4 {
        return Err(Error::parse(lineno(0), "record too short for a V2000 header"));
    }
    let name = lines[0].trim().to_string();
    let counts = lines[3];
    if counts.len() < 6 {
        return Err(Error::parse(lineno(3), "counts line too short"));
    }
    let n_atoms: usize = counts[0..3]
        .trim()
        .parse()
        .map_err(|_| Error::parse(lineno(3), "malformed atom count"))?;
    let n_bonds: usize = counts[3..6]
        .trim()
        .parse()
        .map_err(|_| Error::parse(lineno(3), "malformed bond count"))?;
    if lines.len() < 4 + n_atoms + n_bonds {
        return Err(Error::parse(
            lineno(3),
            format!("record truncated: expected {n_atoms} atoms and {n_bonds} bonds"),
        ));
    }

    let mut atoms = Vec::with_capacity(n_atoms);
    let mut hydrogens = vec![false; n_atoms];
    for i in 0..n_atoms {
        let li = 4 + i;
        let line = lines[li];
        if line.len() < 34 {
            return Err(Error::parse(lineno(li), "atom line too short"));
        }
        let x: f64 = line[0..10]
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno(li), "malformed x coordinate"))?;
        let y: f64 = line[10..20]
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno(li), "malformed y coordinate"))?;
        let z: f64 = line[20..30]
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno(li), "malformed z coordinate"))?;
        let sym_end = line.len().min(34);
        let symbol = line[31..sym_end].trim();
        if symbol == "H" || symbol == "D" || symbol == "T" {
            hydrogens[i] = true;
            atoms.push(Atom::new(Element::C, 0, Vec3::new(x, y, z)));
            continue;
        }
        let element = Element::from_symbol(symbol)
            .ok_or_else(|| Error::parse(lineno(li), format!("unknown element symbol '{symbol}'")))?;
        // Legacy charge column (entry 0 = none, 1..=3 = +3..+1, 5..=7 = -1..-3).
        let charge = if line.len() >= 39 {
            match line[36..39].trim() {
                "1" => 3,
                "2" => 2,
                "3" => 1,
                "5" => -1,
                "6" => -2,
                "7" => -3,
                _ => 0,
            }
        } else {
            0
        };
        atoms.push(Atom::new(element, charge, Vec3::new(x, y, z)));
    }

    let mut bonds = Vec::with_capacity(n_bonds);
    for i in 0..n_bonds {
        let li = 4 + n_atoms + i;
        let line = lines[li];
        if line.len() < 9 {
            return Err(Error::parse(lineno(li), "bond line too short"));
        }
        let a: usize = line[0..3]
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno(li), "malformed bond atom index"))?;
        let b: usize = line[3..6]
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno(li), "malformed bond atom index"))?;
        if a == 0 || b == 0 || a > n_atoms || b > n_atoms {
            return Err(Error::parse(
                lineno(li),
                format!("bond atom index out of range: {a}-{b}"),
            ));
        }
        let order = match line[6..9].trim() {
            "1" => BondOrder::Single,
            "2" => BondOrder::Double,
            "3" => BondOrder::Triple,
            "4" => BondOrder::Aromatic,
            other => {
                return Err(Error::parse(
                    lineno(li),
                    format!("unsupported bond type '{other}'"),
                ))
            }
        };
        bonds.push(Bond {
            a: a - 1,
            b: b - 1,
            order,
        });
    }

    // M CHG property lines override the legacy charge column entirely.
    let mut chg_lines = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(4 + n_atoms + n_bonds) {
        if line.starts_with("M  END") {
            break;
        }
        if line.starts_with("M  CHG") {
            chg_lines.push((i, *line));
        }
    }
    if !chg_lines.is_empty() {
        for atom in atoms.iter_mut() {
            atom.charge = 0;
        }
        for (i, line) in chg_lines {
            let fields: Vec<&str> = line[6..].split_whitespace().collect();
            let count: usize = fields
                .first()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::parse(lineno(i), "malformed M  CHG line"))?;
            if fields.len() < 1 + 2 * count {
                return Err(Error::parse(lineno(i), "truncated M  CHG line"));
            }
            for k in 0..count {
                let idx: usize = fields[1 + 2 * k]
                    .parse()
                    .map_err(|_| Error::parse(lineno(i), "malformed M  CHG atom index"))?;
                let chg: i8 = fields[2 + 2 * k]
                    .parse()
                    .map_err(|_| Error::parse(lineno(i), "malformed M  CHG value"))?;
                if idx == 0 || idx > atoms.len() {
                    return Err(Error::parse(lineno(i), "M  CHG atom index out of range"));
                }
                atoms[idx - 1].charge = chg;
            }
        }
    }

    split_heavy_components(&name, atoms, &hydrogens, bonds, out)
}

/// Drop hydrogens, then emit one Molecule per connected heavy component,
/// ordered by smallest original atom index.
fn split_heavy_components(
    name: &str,
    atoms: Vec<Atom>,
    hydrogens: &[bool],
    bonds: Vec<Bond>,
    out: &mut Vec<Molecule>,
) -> Result<()> {
    let n = atoms.len();
    let heavy_bonds: Vec<Bond> = bonds
        .iter()
        .filter(|b| !hydrogens[b.a] && !hydrogens[b.b])
        .copied()
        .collect();
    let adjacency = build_adjacency(n, &heavy_bonds);
    let mut component = vec![usize::MAX; n];
    let mut n_components = 0;
    for start in 0..n {
        if hydrogens[start] || component[start] != usize::MAX {
            continue;
        }
        let id = n_components;
        n_components += 1;
        let mut stack = vec![start];
        component[start] = id;
        while let Some(i) = stack.pop() {
            for &(j, _) in &adjacency[i] {
                if component[j] == usize::MAX {
                    component[j] = id;
                    stack.push(j);
                }
            }
        }
    }
    for id in 0..n_components {
        let members: Vec<usize> = (0..n).filter(|&i| component[i] == id).collect();
        let mut remap = vec![usize::MAX; n];
        for (new, &old) in members.iter().enumerate() {
            remap[old] = new;
        }
        let sub_atoms: Vec<Atom> = members.iter().map(|&i| atoms[i].clone()).collect();
        let sub_bonds: Vec<Bond> = heavy_bonds
            .iter()
            .filter(|b| remap[b.a] != usize::MAX && remap[b.b] != usize::MAX)
            .map(|b| Bond {
                a: remap[b.a],
                b: remap[b.b],
                order: b.order,
            })
            .collect();
        out.push(Molecule::new(name, sub_atoms, sub_bonds)?);
    }
    Ok(())
}

/// Serialize molecules as a V2000 SDF byte stream.
pub fn write_sdf(molecules: &[Molecule]) -> Result<Vec<u8>> {
    let mut out = String::new();
    for mol in molecules {
        write_record(mol, &mut out)?;
    }
    Ok(out.into_bytes())
}

fn write_record(mol: &Molecule, out: &mut String) -> Result<()> {
    use std::fmt::Write;
    let n_atoms = mol.atoms().len();
    let n_bonds = mol.bonds().len();
    if n_atoms > 999 || n_bonds > 999 {
        return Err(Error::Serialize(format!(
            "molecule '{}' exceeds the V2000 limit of 999 atoms/bonds",
            mol.name()
        )));
    }
    writeln!(out, "{}", mol.name()).unwrap();
    writeln!(out, "  confrag").unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "{n_atoms:3}{n_bonds:3}  0  0  0  0  0  0  0  0999 V2000"
    )
    .unwrap();
    for atom in mol.atoms() {
        writeln!(
            out,
            "{:10.4}{:10.4}{:10.4} {:<3} 0  0  0  0  0  0  0  0  0  0  0  0",
            atom.coord.x,
            atom.coord.y,
            atom.coord.z,
            atom.element.symbol()
        )
        .unwrap();
    }
    for bond in mol.bonds() {
        writeln!(
            out,
            "{:3}{:3}{:3}  0",
            bond.a + 1,
            bond.b + 1,
            bond.order.label()
        )
        .unwrap();
    }
    let charged: Vec<(usize, i8)> = mol
        .atoms()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.charge != 0)
        .map(|(i, a)| (i, a.charge))
        .collect();
    for chunk in charged.chunks(8) {
        write!(out, "M  CHG{:3}", chunk.len()).unwrap();
        for (i, chg) in chunk {
            write!(out, " {:3} {:3}", i + 1, chg).unwrap();
        }
        writeln!(out).unwrap();
    }
    writeln!(out, "M  END").unwrap();
    writeln!(out, "$$$$").unwrap();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BENZENE: &str = "benzene
  test

  6  6  0  0  0  0  0  0  0  0999 V2000
    1.3900    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
    0.6950    1.2037    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
   -0.6950    1.2037    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
   -1.3900    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
   -0.6950   -1.2037    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
    0.6950   -1.2037    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
  1  2  4  0
  2  3  4  0
  3  4  4  0
  4  5  4  0
  5  6  4  0
  6  1  4  0
M  END
$$$$
";

    #[test]
    fn parse_benzene() {
        let mols = parse_sdf(BENZENE.as_bytes()).unwrap();
        assert_eq!(mols.len(), 1);
        assert_eq!(mols[0].atoms().len(), 6);
        assert_eq!(mols[0].bonds().len(), 6);
        assert_eq!(mols[0].free_valence(0), 1);
    }

    #[test]
    fn counts_line_fields() {
        let mols = parse_sdf(BENZENE.as_bytes()).unwrap();
        let bytes = write_sdf(&mols).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let counts = text.lines().nth(3).unwrap();
        assert!(counts.starts_with("  6  6"));
    }

    #[test]
    fn empty_list_empty_output() {
        assert!(write_sdf(&[]).unwrap().is_empty());
    }

    #[test]
    fn salt_record_splits() {
        let salt = "salt
  test

  3  1  0  0  0  0  0  0  0  0999 V2000
    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
    1.5000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
    8.0000    0.0000    0.0000 Cl  0  0  0  0  0  0  0  0  0  0  0  0
  1  2  1  0
M  CHG  1   3  -1
M  END
$$$$
";
        let mols = parse_sdf(salt.as_bytes()).unwrap();
        assert_eq!(mols.len(), 2);
        assert_eq!(mols[1].atoms().len(), 1);
        assert_eq!(mols[1].atom(0).charge, -1);
    }

    #[test]
    fn explicit_hydrogens_fold_into_free_valence() {
        // Ethane with explicit hydrogens on one carbon.
        let text = "ethane
  test

  5  4  0  0  0  0  0  0  0  0999 V2000
    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
    1.5100    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
   -0.5000    0.9000    0.0000 H   0  0  0  0  0  0  0  0  0  0  0  0
   -0.5000   -0.9000    0.3000 H   0  0  0  0  0  0  0  0  0  0  0  0
   -0.5000   -0.3000   -0.9000 H   0  0  0  0  0  0  0  0  0  0  0  0
  1  2  1  0
  1  3  1  0
  1  4  1  0
  1  5  1  0
M  END
$$$$
";
        let mols = parse_sdf(text.as_bytes()).unwrap();
        assert_eq!(mols.len(), 1);
        assert_eq!(mols[0].atoms().len(), 2);
        assert_eq!(mols[0].free_valence(0), 3);
        assert_eq!(mols[0].free_valence(1), 3);
    }

    #[test]
    fn unknown_element_names_line() {
        let text = BENZENE.replace(
            "    1.3900    0.0000    0.0000 C  ",
            "    1.3900    0.0000    0.0000 Xx ",
        );
        let err = parse_sdf(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 5"), "got {err}");
    }

    #[test]
    fn round_trip_exact() {
        let mols = parse_sdf(BENZENE.as_bytes()).unwrap();
        let bytes = write_sdf(&mols).unwrap();
        let again = parse_sdf(&bytes).unwrap();
        assert_eq!(mols, again);
    }
}
