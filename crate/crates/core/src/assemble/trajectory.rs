//! Training-trajectory export: traverse the motif tree breadth-first,
//! mask a uniformly sampled tail, and emit the supervised target for the
//! first masked element. Records serialize to the line-oriented TRAJ v1
//! format.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::connect::ConnectionSite;
use crate::error::{Error, Result};
use crate::molgraph::{Atom, Bond, CanonicalKey, Molecule, Pocket, Vec3};
use crate::motif::{fragment, FragmentationResult, MotifKind};

use super::HistoryEntry;

/// One supervised generation step: the visible (unmasked) part of a
/// ligand and the next motif to place.
#[derive(Debug, Clone)]
pub struct TrainingStep {
    pub ligand_name: String,
    pub mask_ratio: f64,
    /// Number of masked motifs K.
    pub masked_count: usize,
    /// Motif keys in BFS order over the motif tree.
    pub bfs_keys: Vec<CanonicalKey>,
    /// Induced subgraph on the visible motifs; `None` when everything is
    /// masked (the target is then the first motif).
    pub visible: Option<Molecule>,
    pub target_key: CanonicalKey,
    pub target_kind: MotifKind,
    /// Site on the visible graph, in its own atom indexing.
    pub fragment_site: Option<ConnectionSite>,
    /// Site on the target motif, in the motif's local indexing.
    pub motif_site: Option<ConnectionSite>,
    pub torsion: Option<f64>,
}

/// How one fragment connects to another in the motif tree.
#[derive(Debug, Clone, Copy)]
enum TreeEdge {
    /// Index into `severed_bonds`.
    Severed(usize),
    /// Shared source bond of a decomposed fused pair.
    Fused(usize, usize),
}

/// Build training steps for one ligand: BFS order rooted at the motif
/// closest to the pocket centroid, one sample per motif with a fresh
/// mask ratio u ~ U[0, 1] and K = round(u · motif count). Samples with
/// K = 0 (nothing masked) are skipped.
pub fn build_trajectories(
    ligand: &Molecule,
    pocket: &Pocket,
    seed: u64,
) -> Result<Vec<TrainingStep>> {
    let result = fragment(ligand)?;
    let n = result.fragments.len();
    let order = bfs_order(&result, pocket)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut steps = Vec::new();
    for _ in 0..n.max(1) {
        let ratio: f64 = rng.random();
        let masked = (ratio * n as f64).round() as usize;
        if masked == 0 {
            continue;
        }
        steps.push(build_step(&result, &order, ratio, masked)?);
    }
    Ok(steps)
}

struct BfsNode {
    fragment: usize,
    /// Edge to the BFS parent; `None` for the root.
    parent_edge: Option<(usize, TreeEdge)>,
}

fn bfs_order(result: &FragmentationResult, pocket: &Pocket) -> Result<Vec<BfsNode>> {
    let fragments = &result.fragments;
    let n = fragments.len();

    let mut adjacency: Vec<Vec<(usize, TreeEdge)>> = vec![Vec::new(); n];
    for (si, severed) in result.severed_bonds.iter().enumerate() {
        let side_a = fragments_with_heavy(result, severed.a);
        let side_b = fragments_with_heavy(result, severed.b);
        for &fa in &side_a {
            for &fb in &side_b {
                adjacency[fa].push((fb, TreeEdge::Severed(si)));
                adjacency[fb].push((fa, TreeEdge::Severed(si)));
            }
        }
    }
    for fi in 0..n {
        for fj in fi + 1..n {
            if let Some((p, q)) = super::shared_source_bond(fragments, fi, fj) {
                adjacency[fi].push((fj, TreeEdge::Fused(p, q)));
                adjacency[fj].push((fi, TreeEdge::Fused(p, q)));
            }
        }
    }
    for neighbors in adjacency.iter_mut() {
        neighbors.sort_by_key(|&(f, _)| f);
    }

    let pocket_centroid = pocket.centroid();
    let root = (0..n)
        .min_by(|&a, &b| {
            let da = (heavy_centroid(result, a) - pocket_centroid).norm();
            let db = (heavy_centroid(result, b) - pocket_centroid).norm();
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        })
        .ok_or_else(|| Error::Attach("no fragments to traverse".into()))?;

    let mut order = vec![BfsNode {
        fragment: root,
        parent_edge: None,
    }];
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut head = 0;
    while head < order.len() {
        let current = order[head].fragment;
        head += 1;
        for &(next, edge) in &adjacency[current] {
            if !seen[next] {
                seen[next] = true;
                order.push(BfsNode {
                    fragment: next,
                    parent_edge: Some((current, edge)),
                });
            }
        }
    }
    if order.len() != n {
        return Err(Error::Attach("motif tree is disconnected".into()));
    }
    Ok(order)
}

fn fragments_with_heavy(result: &FragmentationResult, source_atom: usize) -> Vec<usize> {
    result
        .fragments
        .iter()
        .enumerate()
        .filter(|(_, f)| {
            f.source_atoms
                .iter()
                .zip(f.motif.graph().atoms())
                .any(|(&src, atom)| src == source_atom && !atom.element.is_dummy())
        })
        .map(|(i, _)| i)
        .collect()
}

fn heavy_centroid(result: &FragmentationResult, fi: usize) -> Vec3 {
    let graph = result.fragments[fi].motif.graph();
    let heavy: Vec<Vec3> = graph
        .atoms()
        .iter()
        .filter(|a| !a.element.is_dummy())
        .map(|a| a.coord)
        .collect();
    heavy.iter().sum::<Vec3>() / heavy.len() as f64
}

fn build_step(
    result: &FragmentationResult,
    order: &[BfsNode],
    ratio: f64,
    masked: usize,
) -> Result<TrainingStep> {
    let n = order.len();
    let visible_count = n - masked;
    let target_node = &order[visible_count];
    let target_fragment = &result.fragments[target_node.fragment];

    let bfs_keys = order
        .iter()
        .map(|node| result.fragments[node.fragment].motif.key().clone())
        .collect();

    if visible_count == 0 {
        return Ok(TrainingStep {
            ligand_name: result.source_name.clone(),
            mask_ratio: ratio,
            masked_count: masked,
            bfs_keys,
            visible: None,
            target_key: target_fragment.motif.key().clone(),
            target_kind: target_fragment.motif.kind(),
            fragment_site: None,
            motif_site: None,
            torsion: None,
        });
    }

    // Visible graph: union of heavy source atoms of unmasked fragments.
    let mut visible_sources: Vec<usize> = Vec::new();
    for node in &order[..visible_count] {
        let f = &result.fragments[node.fragment];
        for (local, &src) in f.source_atoms.iter().enumerate() {
            if !f.motif.graph().atom(local).element.is_dummy() && !visible_sources.contains(&src) {
                visible_sources.push(src);
            }
        }
    }
    visible_sources.sort_unstable();
    let masked_local = |src: usize| visible_sources.binary_search(&src).ok();

    let mut atoms: Vec<Atom> = Vec::new();
    let mut seen_bonds: Vec<(usize, usize, crate::molgraph::BondOrder)> = Vec::new();
    for &src in &visible_sources {
        // Coordinates come from any fragment holding the atom; pieces
        // carry source coordinates, so all copies agree.
        let (fi, local) = result
            .fragments
            .iter()
            .enumerate()
            .find_map(|(fi, f)| {
                f.source_atoms
                    .iter()
                    .zip(f.motif.graph().atoms())
                    .position(|(&s, a)| s == src && !a.element.is_dummy())
                    .map(|local| (fi, local))
            })
            .expect("visible atom lives in some fragment");
        atoms.push(result.fragments[fi].motif.graph().atom(local).clone());
    }
    for node in &order[..visible_count] {
        let f = &result.fragments[node.fragment];
        let graph = f.motif.graph();
        for bond in graph.bonds() {
            if graph.atom(bond.a).element.is_dummy() || graph.atom(bond.b).element.is_dummy() {
                continue;
            }
            let (sa, sb) = (f.source_atoms[bond.a], f.source_atoms[bond.b]);
            if let (Some(la), Some(lb)) = (masked_local(sa), masked_local(sb)) {
                let key = (la.min(lb), la.max(lb), bond.order);
                if !seen_bonds.contains(&key) {
                    seen_bonds.push(key);
                }
            }
        }
    }
    // Severed bonds between two visible pieces live in no fragment;
    // restore them so the visible part is the connected partial ligand.
    for severed in &result.severed_bonds {
        if let (Some(la), Some(lb)) = (masked_local(severed.a), masked_local(severed.b)) {
            let key = (la.min(lb), la.max(lb), crate::molgraph::BondOrder::Single);
            if !seen_bonds.contains(&key) {
                seen_bonds.push(key);
            }
        }
    }
    let bonds: Vec<Bond> = seen_bonds
        .iter()
        .map(|&(a, b, order)| Bond { a, b, order })
        .collect();
    let visible_graph = Molecule::new(format!("{}:masked", result.source_name), atoms, bonds)?;

    // The supervised connection runs along the target's BFS parent edge.
    let (_, edge) = target_node
        .parent_edge
        .ok_or_else(|| Error::Attach("non-root BFS node lacks a parent".into()))?;
    let target_graph = target_fragment.motif.graph();
    let local_of = |src: usize| {
        target_fragment
            .source_atoms
            .iter()
            .enumerate()
            .find(|&(local, &s)| s == src && !target_graph.atom(local).element.is_dummy())
            .map(|(local, _)| local)
    };

    let (fragment_site, motif_site, torsion) = match edge {
        TreeEdge::Severed(si) => {
            let severed = &result.severed_bonds[si];
            let (visible_end, target_end) = if local_of(severed.a).is_some() {
                (severed.b, severed.a)
            } else {
                (severed.a, severed.b)
            };
            let frag_site = ConnectionSite::Atom {
                atom: masked_local(visible_end)
                    .ok_or_else(|| Error::Attach("severed endpoint not visible".into()))?,
            };
            let target_local = local_of(target_end)
                .ok_or_else(|| Error::Attach("severed endpoint missing from target".into()))?;
            let motif_site = match target_fragment.motif.kind() {
                MotifKind::ChainLike => {
                    let dummy = target_fragment
                        .source_atoms
                        .iter()
                        .enumerate()
                        .find(|&(local, &s)| {
                            s == visible_end && target_graph.atom(local).element.is_dummy()
                        })
                        .map(|(local, _)| local)
                        .ok_or_else(|| {
                            Error::Attach("chain target lacks the placeholder dummy".into())
                        })?;
                    ConnectionSite::Dummy {
                        dummy,
                        anchor: target_local,
                    }
                }
                MotifKind::RingLike => ConnectionSite::Atom { atom: target_local },
            };
            (frag_site, motif_site, severed.torsion)
        }
        TreeEdge::Fused(p, q) => {
            let frag_site = ConnectionSite::Bond {
                from: masked_local(p)
                    .ok_or_else(|| Error::Attach("fused bond not visible".into()))?,
                to: masked_local(q)
                    .ok_or_else(|| Error::Attach("fused bond not visible".into()))?,
            };
            let motif_site = ConnectionSite::Bond {
                from: local_of(p)
                    .ok_or_else(|| Error::Attach("fused atom missing from target".into()))?,
                to: local_of(q)
                    .ok_or_else(|| Error::Attach("fused atom missing from target".into()))?,
            };
            (frag_site, motif_site, None)
        }
    };

    Ok(TrainingStep {
        ligand_name: result.source_name.clone(),
        mask_ratio: ratio,
        masked_count: masked,
        bfs_keys,
        visible: Some(visible_graph),
        target_key: target_fragment.motif.key().clone(),
        target_kind: target_fragment.motif.kind(),
        fragment_site: Some(fragment_site),
        motif_site: Some(motif_site),
        torsion,
    })
}

fn site_text(site: &Option<ConnectionSite>) -> String {
    match site {
        None => "none".into(),
        Some(ConnectionSite::Atom { atom }) => format!("atom {atom}"),
        Some(ConnectionSite::Dummy { dummy, anchor }) => format!("dummy {dummy} {anchor}"),
        Some(ConnectionSite::Slot { slot, anchor }) => format!("slot {slot} {anchor}"),
        Some(ConnectionSite::Bond { from, to }) => format!("bond {from} {to}"),
    }
}

fn torsion_text(torsion: Option<f64>) -> String {
    match torsion {
        None => "none".into(),
        Some(v) => format!("{v:.9}"),
    }
}

/// Serialize training steps as TRAJ v1 text.
pub fn write_trajectories(steps: &[TrainingStep]) -> Vec<u8> {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "TRAJ v1 {}", steps.len()).unwrap();
    for (i, step) in steps.iter().enumerate() {
        writeln!(
            out,
            "RECORD {i} ligand={} ratio={:.6} k={} motifs={}",
            step.ligand_name,
            step.mask_ratio,
            step.masked_count,
            step.bfs_keys.len()
        )
        .unwrap();
        let order: Vec<String> = step.bfs_keys.iter().map(|k| k.to_hex()).collect();
        writeln!(out, "ORDER {}", order.join(" ")).unwrap();
        match &step.visible {
            None => writeln!(out, "VISIBLE 0 0").unwrap(),
            Some(graph) => {
                writeln!(out, "VISIBLE {} {}", graph.atoms().len(), graph.bonds().len()).unwrap();
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
            }
        }
        writeln!(
            out,
            "TARGET {} {}",
            step.target_key.to_hex(),
            step.target_kind.code()
        )
        .unwrap();
        writeln!(out, "FRAGSITE {}", site_text(&step.fragment_site)).unwrap();
        writeln!(out, "MOTIFSITE {}", site_text(&step.motif_site)).unwrap();
        writeln!(out, "TORSION {}", torsion_text(step.torsion)).unwrap();
        writeln!(out, "END").unwrap();
    }
    out.into_bytes()
}

/// Serialize per-molecule generation histories as TRAJ v1 text.
pub fn write_generation_log(molecules: &[(String, Vec<HistoryEntry>)]) -> Vec<u8> {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "TRAJ v1 {}", molecules.len()).unwrap();
    for (i, (name, history)) in molecules.iter().enumerate() {
        writeln!(out, "MOL {i} name={name} steps={}", history.len()).unwrap();
        for (t, entry) in history.iter().enumerate() {
            writeln!(
                out,
                "GEN {} key={} fragsite={} motifsite={} torsion={}",
                t + 1,
                entry.motif_key.to_hex(),
                site_text(&entry.fragment_site),
                site_text(&entry.motif_site),
                torsion_text(entry.torsion)
            )
            .unwrap();
        }
    }
    out.into_bytes()
}
