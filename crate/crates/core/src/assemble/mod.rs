//! Autoregressive assembly state machine.
//!
//! A ligand grows motif-by-motif inside a pocket: enumerate fragment
//! connection sites, let a policy pick the focal site on the fragment
//! and in the vocabulary, attach rigidly, then fix the torsion of the
//! new bond when it is rotatable. Generation terminates when no focal
//! site can be found, the policy declines, or a limit is hit.
//!
//! The same attachment geometry drives [`reassemble`], which rebuilds a
//! fragmented molecule from its pieces and recorded torsions.

mod complex;
mod geometry;
mod policy;
mod trajectory;

pub use complex::{
    build_complex_graph, HeteroGraph, TypedEdge, LIGAND_LIGAND_CUTOFF, LIGAND_POCKET_CUTOFF,
    POCKET_POCKET_CUTOFF,
};
pub use geometry::{
    attach_atom_atom, attach_bond_bond, bond_length_lookup, ring_normal, ring_normal_for_bond,
    AtomAttachSpec, AttachedGeometry, BondAttachSpec, TorsionSpec,
};
pub use policy::{GreedyClashFreePolicy, PendingBond, Policy, PolicyKind, RandomPolicy};
pub use trajectory::{build_trajectories, write_generation_log, write_trajectories, TrainingStep};

use std::sync::Arc;

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::connect::{self, ConnectionSite, OpenSlot, SiteKind};
use crate::error::{Error, Result};
use crate::geom3d::RigidTransform;
use crate::molgraph::{perceive_rings, Atom, Bond, CanonicalKey, Molecule, Pocket, Vec3};
use crate::motif::{FragmentationResult, Motif, MotifKind, Vocabulary, OFF_AXIS_TOLERANCE};

/// Minimum allowed ligand–pocket heavy-atom distance (Å).
pub const DEFAULT_CLASH_FLOOR: f64 = 1.2;

/// Rigid pose for first-motif placement: coordinates map as
/// `x ↦ R·(x − centroid) + centroid + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Pose {
    pub fn identity() -> Pose {
        Pose {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        RigidTransform::new(self.rotation, self.translation).map(|_| ())
    }

    fn apply_about(&self, centroid: Vec3, p: Vec3) -> Vec3 {
        self.rotation * (p - centroid) + centroid + self.translation
    }
}

/// One accepted generation step.
#[derive(Debug, Clone)]
pub struct HistoryEntry {
    pub motif_key: CanonicalKey,
    pub fragment_site: Option<ConnectionSite>,
    pub motif_site: Option<ConnectionSite>,
    pub torsion: Option<f64>,
}

/// Partial ligand docked in a pocket, with open-site bookkeeping and
/// attachment history. Valence-valid at every step.
#[derive(Debug, Clone)]
pub struct AssemblyState {
    pocket: Arc<Pocket>,
    ligand: Molecule,
    open_slots: Vec<OpenSlot>,
    history: Vec<HistoryEntry>,
    clash_floor: f64,
}

/// Outcome of one generation step.
#[derive(Debug)]
pub enum StepOutcome {
    Continued(AssemblyState),
    Terminated,
}

/// Generation limits.
#[derive(Debug, Clone)]
pub struct Limits {
    /// Maximum number of placed motifs (the first one included).
    pub max_steps: usize,
    /// Stop before an attachment would push the weight past this cap.
    pub mw_cap: Option<f64>,
    /// Policy re-draws allowed when an attachment clashes or breaks
    /// valence.
    pub attach_retries: usize,
    pub clash_floor: f64,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            max_steps: 16,
            mw_cap: None,
            attach_retries: 8,
            clash_floor: DEFAULT_CLASH_FLOOR,
        }
    }
}

impl AssemblyState {
    pub fn pocket(&self) -> &Pocket {
        &self.pocket
    }

    pub fn ligand(&self) -> &Molecule {
        &self.ligand
    }

    pub fn open_slots(&self) -> &[OpenSlot] {
        &self.open_slots
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    /// Number of placed motifs (the paper's generation step t).
    pub fn step_count(&self) -> usize {
        self.history.len()
    }

    /// Candidate connection sites of the current partial ligand.
    pub fn fragment_sites(&self) -> Vec<ConnectionSite> {
        connect::enumerate_ccs_fragment(&self.ligand, &self.open_slots)
    }

    /// Attach a vocabulary motif at the given site pair. Fails on kind
    /// mismatch, valence violation, merge conflict, or pocket clash; the
    /// state is untouched on failure.
    pub fn attach(
        &self,
        fragment_site: ConnectionSite,
        motif: &Motif,
        motif_site: ConnectionSite,
        torsion: f64,
    ) -> Result<AssemblyState> {
        if fragment_site.kind() != motif_site.kind() {
            return Err(Error::Attach(format!(
                "site kinds differ: fragment {:?} vs motif {:?}",
                fragment_site.kind(),
                motif_site.kind()
            )));
        }
        let before = self.ligand.atoms().len();
        let (geometry, consumed_dummy, applied_torsion) = match fragment_site.kind() {
            SiteKind::Atom => self.attach_atom(fragment_site, motif, motif_site, torsion)?,
            SiteKind::Bond => (self.attach_bond(fragment_site, motif, motif_site)?, None, None),
        };
        self.check_new_atom_clashes(&geometry.molecule, before)?;

        let mut open_slots: Vec<OpenSlot> = self
            .open_slots
            .iter()
            .enumerate()
            .filter(|&(slot, _)| {
                !matches!(fragment_site, ConnectionSite::Slot { slot: used, .. } if used == slot)
            })
            .map(|(_, s)| s.clone())
            .collect();
        for dummy in motif.graph().dummy_indices() {
            if Some(dummy) == consumed_dummy {
                continue;
            }
            let neighbor = motif.graph().neighbors(dummy)[0].0;
            let anchor = geometry.motif_atom_map[neighbor].expect("dummy neighbor is heavy");
            open_slots.push(OpenSlot {
                anchor,
                position: geometry.placed_coords[dummy],
            });
        }

        let mut history = self.history.clone();
        history.push(HistoryEntry {
            motif_key: motif.key().clone(),
            fragment_site: Some(fragment_site),
            motif_site: Some(motif_site),
            torsion: applied_torsion,
        });

        Ok(AssemblyState {
            pocket: Arc::clone(&self.pocket),
            ligand: geometry.molecule,
            open_slots,
            history,
            clash_floor: self.clash_floor,
        })
    }

    fn attach_atom(
        &self,
        fragment_site: ConnectionSite,
        motif: &Motif,
        motif_site: ConnectionSite,
        torsion: f64,
    ) -> Result<(AttachedGeometry, Option<usize>, Option<f64>)> {
        let (fragment_atom, fragment_direction) = match fragment_site {
            ConnectionSite::Slot { slot, anchor } => {
                let slot = self
                    .open_slots
                    .get(slot)
                    .ok_or_else(|| Error::Attach(format!("open slot {slot} does not exist")))?;
                (anchor, slot.position - self.ligand.atom(anchor).coord)
            }
            ConnectionSite::Atom { atom } => {
                (atom, exocyclic_direction(&self.ligand, atom)?)
            }
            _ => return Err(Error::Attach("unsupported fragment site".into())),
        };
        let (motif_anchor, motif_direction, consumed_dummy) = match motif_site {
            ConnectionSite::Dummy { dummy, anchor } => {
                let dir = motif.graph().atom(dummy).coord - motif.graph().atom(anchor).coord;
                (anchor, dir, Some(dummy))
            }
            ConnectionSite::Atom { atom } => {
                (atom, exocyclic_direction(motif.graph(), atom)?, None)
            }
            _ => return Err(Error::Attach("unsupported motif site".into())),
        };

        let frag_elem = self.ligand.atom(fragment_atom).element;
        let motif_elem = motif.graph().atom(motif_anchor).element;
        let bond_length = bond_length_lookup(frag_elem, motif_elem);

        // Torsion references: lowest-index off-axis neighbor of each
        // bond end. Open slots and dummy placeholders count as
        // geometric neighbors; without references on both sides the
        // bond has no torsional freedom and the value is ignored.
        let frag_pos = self.ligand.atom(fragment_atom).coord;
        let fragment_ref = self.fragment_torsion_ref(fragment_atom, frag_pos, fragment_direction);
        let motif_anchor_pos = motif.graph().atom(motif_anchor).coord;
        let motif_ref = motif_torsion_ref(
            motif.graph(),
            motif_anchor,
            consumed_dummy,
            motif_anchor_pos,
            motif_direction,
        );
        let torsion_spec = match (fragment_ref, motif_ref) {
            (Some(fr), Some(mr)) => Some(TorsionSpec {
                value: torsion,
                fragment_ref: fr,
                motif_ref: mr,
            }),
            _ => None,
        };

        let applied = torsion_spec.map(|ts| ts.value);
        let spec = AtomAttachSpec {
            fragment_atom,
            fragment_direction,
            motif_anchor,
            motif_direction,
            bond_length,
            torsion: torsion_spec,
        };
        Ok((
            attach_atom_atom(&self.ligand, motif.graph(), &spec)?,
            consumed_dummy,
            applied,
        ))
    }

    fn attach_bond(
        &self,
        fragment_site: ConnectionSite,
        motif: &Motif,
        motif_site: ConnectionSite,
    ) -> Result<AttachedGeometry> {
        let (m, n) = match fragment_site {
            ConnectionSite::Bond { from, to } => (from, to),
            _ => return Err(Error::Attach("fragment site is not a bond".into())),
        };
        let (i, j) = match motif_site {
            ConnectionSite::Bond { from, to } => (from, to),
            _ => return Err(Error::Attach("motif site is not a bond".into())),
        };
        if motif.kind() != MotifKind::RingLike {
            return Err(Error::Attach("bond sites require a ring-like motif".into()));
        }
        let frag_rings = perceive_rings(&self.ligand);
        let frag_normal = ring_normal_for_bond(&self.ligand, &frag_rings, m, n)?;
        let motif_rings = perceive_rings(motif.graph());
        let motif_normal = ring_normal_for_bond(motif.graph(), &motif_rings, i, j)?;
        let spec = BondAttachSpec {
            fragment_bond: (m, n),
            motif_bond: (i, j),
            motif_normal,
            // Opposite traversal normals put the incoming ring across
            // the shared bond instead of on top of the existing one.
            target_normal: -frag_normal,
            extra_merges: Vec::new(),
        };
        attach_bond_bond(&self.ligand, motif.graph(), &spec)
    }

    /// Off-axis reference position next to a fragment-site atom:
    /// bonded ligand neighbors first, then open-slot positions anchored
    /// at the same atom.
    fn fragment_torsion_ref(&self, atom: usize, origin: Vec3, axis: Vec3) -> Option<Vec3> {
        let axis_end = origin + axis;
        let mut neighbors: Vec<usize> = self
            .ligand
            .neighbors(atom)
            .iter()
            .map(|&(n, _)| n)
            .collect();
        neighbors.sort_unstable();
        for n in neighbors {
            let p = self.ligand.atom(n).coord;
            if perp_distance(p, origin, axis_end) > OFF_AXIS_TOLERANCE {
                return Some(p);
            }
        }
        self.open_slots
            .iter()
            .filter(|s| s.anchor == atom)
            .map(|s| s.position)
            .find(|&p| perp_distance(p, origin, axis_end) > OFF_AXIS_TOLERANCE)
    }

    fn check_new_atom_clashes(&self, merged: &Molecule, first_new: usize) -> Result<()> {
        for i in first_new..merged.atoms().len() {
            let p = merged.atom(i).coord;
            for patom in self.pocket.atoms() {
                let d = (p - patom.coord).norm();
                if d < self.clash_floor {
                    return Err(Error::Clash(format!(
                        "placed atom {i} sits {d:.2} Å from a pocket atom (floor {})",
                        self.clash_floor
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Place the first motif in the pocket with the given pose.
pub fn place_first_motif(pocket: &Pocket, motif: &Motif, pose: &Pose) -> Result<AssemblyState> {
    place_first_motif_with_floor(pocket, motif, pose, DEFAULT_CLASH_FLOOR)
}

pub fn place_first_motif_with_floor(
    pocket: &Pocket,
    motif: &Motif,
    pose: &Pose,
    clash_floor: f64,
) -> Result<AssemblyState> {
    pose.validate()?;
    let graph = motif.graph();
    let centroid = graph.centroid();
    let placed: Vec<Vec3> = graph
        .atoms()
        .iter()
        .map(|a| pose.apply_about(centroid, a.coord))
        .collect();

    let mut atoms = Vec::new();
    let mut bonds = Vec::new();
    let mut local_map = vec![None; graph.atoms().len()];
    for (i, atom) in graph.atoms().iter().enumerate() {
        if atom.element.is_dummy() {
            continue;
        }
        local_map[i] = Some(atoms.len());
        atoms.push(Atom::new(atom.element, atom.charge, placed[i]));
    }
    for bond in graph.bonds() {
        if let (Some(a), Some(b)) = (local_map[bond.a], local_map[bond.b]) {
            bonds.push(Bond {
                a,
                b,
                order: bond.order,
            });
        }
    }
    let ligand = Molecule::new("generated", atoms, bonds)?;

    for atom in ligand.atoms() {
        for patom in pocket.atoms() {
            let d = (atom.coord - patom.coord).norm();
            if d < clash_floor {
                return Err(Error::Clash(format!(
                    "first motif clashes with the pocket ({d:.2} Å < {clash_floor})"
                )));
            }
        }
    }

    let open_slots = graph
        .dummy_indices()
        .into_iter()
        .map(|dummy| {
            let neighbor = graph.neighbors(dummy)[0].0;
            OpenSlot {
                anchor: local_map[neighbor].expect("dummy neighbor is heavy"),
                position: placed[dummy],
            }
        })
        .collect();

    Ok(AssemblyState {
        pocket: Arc::new(pocket.clone()),
        ligand,
        open_slots,
        history: vec![HistoryEntry {
            motif_key: motif.key().clone(),
            fragment_site: None,
            motif_site: None,
            torsion: None,
        }],
        clash_floor,
    })
}

/// Deterministic baseline pose: center the motif on the pocket centroid,
/// sample a uniform rotation from the seed, and retreat along the clash
/// gradient until the floor passes. Errors when no clash-free pose is
/// found within the retry budget.
pub fn heuristic_first_pose(pocket: &Pocket, motif: &Motif, seed: u64) -> Result<Pose> {
    heuristic_first_pose_with_floor(pocket, motif, seed, DEFAULT_CLASH_FLOOR)
}

pub fn heuristic_first_pose_with_floor(
    pocket: &Pocket,
    motif: &Motif,
    seed: u64,
    clash_floor: f64,
) -> Result<Pose> {
    const ROTATION_RETRIES: usize = 32;
    const RETREAT_STEP: f64 = 0.25;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pocket_centroid = pocket.centroid();
    let pocket_radius = pocket
        .atoms()
        .iter()
        .map(|a| (a.coord - pocket_centroid).norm())
        .fold(0.0_f64, f64::max)
        + 2.0;
    let motif_centroid = motif.graph().centroid();
    let coords = motif.graph().coords();

    for _ in 0..ROTATION_RETRIES {
        let rotation = uniform_rotation(&mut rng);
        let mut translation = pocket_centroid - motif_centroid;
        loop {
            let pose = Pose {
                rotation,
                translation,
            };
            let placed: Vec<Vec3> = coords
                .iter()
                .map(|&p| pose.apply_about(motif_centroid, p))
                .collect();
            let mut gradient = Vec3::zeros();
            let mut clashes = 0;
            for p in &placed {
                for patom in pocket.atoms() {
                    let delta = p - patom.coord;
                    let d = delta.norm();
                    if d < clash_floor {
                        clashes += 1;
                        if d > 1e-9 {
                            gradient += delta / d;
                        }
                    }
                }
            }
            if clashes == 0 {
                return Ok(pose);
            }
            let dir = if gradient.norm() > 1e-9 {
                gradient / gradient.norm()
            } else {
                Vec3::new(1.0, 0.0, 0.0)
            };
            translation += dir * RETREAT_STEP;
            let offset = translation - (pocket_centroid - motif_centroid);
            if offset.norm() > pocket_radius {
                break; // left the pocket; try another rotation
            }
        }
    }
    Err(Error::Placement(format!(
        "no clash-free first-motif pose after {ROTATION_RETRIES} rotations"
    )))
}

/// Uniform random proper rotation (Shoemake's quaternion method).
fn uniform_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let u3: f64 = rng.random();
    let tau = std::f64::consts::TAU;
    let q = [
        (1.0 - u1).sqrt() * (tau * u2).sin(),
        (1.0 - u1).sqrt() * (tau * u2).cos(),
        u1.sqrt() * (tau * u3).sin(),
        u1.sqrt() * (tau * u3).cos(),
    ];
    let (x, y, z, w) = (q[0], q[1], q[2], q[3]);
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - z * w),
        2.0 * (x * z + y * w),
        2.0 * (x * y + z * w),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - x * w),
        2.0 * (x * z - y * w),
        2.0 * (y * z + x * w),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// Run the four-step generation loop once.
pub fn step(
    state: &AssemblyState,
    vocabulary: &Vocabulary,
    policy: &mut dyn Policy,
) -> Result<StepOutcome> {
    let fragment_candidates = state.fragment_sites();
    if fragment_candidates.is_empty() {
        return Ok(StepOutcome::Terminated);
    }
    let fragment_site = match policy.choose_fragment_fcs(state, &fragment_candidates) {
        None => return Ok(StepOutcome::Terminated),
        Some(site) => site,
    };
    if !fragment_candidates.contains(&fragment_site) {
        return Err(Error::PolicyContract(format!(
            "fragment site {fragment_site:?} was not offered"
        )));
    }

    let kind = fragment_site.kind();
    let motif_candidates: Vec<(usize, ConnectionSite)> = (0..vocabulary.len())
        .flat_map(|midx| {
            vocabulary
                .site_classes(midx)
                .representatives()
                .into_iter()
                .filter(|site| site.kind() == kind)
                .map(move |site| (midx, site))
        })
        .collect();
    if motif_candidates.is_empty() {
        return Ok(StepOutcome::Terminated);
    }
    let (motif_index, motif_site) =
        match policy.choose_motif_fcs(state, fragment_site, vocabulary, &motif_candidates) {
            None => return Ok(StepOutcome::Terminated),
            Some(choice) => choice,
        };
    if !motif_candidates.contains(&(motif_index, motif_site)) {
        return Err(Error::PolicyContract(format!(
            "motif site ({motif_index}, {motif_site:?}) was not offered"
        )));
    }

    let torsion = match kind {
        SiteKind::Atom => policy.choose_torsion(
            state,
            &PendingBond {
                fragment_site,
                motif_index,
                motif_site,
            },
        ),
        SiteKind::Bond => 0.0,
    };

    let motif = &vocabulary.motifs()[motif_index];
    let next = state.attach(fragment_site, motif, motif_site, torsion)?;
    Ok(StepOutcome::Continued(next))
}

/// Grow a ligand until termination, `max_steps`, or the weight cap.
/// Attachment failures (clash, valence) consume policy retries; when the
/// budget is exhausted growth stops and the current valid ligand stands.
pub fn run(
    pocket: &Pocket,
    vocabulary: &Vocabulary,
    policy: &mut dyn Policy,
    limits: &Limits,
) -> Result<AssemblyState> {
    if vocabulary.is_empty() {
        return Err(Error::Placement("vocabulary is empty".into()));
    }
    let (motif_index, pose) = policy.choose_first(pocket, vocabulary)?;
    let motif = vocabulary
        .motifs()
        .get(motif_index)
        .ok_or_else(|| Error::PolicyContract(format!("motif index {motif_index} out of range")))?;
    let mut state = place_first_motif_with_floor(pocket, motif, &pose, limits.clash_floor)?;

    'grow: while state.step_count() < limits.max_steps {
        let mut attempts = 0;
        loop {
            match step(&state, vocabulary, policy) {
                Ok(StepOutcome::Terminated) => break 'grow,
                Ok(StepOutcome::Continued(next)) => {
                    if let Some(cap) = limits.mw_cap {
                        if next.ligand().molecular_weight() > cap {
                            break 'grow;
                        }
                    }
                    state = next;
                    break;
                }
                Err(Error::Attach(_)) | Err(Error::Clash(_)) => {
                    attempts += 1;
                    if attempts >= limits.attach_retries {
                        break 'grow;
                    }
                }
                Err(other) => return Err(other),
            }
        }
    }
    Ok(state)
}

/// Run `n` generations with per-sample seeds `base_seed + i`, in
/// parallel under the `parallel` feature. Output order and content are
/// identical in both execution modes.
pub fn run_batch(
    pocket: &Pocket,
    vocabulary: &Vocabulary,
    policy: PolicyKind,
    limits: &Limits,
    base_seed: u64,
    n: usize,
) -> Vec<Result<AssemblyState>> {
    crate::exec::map_indexed(n, |i| {
        let mut p = policy.build(base_seed.wrapping_add(i as u64), limits.clash_floor);
        run(pocket, vocabulary, p.as_mut(), limits)
    })
}

/// Rebuild a fragmented molecule by replaying severed bonds and fused
/// shares through the attachment geometry. Exact for sources whose
/// rotatable bonds sit at the table lengths.
pub fn reassemble(result: &FragmentationResult) -> Result<Molecule> {
    let fragments = &result.fragments;
    if fragments.is_empty() {
        return Err(Error::Attach("fragmentation result has no fragments".into()));
    }

    // source atom -> (fragment, local) for heavy occurrences.
    let mut occurrences: Vec<Vec<(usize, usize)>> = vec![Vec::new(); result.source_atom_count];
    for (fi, fragment) in fragments.iter().enumerate() {
        for (local, &src) in fragment.source_atoms.iter().enumerate() {
            if !fragment.motif.graph().atom(local).element.is_dummy() {
                occurrences[src].push((fi, local));
            }
        }
    }

    // Fused sibling pairs: fragments sharing a source bond.
    let mut fused_pairs: Vec<(usize, usize, usize, usize)> = Vec::new();
    for fi in 0..fragments.len() {
        for fj in fi + 1..fragments.len() {
            if let Some((p, q)) = shared_source_bond(fragments, fi, fj) {
                fused_pairs.push((fi, fj, p, q));
            }
        }
    }

    let (mut ligand, mut atom_of_source) = seed_assembly(result, 0)?;
    let mut placed = vec![false; fragments.len()];
    placed[0] = true;
    let mut fused_done = vec![false; fused_pairs.len()];
    let mut severed_done = vec![false; result.severed_bonds.len()];

    while placed.iter().any(|p| !p) {
        let mut progressed = false;

        for (pi, &(fi, fj, p, q)) in fused_pairs.iter().enumerate() {
            if fused_done[pi] || placed[fi] == placed[fj] {
                continue;
            }
            let incoming = if placed[fi] { fj } else { fi };
            merge_fused_sibling(
                result,
                incoming,
                (p, q),
                &mut ligand,
                &mut atom_of_source,
            )?;
            placed[incoming] = true;
            fused_done[pi] = true;
            progressed = true;
            break;
        }
        if progressed {
            continue;
        }

        for (si, severed) in result.severed_bonds.iter().enumerate() {
            if severed_done[si] {
                continue;
            }
            let a_placed = atom_of_source[severed.a].is_some();
            let b_placed = atom_of_source[severed.b].is_some();
            if a_placed == b_placed {
                continue;
            }
            let (placed_end, incoming_end, ref_placed, ref_incoming) = if a_placed {
                (severed.a, severed.b, severed.ref_a, severed.ref_b)
            } else {
                (severed.b, severed.a, severed.ref_b, severed.ref_a)
            };
            let incoming = occurrences[incoming_end]
                .iter()
                .map(|&(fi, _)| fi)
                .find(|&fi| !placed[fi])
                .ok_or_else(|| {
                    Error::Attach("severed bond endpoint has no unplaced fragment".into())
                })?;
            attach_severed(
                result,
                incoming,
                severed,
                placed_end,
                incoming_end,
                ref_placed,
                ref_incoming,
                &mut ligand,
                &mut atom_of_source,
            )?;
            placed[incoming] = true;
            severed_done[si] = true;
            progressed = true;
            break;
        }

        if !progressed {
            return Err(Error::Attach(
                "inconsistent fragmentation result: pieces cannot be reconnected".into(),
            ));
        }
    }

    let mut rebuilt = ligand;
    rebuilt.set_name(result.source_name.clone());
    if rebuilt.atoms().len() != result.source_atom_count {
        return Err(Error::Attach(format!(
            "reassembled atom count {} does not match source {}",
            rebuilt.atoms().len(),
            result.source_atom_count
        )));
    }
    Ok(rebuilt)
}

type SourceMap = Vec<Option<usize>>;

fn seed_assembly(result: &FragmentationResult, fi: usize) -> Result<(Molecule, SourceMap)> {
    let fragment = &result.fragments[fi];
    let graph = fragment.motif.graph();
    let mut atoms = Vec::new();
    let mut bonds = Vec::new();
    let mut atom_of_source: SourceMap = vec![None; result.source_atom_count];
    let mut local_map = vec![None; graph.atoms().len()];
    for (local, atom) in graph.atoms().iter().enumerate() {
        if atom.element.is_dummy() {
            continue;
        }
        local_map[local] = Some(atoms.len());
        atom_of_source[fragment.source_atoms[local]] = Some(atoms.len());
        atoms.push(atom.clone());
    }
    for bond in graph.bonds() {
        if let (Some(a), Some(b)) = (local_map[bond.a], local_map[bond.b]) {
            bonds.push(Bond {
                a,
                b,
                order: bond.order,
            });
        }
    }
    Ok((Molecule::new(&result.source_name, atoms, bonds)?, atom_of_source))
}

pub(super) fn shared_source_bond(
    fragments: &[crate::motif::Fragment],
    fi: usize,
    fj: usize,
) -> Option<(usize, usize)> {
    // Dummy bonds mirror severed bonds on both sides; only heavy-heavy
    // bonds count as genuine shares.
    let bonds_of = |f: &crate::motif::Fragment| {
        let graph = f.motif.graph();
        graph
            .bonds()
            .iter()
            .filter(|b| {
                !graph.atom(b.a).element.is_dummy() && !graph.atom(b.b).element.is_dummy()
            })
            .map(|b| {
                let (p, q) = (f.source_atoms[b.a], f.source_atoms[b.b]);
                (p.min(q), p.max(q))
            })
            .collect::<Vec<_>>()
    };
    let a = bonds_of(&fragments[fi]);
    let b = bonds_of(&fragments[fj]);
    let mut shared: Vec<(usize, usize)> = a.into_iter().filter(|pq| b.contains(pq)).collect();
    shared.sort_unstable();
    shared.first().copied()
}

fn merge_fused_sibling(
    result: &FragmentationResult,
    incoming: usize,
    shared: (usize, usize),
    ligand: &mut Molecule,
    atom_of_source: &mut SourceMap,
) -> Result<()> {
    let fragment = &result.fragments[incoming];
    let graph = fragment.motif.graph();
    let local_of_source = |src: usize| {
        fragment
            .source_atoms
            .iter()
            .position(|&s| s == src)
            .ok_or_else(|| Error::Attach("shared atom missing from sibling".into()))
    };
    let i = local_of_source(shared.0)?;
    let j = local_of_source(shared.1)?;
    let m = atom_of_source[shared.0].expect("shared atom placed");
    let n = atom_of_source[shared.1].expect("shared atom placed");

    // The incoming sibling still sits in the source frame, so its own
    // traversal normal doubles as the alignment target; the placed
    // shared bond carries identical coordinates and the Kabsch map
    // reduces to the identity.
    let rings = perceive_rings(graph);
    let motif_normal = ring_normal_for_bond(graph, &rings, i, j)?;

    let mut extra_merges = Vec::new();
    for (local, &src) in fragment.source_atoms.iter().enumerate() {
        if local == i || local == j || graph.atom(local).element.is_dummy() {
            continue;
        }
        if let Some(existing) = atom_of_source[src] {
            extra_merges.push((local, existing));
        }
    }

    let spec = BondAttachSpec {
        fragment_bond: (m, n),
        motif_bond: (i, j),
        motif_normal,
        target_normal: motif_normal,
        extra_merges,
    };
    let geometry = attach_bond_bond(ligand, graph, &spec)?;
    update_source_map(fragment, &geometry, atom_of_source);
    *ligand = geometry.molecule;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn attach_severed(
    result: &FragmentationResult,
    incoming: usize,
    severed: &crate::motif::SeveredBond,
    placed_end: usize,
    incoming_end: usize,
    ref_placed: Option<usize>,
    ref_incoming: Option<usize>,
    ligand: &mut Molecule,
    atom_of_source: &mut SourceMap,
) -> Result<()> {
    let fragment = &result.fragments[incoming];
    let graph = fragment.motif.graph();
    let local_of_source = |src: usize| {
        fragment
            .source_atoms
            .iter()
            .enumerate()
            .find(|&(local, &s)| s == src && !graph.atom(local).element.is_dummy())
            .map(|(local, _)| local)
            .ok_or_else(|| Error::Attach("severed endpoint missing from fragment".into()))
    };
    let anchor_local = local_of_source(incoming_end)?;
    let fragment_atom = atom_of_source[placed_end].expect("placed endpoint mapped");

    let placed_pos = ligand.atom(fragment_atom).coord;
    let incoming_src_pos = graph.atom(anchor_local).coord;
    let fragment_direction = incoming_src_pos - placed_pos;
    let motif_direction = placed_pos - incoming_src_pos;
    let bond_length = bond_length_lookup(
        ligand.atom(fragment_atom).element,
        graph.atom(anchor_local).element,
    );

    // References are direct neighbors of the severed bond. On the
    // placed side the source position doubles as the reference (the
    // assembly reproduces source coordinates); on the incoming side
    // the neighbor appears in the fragment either as a heavy atom or
    // as its dummy placeholder, at the same position.
    let torsion = match (severed.torsion, ref_placed, ref_incoming) {
        (Some(value), Some(rp), Some(ri)) => {
            let fragment_ref = source_position(result, rp)
                .ok_or_else(|| Error::Attach("torsion reference missing from pieces".into()))?;
            let motif_ref = fragment
                .source_atoms
                .iter()
                .position(|&s| s == ri)
                .ok_or_else(|| Error::Attach("torsion reference missing from fragment".into()))?;
            Some(TorsionSpec {
                value,
                fragment_ref,
                motif_ref,
            })
        }
        _ => None,
    };

    let spec = AtomAttachSpec {
        fragment_atom,
        fragment_direction,
        motif_anchor: anchor_local,
        motif_direction,
        bond_length,
        torsion,
    };
    let geometry = attach_atom_atom(ligand, graph, &spec)?;
    update_source_map(fragment, &geometry, atom_of_source);
    *ligand = geometry.molecule;
    Ok(())
}

/// Source coordinate of an atom, looked up in any fragment that holds
/// it (pieces keep source coordinates verbatim).
fn source_position(result: &FragmentationResult, src: usize) -> Option<Vec3> {
    result.fragments.iter().find_map(|f| {
        f.source_atoms
            .iter()
            .position(|&s| s == src)
            .map(|local| f.motif.graph().atom(local).coord)
    })
}

fn update_source_map(
    fragment: &crate::motif::Fragment,
    geometry: &AttachedGeometry,
    atom_of_source: &mut SourceMap,
) {
    let graph = fragment.motif.graph();
    for (local, &src) in fragment.source_atoms.iter().enumerate() {
        if graph.atom(local).element.is_dummy() {
            continue;
        }
        if let Some(new_idx) = geometry.motif_atom_map[local] {
            atom_of_source[src] = Some(new_idx);
        }
    }
}

/// Off-axis reference atom next to a motif anchor (dummies allowed; the
/// consumed dummy lies on the axis and is excluded).
fn motif_torsion_ref(
    graph: &Molecule,
    anchor: usize,
    consumed_dummy: Option<usize>,
    origin: Vec3,
    axis: Vec3,
) -> Option<usize> {
    let axis_end = origin + axis;
    let mut neighbors: Vec<usize> = graph
        .neighbors(anchor)
        .iter()
        .map(|&(n, _)| n)
        .filter(|&n| Some(n) != consumed_dummy)
        .collect();
    neighbors.sort_unstable();
    neighbors
        .into_iter()
        .find(|&n| perp_distance(graph.atom(n).coord, origin, axis_end) > OFF_AXIS_TOLERANCE)
}

/// Outward direction for a new substituent on a ring atom: opposite the
/// normalized sum of the existing bond directions.
fn exocyclic_direction(mol: &Molecule, atom: usize) -> Result<Vec3> {
    let pos = mol.atom(atom).coord;
    let mut sum = Vec3::zeros();
    for &(n, _) in mol.neighbors(atom) {
        let d = mol.atom(n).coord - pos;
        let norm = d.norm();
        if norm > 1e-9 {
            sum += d / norm;
        }
    }
    let dir = -sum;
    if dir.norm() < 1e-6 {
        return Err(Error::Attach(format!(
            "atom {atom} has a symmetric bond environment; no outward direction"
        )));
    }
    Ok(dir)
}

fn perp_distance(p: Vec3, line_a: Vec3, line_b: Vec3) -> f64 {
    let dir = line_b - line_a;
    let norm = dir.norm();
    if norm < 1e-12 {
        return (p - line_a).norm();
    }
    (p - line_a).cross(&(dir / norm)).norm()
}
