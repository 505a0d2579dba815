//! Pluggable site-selection policies. These stand in for the learned
//! predictors: `random` draws uniformly from the offered candidates,
//! `greedy-clash-free` takes the first candidate whose attachment passes
//! the clash rule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::connect::ConnectionSite;
use crate::error::{Error, Result};
use crate::molgraph::Pocket;
use crate::motif::Vocabulary;

use super::{heuristic_first_pose_with_floor, AssemblyState, Pose, DEFAULT_CLASH_FLOOR};

/// Named baseline policies, constructible per seed for batch runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Random,
    GreedyClashFree,
}

impl PolicyKind {
    pub fn parse(name: &str) -> Option<PolicyKind> {
        match name {
            "random" => Some(PolicyKind::Random),
            "greedy-clash-free" => Some(PolicyKind::GreedyClashFree),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::GreedyClashFree => "greedy-clash-free",
        }
    }

    pub fn build(&self, seed: u64, clash_floor: f64) -> Box<dyn Policy> {
        match self {
            PolicyKind::Random => Box::new(RandomPolicy::with_clash_floor(seed, clash_floor)),
            PolicyKind::GreedyClashFree => {
                Box::new(GreedyClashFreePolicy::with_clash_floor(seed, clash_floor))
            }
        }
    }
}

/// The attachment a torsion is being chosen for.
#[derive(Debug, Clone, Copy)]
pub struct PendingBond {
    pub fragment_site: ConnectionSite,
    pub motif_index: usize,
    pub motif_site: ConnectionSite,
}

/// Selection interface for the four-step generation loop. Returned
/// choices must come from the offered candidate slices; `None` declines
/// and terminates generation.
pub trait Policy {
    fn choose_first(&mut self, pocket: &Pocket, vocabulary: &Vocabulary) -> Result<(usize, Pose)>;

    fn choose_fragment_fcs(
        &mut self,
        state: &AssemblyState,
        candidates: &[ConnectionSite],
    ) -> Option<ConnectionSite>;

    fn choose_motif_fcs(
        &mut self,
        state: &AssemblyState,
        fragment_site: ConnectionSite,
        vocabulary: &Vocabulary,
        candidates: &[(usize, ConnectionSite)],
    ) -> Option<(usize, ConnectionSite)>;

    fn choose_torsion(&mut self, state: &AssemblyState, bond: &PendingBond) -> f64;
}

/// Uniform choices over every candidate set, fully determined by the
/// seed.
pub struct RandomPolicy {
    rng: ChaCha8Rng,
    clash_floor: f64,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> RandomPolicy {
        RandomPolicy {
            rng: ChaCha8Rng::seed_from_u64(seed),
            clash_floor: DEFAULT_CLASH_FLOOR,
        }
    }

    pub fn with_clash_floor(seed: u64, clash_floor: f64) -> RandomPolicy {
        RandomPolicy {
            rng: ChaCha8Rng::seed_from_u64(seed),
            clash_floor,
        }
    }
}

impl Policy for RandomPolicy {
    fn choose_first(&mut self, pocket: &Pocket, vocabulary: &Vocabulary) -> Result<(usize, Pose)> {
        let motif_index = self.rng.random_range(0..vocabulary.len());
        let pose_seed = self.rng.random::<u64>();
        let pose = heuristic_first_pose_with_floor(
            pocket,
            &vocabulary.motifs()[motif_index],
            pose_seed,
            self.clash_floor,
        )?;
        Ok((motif_index, pose))
    }

    fn choose_fragment_fcs(
        &mut self,
        _state: &AssemblyState,
        candidates: &[ConnectionSite],
    ) -> Option<ConnectionSite> {
        if candidates.is_empty() {
            return None;
        }
        Some(candidates[self.rng.random_range(0..candidates.len())])
    }

    fn choose_motif_fcs(
        &mut self,
        _state: &AssemblyState,
        _fragment_site: ConnectionSite,
        _vocabulary: &Vocabulary,
        candidates: &[(usize, ConnectionSite)],
    ) -> Option<(usize, ConnectionSite)> {
        if candidates.is_empty() {
            return None;
        }
        Some(candidates[self.rng.random_range(0..candidates.len())])
    }

    fn choose_torsion(&mut self, _state: &AssemblyState, _bond: &PendingBond) -> f64 {
        use std::f64::consts::PI;
        self.rng.random_range(-PI..PI)
    }
}

/// Deterministic baseline: first candidate whose trial attachment passes
/// the clash rule (torsion 0). Poses still come from the seeded
/// heuristic.
pub struct GreedyClashFreePolicy {
    rng: ChaCha8Rng,
    clash_floor: f64,
}

impl GreedyClashFreePolicy {
    pub fn new(seed: u64) -> GreedyClashFreePolicy {
        GreedyClashFreePolicy {
            rng: ChaCha8Rng::seed_from_u64(seed),
            clash_floor: DEFAULT_CLASH_FLOOR,
        }
    }

    pub fn with_clash_floor(seed: u64, clash_floor: f64) -> GreedyClashFreePolicy {
        GreedyClashFreePolicy {
            rng: ChaCha8Rng::seed_from_u64(seed),
            clash_floor,
        }
    }
}

impl Policy for GreedyClashFreePolicy {
    fn choose_first(&mut self, pocket: &Pocket, vocabulary: &Vocabulary) -> Result<(usize, Pose)> {
        // Highest-frequency motif first; the vocabulary is sorted.
        for motif_index in 0..vocabulary.len() {
            let pose_seed = self.rng.random::<u64>();
            match heuristic_first_pose_with_floor(
                pocket,
                &vocabulary.motifs()[motif_index],
                pose_seed,
                self.clash_floor,
            ) {
                Ok(pose) => return Ok((motif_index, pose)),
                Err(_) => continue,
            }
        }
        Err(Error::Placement(
            "no motif admits a clash-free first pose".into(),
        ))
    }

    fn choose_fragment_fcs(
        &mut self,
        _state: &AssemblyState,
        candidates: &[ConnectionSite],
    ) -> Option<ConnectionSite> {
        candidates.first().copied()
    }

    fn choose_motif_fcs(
        &mut self,
        state: &AssemblyState,
        fragment_site: ConnectionSite,
        vocabulary: &Vocabulary,
        candidates: &[(usize, ConnectionSite)],
    ) -> Option<(usize, ConnectionSite)> {
        for &(motif_index, motif_site) in candidates {
            let motif = &vocabulary.motifs()[motif_index];
            if state.attach(fragment_site, motif, motif_site, 0.0).is_ok() {
                return Some((motif_index, motif_site));
            }
        }
        None
    }

    fn choose_torsion(&mut self, _state: &AssemblyState, _bond: &PendingBond) -> f64 {
        0.0
    }
}
