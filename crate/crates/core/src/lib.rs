//! Fragment-wise molecule assembly around conformation-preserving motifs.
//!
//! The crate covers the non-neural core of a pocket-conditioned molecule
//! generator plus its evaluation tooling:
//!
//! - [`molgraph`]: molecular/pocket data model, SDF and PDB I/O, ring
//!   perception, valence accounting, canonical graph labeling.
//! - [`geom3d`]: Kabsch superposition, RMSD, dihedrals, bond rotations.
//! - [`motif`]: conformal motif extraction — rotatable-bond detection,
//!   fragmentation, fused-ring decomposition, dummy-atom augmented chains,
//!   vocabulary construction with stored conformations.
//! - [`connect`]: connection-site enumeration and reduction to equivalence
//!   classes via graph-isomorphism testing.
//! - [`assemble`]: the autoregressive assembly state machine — first-motif
//!   placement, site selection through a pluggable policy, rigid geometric
//!   attachment, torsion assignment, complex-graph construction, and
//!   training-trajectory export.
//! - [`metrics`]: distance/angle distributions with Jensen-Shannon
//!   divergence, conformer matching via differential evolution,
//!   molecular-weight-constrained set filtering, docking-input preparation.
//!
//! Corpus-level loops (fragmentation, histogram pooling, batched conformer
//! matching, batched generation) run data-parallel under the default
//! `parallel` feature and fall back to sequential iteration without it.
//! All batch entry points produce identical, deterministic output in both
//! modes.

pub mod assemble;
pub mod connect;
pub mod error;
mod exec;
#[cfg(feature = "fixtures")]
pub mod fixtures;
pub mod geom3d;
pub mod metrics;
pub mod molgraph;
pub mod motif;

pub use error::{Error, Result};
