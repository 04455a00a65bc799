//! Dense simulation and exact verification of local state marking (LSM)
//! protocols.
//!
//! In an m-LSM task, `m` states drawn without replacement from a known set of
//! pairwise orthogonal multipartite states are distributed among spatially
//! separated parties, who must identify every slot's state using only local
//! operations and classical communication (LOCC). This crate provides:
//!
//! - [`qcore`]: dense pure-state linear algebra — tensor composition, local
//!   unitaries, projective measurement, Schmidt decomposition, entanglement
//!   entropy.
//! - [`locc`]: LOCC protocols as finite trees of local steps with classical
//!   branching, executed exhaustively over all branches.
//! - [`ensembles`]: the built-in state sets, permutation ensembles, counting
//!   bounds, and communication-rate comparisons.
//! - [`marking`]: concrete marking protocols (the X4 set, catalytic Bell-basis
//!   protocols), generic composers, and a verifier with per-branch
//!   entanglement accounting.
//! - [`oneway`]: a numerical feasibility search for the one-way-LOCC
//!   distinguishability criterion of maximally entangled ensembles.
//!
//! Everything is deterministic under a fixed seed; all randomness flows
//! through caller-supplied seeded generators.

pub mod ensembles;
pub mod error;
pub mod locc;
pub mod marking;
pub mod oneway;
pub mod qcore;
pub mod report;

pub use error::{LsmError, Result};

/// Tolerance for normalization, unitarity, orthogonality, and probability
/// checks. Double precision leaves several orders of headroom below this.
pub const TOL_NORM: f64 = 1e-9;

/// Branches with conditional probability below this are dropped instead of
/// normalizing a null vector.
pub const PRUNE_PROBABILITY: f64 = 1e-12;
