//! LOCC protocols as finite trees of local steps with classical branching.
//!
//! A protocol is executed exhaustively: every measurement outcome with
//! non-negligible probability spawns a branch, and every branch runs to a
//! Conclude leaf. Locality is enforced against a [`PartyLayout`]: a node may
//! only touch factors held by its own party. Classical communication is
//! implicit and two-way; [`ProtocolNode::is_one_way`] provides a static
//! check for one-way protocols.
//!
//! [`PartyLayout`]: crate::qcore::PartyLayout

mod execute;
mod json;
mod node;
mod steps;
mod teleport;

pub use execute::execute;
pub use json::{protocol_from_json, protocol_to_json};
pub use node::{
    Basis, BranchOutcome, BranchTree, ConcludeNode, MeasureNode, PrepareNode, ProtocolNode,
    TeleportNode, TranscriptEntry, UnitaryNode,
};
pub use steps::{bell_pair_discriminator, correlated_pauli_step, CoarseClass, Pauli};
pub use teleport::teleport_expand;

#[cfg(test)]
mod tests;
