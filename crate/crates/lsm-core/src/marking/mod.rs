//! Concrete marking protocols, generic composers, and the verifier with
//! entanglement accounting.

mod catalytic;
mod compose;
mod verify;
mod x4;

pub use catalytic::{catalytic_b3_protocol, catalytic_b4_protocol};
pub use compose::{
    bell_tensor_labels, compose_m_to_nm, extend_last_two, lsm_from_lsd, product_basis_lsd,
    product_extend,
};
pub use verify::{
    cc_directions, marking_report_json, verify_marking, AssignmentLedger, AssignmentVerdict,
    BudgetOutcome, CatalyticBudget, CcDirections, EntanglementLedger, LeafLedger, MarkingVerdict,
};
pub use x4::build_x4_protocol;

#[cfg(test)]
mod tests;
