use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LsmError, Result};
use crate::qcore::{PureState, UnitaryOp};
use crate::TOL_NORM;

use super::node::{Basis, MeasureNode, ProtocolNode, TeleportNode, UnitaryNode};

/// Expands a teleport node into a Bell measurement at the sender followed by
/// outcome-conditioned corrections at the receiver, using the resource pair
/// found in `state`.
///
/// Any maximally entangled qubit pair is accepted as a resource; the
/// correction table is conjugated by the local unitary relating it to the
/// standard `phi+` pair. With a `phi+` resource the corrections are the
/// familiar `{I, σz, σx, σz·σx}` for outcomes `phi+ phi- psi+ psi-`.
pub fn teleport_expand(node: &TeleportNode, state: &PureState) -> Result<ProtocolNode> {
    let dims = state.dims();
    for f in [node.source, node.resource_sender, node.resource_receiver] {
        if f >= dims.len() {
            return Err(LsmError::InvalidArgument(format!("teleport factor {f} out of range")));
        }
        if dims[f] != 2 {
            return Err(LsmError::InvalidArgument(
                "teleportation is implemented for qubit factors".into(),
            ));
        }
    }
    let pair = state
        .factor_state(&[node.resource_sender, node.resource_receiver])?
        .ok_or_else(|| {
            LsmError::ResourceInvalid("resource pair is entangled with other factors".into())
        })?;

    // Amplitude matrix M with row = sender half, column = receiver half.
    let m = DMatrix::from_fn(2, 2, |i, j| pair[2 * i + j]);
    let sv = m.clone().svd(false, false).singular_values;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    if sv.iter().any(|s| (s - h).abs() > TOL_NORM) {
        return Err(LsmError::ResourceInvalid(format!(
            "resource pair is not maximally entangled (Schmidt spectrum {:?})",
            sv.as_slice()
        )));
    }

    // pair = (I ⊗ B)|phi+⟩ with B = √2 Mᵀ.
    let b = m.transpose() * Complex64::new(std::f64::consts::SQRT_2, 0.0);
    let paulis = pauli_errors();
    let mut children = BTreeMap::new();
    for (k, err) in paulis.iter().enumerate() {
        // Receiver sees B·E_k|ψ⟩; undo with (B·E_k)† = E_k†·B†.
        let fix = UnitaryOp::new(err.adjoint() * b.adjoint())?;
        children.insert(
            k,
            ProtocolNode::Unitary(UnitaryNode {
                label: format!("{}/fix{}", node.label, k),
                party: node.receiver,
                factors: vec![node.resource_receiver],
                op: fix,
                child: node.child.clone(),
            }),
        );
    }
    Ok(ProtocolNode::Measure(MeasureNode {
        label: format!("{}/bm", node.label),
        party: node.sender,
        factors: vec![node.source, node.resource_sender],
        basis: Basis::Bell,
        classes: None,
        children,
    }))
}

/// Pauli errors on the receiver half for Bell outcomes `phi+ phi- psi+ psi-`
/// with a `phi+` resource.
fn pauli_errors() -> [DMatrix<Complex64>; 4] {
    let i2 = UnitaryOp::identity(2).matrix().clone();
    let z = UnitaryOp::pauli_z().matrix().clone();
    let x = UnitaryOp::pauli_x().matrix().clone();
    let xz = &x * &z;
    [i2, z, x, xz]
}
