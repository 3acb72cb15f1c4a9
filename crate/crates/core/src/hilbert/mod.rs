//! Tensor-product states and operators over labeled finite-dimensional factors.
//!
//! Basis convention: a `d`-level factor has basis indices `0..d`. Kets written
//! `|1⟩, |2⟩, …, |d⟩` for qudits map to indices `0..d-1`; the dichotomic kets
//! `|0⟩, |1⟩` map to indices `0, 1`. Path states `|ψ_k⟩` (k starting at 1) sit
//! at path index `k-1`.
//!
//! States are sparse (`BTreeMap` keyed by multi-index). Dense matrices appear
//! only for structure checks and small oracles, bounded by [`DEFAULT_DENSE_CAP`].
//! Factors are always addressed by label.

mod matrices;
mod operator;
mod space;
mod state;

use num_complex::Complex64;

pub use matrices::{diagonal_phase, ket_bra, pauli_x, pauli_z, projector, swap_levels};
pub use operator::{
    LocalJson, LocalMatrix, OperatorExpr, OperatorJson, StructureReport, Term, TermJson,
};
pub use space::{Factor, SpaceDescriptor};
pub use state::{superpose, AmplitudeJson, MultiIndex, StateJson, StateVector};

#[cfg(test)]
pub(crate) use operator::max_abs_diff;
pub(crate) use operator::structure_of;

use crate::error::Result;

/// Global comparison tolerance.
pub const TOLERANCE: f64 = 1e-12;

/// Largest total dimension that will be materialized densely.
pub const DEFAULT_DENSE_CAP: usize = 4096;

pub fn make_basis_state(space: SpaceDescriptor, indices: &[usize]) -> Result<StateVector> {
    StateVector::basis(space, indices)
}

pub fn inner(bra: &StateVector, ket: &StateVector) -> Result<Complex64> {
    bra.inner(ket)
}

pub fn apply(op: &OperatorExpr, state: &StateVector) -> Result<StateVector> {
    op.apply(state)
}

/// `|⟨a|b⟩|²` for normalized inputs.
pub fn fidelity_up_to_phase(a: &StateVector, b: &StateVector) -> Result<f64> {
    a.ensure_normalized()?;
    b.ensure_normalized()?;
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

pub fn check_structure(op: &OperatorExpr) -> Result<StructureReport> {
    op.check_structure()
}
