//! Small dense local matrices used to build observables and gates.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::operator::LocalMatrix;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn pauli_x() -> LocalMatrix {
    swap_levels(2, 0, 1)
}

pub fn pauli_z() -> LocalMatrix {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 0)] = one();
    m[(1, 1)] = -one();
    m
}

/// `|k⟩⟨k|` on a `dim`-level factor.
pub fn projector(dim: usize, k: usize) -> LocalMatrix {
    ket_bra(dim, k, k)
}

/// `|row⟩⟨col|`.
pub fn ket_bra(dim: usize, row: usize, col: usize) -> LocalMatrix {
    let mut m = DMatrix::zeros(dim, dim);
    m[(row, col)] = one();
    m
}

/// `|a⟩⟨b| + |b⟩⟨a|`, the two-level "σx" embedded in a `dim`-level factor.
pub fn swap_levels(dim: usize, a: usize, b: usize) -> LocalMatrix {
    ket_bra(dim, a, b) + ket_bra(dim, b, a)
}

pub fn diagonal_phase(dim: usize, k: usize, phase: Complex64) -> LocalMatrix {
    let mut m = DMatrix::identity(dim, dim);
    m[(k, k)] = phase;
    m
}
