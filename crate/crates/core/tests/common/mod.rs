#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qcc_core::hilbert::{SpaceDescriptor, StateVector};
use qcc_core::Complex64;

pub const CASES: u32 = 256;

pub fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

pub fn unit_phase() -> impl Strategy<Value = Complex64> {
    (0.0f64..std::f64::consts::TAU).prop_map(|t| Complex64::from_polar(1.0, t))
}

/// Dimensions of a two-factor space `a ⊗ b`.
pub fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..5, 2usize..4)
}

pub fn space(labels: [&str; 2], (da, db): (usize, usize)) -> SpaceDescriptor {
    SpaceDescriptor::new([(labels[0], da), (labels[1], db)]).unwrap()
}

/// Unnormalized amplitudes, bounded away from the zero vector.
pub fn amplitudes(dim: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(), dim).prop_filter("nonzero", |v| {
        v.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3
    })
}

pub fn state_from(space: &SpaceDescriptor, amps: &[Complex64]) -> StateVector {
    StateVector::from_dense(space.clone(), &DVector::from_column_slice(amps), 0.0).unwrap()
}

pub fn normalized_from(space: &SpaceDescriptor, amps: &[Complex64]) -> StateVector {
    state_from(space, amps).normalized().unwrap()
}

pub fn square(dim: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    prop::collection::vec(complex(), dim * dim).prop_map(move |v| DMatrix::from_vec(dim, dim, v))
}

pub fn hermitian(dim: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    square(dim).prop_map(|m| (&m + m.adjoint()).scale(0.5))
}

pub fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}
