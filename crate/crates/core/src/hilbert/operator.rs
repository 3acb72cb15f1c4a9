use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::space::SpaceDescriptor;
use super::state::{MultiIndex, StateVector};
use super::{DEFAULT_DENSE_CAP, TOLERANCE};
use crate::error::{Error, Result};

pub type LocalMatrix = DMatrix<Complex64>;

/// `coeff · ⊗_label locals[label]`, identity on every factor not named.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub locals: BTreeMap<String, LocalMatrix>,
}

/// Sum of tensor-product terms over a fixed space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorExpr {
    space: SpaceDescriptor,
    terms: Vec<Term>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub hermitian: bool,
    pub unitary: bool,
    pub projector: bool,
}

impl OperatorExpr {
    pub fn identity(space: SpaceDescriptor) -> Self {
        Self::from_terms(
            space,
            vec![Term {
                coeff: Complex64::new(1.0, 0.0),
                locals: BTreeMap::new(),
            }],
        )
        .expect("identity term has no local matrices to validate")
    }

    pub fn zero(space: SpaceDescriptor) -> Self {
        Self {
            space,
            terms: Vec::new(),
        }
    }

    /// A single local matrix on `label`, identity elsewhere.
    pub fn local(space: SpaceDescriptor, label: &str, matrix: LocalMatrix) -> Result<Self> {
        Self::product(space, [(label, matrix)])
    }

    /// One tensor-product term with unit coefficient.
    pub fn product<'a, I>(space: SpaceDescriptor, locals: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, LocalMatrix)>,
    {
        let mut map = BTreeMap::new();
        for (label, m) in locals {
            if map.insert(label.to_string(), m).is_some() {
                return Err(Error::Structure(format!(
                    "factor `{label}` appears twice in one product term"
                )));
            }
        }
        Self::from_terms(
            space,
            vec![Term {
                coeff: Complex64::new(1.0, 0.0),
                locals: map,
            }],
        )
    }

    pub fn from_terms(space: SpaceDescriptor, terms: Vec<Term>) -> Result<Self> {
        for term in &terms {
            for (label, m) in &term.locals {
                let dim = space.dim_of(label)?;
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(Error::LocalShape {
                        factor: label.clone(),
                        rows: m.nrows(),
                        cols: m.ncols(),
                        dim,
                    });
                }
            }
        }
        Ok(Self { space, terms })
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff * c,
                locals: t.locals.clone(),
            })
            .collect();
        Self {
            space: self.space.clone(),
            terms,
        }
    }

    pub fn plus(&self, other: &OperatorExpr) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self {
            space: self.space.clone(),
            terms,
        })
    }

    /// Operator product `self · other` (other acts first).
    pub fn compose(&self, other: &OperatorExpr) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut locals = a.locals.clone();
                for (label, mb) in &b.locals {
                    locals
                        .entry(label.clone())
                        .and_modify(|ma| *ma = &*ma * mb)
                        .or_insert_with(|| mb.clone());
                }
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    locals,
                });
            }
        }
        Ok(Self {
            space: self.space.clone(),
            terms,
        })
    }

    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff.conj(),
                locals: t
                    .locals
                    .iter()
                    .map(|(k, m)| (k.clone(), m.adjoint()))
                    .collect(),
            })
            .collect();
        Self {
            space: self.space.clone(),
            terms,
        }
    }

    /// Sparse action on a state; each term expands only along the nonzero
    /// entries of the columns it touches.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.space.ensure_same(state.space())?;
        let mut acc: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for term in &self.terms {
            let locals: Vec<(usize, &LocalMatrix)> = term
                .locals
                .iter()
                .map(|(label, m)| self.space.position(label).map(|p| (p, m)))
                .collect::<Result<_>>()?;
            for (idx, amp) in state.iter() {
                let mut partial: Vec<(MultiIndex, Complex64)> =
                    vec![(idx.clone(), term.coeff * amp)];
                for &(pos, m) in &locals {
                    let mut next = Vec::with_capacity(partial.len());
                    for (idx, a) in partial {
                        let col = idx[pos];
                        for row in 0..m.nrows() {
                            let entry = m[(row, col)];
                            if entry != Complex64::new(0.0, 0.0) {
                                let mut out = idx.clone();
                                out[pos] = row;
                                next.push((out, a * entry));
                            }
                        }
                    }
                    partial = next;
                }
                for (idx, a) in partial {
                    *acc.entry(idx).or_default() += a;
                }
            }
        }
        Ok(StateVector::from_map_unchecked(self.space.clone(), acc))
    }

    /// Dense matrix in the row-major flat basis of the space.
    pub fn to_dense(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        let dim = self.space.dense_dim(cap)?;
        let mut total = DMatrix::zeros(dim, dim);
        for term in &self.terms {
            let mut m = DMatrix::from_element(1, 1, term.coeff);
            for f in self.space.factors() {
                let local = match term.locals.get(&f.label) {
                    Some(l) => l.clone(),
                    None => DMatrix::identity(f.dim, f.dim),
                };
                m = m.kronecker(&local);
            }
            total += m;
        }
        Ok(total)
    }

    pub fn check_structure(&self) -> Result<StructureReport> {
        self.check_structure_with_cap(DEFAULT_DENSE_CAP)
    }

    pub fn check_structure_with_cap(&self, cap: usize) -> Result<StructureReport> {
        Ok(structure_of(&self.to_dense(cap)?, TOLERANCE))
    }

    pub fn is_hermitian(&self) -> Result<bool> {
        Ok(self.check_structure()?.hermitian)
    }
}

/// Wire form of an operator: list of terms, each a coefficient and per-factor
/// dense matrices given as rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub re: f64,
    pub im: f64,
    pub locals: Vec<LocalJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalJson {
    pub factor: String,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl OperatorExpr {
    pub fn to_json(&self) -> OperatorJson {
        OperatorJson {
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    re: t.coeff.re,
                    im: t.coeff.im,
                    locals: t
                        .locals
                        .iter()
                        .map(|(factor, m)| LocalJson {
                            factor: factor.clone(),
                            matrix: (0..m.nrows())
                                .map(|r| {
                                    (0..m.ncols())
                                        .map(|c| [m[(r, c)].re, m[(r, c)].im])
                                        .collect()
                                })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(space: SpaceDescriptor, json: &OperatorJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(json.terms.len());
        for t in &json.terms {
            let mut locals = BTreeMap::new();
            for l in &t.locals {
                let rows = l.matrix.len();
                let cols = l.matrix.first().map_or(0, Vec::len);
                if l.matrix.iter().any(|r| r.len() != cols) {
                    return Err(Error::Structure(format!(
                        "ragged matrix for factor `{}`",
                        l.factor
                    )));
                }
                let m = DMatrix::from_fn(rows, cols, |r, c| {
                    let [re, im] = l.matrix[r][c];
                    Complex64::new(re, im)
                });
                locals.insert(l.factor.clone(), m);
            }
            terms.push(Term {
                coeff: Complex64::new(t.re, t.im),
                locals,
            });
        }
        Self::from_terms(space, terms)
    }
}

pub(crate) fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub(crate) fn structure_of(m: &DMatrix<Complex64>, tol: f64) -> StructureReport {
    let n = m.nrows();
    let adj = m.adjoint();
    let hermitian = max_abs_diff(m, &adj) <= tol;
    let unitary = max_abs_diff(&(&adj * m), &DMatrix::identity(n, n)) <= tol;
    let projector = hermitian && max_abs_diff(&(m * m), m) <= tol;
    StructureReport {
        hermitian,
        unitary,
        projector,
    }
}

#[cfg(test)]
mod tests {
    use super::super::matrices::{pauli_x, projector, swap_levels};
    use super::*;

    fn space3() -> SpaceDescriptor {
        SpaceDescriptor::new([("path", 3), ("prop1", 2), ("prop2", 2)]).unwrap()
    }

    #[test]
    fn pauli_flips_one_property() {
        let s = space3();
        let x1 = OperatorExpr::local(s.clone(), "prop1", pauli_x()).unwrap();
        let v = StateVector::basis(s.clone(), &[1, 0, 1]).unwrap();
        assert_eq!(
            x1.apply(&v).unwrap(),
            StateVector::basis(s, &[1, 1, 1]).unwrap()
        );
    }

    #[test]
    fn j1_lowers_level_two_to_level_one() {
        let s = SpaceDescriptor::new([("path", 3), ("prop1", 3), ("prop2", 3)]).unwrap();
        let j1 = OperatorExpr::local(s.clone(), "prop1", swap_levels(3, 0, 1)).unwrap();
        let v = StateVector::basis(s.clone(), &[1, 1, 1]).unwrap();
        assert_eq!(
            j1.apply(&v).unwrap(),
            StateVector::basis(s, &[1, 0, 1]).unwrap()
        );
    }

    #[test]
    fn identity_is_a_no_op() {
        let s = space3();
        let v = StateVector::basis(s.clone(), &[2, 1, 0]).unwrap();
        assert_eq!(OperatorExpr::identity(s).apply(&v).unwrap(), v);
    }

    #[test]
    fn structure_of_reference_operators() {
        let s = SpaceDescriptor::new([("path", 2), ("pol", 2)]).unwrap();
        let pi1 = OperatorExpr::local(s.clone(), "path", projector(2, 0)).unwrap();
        assert_eq!(
            pi1.check_structure().unwrap(),
            StructureReport {
                hermitian: true,
                unitary: false,
                projector: true
            }
        );
        let sx = OperatorExpr::local(s, "pol", pauli_x()).unwrap();
        assert_eq!(
            sx.check_structure().unwrap(),
            StructureReport {
                hermitian: true,
                unitary: true,
                projector: false
            }
        );

        let q = SpaceDescriptor::new([("prop1", 3)]).unwrap();
        let j1 = OperatorExpr::local(q, "prop1", swap_levels(3, 0, 1)).unwrap();
        assert_eq!(
            j1.check_structure().unwrap(),
            StructureReport {
                hermitian: true,
                unitary: false,
                projector: false
            }
        );
    }

    #[test]
    fn structure_check_respects_cap() {
        let s = SpaceDescriptor::new([("a", 64), ("b", 65)]).unwrap();
        let id = OperatorExpr::identity(s);
        assert!(matches!(id.check_structure(), Err(Error::Capacity { .. })));
    }

    #[test]
    fn local_shape_is_validated() {
        let s = space3();
        assert!(matches!(
            OperatorExpr::local(s.clone(), "path", pauli_x()),
            Err(Error::LocalShape { .. })
        ));
        assert!(matches!(
            OperatorExpr::local(s, "spin", pauli_x()),
            Err(Error::UnknownFactor(_))
        ));
    }

    #[test]
    fn compose_multiplies_shared_factors() {
        let s = SpaceDescriptor::new([("pol", 2)]).unwrap();
        let x = OperatorExpr::local(s.clone(), "pol", pauli_x()).unwrap();
        let xx = x.compose(&x).unwrap();
        let dense = xx.to_dense(16).unwrap();
        assert!(max_abs_diff(&dense, &DMatrix::identity(2, 2)) < 1e-15);
    }
}
