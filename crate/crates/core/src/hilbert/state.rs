use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::space::{Factor, SpaceDescriptor};
use super::TOLERANCE;
use crate::error::{Error, Result};

/// One basis index per factor, in factor order.
pub type MultiIndex = Vec<usize>;

/// Sparse amplitude vector over a [`SpaceDescriptor`].
///
/// Amplitudes are kept in a `BTreeMap`, so iteration is lexicographic in the
/// multi-index and serialization is byte-stable. Exact zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: SpaceDescriptor,
    amplitudes: BTreeMap<MultiIndex, Complex64>,
}

impl StateVector {
    pub fn zero(space: SpaceDescriptor) -> Self {
        Self {
            space,
            amplitudes: BTreeMap::new(),
        }
    }

    /// Unit amplitude at `index`.
    pub fn basis(space: SpaceDescriptor, index: &[usize]) -> Result<Self> {
        space.check_index(index)?;
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(index.to_vec(), Complex64::new(1.0, 0.0));
        Ok(Self { space, amplitudes })
    }

    /// Basis state addressed by label; unnamed factors sit at index 0.
    pub fn basis_labeled(space: SpaceDescriptor, labeled: &[(&str, usize)]) -> Result<Self> {
        let mut index = vec![0; space.len()];
        for &(label, i) in labeled {
            index[space.position(label)?] = i;
        }
        Self::basis(space, &index)
    }

    /// Sums repeated indices; drops entries that end up exactly zero.
    pub fn from_amplitudes<I>(space: SpaceDescriptor, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut amplitudes: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (index, amp) in entries {
            space.check_index(&index)?;
            *amplitudes.entry(index).or_default() += amp;
        }
        amplitudes.retain(|_, a| *a != Complex64::new(0.0, 0.0));
        Ok(Self { space, amplitudes })
    }

    /// Caller guarantees bounds; used by the internal sparse kernels.
    pub(crate) fn from_map_unchecked(
        space: SpaceDescriptor,
        mut amplitudes: BTreeMap<MultiIndex, Complex64>,
    ) -> Self {
        amplitudes.retain(|_, a| *a != Complex64::new(0.0, 0.0));
        Self { space, amplitudes }
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn amplitude(&self, index: &[usize]) -> Complex64 {
        self.amplitudes.get(index).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn nnz(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= TOLERANCE
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::Normalization {
                norm_sqr: self.norm_sqr(),
            })
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Normalization {
                norm_sqr: self.norm_sqr(),
            });
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(k, a)| (k.clone(), a * c))
            .collect();
        Self::from_map_unchecked(self.space.clone(), amplitudes)
    }

    pub fn with_global_phase(&self, theta: f64) -> Self {
        self.scaled(Complex64::from_polar(1.0, theta))
    }

    /// `⟨self|ket⟩`, conjugate-linear in `self`.
    pub fn inner(&self, ket: &StateVector) -> Result<Complex64> {
        self.space.ensure_same(&ket.space)?;
        // Walk the sparser side.
        let (small, large, conj_small) = if self.nnz() <= ket.nnz() {
            (self, ket, true)
        } else {
            (ket, self, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, a) in &small.amplitudes {
            if let Some(b) = large.amplitudes.get(idx) {
                acc += if conj_small {
                    a.conj() * b
                } else {
                    b.conj() * a
                };
            }
        }
        Ok(acc)
    }

    /// `|self⟩ ⊗ |other⟩` on the concatenated space.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let space = self.space.tensor(&other.space)?;
        let mut amplitudes = BTreeMap::new();
        for (i, a) in &self.amplitudes {
            for (j, b) in &other.amplitudes {
                let mut idx = i.clone();
                idx.extend_from_slice(j);
                amplitudes.insert(idx, a * b);
            }
        }
        Ok(Self::from_map_unchecked(space, amplitudes))
    }

    /// Relabel basis indices through `f`; amplitudes landing on the same
    /// index are summed.
    pub fn map_indices<F>(&self, mut f: F) -> Result<StateVector>
    where
        F: FnMut(&[usize]) -> MultiIndex,
    {
        Self::from_amplitudes(
            self.space.clone(),
            self.amplitudes.iter().map(|(k, a)| (f(k), *a)),
        )
    }

    pub fn to_dense(&self, cap: usize) -> Result<DVector<Complex64>> {
        let dim = self.space.dense_dim(cap)?;
        let mut v = DVector::zeros(dim);
        for (idx, a) in &self.amplitudes {
            v[self.space.flat_index(idx)] = *a;
        }
        Ok(v)
    }

    /// Entries with modulus `<= drop_tol` are discarded.
    pub fn from_dense(
        space: SpaceDescriptor,
        v: &DVector<Complex64>,
        drop_tol: f64,
    ) -> Result<Self> {
        let dim = space.total_dim();
        if dim != v.len() as u128 {
            return Err(Error::InvalidSpace(format!(
                "dense vector has length {}, space {} has dimension {}",
                v.len(),
                space,
                dim
            )));
        }
        let amplitudes = v
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > drop_tol)
            .map(|(flat, a)| (space.unflatten(flat), *a))
            .collect();
        Ok(Self::from_map_unchecked(space, amplitudes))
    }

    pub fn to_json(&self) -> StateJson {
        StateJson {
            factors: self.space.factors().to_vec(),
            amplitudes: self
                .amplitudes
                .iter()
                .map(|(index, a)| AmplitudeJson {
                    index: index.clone(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("state json is always serializable")
    }

    pub fn from_json(json: &StateJson) -> Result<Self> {
        let space = SpaceDescriptor::new(json.factors.iter().map(|f| (f.label.clone(), f.dim)))?;
        Self::from_amplitudes(
            space,
            json.amplitudes
                .iter()
                .map(|a| (a.index.clone(), Complex64::new(a.re, a.im))),
        )
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let json: StateJson = serde_json::from_str(text)?;
        Self::from_json(&json)
    }
}

/// Wire form: `{factors: [{label, dim}], amplitudes: [{index, re, im}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub factors: Vec<Factor>,
    pub amplitudes: Vec<AmplitudeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeJson {
    pub index: MultiIndex,
    pub re: f64,
    pub im: f64,
}

/// Componentwise linear combination; the result is not renormalized.
pub fn superpose(terms: &[(Complex64, &StateVector)]) -> Result<StateVector> {
    let Some((_, first)) = terms.first() else {
        return Err(Error::InvalidSpace(
            "superpose needs at least one term".into(),
        ));
    };
    let space = first.space().clone();
    let mut acc: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
    for (c, v) in terms {
        space.ensure_same(v.space())?;
        for (idx, a) in v.iter() {
            *acc.entry(idx.clone()).or_default() += c * a;
        }
    }
    Ok(StateVector::from_map_unchecked(space, acc))
}
