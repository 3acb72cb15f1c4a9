use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One tensor factor: a label and its dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labeled factors. Cloning is cheap (shared storage).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpaceDescriptor {
    factors: Arc<[Factor]>,
}

impl SpaceDescriptor {
    pub fn new<I, S>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let factors: Vec<Factor> = factors
            .into_iter()
            .map(|(label, dim)| Factor {
                label: label.into(),
                dim,
            })
            .collect();
        if factors.is_empty() {
            return Err(Error::InvalidSpace(
                "at least one factor is required".into(),
            ));
        }
        for (i, f) in factors.iter().enumerate() {
            if f.label.is_empty() {
                return Err(Error::InvalidSpace(format!(
                    "factor #{i} has an empty label"
                )));
            }
            if f.dim < 2 {
                return Err(Error::InvalidSpace(format!(
                    "factor `{}` has dimension {} (minimum is 2)",
                    f.label, f.dim
                )));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::InvalidSpace(format!(
                    "duplicate factor label `{}`",
                    f.label
                )));
            }
        }
        Ok(Self {
            factors: factors.into(),
        })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| Error::UnknownFactor(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label).map(|p| self.factors[p].dim)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.factors.iter().any(|f| f.label == label)
    }

    /// Product of the factor dimensions. `u128` because the sparse scenarios
    /// go well past `usize` (16 factors of dimension 16).
    pub fn total_dim(&self) -> u128 {
        self.factors.iter().map(|f| f.dim as u128).product()
    }

    /// Total dimension as `usize`, failing when it exceeds `cap`.
    pub fn dense_dim(&self, cap: usize) -> Result<usize> {
        let dim = self.total_dim();
        if dim > cap as u128 {
            return Err(Error::Capacity {
                dim: usize::try_from(dim).unwrap_or(usize::MAX),
                cap,
            });
        }
        Ok(dim as usize)
    }

    pub fn check_index(&self, index: &[usize]) -> Result<()> {
        if index.len() != self.factors.len() {
            return Err(Error::IndexArity {
                expected: self.factors.len(),
                got: index.len(),
            });
        }
        for (f, &i) in self.factors.iter().zip(index) {
            if i >= f.dim {
                return Err(Error::Bounds {
                    factor: f.label.clone(),
                    index: i,
                    dim: f.dim,
                });
            }
        }
        Ok(())
    }

    /// Row-major flat index; the first factor is the most significant digit.
    pub fn flat_index(&self, index: &[usize]) -> usize {
        self.factors
            .iter()
            .zip(index)
            .fold(0, |acc, (f, &i)| acc * f.dim + i)
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.factors.len()];
        for (slot, f) in index.iter_mut().zip(self.factors.iter()).rev() {
            *slot = flat % f.dim;
            flat /= f.dim;
        }
        index
    }

    /// Concatenation `self ⊗ other`; labels must stay unique.
    pub fn tensor(&self, other: &SpaceDescriptor) -> Result<SpaceDescriptor> {
        SpaceDescriptor::new(
            self.factors
                .iter()
                .chain(other.factors.iter())
                .map(|f| (f.label.clone(), f.dim)),
        )
    }

    pub(crate) fn ensure_same(&self, other: &SpaceDescriptor) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ⊗ ")?;
            }
            write!(f, "{}({})", factor.label, factor.dim)?;
        }
        Ok(())
    }
}
