//! Weak values `⟨post|O|pre⟩ / ⟨post|pre⟩` of pre/post-selected ensembles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Strategy};
use crate::hilbert::{OperatorExpr, StateVector};

/// Below this `|⟨post|pre⟩|` the division is treated as ill-posed.
pub const DEFAULT_OVERLAP_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PrePostEnsemble {
    pre: StateVector,
    post: StateVector,
    overlap: Complex64,
}

impl PrePostEnsemble {
    pub fn new(pre: StateVector, post: StateVector) -> Result<Self> {
        pre.ensure_normalized()?;
        post.ensure_normalized()?;
        let overlap = post.inner(&pre)?;
        Ok(Self { pre, post, overlap })
    }

    pub fn pre(&self) -> &StateVector {
        &self.pre
    }

    pub fn post(&self) -> &StateVector {
        &self.post
    }

    /// Cached `⟨post|pre⟩`.
    pub fn overlap(&self) -> Complex64 {
        self.overlap
    }
}

pub fn weak_value(ens: &PrePostEnsemble, op: &OperatorExpr) -> Result<Complex64> {
    weak_value_with_eps(ens, op, DEFAULT_OVERLAP_EPS)
}

pub fn weak_value_with_eps(
    ens: &PrePostEnsemble,
    op: &OperatorExpr,
    eps: f64,
) -> Result<Complex64> {
    let overlap = ens.overlap;
    if overlap.norm() <= eps {
        return Err(Error::NullPostselection {
            overlap: overlap.norm(),
            label: None,
        });
    }
    let numerator = ens.post.inner(&op.apply(&ens.pre)?)?;
    Ok(numerator / overlap)
}

/// `|⟨post|pre⟩|²`.
pub fn postselection_probability(ens: &PrePostEnsemble) -> f64 {
    ens.overlap.norm_sqr()
}

/// Ordinary expectation `⟨state|O|state⟩`.
pub fn expectation(state: &StateVector, op: &OperatorExpr) -> Result<Complex64> {
    state.inner(&op.apply(state)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakValueRow {
    pub label: String,
    pub value: Complex64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WeakValueTable {
    rows: Vec<WeakValueRow>,
}

#[derive(Serialize)]
struct RowJson<'a> {
    label: &'a str,
    re: f64,
    im: f64,
}

impl WeakValueTable {
    pub fn new(rows: Vec<WeakValueRow>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if rows[..i].iter().any(|r| r.label == row.label) {
                return Err(Error::Config(format!(
                    "duplicate observable label `{}`",
                    row.label
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn from_values<S: Into<String>>(
        rows: impl IntoIterator<Item = (S, Complex64)>,
    ) -> Result<Self> {
        Self::new(
            rows.into_iter()
                .map(|(label, value)| WeakValueRow {
                    label: label.into(),
                    value,
                })
                .collect(),
        )
    }

    pub fn rows(&self) -> &[WeakValueRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<Complex64> {
        self.rows.iter().find(|r| r.label == label).map(|r| r.value)
    }

    /// `[{label, re, im}]`.
    pub fn to_json(&self) -> String {
        let rows: Vec<RowJson> = self
            .rows
            .iter()
            .map(|r| RowJson {
                label: &r.label,
                re: r.value.re,
                im: r.value.im,
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("table json is always serializable")
    }

    /// `label,re,im` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,re,im\n");
        for r in &self.rows {
            out.push_str(&csv_field(&r.label));
            out.push(',');
            out.push_str(&format_sig17(r.value.re));
            out.push(',');
            out.push_str(&format_sig17(r.value.im));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn format_sig17(x: f64) -> String {
    // -0.0 prints as 0 so that byte output does not depend on rounding noise.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn weak_value_table(
    ens: &PrePostEnsemble,
    observables: &[(String, OperatorExpr)],
) -> Result<WeakValueTable> {
    weak_value_table_with(ens, observables, Strategy::default())
}

/// Rows are evaluated independently (concurrently under `Strategy::Parallel`);
/// output order matches `observables`.
pub fn weak_value_table_with(
    ens: &PrePostEnsemble,
    observables: &[(String, OperatorExpr)],
    strategy: Strategy,
) -> Result<WeakValueTable> {
    let rows = exec::try_map(strategy, observables, |(label, op)| {
        weak_value(ens, op)
            .map(|value| WeakValueRow {
                label: label.clone(),
                value,
            })
            .map_err(|e| match e {
                Error::NullPostselection { overlap, .. } => Error::NullPostselection {
                    overlap,
                    label: Some(label.clone()),
                },
                other => other,
            })
    })?;
    WeakValueTable::new(rows)
}
