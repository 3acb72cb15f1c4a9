//! Quantum Cheshire cat pre/post-selections as executable fixtures.
//!
//! Each generator returns the ensemble, its observable family and the weak
//! values the construction is meant to produce. Path `k` (1-based in labels)
//! is path index `k-1`; property factors are labeled `prop1`, `prop2`, ….

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Strategy};
use crate::hilbert::{
    ket_bra, pauli_x, projector, swap_levels, Factor, LocalMatrix, OperatorExpr, OperatorJson,
    SpaceDescriptor, StateJson, StateVector, TOLERANCE,
};
use crate::weakvalue::{self, PrePostEnsemble, WeakValueTable};

pub const DEFAULT_MAX_PATHS: usize = 20;
pub const DEFAULT_MAX_QUDIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Value stated by the construction itself.
    Stated,
    /// Value obtained by evaluating the weak-value formula directly.
    Derived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub space: SpaceDescriptor,
    pub ensemble: PrePostEnsemble,
    pub observables: Vec<(String, OperatorExpr)>,
    pub expected: WeakValueTable,
    pub provenance: Vec<Provenance>,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        ensemble: PrePostEnsemble,
        observables: Vec<(String, OperatorExpr)>,
        expected: WeakValueTable,
        provenance: Vec<Provenance>,
    ) -> Result<Self> {
        let space = ensemble.pre().space().clone();
        if provenance.len() != expected.len() {
            return Err(Error::Config("one provenance tag per expected row".into()));
        }
        for row in expected.rows() {
            if !observables.iter().any(|(l, _)| *l == row.label) {
                return Err(Error::Config(format!(
                    "expected row `{}` has no matching observable",
                    row.label
                )));
            }
        }
        for (label, op) in &observables {
            if *op.space() != space {
                return Err(Error::Config(format!(
                    "observable `{label}` lives on another space"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            space,
            ensemble,
            observables,
            expected,
            provenance,
        })
    }

    pub fn observable(&self, label: &str) -> Option<&OperatorExpr> {
        self.observables
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, op)| op)
    }

    /// Copy with `expected` replaced.
    pub fn with_expected(&self, expected: WeakValueTable) -> Result<Self> {
        let provenance = vec![Provenance::Derived; expected.len()];
        Self::new(
            self.name.clone(),
            self.ensemble.clone(),
            self.observables.clone(),
            expected,
            provenance,
        )
    }

    pub fn to_json(&self) -> ScenarioJson {
        ScenarioJson {
            name: self.name.clone(),
            space: self.space.factors().to_vec(),
            pre: self.ensemble.pre().to_json(),
            post: self.ensemble.post().to_json(),
            observables: self
                .observables
                .iter()
                .map(|(label, op)| ObservableJson {
                    label: label.clone(),
                    operator: op.to_json(),
                })
                .collect(),
            expected: self
                .expected
                .rows()
                .iter()
                .zip(&self.provenance)
                .map(|(r, p)| ExpectedJson {
                    label: r.label.clone(),
                    re: r.value.re,
                    im: r.value.im,
                    provenance: *p,
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("scenario json is always serializable")
    }

    pub fn from_json(json: &ScenarioJson) -> Result<Self> {
        let space = SpaceDescriptor::new(json.space.iter().map(|f| (f.label.clone(), f.dim)))?;
        let pre = StateVector::from_json(&json.pre)?;
        let post = StateVector::from_json(&json.post)?;
        if *pre.space() != space || *post.space() != space {
            return Err(Error::Config(
                "pre/post states disagree with the declared space".into(),
            ));
        }
        let ensemble = PrePostEnsemble::new(pre, post)?;
        let observables = json
            .observables
            .iter()
            .map(|o| {
                Ok((
                    o.label.clone(),
                    OperatorExpr::from_json(space.clone(), &o.operator)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let expected = WeakValueTable::from_values(
            json.expected
                .iter()
                .map(|e| (e.label.clone(), Complex64::new(e.re, e.im))),
        )?;
        let provenance = json.expected.iter().map(|e| e.provenance).collect();
        Self::new(
            json.name.clone(),
            ensemble,
            observables,
            expected,
            provenance,
        )
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }
}

/// Export bundle `{name, space, pre, post, observables, expected}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioJson {
    pub name: String,
    pub space: Vec<Factor>,
    pub pre: StateJson,
    pub post: StateJson,
    pub observables: Vec<ObservableJson>,
    pub expected: Vec<ExpectedJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableJson {
    pub label: String,
    pub operator: OperatorJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedJson {
    pub label: String,
    pub re: f64,
    pub im: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub label: String,
    pub computed: Complex64,
    pub expected: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scenario: String,
    pub pass: bool,
    pub computed: WeakValueTable,
    pub mismatches: Vec<Mismatch>,
}

pub fn verify(scenario: &Scenario) -> Result<VerifyReport> {
    verify_with(scenario, TOLERANCE, Strategy::default())
}

pub fn verify_with(
    scenario: &Scenario,
    tolerance: f64,
    strategy: Strategy,
) -> Result<VerifyReport> {
    let computed =
        weakvalue::weak_value_table_with(&scenario.ensemble, &scenario.observables, strategy)?;
    let mismatches: Vec<Mismatch> = scenario
        .expected
        .rows()
        .iter()
        .filter_map(|row| {
            let value = computed.get(&row.label)?;
            ((value - row.value).norm() > tolerance).then(|| Mismatch {
                label: row.label.clone(),
                computed: value,
                expected: row.value,
            })
        })
        .collect();
    Ok(VerifyReport {
        scenario: scenario.name.clone(),
        pass: mismatches.is_empty(),
        computed,
        mismatches,
    })
}

/// Verifies several scenarios; one task per scenario, reports in input order.
pub fn verify_all(
    scenarios: &[Scenario],
    tolerance: f64,
    strategy: Strategy,
) -> Result<Vec<VerifyReport>> {
    exec::try_map(strategy, scenarios, |s| {
        verify_with(s, tolerance, Strategy::Sequential)
    })
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Uniform superposition of the listed basis kets.
fn uniform(space: &SpaceDescriptor, kets: &[Vec<usize>]) -> Result<StateVector> {
    let amp = c(1.0 / (kets.len() as f64).sqrt());
    StateVector::from_amplitudes(space.clone(), kets.iter().map(|k| (k.clone(), amp)))
}

pub(crate) fn path_projector(space: &SpaceDescriptor, k: usize) -> Result<LocalMatrix> {
    let n = space.dim_of("path")?;
    Ok(projector(n, k - 1))
}

fn prop_label(m: usize) -> String {
    format!("prop{m}")
}

fn indicator(hit: bool) -> Complex64 {
    if hit {
        c(1.0)
    } else {
        c(0.0)
    }
}

/// Collects `(label, operator, expected, provenance)` rows.
#[derive(Default)]
struct Rows {
    observables: Vec<(String, OperatorExpr)>,
    expected: Vec<(String, Complex64)>,
    provenance: Vec<Provenance>,
}

impl Rows {
    fn push(&mut self, label: String, op: OperatorExpr, value: Complex64, provenance: Provenance) {
        self.expected.push((label.clone(), value));
        self.observables.push((label, op));
        self.provenance.push(provenance);
    }

    fn finish(self, name: &str, ensemble: PrePostEnsemble) -> Result<Scenario> {
        Scenario::new(
            name,
            ensemble,
            self.observables,
            WeakValueTable::from_values(self.expected)?,
            self.provenance,
        )
    }
}

/// Single photon, two paths, polarization as the disembodied property.
pub fn original_cheshire() -> Result<Scenario> {
    let space = SpaceDescriptor::new([("path", 2), ("pol", 2)])?;
    let pre = uniform(&space, &[vec![0, 1], vec![1, 0]])?;
    let post = uniform(&space, &[vec![0, 1], vec![1, 1]])?;
    let ensemble = PrePostEnsemble::new(pre, post)?;

    // σx^p = |+⟩⟨+| − |−⟩⟨−| with |±⟩ = (|0⟩ ± |1⟩)/√2.
    let h = 0.5;
    let plus = (ket_bra(2, 0, 0) + ket_bra(2, 0, 1) + ket_bra(2, 1, 0) + ket_bra(2, 1, 1)) * c(h);
    let minus = (ket_bra(2, 0, 0) - ket_bra(2, 0, 1) - ket_bra(2, 1, 0) + ket_bra(2, 1, 1)) * c(h);
    let sigma_p = plus - minus;

    let mut rows = Rows::default();
    for k in 1..=2 {
        let op = OperatorExpr::local(space.clone(), "path", path_projector(&space, k)?)?;
        rows.push(format!("Π{k}"), op, indicator(k == 1), Provenance::Stated);
    }
    for k in 1..=2 {
        let op = OperatorExpr::product(
            space.clone(),
            [
                ("path", path_projector(&space, k)?),
                ("pol", sigma_p.clone()),
            ],
        )?;
        rows.push(
            format!("Π{k}σx^p"),
            op,
            indicator(k == 2),
            Provenance::Stated,
        );
    }
    rows.finish("original_cheshire", ensemble)
}

/// Three paths, two dichotomic properties found in paths 2 and 3.
pub fn two_property_three_path() -> Result<Scenario> {
    let space = SpaceDescriptor::new([("path", 3), ("prop1", 2), ("prop2", 2)])?;
    let pre = uniform(&space, &[vec![0, 1, 1], vec![1, 0, 1], vec![2, 1, 0]])?;
    let post = uniform(&space, &[vec![0, 1, 1], vec![1, 1, 1], vec![2, 1, 1]])?;
    let ensemble = PrePostEnsemble::new(pre, post)?;
    let mut rows = Rows::default();
    dichotomic_rows(&space, 3, Provenance::Stated, &mut rows)?;
    rows.finish("two_property_three_path", ensemble)
}

/// Observable family shared by the dichotomic constructions: `Πk`, `Πkσx^m`
/// for every property `m`, and `Πkσx^1σx^2` as the representative joint.
fn dichotomic_rows(
    space: &SpaceDescriptor,
    n: usize,
    provenance: Provenance,
    rows: &mut Rows,
) -> Result<()> {
    for k in 1..=n {
        let op = OperatorExpr::local(space.clone(), "path", path_projector(space, k)?)?;
        rows.push(format!("Π{k}"), op, indicator(k == 1), provenance);
    }
    for m in 1..n {
        for k in 1..=n {
            let op = OperatorExpr::product(
                space.clone(),
                [
                    ("path", path_projector(space, k)?),
                    (prop_label(m).as_str(), pauli_x()),
                ],
            )?;
            rows.push(format!("Π{k}σx^{m}"), op, indicator(k == m + 1), provenance);
        }
    }
    if n >= 3 {
        for k in 1..=n {
            let op = OperatorExpr::product(
                space.clone(),
                [
                    ("path", path_projector(space, k)?),
                    ("prop1", pauli_x()),
                    ("prop2", pauli_x()),
                ],
            )?;
            rows.push(format!("Π{k}σx^1σx^2"), op, c(0.0), provenance);
        }
    }
    Ok(())
}

pub fn n_path_dichotomic(n: usize) -> Result<Scenario> {
    n_path_dichotomic_with_cap(n, DEFAULT_MAX_PATHS)
}

/// `n` paths carrying `n-1` qubit properties; path `j ≥ 2` holds property
/// `j-1` in `|0⟩`, every other slot in `|1⟩`.
pub fn n_path_dichotomic_with_cap(n: usize, cap: usize) -> Result<Scenario> {
    if n < 2 {
        return Err(Error::Config(format!(
            "n_path_dichotomic needs n >= 2, got {n}"
        )));
    }
    if n > cap {
        return Err(Error::Capacity { dim: n, cap });
    }
    let space = SpaceDescriptor::new(
        std::iter::once(("path".to_string(), n)).chain((1..n).map(|m| (prop_label(m), 2))),
    )?;
    let pre_kets: Vec<Vec<usize>> = (1..=n)
        .map(|j| {
            let mut ket = vec![1; n];
            ket[0] = j - 1;
            if j >= 2 {
                ket[j - 1] = 0;
            }
            ket
        })
        .collect();
    let post_kets: Vec<Vec<usize>> = (1..=n)
        .map(|j| {
            let mut ket = vec![1; n];
            ket[0] = j - 1;
            ket
        })
        .collect();
    let ensemble = PrePostEnsemble::new(uniform(&space, &pre_kets)?, uniform(&space, &post_kets)?)?;
    let mut rows = Rows::default();
    dichotomic_rows(&space, n, Provenance::Derived, &mut rows)?;
    rows.finish(&format!("n_path_dichotomic({n})"), ensemble)
}

/// Three-path qutrit construction with `J^(1)` on prop1 and `J^(2)` on prop2.
pub fn qutrit_two_property() -> Result<Scenario> {
    let space = SpaceDescriptor::new([("path", 3), ("prop1", 3), ("prop2", 3)])?;
    let pre = uniform(&space, &[vec![0, 0, 0], vec![1, 1, 1], vec![2, 2, 2]])?;
    let post = uniform(&space, &[vec![0, 0, 0], vec![1, 0, 1], vec![2, 2, 0]])?;
    let ensemble = PrePostEnsemble::new(pre, post)?;
    let mut rows = Rows::default();
    qudit_rows(&space, 3, Provenance::Stated, &mut rows)?;
    rows.finish("qutrit_two_property", ensemble)
}

/// `J^(m) = |1⟩⟨m+1| + |m+1⟩⟨1|` on a `d`-level factor.
pub fn j_operator(d: usize, m: usize) -> LocalMatrix {
    swap_levels(d, 0, m)
}

fn qudit_rows(
    space: &SpaceDescriptor,
    d: usize,
    provenance: Provenance,
    rows: &mut Rows,
) -> Result<()> {
    for k in 1..=d {
        let op = OperatorExpr::local(space.clone(), "path", path_projector(space, k)?)?;
        rows.push(format!("Π{k}"), op, indicator(k == 1), provenance);
    }
    for m in 1..d {
        for k in 1..=d {
            let op = OperatorExpr::product(
                space.clone(),
                [
                    ("path", path_projector(space, k)?),
                    (prop_label(m).as_str(), j_operator(d, m)),
                ],
            )?;
            rows.push(
                format!("Π{k}J^({m})"),
                op,
                indicator(k == m + 1),
                provenance,
            );
        }
    }
    Ok(())
}

pub fn qudit_chain(d: usize) -> Result<Scenario> {
    qudit_chain_with_cap(d, DEFAULT_MAX_QUDIT)
}

/// `d` paths and `d-1` qudit properties. Pre-selection pairs path `j` with
/// every slot in `|j⟩`; post-selection flips slot `j-1` of path `j` to `|1⟩`.
pub fn qudit_chain_with_cap(d: usize, cap: usize) -> Result<Scenario> {
    if d < 2 {
        return Err(Error::Config(format!("qudit_chain needs d >= 2, got {d}")));
    }
    if d > cap {
        return Err(Error::Capacity { dim: d, cap });
    }
    let space = SpaceDescriptor::new(
        std::iter::once(("path".to_string(), d)).chain((1..d).map(|m| (prop_label(m), d))),
    )?;
    let pre_kets: Vec<Vec<usize>> = (0..d).map(|j| vec![j; d]).collect();
    let post_kets: Vec<Vec<usize>> = (1..=d)
        .map(|j| {
            let mut ket = vec![j - 1; d];
            if j >= 2 {
                ket[j - 1] = 0;
            }
            ket
        })
        .collect();
    let ensemble = PrePostEnsemble::new(uniform(&space, &pre_kets)?, uniform(&space, &post_kets)?)?;
    let mut rows = Rows::default();
    let provenance = if d == 3 {
        Provenance::Stated
    } else {
        Provenance::Derived
    };
    qudit_rows(&space, d, provenance, &mut rows)?;
    rows.finish(&format!("qudit_chain({d})"), ensemble)
}

/// Built-in scenario names accepted by [`by_name`].
pub const SCENARIO_NAMES: [&str; 5] = [
    "original_cheshire",
    "two_property_three_path",
    "n_path",
    "qutrit_two_property",
    "qudit",
];

/// Looks up a built-in scenario; `size` is `n` for `n_path` and `d` for `qudit`.
pub fn by_name(name: &str, size: Option<usize>) -> Result<Scenario> {
    let need =
        |what: &str| size.ok_or_else(|| Error::Config(format!("scenario `{name}` needs {what}")));
    match name {
        "original_cheshire" => original_cheshire(),
        "two_property_three_path" => two_property_three_path(),
        "n_path" | "n_path_dichotomic" => n_path_dichotomic(need("a path count n")?),
        "qutrit_two_property" => qutrit_two_property(),
        "qudit" | "qudit_chain" => qudit_chain(need("a qudit dimension d")?),
        other => Err(Error::Config(format!("unknown scenario `{other}`"))),
    }
}
