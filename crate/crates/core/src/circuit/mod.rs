//! Photon and neutron interferometer circuits.
//!
//! A circuit acts on `path ⊗ internal`, where the internal part is `pol ⊗ oam`
//! for photons and `spin ⊗ energy` for neutrons (see [`CircuitSpace`]).
//! Elements are applied in order; detectors sit at the output ports and never
//! act on the state.

mod element;
mod parse;
mod space;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{
    pauli_x, projector, swap_levels, LocalMatrix, OperatorExpr, StateVector, DEFAULT_DENSE_CAP,
};
use crate::pointer::{simulate_weak_measurement, MeasurementRecord, MeterConfig};
use crate::weakvalue::PrePostEnsemble;

pub use element::{Element, Phase};
pub use parse::parse_circuit;
pub use space::{CircuitSpace, Internal, Platform, Pol, Spin, OAM_LEVELS};

/// Below this a detector is treated as never clicking.
pub const MIN_CLICK_PROBABILITY: f64 = 1e-14;

/// Eigenvalues above this count towards the rank of an effective projector.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputSpec {
    pub mode: usize,
    pub internal: Internal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    space: CircuitSpace,
    input: Option<InputSpec>,
    elements: Vec<Element>,
}

impl Circuit {
    pub fn new(space: CircuitSpace) -> Self {
        Self {
            space,
            input: None,
            elements: Vec::new(),
        }
    }

    pub fn space(&self) -> &CircuitSpace {
        &self.space
    }

    pub fn input(&self) -> Option<InputSpec> {
        self.input
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn set_input(&mut self, mode: usize, internal: Internal) -> Result<()> {
        if mode >= self.space.modes() {
            return Err(Error::Config(format!(
                "input mode {mode} out of range (circuit has {} modes)",
                self.space.modes()
            )));
        }
        self.space.basis(mode, internal)?;
        self.input = Some(InputSpec { mode, internal });
        Ok(())
    }

    pub fn with_input(mut self, mode: usize, internal: Internal) -> Result<Self> {
        self.set_input(mode, internal)?;
        Ok(self)
    }

    /// Appends an element after checking it against the space and the
    /// detectors already present.
    pub fn push(&mut self, element: Element) -> Result<()> {
        element.check(&self.space)?;
        if let Element::Detector { mode, name, .. } = &element {
            for d in self.detectors() {
                if let Element::Detector {
                    mode: m, name: n, ..
                } = d
                {
                    if m == mode {
                        return Err(Error::Config(format!(
                            "mode {mode} already has detector `{n}`"
                        )));
                    }
                    if n == name {
                        return Err(Error::Config(format!("duplicate detector name `{name}`")));
                    }
                }
            }
        }
        self.elements.push(element);
        Ok(())
    }

    pub fn with(mut self, element: Element) -> Result<Self> {
        self.push(element)?;
        Ok(self)
    }

    pub fn detectors(&self) -> impl Iterator<Item = &Element> {
        self.elements.iter().filter(|e| e.is_detector())
    }

    pub fn detector(&self, name: &str) -> Result<(usize, Option<Internal>)> {
        self.detectors()
            .find_map(|d| match d {
                Element::Detector {
                    mode,
                    name: n,
                    filter,
                } if n == name => Some((*mode, *filter)),
                _ => None,
            })
            .ok_or_else(|| Error::UnknownDetector(name.to_string()))
    }

    /// The state named by the `input` line.
    pub fn input_state(&self) -> Result<StateVector> {
        let input = self
            .input
            .ok_or_else(|| Error::Config("circuit has no `input` line".into()))?;
        self.space.basis(input.mode, input.internal)
    }

    /// Circuit-file text; parsing it gives back an equal circuit.
    pub fn serialize(&self) -> String {
        let mut out = format!(
            "space {} modes={}\n",
            self.space.platform().name(),
            self.space.modes()
        );
        if let Some(input) = self.input {
            out.push_str(&format!(
                "input mode={} {}\n",
                input.mode,
                input.internal.input_text()
            ));
        }
        for e in &self.elements {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }

    /// Dense product of the element unitaries (detectors skipped).
    pub fn composed_unitary(&self) -> Result<DMatrix<Complex64>> {
        let dim = self.space.descriptor().dense_dim(DEFAULT_DENSE_CAP)?;
        let mut u = DMatrix::identity(dim, dim);
        for (index, e) in self
            .elements
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_detector())
        {
            let m = e
                .unitary(&self.space)
                .and_then(|op| op.to_dense(DEFAULT_DENSE_CAP))
                .map_err(|err| Error::at_element(index, err))?;
            u = m * u;
        }
        Ok(u)
    }
}

/// Applies the non-detector elements in order.
pub fn run(circuit: &Circuit, input: &StateVector) -> Result<StateVector> {
    circuit.space.descriptor().ensure_same(input.space())?;
    input.ensure_normalized()?;
    let mut state = input.clone();
    for (index, e) in circuit.elements.iter().enumerate() {
        if e.is_detector() {
            continue;
        }
        state = e
            .apply(&circuit.space, &state)
            .map_err(|err| Error::at_element(index, err))?;
    }
    Ok(state)
}

/// Runs the circuit on the state named by its `input` line.
pub fn run_from_input(circuit: &Circuit) -> Result<StateVector> {
    run(circuit, &circuit.input_state()?)
}

/// `|mode⟩⟨mode| ⊗ filter` (identity on the internal factors without a filter).
pub fn detector_operator(
    space: &CircuitSpace,
    mode: usize,
    filter: Option<Internal>,
) -> Result<OperatorExpr> {
    let mut locals: Vec<(&str, LocalMatrix)> = vec![("path", projector(space.modes(), mode))];
    if let Some(f) = filter {
        for (label, idx) in f.indices()? {
            locals.push((label, projector(space.descriptor().dim_of(label)?, idx)));
        }
    }
    OperatorExpr::product(space.descriptor().clone(), locals)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub name: String,
    pub mode: usize,
    pub probability: f64,
    /// `None` when the detector (essentially) never clicks.
    pub conditional: Option<StateVector>,
}

/// Click statistics for every detector, in circuit order. `state` is the
/// output of [`run`].
pub fn detect(circuit: &Circuit, state: &StateVector) -> Result<Vec<Detection>> {
    let mut out = Vec::new();
    for d in circuit.detectors() {
        let Element::Detector { mode, name, filter } = d else {
            continue;
        };
        let projected = detector_operator(&circuit.space, *mode, *filter)?.apply(state)?;
        let probability = projected.norm_sqr();
        let conditional = if probability >= MIN_CLICK_PROBABILITY {
            Some(projected.normalized()?)
        } else {
            None
        };
        out.push(Detection {
            name: name.clone(),
            mode: *mode,
            probability,
            conditional,
        });
    }
    Ok(out)
}

/// Normalized state conditioned on the named detector clicking.
pub fn condition_on(circuit: &Circuit, state: &StateVector, detector: &str) -> Result<StateVector> {
    let (mode, filter) = circuit.detector(detector)?;
    let projected = detector_operator(&circuit.space, mode, filter)?.apply(state)?;
    let p = projected.norm_sqr();
    if p < MIN_CLICK_PROBABILITY {
        return Err(Error::NullPostselection {
            overlap: p.sqrt(),
            label: Some(detector.to_string()),
        });
    }
    projected.normalized()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorReport {
    pub rank: usize,
    /// `|⟨target|range⟩|²`; present when a target was given and the rank is 1.
    pub fidelity_to_target: Option<f64>,
    /// The post-selected state a rank-1 projector realizes.
    pub range_vector: Option<StateVector>,
    /// `U† (|mode⟩⟨mode| ⊗ filter) U`.
    pub matrix: DMatrix<Complex64>,
}

/// The input-side projector that a click at `detector` selects.
pub fn effective_postselection_projector(
    circuit: &Circuit,
    detector: &str,
    target: Option<&StateVector>,
) -> Result<ProjectorReport> {
    let (mode, filter) = circuit.detector(detector)?;
    let u = circuit.composed_unitary()?;
    let p = detector_operator(&circuit.space, mode, filter)?.to_dense(DEFAULT_DENSE_CAP)?;
    let matrix = u.adjoint() * p * &u;
    let eig = SymmetricEigen::new(matrix.clone());
    let rank = eig
        .eigenvalues
        .iter()
        .filter(|&&v| v > RANK_TOLERANCE)
        .count();
    let range_vector = if rank == 1 {
        let top = eig.eigenvalues.imax();
        let v: DVector<Complex64> = eig.eigenvectors.column(top).into_owned();
        Some(StateVector::from_dense(circuit.space.descriptor().clone(), &v, 0.0)?.normalized()?)
    } else {
        None
    };
    let fidelity_to_target = match (target, &range_vector) {
        (Some(t), Some(r)) => Some(crate::hilbert::fidelity_up_to_phase(t, r)?),
        _ => None,
    };
    Ok(ProjectorReport {
        rank,
        fidelity_to_target,
        range_vector,
        matrix,
    })
}

/// Pre-selection from `prep` (run on its `input` line), post-selection onto
/// the rank-1 range of `postsel`'s projector at `detector`, then the pointer
/// readout of `op`.
pub fn end_to_end_weak_experiment(
    prep: &Circuit,
    op: &OperatorExpr,
    meter: &MeterConfig,
    postsel: &Circuit,
    detector: &str,
) -> Result<MeasurementRecord> {
    let ens = operational_ensemble(prep, postsel, detector)?;
    simulate_weak_measurement(&ens, op, meter)
}

/// The pre/post-selected ensemble the two circuits realize.
pub fn operational_ensemble(
    prep: &Circuit,
    postsel: &Circuit,
    detector: &str,
) -> Result<PrePostEnsemble> {
    prep.space
        .descriptor()
        .ensure_same(postsel.space.descriptor())?;
    let pre = run_from_input(prep)?;
    let report = effective_postselection_projector(postsel, detector, None)?;
    let post = report.range_vector.ok_or_else(|| {
        Error::Config(format!(
            "detector `{detector}` selects a rank-{} projector; a weak value needs rank 1",
            report.rank
        ))
    })?;
    PrePostEnsemble::new(pre, post)
}

/// `σx` on an internal factor: `L ↔ R`, `↑ ↔ ↓`, `E0 ↔ E0−ħω`, or `m=−2 ↔ m=+2`.
pub fn sigma_x(space: &CircuitSpace, label: &str) -> Result<LocalMatrix> {
    match (space.platform(), label) {
        (Platform::Photon, "pol") | (Platform::Neutron, "spin") | (Platform::Neutron, "energy") => {
            Ok(pauli_x())
        }
        (Platform::Photon, "oam") => Ok(swap_levels(
            OAM_LEVELS,
            Internal::oam_index(-2)?,
            Internal::oam_index(2)?,
        )),
        _ => Err(Error::UnknownFactor(label.to_string())),
    }
}

/// `Π_k` (paths counted from 1), optionally times `σx` on one internal factor.
pub fn path_observable(
    space: &CircuitSpace,
    k: usize,
    sigma_x_on: Option<&str>,
) -> Result<OperatorExpr> {
    if k == 0 || k > space.modes() {
        return Err(Error::Config(format!(
            "path {k} out of range 1..={}",
            space.modes()
        )));
    }
    let mut locals = vec![("path", projector(space.modes(), k - 1))];
    if let Some(label) = sigma_x_on {
        locals.push((label, sigma_x(space, label)?));
    }
    OperatorExpr::product(space.descriptor().clone(), locals)
}

/// Names accepted by [`expected_state`].
pub const EXPECTED_STATE_NAMES: [&str; 4] = ["eq28", "eq33", "eq35", "eq36"];

/// Reference states on three-mode circuit spaces.
///
/// * `eq28`: `(ψ1|R,+2⟩ + ψ2|L,+2⟩ + ψ3|R,−2⟩)/√3`
/// * `eq33`: `(ψ1 + ψ2 + ψ3)/√3 ⊗ |R,+2⟩`
/// * `eq35`: `(ψ1|↑,E0⟩ + ψ2|↓,E0⟩ + ψ3|↑,E0−ħω⟩)/√3`
/// * `eq36`: `(ψ1 + ψ2 + ψ3)/√3 ⊗ |↑,E0⟩`
pub fn expected_state(name: &str) -> Result<StateVector> {
    use Internal::{Neutron, Photon};
    let up = |energy| Neutron {
        spin: Spin::Up,
        energy,
    };
    let (platform, internals) = match name {
        "eq28" => (
            Platform::Photon,
            [
                Photon {
                    pol: Pol::R,
                    oam: 2,
                },
                Photon {
                    pol: Pol::L,
                    oam: 2,
                },
                Photon {
                    pol: Pol::R,
                    oam: -2,
                },
            ],
        ),
        "eq33" => (
            Platform::Photon,
            [Photon {
                pol: Pol::R,
                oam: 2,
            }; 3],
        ),
        "eq35" => (
            Platform::Neutron,
            [
                up(0),
                Neutron {
                    spin: Spin::Down,
                    energy: 0,
                },
                up(1),
            ],
        ),
        "eq36" => (Platform::Neutron, [up(0); 3]),
        other => {
            return Err(Error::Config(format!(
                "unknown expected state `{other}` (known: {})",
                EXPECTED_STATE_NAMES.join(", ")
            )))
        }
    };
    let space = CircuitSpace::new(platform, 3)?;
    let amp = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let mut entries = Vec::new();
    for (mode, internal) in internals.into_iter().enumerate() {
        let [(_, a), (_, b)] = internal.indices()?;
        entries.push((vec![mode, a, b], amp));
    }
    StateVector::from_amplitudes(space.descriptor().clone(), entries)
}

/// Circuit files shipped with the crate.
pub mod fixtures {
    use super::{parse_circuit, Circuit};
    use crate::error::{Error, Result};

    pub const PHOTON_PREP: &str = include_str!("../../fixtures/photon_prep.qcc");
    pub const PHOTON_POSTSEL_FILTERED: &str =
        include_str!("../../fixtures/photon_postsel_filtered.qcc");
    pub const PHOTON_POSTSEL_PAPER: &str = include_str!("../../fixtures/photon_postsel_paper.qcc");
    pub const NEUTRON_PREP: &str = include_str!("../../fixtures/neutron_prep.qcc");
    pub const NEUTRON_POSTSEL: &str = include_str!("../../fixtures/neutron_postsel.qcc");

    pub const ALL: [(&str, &str); 5] = [
        ("photon_prep", PHOTON_PREP),
        ("photon_postsel_filtered", PHOTON_POSTSEL_FILTERED),
        ("photon_postsel_paper", PHOTON_POSTSEL_PAPER),
        ("neutron_prep", NEUTRON_PREP),
        ("neutron_postsel", NEUTRON_POSTSEL),
    ];

    /// Parses a shipped fixture by name (with or without `.qcc`).
    pub fn load(name: &str) -> Result<Circuit> {
        let stem = name.strip_suffix(".qcc").unwrap_or(name);
        let text = ALL
            .iter()
            .find(|(n, _)| *n == stem)
            .map(|(_, t)| *t)
            .ok_or_else(|| Error::Config(format!("unknown fixture `{name}`")))?;
        parse_circuit(text)
    }
}
