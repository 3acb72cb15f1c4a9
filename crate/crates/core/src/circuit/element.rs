use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{
    diagonal_phase, ket_bra, pauli_x, projector, LocalMatrix, OperatorExpr, StateVector, Term,
};

use super::space::{CircuitSpace, Internal, Platform, OAM_LEVELS};

/// Phase in units of π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase(pub f64);

impl Phase {
    pub fn radians(self) -> f64 {
        self.0 * std::f64::consts::PI
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    /// `|a⟩ → √t|a⟩ + i√(1−t)|b⟩`, `|b⟩ → i√(1−t)|a⟩ + √t|b⟩`; with
    /// `conjugate` the reflected amplitudes carry `−i` (the inverse element).
    BeamSplitter {
        a: usize,
        b: usize,
        t: f64,
        conjugate: bool,
    },
    /// Phase `i` on one mode.
    Mirror {
        mode: usize,
    },
    PhaseShifter {
        mode: usize,
        phase: Phase,
    },
    /// `L ↔ R`.
    HalfWavePlate {
        mode: usize,
    },
    /// `|L, m⟩ → |R, m+2⟩`, `|R, m⟩ → |L, m−2⟩`.
    QPlate {
        mode: usize,
    },
    /// `↑ ↔ ↓`.
    SpinFlipper {
        mode: usize,
    },
    /// `|↑, E0⟩ → i|↓, E0−ħω⟩` and `|↓, E0−ħω⟩ → i|↑, E0⟩`; the two other
    /// internal states are off resonance and pass unchanged.
    RfFlipper {
        mode: usize,
    },
    Detector {
        mode: usize,
        name: String,
        filter: Option<Internal>,
    },
}

impl Element {
    pub fn kind(&self) -> &'static str {
        match self {
            Element::BeamSplitter { .. } => "beam splitter",
            Element::Mirror { .. } => "mirror",
            Element::PhaseShifter { .. } => "phase shifter",
            Element::HalfWavePlate { .. } => "half-wave plate",
            Element::QPlate { .. } => "q-plate",
            Element::SpinFlipper { .. } => "spin flipper",
            Element::RfFlipper { .. } => "rf flipper",
            Element::Detector { .. } => "detector",
        }
    }

    pub fn is_detector(&self) -> bool {
        matches!(self, Element::Detector { .. })
    }

    pub fn modes(&self) -> Vec<usize> {
        match *self {
            Element::BeamSplitter { a, b, .. } => vec![a, b],
            Element::Mirror { mode }
            | Element::PhaseShifter { mode, .. }
            | Element::HalfWavePlate { mode }
            | Element::QPlate { mode }
            | Element::SpinFlipper { mode }
            | Element::RfFlipper { mode }
            | Element::Detector { mode, .. } => vec![mode],
        }
    }

    fn platform(&self) -> Option<Platform> {
        match self {
            Element::HalfWavePlate { .. } | Element::QPlate { .. } => Some(Platform::Photon),
            Element::SpinFlipper { .. } | Element::RfFlipper { .. } => Some(Platform::Neutron),
            Element::Detector {
                filter: Some(internal),
                ..
            } => Some(internal.platform()),
            _ => None,
        }
    }

    /// Mode range, platform and parameter checks.
    pub fn check(&self, space: &CircuitSpace) -> Result<()> {
        if let Some(p) = self.platform() {
            if p != space.platform() {
                return Err(Error::IncompatibleElement {
                    element: self.to_string(),
                    kind: self.kind(),
                    space: space.platform().name(),
                });
            }
        }
        for m in self.modes() {
            if m >= space.modes() {
                return Err(Error::Config(format!(
                    "{}: mode {m} out of range (circuit has {} modes)",
                    self.kind(),
                    space.modes()
                )));
            }
        }
        match *self {
            Element::BeamSplitter { a, b, t, .. } => {
                if a == b {
                    return Err(Error::Config(format!(
                        "beam splitter needs two distinct modes, got {a} {b}"
                    )));
                }
                if !(t > 0.0 && t < 1.0) {
                    return Err(Error::Config(format!(
                        "transmittance must lie in (0, 1), got {t}"
                    )));
                }
            }
            Element::PhaseShifter { phase, .. } if !phase.0.is_finite() => {
                return Err(Error::Config("phase must be finite".into()));
            }
            Element::Detector {
                filter: Some(ref f),
                ..
            } => {
                f.indices()?;
            }
            _ => {}
        }
        Ok(())
    }

    /// The element as an operator on the full circuit space.
    ///
    /// The q-plate is completed to a permutation on the truncated ladder by
    /// closing `|L,+4⟩ ↔ |R,−4⟩`; [`Element::apply`] refuses states that would
    /// use that closure.
    pub fn unitary(&self, space: &CircuitSpace) -> Result<OperatorExpr> {
        self.check(space)?;
        let s = space.descriptor();
        let modes = space.modes();
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        match *self {
            Element::BeamSplitter { a, b, t, conjugate } => {
                let r = if conjugate { -i } else { i } * (1.0 - t).sqrt();
                let mut m = LocalMatrix::identity(modes, modes);
                m[(a, a)] = Complex64::new(t.sqrt(), 0.0);
                m[(b, b)] = Complex64::new(t.sqrt(), 0.0);
                m[(b, a)] = r;
                m[(a, b)] = r;
                OperatorExpr::local(s.clone(), "path", m)
            }
            Element::Mirror { mode } => {
                OperatorExpr::local(s.clone(), "path", diagonal_phase(modes, mode, i))
            }
            Element::PhaseShifter { mode, phase } => OperatorExpr::local(
                s.clone(),
                "path",
                diagonal_phase(modes, mode, Complex64::from_polar(1.0, phase.radians())),
            ),
            Element::HalfWavePlate { mode } => {
                on_mode(space, mode, vec![(one, vec![("pol", pauli_x())])])
            }
            Element::SpinFlipper { mode } => {
                on_mode(space, mode, vec![(one, vec![("spin", pauli_x())])])
            }
            Element::QPlate { mode } => {
                let (l, r) = (0, 1);
                let top = OAM_LEVELS - 1;
                let mut terms = Vec::new();
                for k in 0..OAM_LEVELS {
                    // L,k → R,k+1 (closing L,top → R,0); R,k → L,k−1 (closing R,0 → L,top).
                    let up = if k == top { 0 } else { k + 1 };
                    let down = if k == 0 { top } else { k - 1 };
                    terms.push((
                        one,
                        vec![
                            ("pol", ket_bra(2, r, l)),
                            ("oam", ket_bra(OAM_LEVELS, up, k)),
                        ],
                    ));
                    terms.push((
                        one,
                        vec![
                            ("pol", ket_bra(2, l, r)),
                            ("oam", ket_bra(OAM_LEVELS, down, k)),
                        ],
                    ));
                }
                on_mode(space, mode, terms)
            }
            Element::RfFlipper { mode } => {
                let (up, down) = (0, 1);
                let (e0, e1) = (0, 1);
                on_mode(
                    space,
                    mode,
                    vec![
                        (
                            i,
                            vec![
                                ("spin", ket_bra(2, down, up)),
                                ("energy", ket_bra(2, e1, e0)),
                            ],
                        ),
                        (
                            i,
                            vec![
                                ("spin", ket_bra(2, up, down)),
                                ("energy", ket_bra(2, e0, e1)),
                            ],
                        ),
                        (
                            one,
                            vec![("spin", projector(2, up)), ("energy", projector(2, e1))],
                        ),
                        (
                            one,
                            vec![("spin", projector(2, down)), ("energy", projector(2, e0))],
                        ),
                    ],
                )
            }
            Element::Detector { .. } => {
                Err(Error::Config("a detector has no unitary action".into()))
            }
        }
    }

    /// Applies the element to a state, rejecting q-plate ladder overflow.
    pub fn apply(&self, space: &CircuitSpace, state: &StateVector) -> Result<StateVector> {
        if let Element::QPlate { mode } = *self {
            let (path, pol, oam) = (
                space.descriptor().position("path")?,
                space.descriptor().position("pol")?,
                space.descriptor().position("oam")?,
            );
            for (idx, _) in state.iter() {
                if idx[path] != mode {
                    continue;
                }
                let m = Internal::oam_value(idx[oam]);
                let overflow = match idx[pol] {
                    0 if idx[oam] == OAM_LEVELS - 1 => Some(m + 2),
                    1 if idx[oam] == 0 => Some(m - 2),
                    _ => None,
                };
                if let Some(m) = overflow {
                    return Err(Error::OamOverflow { mode, m });
                }
            }
        }
        self.unitary(space)?.apply(state)
    }
}

/// `Π_mode ⊗ (Σ coeff·⊗ locals) + (1 − Π_mode) ⊗ 1`.
fn on_mode(
    space: &CircuitSpace,
    mode: usize,
    internal: Vec<(Complex64, Vec<(&str, LocalMatrix)>)>,
) -> Result<OperatorExpr> {
    let modes = space.modes();
    let mut terms = Vec::with_capacity(internal.len() + 1);
    for (coeff, locals) in internal {
        let mut map: std::collections::BTreeMap<String, LocalMatrix> = locals
            .into_iter()
            .map(|(l, m)| (l.to_string(), m))
            .collect();
        map.insert("path".into(), projector(modes, mode));
        terms.push(Term { coeff, locals: map });
    }
    let rest = LocalMatrix::identity(modes, modes) - projector(modes, mode);
    terms.push(Term {
        coeff: Complex64::new(1.0, 0.0),
        locals: [("path".to_string(), rest)].into_iter().collect(),
    });
    OperatorExpr::from_terms(space.descriptor().clone(), terms)
}

impl fmt::Display for Element {
    /// The circuit-file directive for this element.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::BeamSplitter { a, b, t, conjugate } => {
                write!(f, "bs {a} {b} t={t}")?;
                if *conjugate {
                    f.write_str(" conj")?;
                }
                Ok(())
            }
            Element::Mirror { mode } => write!(f, "mirror {mode}"),
            Element::PhaseShifter { mode, phase } => write!(f, "ps {mode} phase={}", phase.0),
            Element::HalfWavePlate { mode } => write!(f, "hwp {mode}"),
            Element::QPlate { mode } => write!(f, "qp {mode}"),
            Element::SpinFlipper { mode } => write!(f, "sf {mode}"),
            Element::RfFlipper { mode } => write!(f, "rf {mode}"),
            Element::Detector { mode, name, filter } => {
                write!(f, "detector {mode} name={name}")?;
                if let Some(filter) = filter {
                    write!(f, " filter={}", filter.filter_text())?;
                }
                Ok(())
            }
        }
    }
}
