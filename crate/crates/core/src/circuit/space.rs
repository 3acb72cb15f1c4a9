use crate::error::{Error, Result};
use crate::hilbert::{SpaceDescriptor, StateVector};

/// Truncated OAM ladder `m ∈ {−4, −2, 0, +2, +4}` at indices `0..5`.
pub const OAM_LEVELS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Platform {
    /// path ⊗ pol(L=0, R=1) ⊗ oam
    Photon,
    /// path ⊗ spin(↑=0, ↓=1) ⊗ energy(E0=0, E0−ħω=1)
    Neutron,
}

impl Platform {
    pub fn name(self) -> &'static str {
        match self {
            Platform::Photon => "photon",
            Platform::Neutron => "neutron",
        }
    }

    pub fn internal_labels(self) -> [&'static str; 2] {
        match self {
            Platform::Photon => ["pol", "oam"],
            Platform::Neutron => ["spin", "energy"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitSpace {
    platform: Platform,
    modes: usize,
    descriptor: SpaceDescriptor,
}

impl CircuitSpace {
    pub fn new(platform: Platform, modes: usize) -> Result<Self> {
        let [a, b] = platform.internal_labels();
        let internal_dims = match platform {
            Platform::Photon => [2, OAM_LEVELS],
            Platform::Neutron => [2, 2],
        };
        let descriptor = SpaceDescriptor::new([
            ("path", modes),
            (a, internal_dims[0]),
            (b, internal_dims[1]),
        ])
        .map_err(|_| Error::Config(format!("a circuit needs at least 2 modes, got {modes}")))?;
        Ok(Self {
            platform,
            modes,
            descriptor,
        })
    }

    pub fn photon(modes: usize) -> Result<Self> {
        Self::new(Platform::Photon, modes)
    }

    pub fn neutron(modes: usize) -> Result<Self> {
        Self::new(Platform::Neutron, modes)
    }

    pub fn platform(&self) -> Platform {
        self.platform
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn descriptor(&self) -> &SpaceDescriptor {
        &self.descriptor
    }

    pub fn internal_dim(&self) -> usize {
        match self.platform {
            Platform::Photon => 2 * OAM_LEVELS,
            Platform::Neutron => 4,
        }
    }

    /// `|mode⟩ ⊗ |internal⟩`.
    pub fn basis(&self, mode: usize, internal: Internal) -> Result<StateVector> {
        if internal.platform() != self.platform {
            return Err(Error::Config(format!(
                "{} internal state on a {} circuit",
                internal.platform().name(),
                self.platform.name()
            )));
        }
        let [(a, i), (b, j)] = internal.indices()?;
        StateVector::basis_labeled(self.descriptor.clone(), &[("path", mode), (a, i), (b, j)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pol {
    L,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

/// Internal (non-path) basis state of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Internal {
    Photon { pol: Pol, oam: i32 },
    Neutron { spin: Spin, energy: u8 },
}

impl Internal {
    pub fn platform(&self) -> Platform {
        match self {
            Internal::Photon { .. } => Platform::Photon,
            Internal::Neutron { .. } => Platform::Neutron,
        }
    }

    pub fn oam_index(m: i32) -> Result<usize> {
        if m % 2 != 0 || !(-4..=4).contains(&m) {
            return Err(Error::Config(format!(
                "oam must be one of -4, -2, 0, 2, 4, got {m}"
            )));
        }
        Ok(((m + 4) / 2) as usize)
    }

    pub fn oam_value(index: usize) -> i32 {
        2 * index as i32 - 4
    }

    /// `[(label, index); 2]` for the two internal factors.
    pub fn indices(&self) -> Result<[(&'static str, usize); 2]> {
        match *self {
            Internal::Photon { pol, oam } => {
                let p = match pol {
                    Pol::L => 0,
                    Pol::R => 1,
                };
                Ok([("pol", p), ("oam", Self::oam_index(oam)?)])
            }
            Internal::Neutron { spin, energy } => {
                let s = match spin {
                    Spin::Up => 0,
                    Spin::Down => 1,
                };
                if energy > 1 {
                    return Err(Error::Config(format!(
                        "energy level must be 0 or 1, got {energy}"
                    )));
                }
                Ok([("spin", s), ("energy", energy as usize)])
            }
        }
    }

    pub(crate) fn filter_text(&self) -> String {
        match self {
            Internal::Photon { pol, oam } => format!("pol:{},oam:{oam}", pol_text(*pol)),
            Internal::Neutron { spin, energy } => {
                format!("spin:{},energy:{energy}", spin_text(*spin))
            }
        }
    }

    pub(crate) fn input_text(&self) -> String {
        match self {
            Internal::Photon { pol, oam } => format!("pol={} oam={oam}", pol_text(*pol)),
            Internal::Neutron { spin, energy } => {
                format!("spin={} energy={energy}", spin_text(*spin))
            }
        }
    }
}

fn pol_text(p: Pol) -> &'static str {
    match p {
        Pol::L => "L",
        Pol::R => "R",
    }
}

fn spin_text(s: Spin) -> &'static str {
    match s {
        Spin::Up => "up",
        Spin::Down => "down",
    }
}
