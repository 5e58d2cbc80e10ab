use serde::{Deserialize, Serialize};

use crate::composite::Statistics;
use crate::error::{Error, Result};
use crate::lattice::{make_lattice, wavepacket, Lattice1D, Region};
use crate::qcore::StateVector;

/// How the O1 kick addresses the particles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KickMode {
    /// No kick in either arm.
    Off,
    /// Flip the spin of whichever particle sits in O1.
    Position,
    /// Flip the spin in tensor slot 1, if that particle sits in O1.
    Label1,
}

/// The intermediate joint spin measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointMode {
    None,
    /// Bell projection on the two spins wherever the particles are.
    GlobalBell,
    /// Bell projection that fires only when both particles occupy O2.
    LocalizedBell,
}

/// How the O3 detector couples to the spins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorMode {
    /// Couple to the spin of whichever particle sits in O3.
    Position,
    /// Couple to the spin in tensor slot 2 whenever some particle sits in O3.
    Label2,
}

/// Raised-cosine packet parameters, see [`wavepacket`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub support: Region,
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
}

impl PacketSpec {
    pub fn build(&self, lat: &Lattice1D) -> Result<StateVector> {
        wavepacket(lat, &self.support, self.center, self.width, self.momentum)
    }
}

/// Full description of one two-arm protocol run.
///
/// The defaults describe a 96-site chain with particle 1 at rest in O1 and
/// particle 2 travelling at the maximal group velocity into O3, arriving at
/// `t1 + t2 = 10`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: usize,
    pub hopping: f64,
    #[serde(rename = "O1")]
    pub o1: Region,
    #[serde(rename = "O2")]
    pub o2: Region,
    #[serde(rename = "O3")]
    pub o3: Region,
    pub packet1: PacketSpec,
    pub packet2: PacketSpec,
    pub statistics: Statistics,
    pub kick_mode: KickMode,
    pub joint_mode: JointMode,
    pub detector_mode: DetectorMode,
    pub t1: f64,
    pub t2: f64,
    pub eps: f64,
    pub selective_o3: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n: 96,
            hopping: 1.0,
            o1: Region { lo: 8, hi: 20 },
            o2: Region { lo: 36, hi: 48 },
            o3: Region { lo: 76, hi: 88 },
            packet1: PacketSpec { support: Region { lo: 8, hi: 20 }, center: 13.5, width: 3.0, momentum: 0.0 },
            packet2: PacketSpec {
                support: Region { lo: 50, hi: 74 },
                center: 61.5,
                width: 3.0,
                momentum: std::f64::consts::FRAC_PI_2,
            },
            statistics: Statistics::Fermion,
            kick_mode: KickMode::Position,
            joint_mode: JointMode::None,
            detector_mode: DetectorMode::Position,
            t1: 0.0,
            t2: 10.0,
            eps: 1e-6,
            selective_o3: false,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

impl ScenarioConfig {
    pub fn lattice(&self) -> Result<Lattice1D> {
        make_lattice(self.n, self.hopping).map_err(|e| invalid(e.to_string()))
    }

    pub fn total_time(&self) -> f64 {
        self.t1 + self.t2
    }

    /// Checks every invariant; the error message names the violated one.
    pub fn validate(&self) -> Result<()> {
        let lat = self.lattice()?;
        for (name, r) in [("O1", &self.o1), ("O2", &self.o2), ("O3", &self.o3)] {
            if r.is_empty() {
                return Err(invalid(format!("{name} nonempty (got [{}, {}))", r.lo, r.hi)));
            }
            if r.hi > self.n {
                return Err(invalid(format!("{name} within lattice (hi = {} > n = {})", r.hi, self.n)));
            }
        }
        if self.o1.overlaps(&self.o3) {
            return Err(invalid("O1, O3 disjoint"));
        }
        for (name, t) in [("t1", self.t1), ("t2", self.t2)] {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid(format!("{name} >= 0 (got {t})")));
            }
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(invalid(format!("eps >= 0 (got {})", self.eps)));
        }
        for (name, p) in [("packet1", &self.packet1), ("packet2", &self.packet2)] {
            p.build(&lat).map_err(|e| invalid(format!("{name}: {e}")))?;
        }
        Ok(())
    }
}
