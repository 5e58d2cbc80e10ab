//! Test-only reference implementations, written from the defining formulas
//! without calling the library's evolution, operator or measurement code.

#![allow(dead_code)]

pub mod oracle;

use sorkin_lattice::composite::Statistics;
use sorkin_lattice::lattice::Region;
use sorkin_lattice::protocol::{DetectorMode, JointMode, KickMode, PacketSpec, ScenarioConfig};

/// 16-site geometry: particle 1 at rest in O1, particle 2 moving towards O3.
pub fn small_config(n: usize) -> ScenarioConfig {
    assert!(n >= 12);
    ScenarioConfig {
        n,
        hopping: 1.0,
        o1: Region { lo: 0, hi: 4 },
        o2: Region { lo: 5, hi: 9 },
        o3: Region { lo: n - 4, hi: n },
        packet1: PacketSpec { support: Region { lo: 0, hi: 4 }, center: 1.5, width: 1.0, momentum: 0.0 },
        packet2: PacketSpec {
            support: Region { lo: n - 8, hi: n - 4 },
            center: n as f64 - 6.5,
            width: 1.0,
            momentum: std::f64::consts::FRAC_PI_2,
        },
        statistics: Statistics::Fermion,
        kick_mode: KickMode::Position,
        joint_mode: JointMode::None,
        detector_mode: DetectorMode::Position,
        t1: 0.0,
        t2: 1.0,
        eps: 1e-4,
        selective_o3: false,
    }
}
