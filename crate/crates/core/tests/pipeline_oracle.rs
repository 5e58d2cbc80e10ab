//! Branch-ensemble pipeline versus the dense density-matrix reference.

mod common;

use common::oracle::{self, ensemble_rho, max_diff};
use common::small_config;
use sorkin_lattice::composite::Statistics;
use sorkin_lattice::protocol::{qubit_distribution, Arm, DetectorMode, JointMode, KickMode, Protocol, ScenarioConfig};

fn compare(cfg: &ScenarioConfig) {
    let protocol = Protocol::new(cfg).unwrap();
    for (arm, kick) in [(Arm::Kick, true), (Arm::Nokick, false)] {
        let trace = protocol.run_arm(arm).unwrap();
        let reference = oracle::run_arm(cfg, kick);
        let p_lib = qubit_distribution(&trace.final_state);
        let p_ref = reference.p_q1();
        assert!((p_lib[1] - p_ref).abs() <= 1e-10, "{cfg:?} {arm:?}: {} vs {p_ref}", p_lib[1]);
        assert!((p_lib[0] + p_lib[1] - 1.0).abs() <= 1e-10);
        let diff = max_diff(&ensemble_rho(&trace.final_state), &reference);
        assert!(diff <= 1e-10, "{arm:?}: density matrices differ by {diff:e}");
    }
}

#[test]
fn all_mode_combinations_match_reference_at_n12() {
    let base = small_config(12);
    for statistics in [Statistics::Fermion, Statistics::Boson, Statistics::Distinguishable] {
        for (kick_mode, joint_mode, detector_mode) in [
            (KickMode::Position, JointMode::None, DetectorMode::Position),
            (KickMode::Label1, JointMode::GlobalBell, DetectorMode::Position),
            (KickMode::Position, JointMode::LocalizedBell, DetectorMode::Label2),
        ] {
            let cfg = ScenarioConfig { statistics, kick_mode, joint_mode, detector_mode, t1: 0.7, t2: 1.1, ..base.clone() };
            compare(&cfg);
        }
    }
}

#[test]
fn selective_detector_matches_reference() {
    let cfg = ScenarioConfig {
        statistics: Statistics::Distinguishable,
        kick_mode: KickMode::Label1,
        joint_mode: JointMode::GlobalBell,
        selective_o3: true,
        t2: 2.0,
        ..small_config(12)
    };
    compare(&cfg);
}

#[test]
fn localized_bell_that_fires_matches_reference() {
    // O2 wide enough to hold both packets after a short evolution.
    let mut cfg = small_config(12);
    cfg.o2 = sorkin_lattice::lattice::Region { lo: 0, hi: 8 };
    cfg.o3 = sorkin_lattice::lattice::Region { lo: 9, hi: 12 };
    cfg.packet2.support = sorkin_lattice::lattice::Region { lo: 4, hi: 9 };
    cfg.packet2.center = 6.0;
    cfg.packet2.momentum = -0.5;
    cfg.t1 = 0.8;
    cfg.t2 = 0.9;
    cfg.joint_mode = JointMode::LocalizedBell;
    let protocol = Protocol::new(&cfg).unwrap();
    let trace = protocol.run_arm(Arm::Nokick).unwrap();
    assert!(trace.post_o2.len() == 2, "the localized measurement should fire");
    compare(&cfg);
}

#[test]
fn fermion_position_pipeline_matches_reference_at_n16() {
    compare(&small_config(16));
}
