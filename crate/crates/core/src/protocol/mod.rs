//! The protocol scenarios: the bare two-spin calculation, the localized kick,
//! the intermediate Bell measurement, the O3 detector and the two-arm
//! signaling comparison.

mod config;
mod naive;
mod operations;
mod scenario;

pub use config::{DetectorMode, JointMode, KickMode, PacketSpec, ScenarioConfig};
pub use naive::run_naive_sorkin;
pub use operations::{
    bell_projector, detector_coupling, detector_measurement, joint_measurement, kick_operator,
    DetectorMeasurement, JointMeasurement, MeasurementProcedure,
};
pub use scenario::{
    qubit_distribution, run_scenario, signaling_delta, Arm, ArmTrace, Protocol, SignalingReport, Stage,
};
