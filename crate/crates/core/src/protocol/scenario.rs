use serde::{Deserialize, Serialize};

use crate::composite::{
    evolve_pair, prepare_initial, region_occupancy, statistics_violation, CompositeSpace,
};
use crate::error::Result;
use crate::lattice::{check_spacelike, Lattice1D, SpacelikeCertificate, Spectrum};
use crate::protocol::config::{KickMode, ScenarioConfig};
use crate::protocol::operations::{
    detector_measurement, joint_measurement, kick_operator, DetectorMeasurement, JointMeasurement,
    MeasurementProcedure,
};
use crate::qcore::{BranchEnsemble, LinearOperator, StateVector};

/// Outcome statistics of the two protocol arms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalingReport {
    pub p_q1_kick: f64,
    pub p_q1_nokick: f64,
    pub delta: f64,
    pub arrival_prob: f64,
    pub certificate: SpacelikeCertificate,
    pub max_antisym_violation: f64,
    pub branch_count_kick: usize,
    pub branch_count_nokick: usize,
}

/// `|p_q1_kick - p_q1_nokick|`.
pub fn signaling_delta(report: &SignalingReport) -> f64 {
    (report.p_q1_kick - report.p_q1_nokick).abs()
}

/// Named checkpoints of one arm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Prepared,
    PostKick,
    PostO2,
    Final,
}

/// Which arm of the experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Kick,
    Nokick,
}

/// Every intermediate ensemble of one arm.
#[derive(Clone, Debug)]
pub struct ArmTrace {
    pub prepared: BranchEnsemble,
    pub post_kick: BranchEnsemble,
    pub post_o2: BranchEnsemble,
    /// After the second evolution, before the detector acts.
    pub pre_detector: BranchEnsemble,
    pub final_state: BranchEnsemble,
}

impl ArmTrace {
    pub fn stage(&self, stage: Stage) -> &BranchEnsemble {
        match stage {
            Stage::Prepared => &self.prepared,
            Stage::PostKick => &self.post_kick,
            Stage::PostO2 => &self.post_o2,
            Stage::Final => &self.final_state,
        }
    }

    fn all(&self) -> [&BranchEnsemble; 5] {
        [&self.prepared, &self.post_kick, &self.post_o2, &self.pre_detector, &self.final_state]
    }
}

/// Everything a run needs, built once and shared by both arms.
pub struct Protocol {
    cfg: ScenarioConfig,
    lattice: Lattice1D,
    space: CompositeSpace,
    initial: StateVector,
    kick: LinearOperator,
    u1: Option<LinearOperator>,
    u2: Option<LinearOperator>,
    joint: JointMeasurement,
    detector: DetectorMeasurement,
}

fn evolution(spectrum: &Spectrum, t: f64) -> Result<Option<LinearOperator>> {
    if t == 0.0 {
        Ok(None)
    } else {
        spectrum.propagator(t).map(Some)
    }
}

impl Protocol {
    /// Validates `cfg` and builds the initial state and all operators.
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let lattice = cfg.lattice()?;
        let space = CompositeSpace::new(cfg.n);
        let spectrum = lattice.spectrum()?;
        let p1 = cfg.packet1.build(&lattice)?;
        let p2 = cfg.packet2.build(&lattice)?;
        let initial = prepare_initial(&space, cfg.statistics, &p1, &p2)?;
        Ok(Self {
            cfg: cfg.clone(),
            lattice,
            space,
            initial,
            kick: kick_operator(&space, &cfg.o1, cfg.kick_mode)?,
            u1: evolution(&spectrum, cfg.t1)?,
            u2: evolution(&spectrum, cfg.t2)?,
            joint: joint_measurement(&space, cfg.joint_mode, &cfg.o2)?,
            detector: detector_measurement(&space, &cfg.o3, cfg.detector_mode, cfg.selective_o3)?,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn lattice(&self) -> &Lattice1D {
        &self.lattice
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial
    }

    pub fn certificate(&self) -> Result<SpacelikeCertificate> {
        check_spacelike(&self.lattice, &self.cfg.o1, &self.cfg.o3, &self.initial, self.cfg.total_time(), self.cfg.eps)
    }

    fn evolve(&self, u: &Option<LinearOperator>, x: &BranchEnsemble) -> Result<BranchEnsemble> {
        match u {
            Some(u) => x.map_states(|s| evolve_pair(&self.space, u, s)),
            None => Ok(x.clone()),
        }
    }

    /// Runs one arm: kick (kick arm only), evolve `t1`, joint measurement,
    /// evolve `t2`, detector.
    pub fn run_arm(&self, arm: Arm) -> Result<ArmTrace> {
        let prepared = BranchEnsemble::pure(self.initial.clone())?;
        let post_kick = match arm {
            Arm::Kick if self.cfg.kick_mode != KickMode::Off => prepared.map_states(|s| self.kick.apply(s))?,
            _ => prepared.clone(),
        };
        let post_o2 = self.joint.apply(&self.evolve(&self.u1, &post_kick)?)?;
        let pre_detector = self.evolve(&self.u2, &post_o2)?;
        let final_state = self.detector.apply(&pre_detector)?;
        Ok(ArmTrace { prepared, post_kick, post_o2, pre_detector, final_state })
    }

    /// Largest distance from the configured exchange sector over every
    /// branch of every stage.
    pub fn max_statistics_violation(&self, trace: &ArmTrace) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for ensemble in trace.all() {
            for b in ensemble.branches() {
                worst = worst.max(statistics_violation(&self.space, self.cfg.statistics, &b.state)?);
            }
        }
        Ok(worst)
    }

    /// Expected number of particles in O3 just before detection, capped at one.
    pub fn arrival_probability(&self, trace: &ArmTrace) -> Result<f64> {
        let mut acc = 0.0;
        for b in trace.pre_detector.branches() {
            acc += b.weight * region_occupancy(&self.space, &b.state, &self.cfg.o3)?;
        }
        Ok(acc.clamp(0.0, 1.0))
    }

    /// Runs both arms and assembles the report.
    pub fn run(&self) -> Result<SignalingReport> {
        let certificate = self.certificate()?;
        let (kick, nokick) = rayon::join(|| self.run_arm(Arm::Kick), || self.run_arm(Arm::Nokick));
        let (kick, nokick) = (kick?, nokick?);
        let p_q1_kick = qubit_distribution(&kick.final_state)[1];
        let p_q1_nokick = qubit_distribution(&nokick.final_state)[1];
        let max_antisym_violation =
            self.max_statistics_violation(&kick)?.max(self.max_statistics_violation(&nokick)?);
        Ok(SignalingReport {
            p_q1_kick,
            p_q1_nokick,
            delta: (p_q1_kick - p_q1_nokick).abs(),
            arrival_prob: self.arrival_probability(&nokick)?,
            certificate,
            max_antisym_violation,
            branch_count_kick: kick.final_state.len(),
            branch_count_nokick: nokick.final_state.len(),
        })
    }
}

/// `[p(q = 0), p(q = 1)]` of the detector qubit (the fastest composite index).
pub fn qubit_distribution(x: &BranchEnsemble) -> [f64; 2] {
    let mut p = [0.0; 2];
    for b in x.branches() {
        for (i, a) in b.state.amps().iter().enumerate() {
            p[i & 1] += b.weight * a.norm_sqr();
        }
    }
    p.map(|v: f64| v.clamp(0.0, 1.0))
}

/// Runs the full two-arm protocol described by `cfg`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SignalingReport> {
    Protocol::new(cfg)?.run()
}
