//! Operators and measurement procedures of the protocol.

use crate::composite::{internal_index, CompositeSpace, INTERNAL_DIM};
use crate::error::{Error, Result};
use crate::lattice::Region;
use crate::protocol::config::{DetectorMode, JointMode, KickMode};
use crate::qcore::{BasisTag, BranchEnsemble, LinearOperator, ProjectiveMeasurement, C64};

type Block = [[C64; INTERNAL_DIM]; INTERNAL_DIM];

fn spin_pair_basis() -> BasisTag {
    BasisTag::spin().tensor(&BasisTag::spin())
}

/// Internal 8×8 permutation block sending `(s1, s2, q)` to `f(s1, s2, q)`.
fn permutation_block(f: impl Fn(usize, usize, usize) -> (usize, usize, usize)) -> Block {
    let mut m = [[C64::new(0.0, 0.0); INTERNAL_DIM]; INTERNAL_DIM];
    for s1 in 0..2 {
        for s2 in 0..2 {
            for q in 0..2 {
                let (a, b, c) = f(s1, s2, q);
                m[internal_index(a, b, c)][internal_index(s1, s2, q)] = C64::new(1.0, 0.0);
            }
        }
    }
    m
}

/// Rank-one projector onto `(|uu> + |dd>)/√2` on two spins (index `2·s1 + s2`).
pub fn bell_projector() -> LinearOperator {
    let half = C64::new(0.5, 0.0);
    let entries = [(0, 0, half), (0, 3, half), (3, 0, half), (3, 3, half)];
    LinearOperator::from_triplets(4, 4, entries, spin_pair_basis()).expect("4x4 projector")
}

/// Position-controlled spin flip on the composite space.
///
/// `Position` flips every particle found in `o1`; `Label1` flips only the
/// particle in tensor slot 1, and only when it is in `o1`. `Off` is the identity.
pub fn kick_operator(space: &CompositeSpace, o1: &Region, mode: KickMode) -> Result<LinearOperator> {
    o1.validate(space.sites())?;
    let o1 = *o1;
    match mode {
        KickMode::Off => LinearOperator::identity(space.dim(), space.basis()),
        KickMode::Position => space.position_diagonal_operator(|x1, x2| {
            let (f1, f2) = (o1.contains(x1), o1.contains(x2));
            (f1 || f2).then(|| {
                permutation_block(|s1, s2, q| (s1 ^ f1 as usize, s2 ^ f2 as usize, q))
            })
        }),
        KickMode::Label1 => space.position_diagonal_operator(|x1, _| {
            o1.contains(x1).then(|| permutation_block(|s1, s2, q| (s1 ^ 1, s2, q)))
        }),
    }
}

/// Detector coupling on spin ⊗ qubit (index `2·s + q`):
/// `|u0> ↔ |d1>`, `|d0>` and `|u1>` fixed.
pub fn detector_coupling() -> LinearOperator {
    let one = C64::new(1.0, 0.0);
    let entries = [(0, 0, one), (1, 2, one), (2, 1, one), (3, 3, one)];
    LinearOperator::from_triplets(4, 4, entries, BasisTag::spin().tensor(&BasisTag::qubit()))
        .expect("4x4 permutation")
}

/// A step of the pipeline acting on a branch ensemble.
pub trait MeasurementProcedure {
    fn apply(&self, x: &BranchEnsemble) -> Result<BranchEnsemble>;
}

/// The O3 detector: a position-controlled coupling unitary, optionally
/// followed by post-selection on "some particle in O3".
#[derive(Clone, Debug)]
pub struct DetectorMeasurement {
    coupling: LinearOperator,
    occupancy: ProjectiveMeasurement,
    selective: bool,
}

impl DetectorMeasurement {
    /// Unitary part of the detector.
    pub fn coupling(&self) -> &LinearOperator {
        &self.coupling
    }

    /// Projector onto "at least one particle in O3".
    pub fn occupancy_projector(&self) -> &LinearOperator {
        &self.occupancy.projectors()[0]
    }

    pub fn is_selective(&self) -> bool {
        self.selective
    }
}

impl MeasurementProcedure for DetectorMeasurement {
    fn apply(&self, x: &BranchEnsemble) -> Result<BranchEnsemble> {
        let coupled = x.map_states(|s| self.coupling.apply(s))?;
        if self.selective {
            self.occupancy.select(&coupled, 0)
        } else {
            Ok(coupled)
        }
    }
}

/// Builds the O3 detector.
///
/// `Position`: the coupling acts on (spin, qubit) of the particle found in
/// `o3`; the doubly occupied sector is left untouched, which keeps the
/// operator exchange symmetric. `Label2`: whenever some particle is in `o3`
/// the coupling acts on the slot-2 spin, whichever particle that is.
pub fn detector_measurement(
    space: &CompositeSpace,
    o3: &Region,
    mode: DetectorMode,
    selective: bool,
) -> Result<DetectorMeasurement> {
    o3.validate(space.sites())?;
    let o3 = *o3;
    // The coupling swaps the spin bit with the qubit bit.
    let coupling = match mode {
        DetectorMode::Position => space.position_diagonal_operator(|x1, x2| {
            match (o3.contains(x1), o3.contains(x2)) {
                (true, false) => Some(permutation_block(|s1, s2, q| (q, s2, s1))),
                (false, true) => Some(permutation_block(|s1, s2, q| (s1, q, s2))),
                _ => None,
            }
        })?,
        DetectorMode::Label2 => space.position_diagonal_operator(|x1, x2| {
            (o3.contains(x1) || o3.contains(x2)).then(|| permutation_block(|s1, s2, q| (s1, q, s2)))
        })?,
    };
    let zero_block = [[C64::new(0.0, 0.0); INTERNAL_DIM]; INTERNAL_DIM];
    let occupied = space.position_diagonal_operator(|x1, x2| {
        if o3.contains(x1) || o3.contains(x2) {
            None
        } else {
            Some(zero_block)
        }
    })?;
    let occupancy = ProjectiveMeasurement::binary(occupied)?;
    Ok(DetectorMeasurement { coupling, occupancy, selective })
}

/// The intermediate joint Bell measurement (non-selective).
#[derive(Clone, Debug)]
pub struct JointMeasurement {
    measurement: Option<ProjectiveMeasurement>,
}

impl JointMeasurement {
    /// `{P, I - P}` of the measurement; `None` when no measurement is made.
    pub fn projectors(&self) -> Option<&[LinearOperator]> {
        self.measurement.as_ref().map(|m| m.projectors())
    }
}

impl MeasurementProcedure for JointMeasurement {
    fn apply(&self, x: &BranchEnsemble) -> Result<BranchEnsemble> {
        match &self.measurement {
            Some(m) => m.apply(x),
            None => Ok(x.clone()),
        }
    }
}

/// Bell projector on the spins, acting everywhere (`GlobalBell`) or only when
/// both particles occupy `o2` (`LocalizedBell`).
pub fn joint_measurement(space: &CompositeSpace, mode: JointMode, o2: &Region) -> Result<JointMeasurement> {
    let bell = bell_projector();
    let mut block = [[C64::new(0.0, 0.0); INTERNAL_DIM]; INTERNAL_DIM];
    for pair_r in 0..4 {
        for pair_c in 0..4 {
            for q in 0..2 {
                block[2 * pair_r + q][2 * pair_c + q] = bell.get(pair_r, pair_c);
            }
        }
    }
    let zero_block = [[C64::new(0.0, 0.0); INTERNAL_DIM]; INTERNAL_DIM];
    let projector = match mode {
        JointMode::None => return Ok(JointMeasurement { measurement: None }),
        JointMode::GlobalBell => space.position_diagonal_operator(|_, _| Some(block))?,
        JointMode::LocalizedBell => {
            o2.validate(space.sites()).map_err(|e| Error::Validation(format!("O2: {e}")))?;
            let o2 = *o2;
            space.position_diagonal_operator(|x1, x2| {
                Some(if o2.contains(x1) && o2.contains(x2) { block } else { zero_block })
            })?
        }
    };
    Ok(JointMeasurement { measurement: Some(ProjectiveMeasurement::binary(projector)?) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::{exchange_operator, is_exchange_symmetric};
    use crate::qcore::{spin, StateVector, TensorProduct};

    fn pure(s: StateVector) -> BranchEnsemble {
        BranchEnsemble::pure(s).unwrap()
    }

    fn space() -> CompositeSpace {
        CompositeSpace::new(8)
    }

    fn region(lo: usize, hi: usize) -> Region {
        Region::new(lo, hi).unwrap()
    }

    fn basis(sp: &CompositeSpace, x1: usize, x2: usize, s1: usize, s2: usize, q: usize) -> StateVector {
        StateVector::basis_state(sp.dim(), sp.basis_index(x1, x2, s1, s2, q).unwrap(), sp.basis()).unwrap()
    }

    #[test]
    fn bell_projector_is_rank_one() {
        let p = bell_projector();
        assert_eq!(p.projector_error(), 0.0);
        let trace: f64 = (0..4).map(|i| p.get(i, i).re).sum();
        assert_eq!(trace, 1.0);
        let dd = spin::down().tensor_product(&spin::down());
        assert!((p.apply(&dd).unwrap().norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn flip_before_bell_turns_dd_orthogonal() {
        // Flipping spin 1 of |dd> gives |ud>, which the Bell projector annihilates.
        let flipped = spin::sigma_x().tensor_product(&spin::identity()).apply(&spin::down().tensor_product(&spin::down())).unwrap();
        assert_eq!(bell_projector().apply(&flipped).unwrap().norm(), 0.0);
    }

    #[test]
    fn detector_coupling_table() {
        let d = detector_coupling();
        let one = C64::new(1.0, 0.0);
        assert_eq!(d.get(0, 0), one);
        assert_eq!(d.get(1, 2), one);
        assert_eq!(d.get(2, 1), one);
        assert_eq!(d.get(3, 3), one);
        assert_eq!(d.nnz(), 4);
        let id = LinearOperator::identity(4, d.basis().clone()).unwrap();
        assert_eq!(d.matmul(&d).unwrap().max_abs_diff(&id).unwrap(), 0.0);
    }

    #[test]
    fn kicks() {
        let sp = space();
        let o1 = region(0, 3);
        let pos = kick_operator(&sp, &o1, KickMode::Position).unwrap();
        let lab = kick_operator(&sp, &o1, KickMode::Label1).unwrap();
        let off = kick_operator(&sp, &o1, KickMode::Off).unwrap();
        assert!(is_exchange_symmetric(&sp, &pos, 0.0));
        assert!(!is_exchange_symmetric(&sp, &lab, 0.0));
        assert!(pos.unitarity_error() < 1e-15);
        assert_eq!(off.max_abs_diff(&LinearOperator::identity(sp.dim(), sp.basis()).unwrap()).unwrap(), 0.0);

        // Particle 2 in O1: position kick flips s2, label kick does nothing.
        let s = basis(&sp, 5, 1, 0, 0, 0);
        assert_eq!(pos.apply(&s).unwrap(), basis(&sp, 5, 1, 0, 1, 0));
        assert_eq!(lab.apply(&s).unwrap(), s);
        // Both in O1: both spins flip.
        assert_eq!(pos.apply(&basis(&sp, 0, 2, 0, 1, 1)).unwrap(), basis(&sp, 0, 2, 1, 0, 1));
        assert!(kick_operator(&sp, &region(4, 9), KickMode::Position).is_err());
    }

    #[test]
    fn position_detector_examples() {
        let sp = space();
        let det = detector_measurement(&sp, &region(5, 8), DetectorMode::Position, false).unwrap();
        let d = det.coupling();
        assert!(is_exchange_symmetric(&sp, d, 0.0));
        assert!(d.unitarity_error() < 1e-15);
        // Particle 2 in O3 with spin up: qubit records it.
        assert_eq!(d.apply(&basis(&sp, 1, 6, 0, 1, 0)).unwrap(), basis(&sp, 1, 6, 0, 0, 1));
        assert_eq!(d.apply(&basis(&sp, 6, 1, 1, 0, 0)).unwrap(), basis(&sp, 6, 1, 0, 0, 1));
        // Spin down records nothing; nobody in O3 or both in O3 is untouched.
        assert_eq!(d.apply(&basis(&sp, 1, 6, 1, 0, 0)).unwrap(), basis(&sp, 1, 6, 1, 0, 0));
        assert_eq!(d.apply(&basis(&sp, 1, 2, 1, 1, 0)).unwrap(), basis(&sp, 1, 2, 1, 1, 0));
        assert_eq!(d.apply(&basis(&sp, 5, 6, 1, 1, 0)).unwrap(), basis(&sp, 5, 6, 1, 1, 0));
        assert!(!det.is_selective());
    }

    #[test]
    fn label_detector_reads_slot_two_and_breaks_symmetry() {
        let sp = space();
        let det = detector_measurement(&sp, &region(5, 8), DetectorMode::Label2, false).unwrap();
        let d = det.coupling();
        assert!(!is_exchange_symmetric(&sp, d, 1e-12));
        // Particle 1 in O3, yet slot-2 spin gets recorded.
        assert_eq!(d.apply(&basis(&sp, 6, 1, 0, 1, 0)).unwrap(), basis(&sp, 6, 1, 0, 0, 1));
        assert_eq!(d.apply(&basis(&sp, 1, 2, 0, 1, 0)).unwrap(), basis(&sp, 1, 2, 0, 1, 0));
    }

    #[test]
    fn selective_detector_post_selects_on_occupancy() {
        let sp = space();
        let det = detector_measurement(&sp, &region(5, 8), DetectorMode::Position, true).unwrap();
        assert!(det.is_selective());
        let p = det.occupancy_projector();
        assert_eq!(p.projector_error(), 0.0);
        let inside = basis(&sp, 1, 6, 0, 0, 0);
        let outside = basis(&sp, 1, 2, 0, 0, 0);
        assert_eq!(p.apply(&inside).unwrap(), inside);
        assert_eq!(p.apply(&outside).unwrap().norm(), 0.0);
        let x = inside.scale(C64::new(0.6, 0.0)).add(&outside.scale(C64::new(0.8, 0.0))).unwrap();
        let out = det.apply(&pure(x)).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out.branches()[0].state.max_abs_diff(&inside).unwrap() < 1e-15);
        assert!(det.apply(&pure(outside)).is_err());
    }

    #[test]
    fn joint_measurements() {
        let sp = space();
        let o2 = region(2, 5);
        let none = joint_measurement(&sp, JointMode::None, &o2).unwrap();
        assert!(none.projectors().is_none());

        let global = joint_measurement(&sp, JointMode::GlobalBell, &o2).unwrap();
        let out = global.apply(&pure(basis(&sp, 0, 7, 0, 0, 0))).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.branches().iter().all(|b| (b.weight - 0.5).abs() < 1e-15));

        let local = joint_measurement(&sp, JointMode::LocalizedBell, &o2).unwrap();
        let [p, q] = local.projectors().unwrap() else { panic!("binary") };
        let s = exchange_operator(&sp);
        assert!(is_exchange_symmetric(&sp, p, 0.0) && is_exchange_symmetric(&sp, q, 0.0));
        assert_eq!(s.matmul(p).unwrap().max_abs_diff(&p.matmul(&s).unwrap()).unwrap(), 0.0);
        // Outside O2 the localized measurement never fires.
        let away = local.apply(&pure(basis(&sp, 0, 7, 0, 0, 0))).unwrap();
        assert_eq!(away.len(), 1);
        let there = local.apply(&pure(basis(&sp, 2, 4, 0, 0, 0))).unwrap();
        assert_eq!(there.len(), 2);
        assert!(joint_measurement(&sp, JointMode::LocalizedBell, &region(6, 9)).is_err());
    }
}
