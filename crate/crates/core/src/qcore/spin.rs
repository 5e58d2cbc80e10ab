//! Single spin-1/2 and qubit primitives, encoded `d = 0`, `u = 1`.

use crate::qcore::{BasisTag, LinearOperator, StateVector, C64};

pub const DOWN: usize = 0;
pub const UP: usize = 1;

pub fn down() -> StateVector {
    StateVector::basis_state(2, DOWN, BasisTag::spin()).expect("index in range")
}

pub fn up() -> StateVector {
    StateVector::basis_state(2, UP, BasisTag::spin()).expect("index in range")
}

fn two_by_two(entries: [[C64; 2]; 2]) -> LinearOperator {
    let triplets = (0..2).flat_map(|r| (0..2).map(move |c| (r, c, entries[r][c])));
    LinearOperator::from_triplets(2, 2, triplets, BasisTag::spin()).expect("2x2 operator")
}

pub fn identity() -> LinearOperator {
    LinearOperator::identity(2, BasisTag::spin()).expect("2x2 identity")
}

/// Spin flip `|u> <-> |d>`.
pub fn sigma_x() -> LinearOperator {
    let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    two_by_two([[o, l], [l, o]])
}

pub fn sigma_y() -> LinearOperator {
    // σy|u> = i|d>, σy|d> = -i|u> in the d=0, u=1 ordering.
    let (o, i) = (C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    two_by_two([[o, i], [-i, o]])
}

/// `σz|u> = +|u>`, `σz|d> = -|d>`.
pub fn sigma_z() -> LinearOperator {
    let o = C64::new(0.0, 0.0);
    two_by_two([[C64::new(-1.0, 0.0), o], [o, C64::new(1.0, 0.0)]])
}
