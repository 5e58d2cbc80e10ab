use crate::error::{Error, Result};
use crate::protocol::operations::bell_projector;
use crate::qcore::{expectation, spin, BasisTag, BranchEnsemble, LinearOperator, ProjectiveMeasurement, TensorProduct};

/// Two-spin pipeline without spatial structure: `|dd>`, optional flip of
/// spin 1, non-selective Bell measurement, then `<I ⊗ C>` on spin 2.
///
/// Analytically `½·tr C` without the kick and `<d|C|d>` with it.
pub fn run_naive_sorkin(c: &LinearOperator, kick: bool) -> Result<f64> {
    if c.rows() != 2 || c.cols() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: c.rows() });
    }
    let herm = c.hermiticity_error();
    if herm > 1e-10 {
        return Err(Error::NotHermitian(herm));
    }
    let c = c.clone().with_basis(BasisTag::spin());
    let mut state = spin::down().tensor_product(&spin::down());
    if kick {
        state = spin::sigma_x().tensor_product(&spin::identity()).apply(&state)?;
    }
    let measured: BranchEnsemble = ProjectiveMeasurement::binary(bell_projector())?.apply(&state)?;
    expectation(&spin::identity().tensor_product(&c), &measured)
}
