use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::qcore::ensemble::QuantumState;
use crate::qcore::operator::LinearOperator;
use crate::qcore::C64;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        let herm = entries
            .iter()
            .zip(entries.adjoint().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(Error::NotHermitian(herm));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::Numerical(format!("density matrix trace {trace}")));
        }
        let min_eig = SymmetricEigen::new(entries.clone()).eigenvalues.min();
        if min_eig < -1e-10 {
            return Err(Error::Numerical(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries[(r, c)]
    }

    /// `tr(ρ · obs)`.
    pub fn expectation(&self, obs: &LinearOperator) -> Result<f64> {
        if obs.rows() != self.dim() || obs.cols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: obs.rows() });
        }
        let v = (&self.entries * obs.to_dense()).trace();
        Ok(v.re)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Partial trace keeping the factors listed in `keep` (0-based, first factor
/// is the most significant index). Kept factors retain their relative order.
pub fn reduced_density<'a>(
    x: impl Into<QuantumState<'a>>,
    keep: &[usize],
    dims: &[usize],
) -> Result<DensityMatrix> {
    let x = x.into();
    let weighted = x.weighted();
    let total: usize = dims.iter().product();
    let dim = weighted[0].1.dim();
    if total != dim || dims.contains(&0) {
        return Err(Error::DimensionMismatch { expected: dim, found: total });
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() || kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidParameter(format!("cannot keep factors {keep:?} of {dims:?}")));
    }
    let keep_dim: usize = kept.iter().map(|&k| dims[k]).product();
    let rest_dim = total / keep_dim;

    // Row-major strides of the full index.
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let split = |index: usize| -> (usize, usize) {
        let (mut a, mut b) = (0usize, 0usize);
        for (k, (&d, &st)) in dims.iter().zip(&strides).enumerate() {
            let digit = (index / st) % d;
            if kept.binary_search(&k).is_ok() {
                a = a * d + digit;
            } else {
                b = b * d + digit;
            }
        }
        (a, b)
    };
    let layout: Vec<(usize, usize)> = (0..total).map(split).collect();

    let mut rho = DMatrix::from_element(keep_dim, keep_dim, C64::new(0.0, 0.0));
    for (w, s) in weighted {
        let mut block = DMatrix::from_element(keep_dim, rest_dim, C64::new(0.0, 0.0));
        for (i, &(a, b)) in layout.iter().enumerate() {
            block[(a, b)] = s.amps()[i];
        }
        rho += (&block * block.adjoint()) * C64::new(w, 0.0);
    }
    // Exact Hermitian part; the product above is Hermitian up to rounding.
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(rho)
}
