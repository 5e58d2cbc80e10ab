use nalgebra::DMatrix;
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::error::{Error, Result};
use crate::qcore::state::{BasisTag, StateVector};
use crate::qcore::C64;

/// Operators whose larger side is at most this many rows/columns are stored densely.
pub const DENSE_MAX_DIM: usize = 256;

#[derive(Clone, Debug, PartialEq)]
enum Storage {
    Dense(DMatrix<C64>),
    Sparse(CsrMatrix<C64>),
}

/// Complex matrix over a tagged basis, stored dense or compressed-row
/// depending on its size.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    storage: Storage,
    basis: BasisTag,
}

fn prefers_dense(rows: usize, cols: usize) -> bool {
    rows.max(cols) <= DENSE_MAX_DIM
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl LinearOperator {
    /// Builds an operator from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, C64)>,
        basis: BasisTag,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("operator dimensions must be positive".into()));
        }
        let mut ri = Vec::new();
        let mut ci = Vec::new();
        let mut vals = Vec::new();
        for (r, c, v) in entries {
            if r >= rows || c >= cols {
                return Err(Error::IndexOutOfRange(format!("entry ({r}, {c}) in {rows}x{cols} operator")));
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Numerical(format!("non-finite entry at ({r}, {c})")));
            }
            if v != zero() {
                ri.push(r);
                ci.push(c);
                vals.push(v);
            }
        }
        if prefers_dense(rows, cols) {
            let mut m = DMatrix::from_element(rows, cols, zero());
            for ((r, c), v) in ri.into_iter().zip(ci).zip(vals) {
                m[(r, c)] += v;
            }
            return Ok(Self { storage: Storage::Dense(m), basis });
        }
        let coo = CooMatrix::try_from_triplets(rows, cols, ri, ci, vals)
            .map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(Self { storage: Storage::Sparse(CsrMatrix::from(&coo)), basis })
    }

    /// Wraps a dense matrix, converting to sparse storage when it is large.
    pub fn from_dense(m: DMatrix<C64>, basis: BasisTag) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::InvalidParameter("operator dimensions must be positive".into()));
        }
        if m.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Numerical("non-finite operator entry".into()));
        }
        if prefers_dense(m.nrows(), m.ncols()) {
            Ok(Self { storage: Storage::Dense(m), basis })
        } else {
            Ok(Self { storage: Storage::Sparse(CsrMatrix::from(&m)), basis })
        }
    }

    /// Row-major real entries, convenient for small hand-written matrices.
    pub fn from_real_rows(rows: &[&[f64]], basis: BasisTag) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::InvalidParameter("ragged matrix rows".into()));
        }
        let m = DMatrix::from_fn(nrows, ncols, |r, c| C64::new(rows[r][c], 0.0));
        Self::from_dense(m, basis)
    }

    pub fn identity(dim: usize, basis: BasisTag) -> Result<Self> {
        Self::from_triplets(dim, dim, (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))), basis)
    }

    pub fn diagonal(values: &[C64], basis: BasisTag) -> Result<Self> {
        let n = values.len();
        Self::from_triplets(n, n, values.iter().enumerate().map(|(i, &v)| (i, i, v)), basis)
    }

    /// Outer product `|ket><bra|`.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Result<Self> {
        ket.basis().check(bra.basis())?;
        let entries = ket.amps().iter().enumerate().flat_map(|(r, &k)| {
            bra.amps().iter().enumerate().map(move |(c, b)| (r, c, k * b.conj()))
        });
        Self::from_triplets(ket.dim(), bra.dim(), entries, ket.basis().clone())
    }

    pub fn rows(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.nrows(),
            Storage::Sparse(m) => m.nrows(),
        }
    }

    pub fn cols(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.ncols(),
            Storage::Sparse(m) => m.ncols(),
        }
    }

    pub fn basis(&self) -> &BasisTag {
        &self.basis
    }

    pub fn with_basis(mut self, basis: BasisTag) -> Self {
        self.basis = basis;
        self
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.iter().filter(|v| **v != zero()).count(),
            Storage::Sparse(m) => m.nnz(),
        }
    }

    /// Entry `(r, c)`; zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> C64 {
        match &self.storage {
            Storage::Dense(m) => m[(r, c)],
            Storage::Sparse(m) => {
                let row = m.row(r);
                match row.col_indices().binary_search(&c) {
                    Ok(k) => row.values()[k],
                    Err(_) => zero(),
                }
            }
        }
    }

    /// All stored nonzero entries as `(row, col, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        match &self.storage {
            Storage::Dense(m) => {
                let mut out = Vec::new();
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        let v = m[(r, c)];
                        if v != zero() {
                            out.push((r, c, v));
                        }
                    }
                }
                out
            }
            Storage::Sparse(m) => m.triplet_iter().map(|(r, c, v)| (r, c, *v)).collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(m) => DMatrix::from(m),
        }
    }

    fn to_csr(&self) -> CsrMatrix<C64> {
        match &self.storage {
            Storage::Dense(m) => CsrMatrix::from(m),
            Storage::Sparse(m) => m.clone(),
        }
    }

    fn rebuild(&self, storage: Storage) -> Self {
        let rows_cols = match &storage {
            Storage::Dense(m) => (m.nrows(), m.ncols()),
            Storage::Sparse(m) => (m.nrows(), m.ncols()),
        };
        let storage = match storage {
            Storage::Dense(m) if !prefers_dense(rows_cols.0, rows_cols.1) => {
                Storage::Sparse(CsrMatrix::from(&m))
            }
            Storage::Sparse(m) if prefers_dense(rows_cols.0, rows_cols.1) => {
                Storage::Dense(DMatrix::from(&m))
            }
            s => s,
        };
        Self { storage, basis: self.basis.clone() }
    }

    /// Matrix-vector product. The result is not renormalized.
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        if self.cols() != s.dim() {
            return Err(Error::DimensionMismatch { expected: self.cols(), found: s.dim() });
        }
        self.basis.check(s.basis())?;
        let x = s.amps();
        let out: Vec<C64> = match &self.storage {
            Storage::Dense(m) => (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * x[c]).sum())
                .collect(),
            Storage::Sparse(m) => m
                .row_iter()
                .map(|row| {
                    row.col_indices()
                        .iter()
                        .zip(row.values())
                        .map(|(&c, v)| v * x[c])
                        .sum()
                })
                .collect(),
        };
        Ok(StateVector::from_raw(out, self.basis.clone()))
    }

    /// Operator product `self · rhs`.
    pub fn matmul(&self, rhs: &LinearOperator) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch { expected: self.cols(), found: rhs.rows() });
        }
        self.basis.check(&rhs.basis)?;
        let storage = match (&self.storage, &rhs.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(a * b),
            _ => Storage::Sparse(&self.to_csr() * &rhs.to_csr()),
        };
        Ok(self.rebuild(storage))
    }

    fn check_same_shape(&self, rhs: &LinearOperator) -> Result<()> {
        if self.rows() != rhs.rows() {
            return Err(Error::DimensionMismatch { expected: self.rows(), found: rhs.rows() });
        }
        if self.cols() != rhs.cols() {
            return Err(Error::DimensionMismatch { expected: self.cols(), found: rhs.cols() });
        }
        self.basis.check(&rhs.basis)
    }

    pub fn add(&self, rhs: &LinearOperator) -> Result<Self> {
        self.check_same_shape(rhs)?;
        let storage = match (&self.storage, &rhs.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(a + b),
            _ => Storage::Sparse(&self.to_csr() + &rhs.to_csr()),
        };
        Ok(self.rebuild(storage))
    }

    pub fn sub(&self, rhs: &LinearOperator) -> Result<Self> {
        self.check_same_shape(rhs)?;
        let storage = match (&self.storage, &rhs.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(a - b),
            _ => Storage::Sparse(&self.to_csr() - &rhs.to_csr()),
        };
        Ok(self.rebuild(storage))
    }

    pub fn scale(&self, factor: C64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m * factor),
            Storage::Sparse(m) => {
                let mut m = m.clone();
                m.values_mut().iter_mut().for_each(|v| *v *= factor);
                Storage::Sparse(m)
            }
        };
        self.rebuild(storage)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m.adjoint()),
            Storage::Sparse(m) => {
                let mut t = m.transpose();
                t.values_mut().iter_mut().for_each(|v| *v = v.conj());
                Storage::Sparse(t)
            }
        };
        self.rebuild(storage)
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &LinearOperator) -> Result<f64> {
        self.check_same_shape(rhs)?;
        Ok(match (&self.storage, &rhs.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => {
                a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
            }
            _ => max_abs(&(&self.to_csr() - &rhs.to_csr())),
        })
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Storage::Sparse(m) => max_abs(m),
        }
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        let sum: f64 = match &self.storage {
            Storage::Dense(m) => m.iter().map(|v| v.norm_sqr()).sum(),
            Storage::Sparse(m) => m.values().iter().map(|v| v.norm_sqr()).sum(),
        };
        sum.sqrt()
    }

    /// `max |A - A†|`.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint()).unwrap_or(f64::INFINITY)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `max(|P² - P|, |P - P†|)`.
    pub fn projector_error(&self) -> f64 {
        let sq = match self.matmul(self) {
            Ok(sq) => sq,
            Err(_) => return f64::INFINITY,
        };
        let idem = sq.max_abs_diff(self).unwrap_or(f64::INFINITY);
        idem.max(self.hermiticity_error())
    }

    /// `max |U†U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = match self.adjoint().matmul(self) {
            Ok(p) => p,
            Err(_) => return f64::INFINITY,
        };
        let id = match Self::identity(self.rows(), self.basis.clone()) {
            Ok(id) => id,
            Err(_) => return f64::INFINITY,
        };
        prod.max_abs_diff(&id).unwrap_or(f64::INFINITY)
    }

    /// Kronecker product with `self` as the slow (most significant) index.
    pub fn kron(&self, rhs: &LinearOperator) -> Self {
        let basis = self.basis.tensor(&rhs.basis);
        let rows = self.rows() * rhs.rows();
        let cols = self.cols() * rhs.cols();
        if let (Storage::Dense(a), Storage::Dense(b)) = (&self.storage, &rhs.storage) {
            if prefers_dense(rows, cols) {
                return Self { storage: Storage::Dense(a.kronecker(b)), basis };
            }
        }
        let (br, bc) = (rhs.rows(), rhs.cols());
        let right = rhs.triplets();
        let entries: Vec<_> = self
            .triplets()
            .into_iter()
            .flat_map(|(r, c, a)| right.iter().map(move |&(s, d, b)| (r * br + s, c * bc + d, a * b)))
            .collect();
        Self::from_triplets(rows, cols, entries, basis)
            .expect("kron entries are in range and finite by construction")
    }
}

fn max_abs(m: &CsrMatrix<C64>) -> f64 {
    m.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Matrix-vector product of `op` with `s`; see [`LinearOperator::apply`].
pub fn apply(op: &LinearOperator, s: &StateVector) -> Result<StateVector> {
    op.apply(s)
}

/// Kronecker structure shared by states and operators.
pub trait TensorProduct: Sized {
    /// `self ⊗ rhs`, with `self` indexing the slow (most significant) factor.
    fn tensor_product(&self, rhs: &Self) -> Self;
}

impl TensorProduct for LinearOperator {
    fn tensor_product(&self, rhs: &Self) -> Self {
        self.kron(rhs)
    }
}

impl TensorProduct for StateVector {
    fn tensor_product(&self, rhs: &Self) -> Self {
        let amps = self
            .amps()
            .iter()
            .flat_map(|a| rhs.amps().iter().map(move |b| a * b))
            .collect();
        StateVector::from_raw(amps, self.basis().tensor(rhs.basis()))
    }
}

/// `a ⊗ b`; the kind (state or operator) is fixed by the argument types.
pub fn tensor_product<T: TensorProduct>(a: &T, b: &T) -> T {
    a.tensor_product(b)
}
