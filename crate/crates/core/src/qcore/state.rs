use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::qcore::C64;

/// Opaque label naming the basis convention a vector or operator lives in.
///
/// Two objects can only be combined when their tags compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisTag(Arc<str>);

impl BasisTag {
    pub fn new(label: impl AsRef<str>) -> Self {
        Self(Arc::from(label.as_ref()))
    }

    /// Single spin-1/2, ordered `d = 0`, `u = 1`.
    pub fn spin() -> Self {
        Self::new("spin")
    }

    /// Detector qubit, ordered `|0>`, `|1>`.
    pub fn qubit() -> Self {
        Self::new("qubit")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Tag of the tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &BasisTag) -> BasisTag {
        Self::new(format!("{}⊗{}", self.0, other.0))
    }

    pub(crate) fn check(&self, other: &BasisTag) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                left: self.0.to_string(),
                right: other.0.to_string(),
            })
        }
    }
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Complex amplitude vector over a tagged basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
    basis: BasisTag,
}

impl StateVector {
    /// Wraps `amps`; rejects empty or non-finite input.
    pub fn new(amps: Vec<C64>, basis: BasisTag) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParameter("state vector must have positive dimension".into()));
        }
        if let Some(i) = amps.iter().position(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::Numerical(format!("non-finite amplitude at index {i}")));
        }
        Ok(Self { amps, basis })
    }

    pub(crate) fn from_raw(amps: Vec<C64>, basis: BasisTag) -> Self {
        debug_assert!(!amps.is_empty());
        Self { amps, basis }
    }

    pub fn zeros(dim: usize, basis: BasisTag) -> Self {
        Self::from_raw(vec![C64::new(0.0, 0.0); dim], basis)
    }

    /// Computational basis vector `|index>`.
    pub fn basis_state(dim: usize, index: usize, basis: BasisTag) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange(format!("basis index {index} >= dimension {dim}")));
        }
        let mut s = Self::zeros(dim, basis);
        s.amps[index] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn basis(&self) -> &BasisTag {
        &self.basis
    }

    /// Same amplitudes, relabelled basis.
    pub fn with_basis(mut self, basis: BasisTag) -> Self {
        self.basis = basis;
        self
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Returns the unit vector along `self`; fails on a (numerically) null vector.
    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 1e-300) {
            return Err(Error::ZeroNorm(norm));
        }
        Ok(self.scale(C64::new(1.0 / norm, 0.0)))
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_compatible(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_raw(self.amps.iter().map(|a| a * factor).collect(), self.basis.clone())
    }

    pub fn add(&self, other: &StateVector) -> Result<Self> {
        self.check_compatible(other)?;
        let amps = self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect();
        Ok(Self::from_raw(amps, self.basis.clone()))
    }

    pub fn sub(&self, other: &StateVector) -> Result<Self> {
        self.check_compatible(other)?;
        let amps = self.amps.iter().zip(&other.amps).map(|(a, b)| a - b).collect();
        Ok(Self::from_raw(amps, self.basis.clone()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_compatible(&self, other: &StateVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        self.basis.check(&other.basis)
    }
}
