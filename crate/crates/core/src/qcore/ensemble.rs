use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qcore::operator::LinearOperator;
use crate::qcore::state::StateVector;
use crate::qcore::{C64, BRANCH_PRUNE, NORM_TOL, WEIGHT_TOL};

/// One post-measurement branch: Born weight and normalized state.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub weight: f64,
    pub state: StateVector,
}

/// Weighted list of pure states standing in for a mixed state.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchEnsemble {
    branches: Vec<Branch>,
}

impl BranchEnsemble {
    /// Validates weights (non-negative, summing to one) and branch normalization.
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidParameter("ensemble needs at least one branch".into()));
        }
        let first = &branches[0].state;
        let mut total = 0.0;
        for b in &branches {
            b.state.check_compatible(first)?;
            if !(b.weight >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative branch weight {}", b.weight)));
            }
            if !b.state.is_normalized(NORM_TOL) {
                return Err(Error::NotNormalized(b.state.norm()));
            }
            total += b.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidParameter(format!("branch weights sum to {total}")));
        }
        Ok(Self { branches })
    }

    /// Single branch of weight one.
    pub fn pure(state: StateVector) -> Result<Self> {
        Self::new(vec![Branch { weight: 1.0, state }])
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.branches[0].state.dim()
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|b| b.weight).sum()
    }

    /// Applies a norm-preserving map to every branch, in parallel.
    pub fn map_states<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&StateVector) -> Result<StateVector> + Sync,
    {
        let branches = self
            .branches
            .par_iter()
            .map(|b| Ok(Branch { weight: b.weight, state: f(&b.state)? }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(branches)
    }
}

/// Either a pure state or a branch ensemble.
#[derive(Clone, Copy, Debug)]
pub enum QuantumState<'a> {
    Pure(&'a StateVector),
    Mixed(&'a BranchEnsemble),
}

impl<'a> From<&'a StateVector> for QuantumState<'a> {
    fn from(s: &'a StateVector) -> Self {
        QuantumState::Pure(s)
    }
}

impl<'a> From<&'a BranchEnsemble> for QuantumState<'a> {
    fn from(e: &'a BranchEnsemble) -> Self {
        QuantumState::Mixed(e)
    }
}

impl QuantumState<'_> {
    pub(crate) fn weighted(&self) -> Vec<(f64, &StateVector)> {
        match self {
            QuantumState::Pure(s) => vec![(1.0, *s)],
            QuantumState::Mixed(e) => e.branches.iter().map(|b| (b.weight, &b.state)).collect(),
        }
    }

    pub(crate) fn check_normalized(&self) -> Result<()> {
        for (_, s) in self.weighted() {
            if !s.is_normalized(NORM_TOL) {
                return Err(Error::NotNormalized(s.norm()));
            }
        }
        Ok(())
    }
}

/// `<obs>` on a normalized pure state or ensemble. `obs` must be Hermitian to 1e-10.
pub fn expectation<'a>(obs: &LinearOperator, x: impl Into<QuantumState<'a>>) -> Result<f64> {
    let herm = obs.hermiticity_error();
    if herm > 1e-10 {
        return Err(Error::NotHermitian(herm));
    }
    let x = x.into();
    x.check_normalized()?;
    let mut acc = C64::new(0.0, 0.0);
    for (w, s) in x.weighted() {
        acc += s.inner(&obs.apply(s)?)? * w;
    }
    if acc.im.abs() > 1e-10 {
        return Err(Error::Numerical(format!("expectation has imaginary part {:.3e}", acc.im)));
    }
    Ok(acc.re)
}

/// A validated set of mutually orthogonal projectors resolving the identity.
#[derive(Clone, Debug)]
pub struct ProjectiveMeasurement {
    projectors: Vec<LinearOperator>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<LinearOperator>) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty projector set".into()))?;
        if !first.is_square() {
            return Err(Error::DimensionMismatch { expected: first.rows(), found: first.cols() });
        }
        let mut sum = first.clone();
        for p in &projectors[1..] {
            sum = sum.add(p)?;
        }
        let id = LinearOperator::identity(first.rows(), first.basis().clone())?;
        let dev = sum.max_abs_diff(&id)?;
        if dev > 1e-10 {
            return Err(Error::NotResolution(dev));
        }
        for i in 0..projectors.len() {
            for j in i + 1..projectors.len() {
                if projectors[i].matmul(&projectors[j])?.max_abs() > 1e-10 {
                    return Err(Error::NotOrthogonal(i, j));
                }
            }
        }
        Ok(Self { projectors })
    }

    /// `{P, I - P}` for a single projector `P`.
    pub fn binary(p: LinearOperator) -> Result<Self> {
        let id = LinearOperator::identity(p.rows(), p.basis().clone())?;
        let complement = id.sub(&p)?;
        Self::new(vec![p, complement])
    }

    pub fn projectors(&self) -> &[LinearOperator] {
        &self.projectors
    }

    fn outcome_branches(&self, w: f64, s: &StateVector, outcome: usize) -> Result<Option<Branch>> {
        let projected = self.projectors[outcome].apply(s)?;
        let p = projected.norm_sqr();
        if p > BRANCH_PRUNE {
            Ok(Some(Branch { weight: w * p, state: projected.normalize()? }))
        } else {
            Ok(None)
        }
    }

    /// Non-selective Lüders update: every outcome branch is kept with its Born weight.
    pub fn apply<'a>(&self, x: impl Into<QuantumState<'a>>) -> Result<BranchEnsemble> {
        let x = x.into();
        let inputs = x.weighted();
        let jobs: Vec<(f64, &StateVector, usize)> = inputs
            .iter()
            .flat_map(|&(w, s)| (0..self.projectors.len()).map(move |k| (w, s, k)))
            .collect();
        let branches = jobs
            .par_iter()
            .map(|&(w, s, k)| self.outcome_branches(w, s, k))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        BranchEnsemble::new(branches)
    }

    /// Selective update: keeps only `outcome`, renormalizing the surviving weight.
    pub fn select<'a>(&self, x: impl Into<QuantumState<'a>>, outcome: usize) -> Result<BranchEnsemble> {
        if outcome >= self.projectors.len() {
            return Err(Error::IndexOutOfRange(format!("outcome {outcome}")));
        }
        let x = x.into();
        let mut kept = Vec::new();
        for (w, s) in x.weighted() {
            if let Some(b) = self.outcome_branches(w, s, outcome)? {
                kept.push(b);
            }
        }
        let total: f64 = kept.iter().map(|b| b.weight).sum();
        if !(total > BRANCH_PRUNE) {
            return Err(Error::EmptySelection);
        }
        kept.iter_mut().for_each(|b| b.weight /= total);
        BranchEnsemble::new(kept)
    }
}

/// Non-selective Lüders measurement with the given projector set.
pub fn luders_measure<'a>(
    projectors: &[LinearOperator],
    x: impl Into<QuantumState<'a>>,
) -> Result<BranchEnsemble> {
    ProjectiveMeasurement::new(projectors.to_vec())?.apply(x)
}
