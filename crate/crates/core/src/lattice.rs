//! One-dimensional tight-binding chain with hard walls: Hamiltonian,
//! spectral propagator, region projectors, compactly supported packets and
//! the ε-certificate for causal separation of two regions.
//!
//! Units: ħ = 1, lattice spacing 1, hopping `J` sets the energy scale.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::composite::{joint_occupancy, CompositeSpace};
use crate::error::{Error, Result};
use crate::qcore::{BasisTag, LinearOperator, StateVector, C64};

/// Minimum number of sites accepted by [`make_lattice`].
pub const MIN_SITES: usize = 8;

/// Number of equally spaced times (endpoints included) scanned by [`check_spacelike`].
pub const CERTIFICATE_GRID: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice1D {
    n: usize,
    hopping: f64,
}

pub fn make_lattice(n: usize, hopping: f64) -> Result<Lattice1D> {
    if n < MIN_SITES {
        return Err(Error::InvalidParameter(format!("lattice needs at least {MIN_SITES} sites, got {n}")));
    }
    if !(hopping > 0.0 && hopping.is_finite()) {
        return Err(Error::InvalidParameter(format!("hopping must be positive, got {hopping}")));
    }
    Ok(Lattice1D { n, hopping })
}

impl Lattice1D {
    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn hopping(&self) -> f64 {
        self.hopping
    }

    /// Basis tag of the single-particle position space.
    pub fn basis(&self) -> BasisTag {
        site_basis(self.n)
    }

    /// Eigendecomposition of the Hamiltonian, reusable for many times.
    pub fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::new(self)
    }
}

pub(crate) fn site_basis(n: usize) -> BasisTag {
    BasisTag::new(format!("site[{n}]"))
}

/// Half-open site interval `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub lo: usize,
    pub hi: usize,
}

impl Region {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo >= hi {
            return Err(Error::InvalidParameter(format!("region [{lo}, {hi}) is empty")));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> usize {
        self.hi.saturating_sub(self.lo)
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, site: usize) -> bool {
        (self.lo..self.hi).contains(&site)
    }

    pub fn overlaps(&self, other: &Region) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }

    /// Fails unless `0 <= lo < hi <= n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.lo < self.hi && self.hi <= n {
            Ok(())
        } else {
            Err(Error::InvalidRegion { lo: self.lo, hi: self.hi, n })
        }
    }

    /// Gap in sites between two disjoint regions (0 when they touch or overlap).
    pub fn distance(&self, other: &Region) -> usize {
        if self.hi <= other.lo {
            other.lo - self.hi + 1
        } else if other.hi <= self.lo {
            self.lo - other.hi + 1
        } else {
            0
        }
    }
}

/// Diagonal 0/1 projector onto the sites of `r`.
pub fn region_projector(lat: &Lattice1D, r: &Region) -> Result<LinearOperator> {
    r.validate(lat.n)?;
    let entries = (r.lo..r.hi).map(|i| (i, i, C64::new(1.0, 0.0)));
    LinearOperator::from_triplets(lat.n, lat.n, entries, lat.basis())
}

fn hamiltonian_real(lat: &Lattice1D) -> DMatrix<f64> {
    let (n, j) = (lat.n, lat.hopping);
    DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            2.0 * j
        } else if r.abs_diff(c) == 1 {
            -j
        } else {
            0.0
        }
    })
}

/// Tight-binding Hamiltonian: `2J` on the diagonal, `-J` between neighbours.
pub fn hamiltonian(lat: &Lattice1D) -> LinearOperator {
    let h = hamiltonian_real(lat).map(|v| C64::new(v, 0.0));
    LinearOperator::from_dense(h, lat.basis()).expect("finite Hamiltonian")
}

/// Spectral decomposition `H = V diag(E) Vᵀ` of the (real symmetric) Hamiltonian.
#[derive(Clone, Debug)]
pub struct Spectrum {
    energies: DVector<f64>,
    modes: DMatrix<f64>,
    basis: BasisTag,
}

impl Spectrum {
    fn new(lat: &Lattice1D) -> Result<Self> {
        let eig = SymmetricEigen::try_new(hamiltonian_real(lat), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("Hamiltonian diagonalization did not converge".into()))?;
        Ok(Self { energies: eig.eigenvalues, modes: eig.eigenvectors, basis: lat.basis() })
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    fn phases(&self, t: f64) -> Result<Vec<C64>> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.energies.iter().map(|&e| C64::from_polar(1.0, -e * t)).collect())
    }

    /// Rows `rows` × columns `cols` of `U_t = exp(-iHt)`.
    fn block(&self, t: f64, rows: &Region, cols: &Region) -> Result<DMatrix<C64>> {
        let phases = self.phases(t)?;
        let v = &self.modes;
        Ok(DMatrix::from_fn(rows.len(), cols.len(), |a, b| {
            let (i, j) = (rows.lo + a, cols.lo + b);
            phases
                .iter()
                .enumerate()
                .map(|(k, p)| p * (v[(i, k)] * v[(j, k)]))
                .sum()
        }))
    }

    /// Full propagator `U_t`.
    pub fn propagator(&self, t: f64) -> Result<LinearOperator> {
        let n = self.energies.len();
        let all = Region { lo: 0, hi: n };
        LinearOperator::from_dense(self.block(t, &all, &all)?, self.basis.clone())
    }

    /// `‖P_dst U_t P_src‖₂`, via the largest eigenvalue of the small Gram
    /// matrix of the `dst × src` block.
    pub fn leakage(&self, src: &Region, dst: &Region, t: f64) -> Result<f64> {
        let n = self.energies.len();
        src.validate(n)?;
        dst.validate(n)?;
        let block = self.block(t, dst, src)?;
        let gram = block.adjoint() * &block;
        let top = SymmetricEigen::new(gram).eigenvalues.max();
        Ok(top.max(0.0).sqrt())
    }
}

/// `U_t = exp(-iHt)` by spectral decomposition.
pub fn propagator(lat: &Lattice1D, t: f64) -> Result<LinearOperator> {
    lat.spectrum()?.propagator(t)
}

/// Worst-case amplitude transferable from `src` to `dst` in time `t`.
pub fn leakage(lat: &Lattice1D, src: &Region, dst: &Region, t: f64) -> Result<f64> {
    lat.spectrum()?.leakage(src, dst, t)
}

/// Raised-cosine packet: envelope `cos²(π(x - center)/(4·width))` on
/// `|x - center| < 2·width`, times `e^{i·momentum·x}`, zero outside `support`.
pub fn wavepacket(
    lat: &Lattice1D,
    support: &Region,
    center: f64,
    width: f64,
    momentum: f64,
) -> Result<StateVector> {
    support.validate(lat.n)?;
    if !(width > 0.0 && width.is_finite()) || !center.is_finite() || !momentum.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "packet needs finite center/momentum and positive width (width {width})"
        )));
    }
    if width > support.len() as f64 / 4.0 {
        return Err(Error::EnvelopeDoesNotFit(format!(
            "width {width} exceeds a quarter of the support length {}",
            support.len()
        )));
    }
    let half = 2.0 * width;
    if center - half < support.lo as f64 - 1.0 || center + half > support.hi as f64 {
        return Err(Error::EnvelopeDoesNotFit(format!(
            "envelope ({}, {}) leaves support [{}, {})",
            center - half,
            center + half,
            support.lo,
            support.hi
        )));
    }
    let amps: Vec<C64> = (0..lat.n)
        .map(|x| {
            let offset = x as f64 - center;
            if !support.contains(x) || offset.abs() >= half {
                return C64::new(0.0, 0.0);
            }
            let envelope = (std::f64::consts::PI * offset / (2.0 * half)).cos().powi(2);
            C64::from_polar(envelope, momentum * x as f64)
        })
        .collect();
    StateVector::new(amps, lat.basis())?.normalize()
}

/// `Σ_x x |ψ(x)|²` for a single-particle state.
pub fn position_expectation(psi: &StateVector) -> f64 {
    psi.amps()
        .iter()
        .enumerate()
        .map(|(x, a)| x as f64 * a.norm_sqr())
        .sum::<f64>()
        / psi.norm_sqr()
}

/// Numerical certificate that two regions are causally disconnected over a
/// protocol duration and never jointly occupied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacelikeCertificate {
    pub epsilon: f64,
    pub leak_13: f64,
    pub leak_31: f64,
    #[serde(rename = "overlap_O1")]
    pub overlap_o1: f64,
    #[serde(rename = "overlap_O3")]
    pub overlap_o3: f64,
    pub pass: bool,
}

impl SpacelikeCertificate {
    fn assemble(epsilon: f64, leak_13: f64, leak_31: f64, overlap_o1: f64, overlap_o3: f64) -> Self {
        let pass = [leak_13, leak_31, overlap_o1, overlap_o3].iter().all(|&v| v <= epsilon);
        Self { epsilon, leak_13, leak_31, overlap_o1, overlap_o3, pass }
    }
}

/// Largest leakage `src → dst` over the certificate time grid on `[0, t_total]`.
pub fn max_leakage_on_grid(spectrum: &Spectrum, src: &Region, dst: &Region, t_total: f64) -> Result<f64> {
    if t_total < 0.0 {
        return Err(Error::NegativeTime(t_total));
    }
    let steps = (CERTIFICATE_GRID - 1) as f64;
    let values = (0..CERTIFICATE_GRID)
        .into_par_iter()
        .map(|k| spectrum.leakage(src, dst, t_total * k as f64 / steps))
        .collect::<Result<Vec<_>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Checks both separation conditions between `o1` and `o3` for the two-particle
/// state `psi`: no transport in either direction at any grid time up to
/// `t_total`, and no joint occupancy of either region.
pub fn check_spacelike(
    lat: &Lattice1D,
    o1: &Region,
    o3: &Region,
    psi: &StateVector,
    t_total: f64,
    eps: f64,
) -> Result<SpacelikeCertificate> {
    let space = CompositeSpace::new(lat.n);
    let spectrum = lat.spectrum()?;
    let leak_13 = max_leakage_on_grid(&spectrum, o1, o3, t_total)?;
    let leak_31 = max_leakage_on_grid(&spectrum, o3, o1, t_total)?;
    let overlap_o1 = joint_occupancy(&space, psi, o1)?;
    let overlap_o3 = joint_occupancy(&space, psi, o3)?;
    Ok(SpacelikeCertificate::assemble(eps, leak_13, leak_31, overlap_o1, overlap_o3))
}
