//! Two particles × (position ⊗ spin) ⊗ detector qubit, with the normative
//! basis ordering
//!
//! ```text
//! index = q + 2·(s2 + 2·(s1 + 2·(x2 + n·x1)))
//! ```
//!
//! so that `x1` is the slowest index and the qubit the fastest. Spins are
//! encoded `d = 0`, `u = 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{site_basis, Region};
use crate::qcore::{BasisTag, LinearOperator, StateVector, C64};

/// Number of internal (spin ⊗ spin ⊗ qubit) states per position pair.
pub const INTERNAL_DIM: usize = 8;

/// Particle statistics imposed at preparation time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Fermion,
    Boson,
    Distinguishable,
}

/// Tensor-slot label of a particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Particle {
    First,
    Second,
}

/// Which single-particle factor a lifted operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    /// n-dimensional position space.
    Position,
    /// 2-dimensional spin space.
    Spin,
    /// 2n-dimensional position ⊗ spin space, index `2·x + s`.
    Both,
}

/// Decoded composite basis label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub x1: usize,
    pub x2: usize,
    pub s1: usize,
    pub s2: usize,
    pub q: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CompositeSpace {
    n: usize,
}

impl CompositeSpace {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n * self.n * INTERNAL_DIM
    }

    pub fn basis(&self) -> BasisTag {
        BasisTag::new(format!("composite[{}]", self.n))
    }

    /// Normative basis index; see the module documentation.
    pub fn basis_index(&self, x1: usize, x2: usize, s1: usize, s2: usize, q: usize) -> Result<usize> {
        if x1 >= self.n || x2 >= self.n || s1 > 1 || s2 > 1 || q > 1 {
            return Err(Error::IndexOutOfRange(format!(
                "(x1={x1}, x2={x2}, s1={s1}, s2={s2}, q={q}) on {} sites",
                self.n
            )));
        }
        Ok(self.index_unchecked(x1, x2, s1, s2, q))
    }

    #[inline]
    pub(crate) fn index_unchecked(&self, x1: usize, x2: usize, s1: usize, s2: usize, q: usize) -> usize {
        q + 2 * (s2 + 2 * (s1 + 2 * (x2 + self.n * x1)))
    }

    pub fn decode(&self, index: usize) -> Result<BasisLabel> {
        if index >= self.dim() {
            return Err(Error::IndexOutOfRange(format!("basis index {index} >= {}", self.dim())));
        }
        Ok(self.decode_unchecked(index))
    }

    #[inline]
    pub(crate) fn decode_unchecked(&self, index: usize) -> BasisLabel {
        let q = index & 1;
        let s2 = (index >> 1) & 1;
        let s1 = (index >> 2) & 1;
        let pos = index >> 3;
        BasisLabel { x1: pos / self.n, x2: pos % self.n, s1, s2, q }
    }

    /// Image of `index` under particle exchange.
    #[inline]
    pub fn exchanged_index(&self, index: usize) -> usize {
        let b = self.decode_unchecked(index);
        self.index_unchecked(b.x2, b.x1, b.s2, b.s1, b.q)
    }

    pub(crate) fn check_state(&self, s: &StateVector) -> Result<()> {
        if s.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: s.dim() });
        }
        self.basis().check(s.basis())
    }

    pub(crate) fn check_operator(&self, op: &LinearOperator) -> Result<()> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.rows() });
        }
        self.basis().check(op.basis())
    }

    /// Builds a composite-space state from a closure over basis labels.
    pub fn state_from_fn(&self, f: impl Fn(BasisLabel) -> C64 + Sync) -> Result<StateVector> {
        let amps = (0..self.dim())
            .into_par_iter()
            .map(|i| f(self.decode_unchecked(i)))
            .collect();
        StateVector::new(amps, self.basis())
    }

    /// Operator that is block diagonal in position: for every position pair
    /// `internal(x1, x2)` returns the 8×8 action on `(s1, s2, q)`, or `None`
    /// for the identity.
    pub(crate) fn position_diagonal_operator(
        &self,
        internal: impl Fn(usize, usize) -> Option<[[C64; INTERNAL_DIM]; INTERNAL_DIM]> + Sync,
    ) -> Result<LinearOperator> {
        let one = C64::new(1.0, 0.0);
        let blocks: Vec<Vec<(usize, usize, C64)>> = (0..self.n * self.n)
            .into_par_iter()
            .map(|pos| {
                let base = pos * INTERNAL_DIM;
                match internal(pos / self.n, pos % self.n) {
                    None => (0..INTERNAL_DIM).map(|k| (base + k, base + k, one)).collect(),
                    Some(m) => (0..INTERNAL_DIM)
                        .flat_map(|r| (0..INTERNAL_DIM).map(move |c| (r, c)))
                        .filter(|&(r, c)| m[r][c] != C64::new(0.0, 0.0))
                        .map(|(r, c)| (base + r, base + c, m[r][c]))
                        .collect(),
                }
            })
            .collect();
        LinearOperator::from_triplets(self.dim(), self.dim(), blocks.into_iter().flatten(), self.basis())
    }
}

/// Index of `(s1, s2, q)` inside an 8-dimensional internal block.
#[inline]
pub fn internal_index(s1: usize, s2: usize, q: usize) -> usize {
    q + 2 * (s2 + 2 * s1)
}

/// Particle-exchange permutation `(x1,s1 | x2,s2 | q) → (x2,s2 | x1,s1 | q)`.
pub fn exchange_operator(space: &CompositeSpace) -> LinearOperator {
    let one = C64::new(1.0, 0.0);
    let entries = (0..space.dim()).map(|i| (space.exchanged_index(i), i, one));
    LinearOperator::from_triplets(space.dim(), space.dim(), entries, space.basis())
        .expect("permutation entries are in range")
}

/// `S|s>` computed as a permutation of amplitudes.
pub fn exchange(space: &CompositeSpace, s: &StateVector) -> Result<StateVector> {
    space.check_state(s)?;
    let a = s.amps();
    let amps = (0..space.dim()).into_par_iter().map(|i| a[space.exchanged_index(i)]).collect();
    StateVector::new(amps, space.basis())
}

fn project_exchange_sector(space: &CompositeSpace, s: &StateVector, sign: f64) -> Result<StateVector> {
    let swapped = exchange(space, s)?;
    let projected = s.add(&swapped.scale(C64::new(sign, 0.0)))?;
    let norm = projected.norm();
    if norm <= 1e-10 {
        return Err(Error::ZeroNorm(norm));
    }
    projected.normalize()
}

/// `(I - S)s / ‖(I - S)s‖`; fails when `s` has no antisymmetric component.
pub fn antisymmetrize(space: &CompositeSpace, s: &StateVector) -> Result<StateVector> {
    project_exchange_sector(space, s, -1.0)
}

/// `(I + S)s / ‖(I + S)s‖`; fails when `s` has no symmetric component.
pub fn symmetrize(space: &CompositeSpace, s: &StateVector) -> Result<StateVector> {
    project_exchange_sector(space, s, 1.0)
}

fn sector_residual(space: &CompositeSpace, s: &StateVector, sign: f64) -> Result<f64> {
    let swapped = exchange(space, s)?;
    let norm = s.norm();
    if norm == 0.0 {
        return Err(Error::ZeroNorm(0.0));
    }
    Ok(s.add(&swapped.scale(C64::new(sign, 0.0)))?.norm() / (2.0 * norm))
}

/// `‖(I + S)s‖ / 2` for normalized `s`: 0 for antisymmetric, 1 for symmetric states.
pub fn antisymmetry_violation(space: &CompositeSpace, s: &StateVector) -> Result<f64> {
    sector_residual(space, s, 1.0)
}

/// `‖(I - S)s‖ / 2` for normalized `s`: 0 for symmetric, 1 for antisymmetric states.
pub fn symmetry_violation(space: &CompositeSpace, s: &StateVector) -> Result<f64> {
    sector_residual(space, s, -1.0)
}

/// Distance of `s` from the exchange sector required by `stats`; always 0
/// for distinguishable particles.
pub fn statistics_violation(space: &CompositeSpace, stats: Statistics, s: &StateVector) -> Result<f64> {
    match stats {
        Statistics::Fermion => antisymmetry_violation(space, s),
        Statistics::Boson => symmetry_violation(space, s),
        Statistics::Distinguishable => {
            space.check_state(s)?;
            Ok(0.0)
        }
    }
}

/// Entrywise `max |S·op·S - op| <= tol`.
pub fn is_exchange_symmetric(space: &CompositeSpace, op: &LinearOperator, tol: f64) -> bool {
    if space.check_operator(op).is_err() {
        return false;
    }
    let conjugated = op
        .triplets()
        .into_iter()
        .map(|(r, c, v)| (space.exchanged_index(r), space.exchanged_index(c), v));
    match LinearOperator::from_triplets(space.dim(), space.dim(), conjugated, space.basis()) {
        Ok(swapped) => swapped.max_abs_diff(op).is_ok_and(|d| d <= tol),
        Err(_) => false,
    }
}

fn support(s: &StateVector) -> impl Iterator<Item = usize> + '_ {
    s.amps().iter().enumerate().filter(|(_, a)| a.norm_sqr() > 0.0).map(|(i, _)| i)
}

/// Initial state: `packet1 ⊗ packet2` on positions, spins `|dd>`, qubit `|0>`,
/// then (anti)symmetrized according to `stats`.
pub fn prepare_initial(
    space: &CompositeSpace,
    stats: Statistics,
    packet1: &StateVector,
    packet2: &StateVector,
) -> Result<StateVector> {
    let n = space.sites();
    let site = site_basis(n);
    for p in [packet1, packet2] {
        if p.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
        }
        site.check(p.basis())?;
        if !p.is_normalized(1e-10) {
            return Err(Error::NotNormalized(p.norm()));
        }
    }
    if stats != Statistics::Distinguishable {
        let first: Vec<usize> = support(packet1).collect();
        if support(packet2).any(|x| first.binary_search(&x).is_ok()) {
            return Err(Error::OverlappingSupports);
        }
    }
    let (a, b) = (packet1.amps(), packet2.amps());
    let product = space.state_from_fn(|l| {
        if l.s1 == 0 && l.s2 == 0 && l.q == 0 {
            a[l.x1] * b[l.x2]
        } else {
            C64::new(0.0, 0.0)
        }
    })?;
    match stats {
        Statistics::Fermion => antisymmetrize(space, &product),
        Statistics::Boson => symmetrize(space, &product),
        Statistics::Distinguishable => Ok(product),
    }
}

/// Embeds a single-particle operator acting on `factor` of `particle`,
/// identity elsewhere (qubit untouched).
pub fn lift_one_particle(
    space: &CompositeSpace,
    op: &LinearOperator,
    particle: Particle,
    factor: Factor,
) -> Result<LinearOperator> {
    let n = space.sites();
    let (expected_dim, expected_basis) = match factor {
        Factor::Position => (n, site_basis(n)),
        Factor::Spin => (2, BasisTag::spin()),
        Factor::Both => (2 * n, site_basis(n).tensor(&BasisTag::spin())),
    };
    if op.rows() != expected_dim || op.cols() != expected_dim {
        return Err(Error::DimensionMismatch { expected: expected_dim, found: op.rows() });
    }
    expected_basis.check(op.basis())?;

    // Column-grouped entries: by_col[c] = [(r, v)].
    let mut by_col: Vec<Vec<(usize, C64)>> = vec![Vec::new(); expected_dim];
    for (r, c, v) in op.triplets() {
        by_col[c].push((r, v));
    }
    let slot = |l: &BasisLabel| -> usize {
        let (x, s) = match particle {
            Particle::First => (l.x1, l.s1),
            Particle::Second => (l.x2, l.s2),
        };
        match factor {
            Factor::Position => x,
            Factor::Spin => s,
            Factor::Both => 2 * x + s,
        }
    };
    let with_slot = |mut l: BasisLabel, value: usize| -> usize {
        let (x, s) = match factor {
            Factor::Position => (Some(value), None),
            Factor::Spin => (None, Some(value)),
            Factor::Both => (Some(value / 2), Some(value % 2)),
        };
        match particle {
            Particle::First => {
                l.x1 = x.unwrap_or(l.x1);
                l.s1 = s.unwrap_or(l.s1);
            }
            Particle::Second => {
                l.x2 = x.unwrap_or(l.x2);
                l.s2 = s.unwrap_or(l.s2);
            }
        }
        space.index_unchecked(l.x1, l.x2, l.s1, l.s2, l.q)
    };
    let entries: Vec<(usize, usize, C64)> = (0..space.dim())
        .into_par_iter()
        .flat_map_iter(|col| {
            let label = space.decode_unchecked(col);
            by_col[slot(&label)]
                .iter()
                .map(move |&(r, v)| (with_slot(label, r), col, v))
                .collect::<Vec<_>>()
        })
        .collect();
    LinearOperator::from_triplets(space.dim(), space.dim(), entries, space.basis())
}

/// Applies the single-particle operator `u` (n×n) to both particle positions:
/// `(u ⊗ u ⊗ I₈) s`, using the tensor structure instead of the full matrix.
pub fn evolve_pair(space: &CompositeSpace, u: &LinearOperator, s: &StateVector) -> Result<StateVector> {
    let n = space.sites();
    if u.rows() != n || u.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: u.rows() });
    }
    site_basis(n).check(u.basis())?;
    space.check_state(s)?;
    let dense = u.to_dense();
    let zero = C64::new(0.0, 0.0);
    let row = n * INTERNAL_DIM;

    // Second particle: out[x1][x2'][k] = Σ_x2 u[x2'][x2] in[x1][x2][k].
    let mut mid = vec![zero; s.dim()];
    mid.par_chunks_mut(row).zip(s.amps().par_chunks(row)).for_each(|(out, inp)| {
        for xp in 0..n {
            let acc = &mut out[xp * INTERNAL_DIM..(xp + 1) * INTERNAL_DIM];
            for x in 0..n {
                let c = dense[(xp, x)];
                if c == zero {
                    continue;
                }
                let src = &inp[x * INTERNAL_DIM..(x + 1) * INTERNAL_DIM];
                for (a, b) in acc.iter_mut().zip(src) {
                    *a += c * b;
                }
            }
        }
    });

    // First particle: out[x1'][..] = Σ_x1 u[x1'][x1] mid[x1][..].
    let mut out = vec![zero; s.dim()];
    out.par_chunks_mut(row).enumerate().for_each(|(xp, acc)| {
        for x in 0..n {
            let c = dense[(xp, x)];
            if c == zero {
                continue;
            }
            for (a, b) in acc.iter_mut().zip(&mid[x * row..(x + 1) * row]) {
                *a += c * b;
            }
        }
    });
    StateVector::new(out, space.basis())
}

/// `<P₁^R P₂^R>`: probability that both particles sit in `r`.
pub fn joint_occupancy(space: &CompositeSpace, s: &StateVector, r: &Region) -> Result<f64> {
    space.check_state(s)?;
    r.validate(space.sites())?;
    Ok(s.amps()
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let l = space.decode_unchecked(*i);
            r.contains(l.x1) && r.contains(l.x2)
        })
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Per-site marginal occupancies of the two tensor slots.
pub fn site_marginals(space: &CompositeSpace, s: &StateVector) -> Result<(Vec<f64>, Vec<f64>)> {
    space.check_state(s)?;
    let n = space.sites();
    let (mut first, mut second) = (vec![0.0; n], vec![0.0; n]);
    for (i, a) in s.amps().iter().enumerate() {
        let l = space.decode_unchecked(i);
        let p = a.norm_sqr();
        first[l.x1] += p;
        second[l.x2] += p;
    }
    Ok((first, second))
}

/// `<P₁^R + P₂^R>`: expected number of particles in `r`.
pub fn region_occupancy(space: &CompositeSpace, s: &StateVector, r: &Region) -> Result<f64> {
    r.validate(space.sites())?;
    let (first, second) = site_marginals(space, s)?;
    Ok((r.lo..r.hi).map(|x| first[x] + second[x]).sum())
}
