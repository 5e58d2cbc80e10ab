//! Brute-force density-matrix pipeline on the full composite space.
//!
//! The state is a dense `d × d` matrix; every operation is written directly
//! from its definition: the propagator comes from a Taylor series of
//! `exp(-iHt)`, kicks/detectors are permutations of basis labels and the
//! Bell measurement is `Σ_k P_k ρ P_k`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

use sorkin_lattice::composite::Statistics;
use sorkin_lattice::protocol::{DetectorMode, JointMode, KickMode, ScenarioConfig};

pub fn idx(n: usize, x1: usize, x2: usize, s1: usize, s2: usize, q: usize) -> usize {
    ((((x1 * n + x2) * 2 + s1) * 2 + s2) * 2) + q
}

pub fn labels(n: usize) -> impl Iterator<Item = (usize, usize, usize, usize, usize)> {
    (0..n).flat_map(move |x1| {
        (0..n).flat_map(move |x2| {
            (0..2).flat_map(move |s1| (0..2).flat_map(move |s2| (0..2).map(move |q| (x1, x2, s1, s2, q))))
        })
    })
}

/// `exp(-iHt)` for the tight-binding chain by scaling and squaring a Taylor series.
pub fn propagator(n: usize, hopping: f64, t: f64) -> DMatrix<C> {
    let h = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            C::new(2.0 * hopping, 0.0)
        } else if r.abs_diff(c) == 1 {
            C::new(-hopping, 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    });
    let a = h * C::new(0.0, -t);
    let norm: f64 = a.iter().map(|v| v.norm()).sum::<f64>();
    let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
    let scaled = &a / C::new(2f64.powi(squarings), 0.0);
    let mut term = DMatrix::<C>::identity(n, n);
    let mut sum = DMatrix::<C>::identity(n, n);
    for k in 1..40 {
        term = &term * &scaled / C::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Hann-window packet, written out independently of the library.
pub fn packet(n: usize, lo: usize, hi: usize, center: f64, width: f64, momentum: f64) -> Vec<C> {
    let mut v: Vec<C> = (0..n)
        .map(|x| {
            let d = x as f64 - center;
            if x < lo || x >= hi || d.abs() >= 2.0 * width {
                C::new(0.0, 0.0)
            } else {
                let env = (std::f64::consts::PI * d / (4.0 * width)).cos().powi(2);
                C::new(0.0, momentum * x as f64).exp() * env
            }
        })
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    v
}

/// Sparse operator as rows of `(column, value)`.
pub type Rows = Vec<Vec<(usize, C)>>;

/// Density matrix, row-major `d × d`.
#[derive(Clone)]
pub struct Rho {
    pub d: usize,
    pub m: Vec<C>,
}

impl Rho {
    pub fn pure(psi: &[C]) -> Self {
        let d = psi.len();
        let mut m = vec![C::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                m[i * d + j] = psi[i] * psi[j].conj();
            }
        }
        Self { d, m }
    }

    pub fn trace(&self) -> f64 {
        (0..self.d).map(|i| self.m[i * self.d + i].re).sum()
    }

    /// `A ρ B†` for sparse `A`, `B`.
    pub fn sandwich(&self, a: &Rows, b: &Rows) -> Self {
        let d = self.d;
        let mut left = vec![C::new(0.0, 0.0); d * d];
        for (i, row) in a.iter().enumerate() {
            for &(k, v) in row {
                for j in 0..d {
                    left[i * d + j] += v * self.m[k * d + j];
                }
            }
        }
        let mut out = vec![C::new(0.0, 0.0); d * d];
        for i in 0..d {
            for (j, row) in b.iter().enumerate() {
                let mut acc = C::new(0.0, 0.0);
                for &(k, v) in row {
                    acc += left[i * d + k] * v.conj();
                }
                out[i * d + j] = acc;
            }
        }
        Self { d, m: out }
    }

    /// `(U ⊗ U ⊗ I₈) ρ (U ⊗ U ⊗ I₈)†`.
    pub fn evolve(&self, n: usize, u: &DMatrix<C>) -> Self {
        // Columns of ρ are the rows of ρᵀ.
        let cols = self.transpose().map_rows(|r| apply_pair(n, u, r, false));
        let left = cols.transpose();
        // Row i of (Aρ)A† is conj(A · conj(row i of Aρ)).
        left.map_rows(|r| apply_pair(n, u, r, true))
    }

    fn transpose(&self) -> Self {
        let d = self.d;
        let mut m = vec![C::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                m[j * d + i] = self.m[i * d + j];
            }
        }
        Self { d, m }
    }

    fn map_rows(&self, f: impl Fn(&[C]) -> Vec<C>) -> Self {
        let d = self.d;
        let m = self.m.chunks(d).flat_map(f).collect();
        Self { d, m }
    }

    pub fn add(&self, other: &Rho) -> Self {
        Self { d: self.d, m: self.m.iter().zip(&other.m).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { d: self.d, m: self.m.iter().map(|a| a * s).collect() }
    }

    /// `p(q = 1)`.
    pub fn p_q1(&self) -> f64 {
        (0..self.d).filter(|i| i % 2 == 1).map(|i| self.m[i * self.d + i].re).sum()
    }
}

/// `(U ⊗ U ⊗ I₈) v`, or `conj((U ⊗ U ⊗ I₈) conj(v))` when `conjugate`.
fn apply_pair(n: usize, u: &DMatrix<C>, v: &[C], conjugate: bool) -> Vec<C> {
    let input: Vec<C> = if conjugate { v.iter().map(|a| a.conj()).collect() } else { v.to_vec() };
    let mut tmp = vec![C::new(0.0, 0.0); v.len()];
    for x1 in 0..n {
        for x2p in 0..n {
            for x2 in 0..n {
                let c = u[(x2p, x2)];
                for k in 0..8 {
                    tmp[(x1 * n + x2p) * 8 + k] += c * input[(x1 * n + x2) * 8 + k];
                }
            }
        }
    }
    let mut out = vec![C::new(0.0, 0.0); v.len()];
    for x1p in 0..n {
        for x1 in 0..n {
            let c = u[(x1p, x1)];
            for r in 0..n * 8 {
                out[x1p * n * 8 + r] += c * tmp[x1 * n * 8 + r];
            }
        }
    }
    if conjugate {
        out.iter_mut().for_each(|a| *a = a.conj());
    }
    out
}

fn permutation(n: usize, f: impl Fn(usize, usize, usize, usize, usize) -> (usize, usize, usize, usize, usize)) -> Rows {
    let d = n * n * 8;
    let mut rows: Rows = vec![Vec::new(); d];
    for (x1, x2, s1, s2, q) in labels(n) {
        let (a, b, c, e, g) = f(x1, x2, s1, s2, q);
        rows[idx(n, a, b, c, e, g)].push((idx(n, x1, x2, s1, s2, q), C::new(1.0, 0.0)));
    }
    rows
}

fn diagonal(n: usize, keep: impl Fn(usize, usize) -> bool) -> Rows {
    labels(n)
        .map(|(x1, x2, s1, s2, q)| {
            let i = idx(n, x1, x2, s1, s2, q);
            if keep(x1, x2) {
                vec![(i, C::new(1.0, 0.0))]
            } else {
                vec![]
            }
        })
        .collect()
}

fn inside(lo: usize, hi: usize, x: usize) -> bool {
    lo <= x && x < hi
}

/// Full dense-ρ pipeline for one arm; returns the final density matrix.
pub fn run_arm(cfg: &ScenarioConfig, kick: bool) -> Rho {
    let n = cfg.n;
    let p1 = packet(n, cfg.packet1.support.lo, cfg.packet1.support.hi, cfg.packet1.center, cfg.packet1.width, cfg.packet1.momentum);
    let p2 = packet(n, cfg.packet2.support.lo, cfg.packet2.support.hi, cfg.packet2.center, cfg.packet2.width, cfg.packet2.momentum);
    let sign = match cfg.statistics {
        Statistics::Fermion => -1.0,
        Statistics::Boson => 1.0,
        Statistics::Distinguishable => 0.0,
    };
    let mut psi = vec![C::new(0.0, 0.0); n * n * 8];
    for x1 in 0..n {
        for x2 in 0..n {
            psi[idx(n, x1, x2, 0, 0, 0)] = p1[x1] * p2[x2] + p2[x1] * p1[x2] * sign;
        }
    }
    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|a| *a /= norm);
    let mut rho = Rho::pure(&psi);

    let (o1, o2, o3) = (cfg.o1, cfg.o2, cfg.o3);
    if kick {
        let k = match cfg.kick_mode {
            KickMode::Off => None,
            KickMode::Position => Some(permutation(n, |x1, x2, s1, s2, q| {
                (x1, x2, s1 ^ inside(o1.lo, o1.hi, x1) as usize, s2 ^ inside(o1.lo, o1.hi, x2) as usize, q)
            })),
            KickMode::Label1 => Some(permutation(n, |x1, x2, s1, s2, q| {
                (x1, x2, s1 ^ inside(o1.lo, o1.hi, x1) as usize, s2, q)
            })),
        };
        if let Some(k) = k {
            rho = rho.sandwich(&k, &k);
        }
    }
    if cfg.t1 > 0.0 {
        rho = rho.evolve(n, &propagator(n, cfg.hopping, cfg.t1));
    }

    let bell_fires = |x1: usize, x2: usize| match cfg.joint_mode {
        JointMode::None => false,
        JointMode::GlobalBell => true,
        JointMode::LocalizedBell => inside(o2.lo, o2.hi, x1) && inside(o2.lo, o2.hi, x2),
    };
    if cfg.joint_mode != JointMode::None {
        // P = |B><B| on spins (B = (|dd> + |uu>)/√2) where the measurement fires.
        let d = n * n * 8;
        let mut p: Rows = vec![Vec::new(); d];
        let mut comp: Rows = vec![Vec::new(); d];
        for (x1, x2, s1, s2, q) in labels(n) {
            let i = idx(n, x1, x2, s1, s2, q);
            let bell_part: Vec<(usize, C)> = if bell_fires(x1, x2) && s1 == s2 {
                [0usize, 1].iter().map(|&s| (idx(n, x1, x2, s, s, q), C::new(0.5, 0.0))).collect()
            } else {
                vec![]
            };
            let mut c: Vec<(usize, C)> = vec![(i, C::new(1.0, 0.0))];
            for &(j, v) in &bell_part {
                if let Some(e) = c.iter_mut().find(|e| e.0 == j) {
                    e.1 -= v;
                } else {
                    c.push((j, -v));
                }
            }
            p[i] = bell_part;
            comp[i] = c;
        }
        rho = rho.sandwich(&p, &p).add(&rho.sandwich(&comp, &comp));
    }
    if cfg.t2 > 0.0 {
        rho = rho.evolve(n, &propagator(n, cfg.hopping, cfg.t2));
    }

    let in3 = |x: usize| inside(o3.lo, o3.hi, x);
    let v = match cfg.detector_mode {
        // swap(spin of the particle in O3, qubit); nothing if both or neither are there
        DetectorMode::Position => permutation(n, |x1, x2, s1, s2, q| match (in3(x1), in3(x2)) {
            (true, false) => (x1, x2, q, s2, s1),
            (false, true) => (x1, x2, s1, q, s2),
            _ => (x1, x2, s1, s2, q),
        }),
        DetectorMode::Label2 => permutation(n, |x1, x2, s1, s2, q| {
            if in3(x1) || in3(x2) {
                (x1, x2, s1, q, s2)
            } else {
                (x1, x2, s1, s2, q)
            }
        }),
    };
    rho = rho.sandwich(&v, &v);
    if cfg.selective_o3 {
        let occ = diagonal(n, |x1, x2| in3(x1) || in3(x2));
        rho = rho.sandwich(&occ, &occ);
        let tr = rho.trace();
        rho = rho.scale(1.0 / tr);
    }
    rho
}

/// Mixture `Σ w_b |ψ_b><ψ_b|` of a library ensemble, as a dense reference matrix.
pub fn ensemble_rho(x: &sorkin_lattice::qcore::BranchEnsemble) -> Rho {
    let d = x.dim();
    let mut acc = Rho { d, m: vec![C::new(0.0, 0.0); d * d] };
    for b in x.branches() {
        acc = acc.add(&Rho::pure(b.state.amps()).scale(b.weight));
    }
    acc
}

pub fn max_diff(a: &Rho, b: &Rho) -> f64 {
    a.m.iter().zip(&b.m).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `tr((I + S) ρ (I + S)) / 4`: the weighted mean of the squared distance of
/// each branch from the antisymmetric sector.
pub fn antisymmetric_residual(n: usize, rho: &Rho) -> f64 {
    let swap = permutation(n, |x1, x2, s1, s2, q| (x2, x1, s2, s1, q));
    let d = n * n * 8;
    let plus: Rows = (0..d)
        .map(|i| {
            let mut row = vec![(i, C::new(1.0, 0.0))];
            for &(j, v) in &swap[i] {
                if j == i {
                    row[0].1 += v;
                } else {
                    row.push((j, v));
                }
            }
            row
        })
        .collect();
    rho.sandwich(&plus, &plus).trace() / 4.0
}
