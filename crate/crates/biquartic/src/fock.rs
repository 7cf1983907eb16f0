//! Truncated two-mode Fock basis and the ladder-operator matrices built on it.
//!
//! The basis enumerates all pairs `(n1, n2)` with `n_k <= n_max`, ordered by
//! `n1` then `n2`, so the flat index is `n1 * (n_max + 1) + n2`. Operators are
//! assembled from truncated single-mode ladder matrices; products are taken
//! after truncation, so every operator acts within the retained space.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::sparse::CsrMatrix;

/// Hard cap on the number of basis states (memory guard).
pub const MAX_BASIS_STATES: usize = 80_000;

/// Truncated two-mode number basis for effective Planck constant `hbar` and
/// reference frequency `omega`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FockBasis {
    pub hbar: f64,
    pub omega: f64,
    pub n_max: u32,
}

impl FockBasis {
    pub fn new(hbar: f64, n_max: u32) -> Result<Arc<Self>> {
        Self::with_omega(hbar, 1.0, n_max)
    }

    pub fn with_omega(hbar: f64, omega: f64, n_max: u32) -> Result<Arc<Self>> {
        if !(hbar > 0.0) || !(omega > 0.0) {
            return Err(Error::InvalidModel(format!(
                "hbar and omega must be positive, got hbar={hbar}, omega={omega}"
            )));
        }
        let per_mode = n_max as usize + 1;
        let dim = per_mode * per_mode;
        if dim > MAX_BASIS_STATES {
            return Err(Error::BasisTooLarge {
                dim,
                max: MAX_BASIS_STATES,
            });
        }
        Ok(Arc::new(Self { hbar, omega, n_max }))
    }

    /// States per mode.
    pub fn per_mode(&self) -> usize {
        self.n_max as usize + 1
    }

    /// Total number of basis states.
    pub fn dim(&self) -> usize {
        self.per_mode() * self.per_mode()
    }

    /// Flat index of `(n1, n2)`.
    pub fn index(&self, n1: u32, n2: u32) -> usize {
        n1 as usize * self.per_mode() + n2 as usize
    }

    /// Occupation pair of a flat index.
    pub fn occupations(&self, idx: usize) -> (u32, u32) {
        let l = self.per_mode();
        ((idx / l) as u32, (idx % l) as u32)
    }

    /// Deterministic enumeration of all states.
    pub fn states(&self) -> Vec<(u32, u32)> {
        let l = self.per_mode() as u32;
        (0..l).flat_map(|n1| (0..l).map(move |n2| (n1, n2))).collect()
    }
}

/// Which elementary operator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Position(usize),
    Momentum(usize),
    Number(usize),
}

/// A sparse operator on a [`FockBasis`], tagged with its Hermiticity.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub basis: Arc<FockBasis>,
    pub matrix: CsrMatrix,
    pub hermitian: bool,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Expectation value `<psi| A |psi>` for a normalized amplitude vector.
    pub fn expectation(&self, amps: &[C64]) -> C64 {
        let y = self.matrix.apply(amps);
        amps.iter().zip(&y).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest per-mode index offset coupled by stored entries, `(d1, d2)`.
    pub fn mode_bandwidths(&self) -> (u32, u32) {
        let mut d1 = 0u32;
        let mut d2 = 0u32;
        for (r, c, _) in self.matrix.entries() {
            let (a1, a2) = self.basis.occupations(r);
            let (b1, b2) = self.basis.occupations(c);
            d1 = d1.max(a1.abs_diff(b1));
            d2 = d2.max(a2.abs_diff(b2));
        }
        (d1, d2)
    }
}

/// Dense single-mode matrix, used only as an assembly intermediate.
struct ModeMatrix {
    l: usize,
    m: Vec<C64>, // row-major l x l
}

impl ModeMatrix {
    fn zeros(l: usize) -> Self {
        Self { l, m: vec![C64::new(0.0, 0.0); l * l] }
    }

    fn identity(l: usize) -> Self {
        let mut s = Self::zeros(l);
        for i in 0..l {
            s.m[i * l + i] = C64::new(1.0, 0.0);
        }
        s
    }

    fn at(&self, i: usize, j: usize) -> C64 {
        self.m[i * self.l + j]
    }

    fn position(l: usize, hbar: f64, omega: f64) -> Self {
        let mut s = Self::zeros(l);
        let scale = (hbar / (2.0 * omega)).sqrt();
        for n in 0..l - 1 {
            let v = C64::new(scale * ((n + 1) as f64).sqrt(), 0.0);
            s.m[n * l + (n + 1)] = v;
            s.m[(n + 1) * l + n] = v;
        }
        s
    }

    fn momentum(l: usize, hbar: f64, omega: f64) -> Self {
        let mut s = Self::zeros(l);
        let scale = (hbar * omega / 2.0).sqrt();
        for n in 0..l - 1 {
            let v = scale * ((n + 1) as f64).sqrt();
            // <n+1| p |n> = i v, <n| p |n+1> = -i v
            s.m[(n + 1) * l + n] = C64::new(0.0, v);
            s.m[n * l + (n + 1)] = C64::new(0.0, -v);
        }
        s
    }

    fn number(l: usize) -> Self {
        let mut s = Self::zeros(l);
        for n in 0..l {
            s.m[n * l + n] = C64::new(n as f64, 0.0);
        }
        s
    }

    fn mul(&self, other: &Self) -> Self {
        let l = self.l;
        let mut out = Self::zeros(l);
        for i in 0..l {
            for k in 0..l {
                let a = self.at(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..l {
                    out.m[i * l + j] += a * other.at(k, j);
                }
            }
        }
        out
    }

    fn pow(&self, e: u32) -> Self {
        let mut out = Self::identity(self.l);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }
}

fn nonzeros(m: &ModeMatrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for i in 0..m.l {
        for j in 0..m.l {
            let v = m.at(i, j);
            if v.norm_sqr() != 0.0 {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Tensor-assemble `sum_terms c * M1[term] (x) M2[term]` into a CSR matrix.
fn assemble_two_mode(
    basis: &Arc<FockBasis>,
    terms: &[(f64, ModeMatrix, ModeMatrix)],
) -> CsrMatrix {
    let l = basis.per_mode();
    let mut triplets = Vec::new();
    for (c, m1, m2) in terms {
        let nz1 = nonzeros(m1);
        let nz2 = nonzeros(m2);
        for &(a1, b1, v1) in &nz1 {
            for &(a2, b2, v2) in &nz2 {
                triplets.push(((a1 * l + a2) as u32, (b1 * l + b2) as u32, *c * v1 * v2));
            }
        }
    }
    CsrMatrix::from_triplets(basis.dim(), triplets, 0.0)
}

/// Build one of the elementary operators `q_k`, `p_k`, `n_k`.
pub fn operator_matrix(kind: OperatorKind, basis: &Arc<FockBasis>) -> OperatorMatrix {
    let l = basis.per_mode();
    let (hbar, omega) = (basis.hbar, basis.omega);
    let single = |mode: usize, m: ModeMatrix| {
        let id = ModeMatrix::identity(l);
        let terms = if mode == 0 {
            vec![(1.0, m, id)]
        } else {
            vec![(1.0, id, m)]
        };
        assemble_two_mode(basis, &terms)
    };
    let matrix = match kind {
        OperatorKind::Position(k) => single(k, ModeMatrix::position(l, hbar, omega)),
        OperatorKind::Momentum(k) => single(k, ModeMatrix::momentum(l, hbar, omega)),
        OperatorKind::Number(k) => single(k, ModeMatrix::number(l)),
    };
    OperatorMatrix {
        basis: basis.clone(),
        matrix: matrix.symmetrized(),
        hermitian: true,
    }
}

/// Hamiltonian `(p1^2 + p2^2)/2 + V(q1, q2)` with V given by the monomial
/// list of `params`, assembled from truncated single-mode powers.
pub fn hamiltonian_matrix(params: &ModelParams, basis: &Arc<FockBasis>) -> OperatorMatrix {
    let l = basis.per_mode();
    let (hbar, omega) = (basis.hbar, basis.omega);
    let q = ModeMatrix::position(l, hbar, omega);
    let p = ModeMatrix::momentum(l, hbar, omega);
    let id = ModeMatrix::identity(l);

    let mut terms: Vec<(f64, ModeMatrix, ModeMatrix)> = vec![
        (0.5, p.mul(&p), ModeMatrix::identity(l)),
        (0.5, id, p.mul(&p)),
    ];
    // cache q powers per exponent to avoid recomputation
    let max_pow = params
        .potential_terms
        .iter()
        .map(|m| m.j.max(m.k))
        .max()
        .unwrap_or(0);
    let q_pows: Vec<ModeMatrix> = (0..=max_pow).map(|e| q.pow(e)).collect();
    for m in &params.potential_terms {
        terms.push((
            m.c,
            clone_mode(&q_pows[m.j as usize]),
            clone_mode(&q_pows[m.k as usize]),
        ));
    }
    let matrix = assemble_two_mode(basis, &terms).symmetrized();
    OperatorMatrix {
        basis: basis.clone(),
        matrix,
        hermitian: true,
    }
}

fn clone_mode(m: &ModeMatrix) -> ModeMatrix {
    ModeMatrix { l: m.l, m: m.m.clone() }
}
