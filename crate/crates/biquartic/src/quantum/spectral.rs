//! Exact propagation through a full eigendecomposition of the (real
//! symmetric) Fock-space Hamiltonian.
//!
//! For ensembles of initial states sharing one Hamiltonian this is far
//! cheaper than per-state stepping: the diagonalization is paid once and each
//! sample time costs a handful of dense products over a batch of state
//! columns. States are carried as column pairs (Re, Im) of an `f64` matrix.

use faer::Mat;
use num_complex::Complex64 as C64;

use super::StateVector;
use crate::error::{Error, Result};
use crate::fock::OperatorMatrix;
use crate::linalg;
use crate::series::{SeriesMeta, TimeSeries};
use crate::sparse::CsrMatrix;

/// Which part of the spectrum to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenRange {
    Full,
    LowestK(usize),
}

/// Ascending eigenvalues (and optionally eigenvectors) of a Hermitian
/// operator with real matrix elements. Residuals `||Hv - Ev||` are verified
/// below 1e-8 whenever vectors are requested.
pub fn eigensolve(
    h: &OperatorMatrix,
    range: EigenRange,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<Mat<f64>>)> {
    let dense = dense_real(&h.matrix)?;
    let keep = match range {
        EigenRange::Full => dense.nrows(),
        EigenRange::LowestK(k) => k.min(dense.nrows()),
    };
    if !want_vectors {
        let mut vals = linalg::eigvalsh(&dense)?;
        vals.truncate(keep);
        return Ok((vals, None));
    }
    let eig = linalg::eigh(&dense)?;
    let dim = dense.nrows();
    let mut worst = 0.0f64;
    for k in 0..keep {
        let mut r2 = 0.0;
        for i in 0..dim {
            let mut hv = 0.0;
            let (cols, vals) = h.matrix.row(i);
            for (c, v) in cols.iter().zip(vals) {
                hv += v.re * eig.vectors[(*c as usize, k)];
            }
            let d = hv - eig.values[k] * eig.vectors[(i, k)];
            r2 += d * d;
        }
        worst = worst.max(r2.sqrt());
    }
    if worst > 1e-8 {
        return Err(Error::Eigen(format!("residual {worst:.3e} above 1e-8")));
    }
    let mut vals = eig.values;
    vals.truncate(keep);
    let vectors = Mat::from_fn(dim, keep, |i, j| eig.vectors[(i, j)]);
    Ok((vals, Some(vectors)))
}

fn dense_real(m: &CsrMatrix) -> Result<Mat<f64>> {
    if m.max_imag() > 1e-10 {
        return Err(Error::Eigen(format!(
            "operator has imaginary entries up to {:.3e}; spectral backend needs a real matrix",
            m.max_imag()
        )));
    }
    let d = m.dim();
    let mut out = Mat::zeros(d, d);
    for (r, c, v) in m.entries() {
        out[(r, c)] = v.re;
    }
    Ok(out)
}

/// Eigendecomposition of a Hamiltonian, reusable across many initial states.
pub struct SpectralDecomp {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
    pub hbar: f64,
}

impl SpectralDecomp {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        let dense = dense_real(&h.matrix)?;
        let eig = linalg::eigh(&dense)?;
        // spot-check residuals on a subsample; the full check lives in `eigensolve`
        let dim = dense.nrows();
        let stride = (dim / 16).max(1);
        for k in (0..dim).step_by(stride) {
            let mut r2 = 0.0;
            for i in 0..dim {
                let mut hv = 0.0;
                let (cols, vals) = h.matrix.row(i);
                for (c, v) in cols.iter().zip(vals) {
                    hv += v.re * eig.vectors[(*c as usize, k)];
                }
                let d = hv - eig.values[k] * eig.vectors[(i, k)];
                r2 += d * d;
            }
            if r2.sqrt() > 1e-8 {
                return Err(Error::Eigen(format!(
                    "sampled residual {:.3e} above 1e-8 at pair {k}",
                    r2.sqrt()
                )));
            }
        }
        Ok(Self { values: eig.values, vectors: eig.vectors, hbar: h.basis.hbar })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Pack states into a (dim x 2n) matrix of (Re, Im) column pairs.
fn pack_states(states: &[StateVector]) -> Mat<f64> {
    let dim = states[0].dim();
    Mat::from_fn(dim, 2 * states.len(), |i, j| {
        let a = states[j / 2].amps[i];
        if j % 2 == 0 {
            a.re
        } else {
            a.im
        }
    })
}

/// Apply `exp(-i E t / hbar)` phases row-wise to column pairs of `src`,
/// writing into `dst`. `sign` selects forward (-1) or backward (+1) phases.
fn apply_phases(
    values: &[f64],
    t_over_hbar: f64,
    sign: f64,
    src: &Mat<f64>,
    dst: &mut Mat<f64>,
) {
    let n_pairs = src.ncols() / 2;
    for (j, &e) in values.iter().enumerate() {
        let angle = sign * e * t_over_hbar;
        let (s, c) = angle.sin_cos();
        for p in 0..n_pairs {
            let re = src[(j, 2 * p)];
            let im = src[(j, 2 * p + 1)];
            dst[(j, 2 * p)] = re * c - im * s;
            dst[(j, 2 * p + 1)] = re * s + im * c;
        }
    }
}

/// `dst = A * src` for sparse real `A` given as the imaginary part of a CSR
/// matrix (used for the momentum operator `p = i A`).
fn sparse_imag_times_mat(a: &CsrMatrix, src: &Mat<f64>, dst: &mut Mat<f64>) {
    let cols = src.ncols();
    for r in 0..a.dim() {
        let (idx, vals) = a.row(r);
        for c in 0..cols {
            let mut acc = 0.0;
            for (k, v) in idx.iter().zip(vals) {
                acc += v.im * src[(*k as usize, c)];
            }
            dst[(r, c)] = acc;
        }
    }
}

/// Batched OTOC / harmonics-moment evaluator over a shared Hamiltonian.
///
/// The momentum operator is applied as a sparse sandwich
/// `V^T (A (V x))` with `p1 = i A`, `A` real antisymmetric. Every OTOC leg
/// applies it an even number of times, so the factors of i cancel in the
/// commutator norm and `A` stands in for `p1` directly.
pub struct SpectralEngine {
    pub decomp: SpectralDecomp,
    momentum: CsrMatrix,
    n_max: u32,
}

impl SpectralEngine {
    pub fn new(h: &OperatorMatrix, p1: &OperatorMatrix) -> Result<Self> {
        let decomp = SpectralDecomp::new(h)?;
        // p1 must be purely imaginary (ladder construction): p1 = i A, A real
        let max_re = p1
            .matrix
            .entries()
            .map(|(_, _, v)| v.re.abs())
            .fold(0.0, f64::max);
        if max_re > 1e-12 {
            return Err(Error::Eigen(format!(
                "momentum operator has real entries up to {max_re:.3e}"
            )));
        }
        Ok(Self { decomp, momentum: p1.matrix.clone(), n_max: h.basis.n_max })
    }

    /// `out = V^T (A (V x))` on a batch of column pairs.
    fn momentum_sandwich(&self, x: &Mat<f64>, fock: &mut Mat<f64>, scratch: &mut Mat<f64>, out: &mut Mat<f64>) {
        linalg::gemm(fock, &self.decomp.vectors, x);
        sparse_imag_times_mat(&self.momentum, fock, scratch);
        linalg::gemm_tn_into(out, &self.decomp.vectors, scratch);
    }

    pub fn dim(&self) -> usize {
        self.decomp.dim()
    }

    /// Transform states to eigenbasis column pairs.
    fn to_eigen(&self, states: &[StateVector]) -> Mat<f64> {
        let fock = pack_states(states);
        linalg::gemm_tn(&self.decomp.vectors, &fock)
    }

    /// Evolve a single state by `exp(-i H t / hbar)` exactly.
    pub fn evolve(&self, state: &StateVector, t: f64) -> StateVector {
        let tilde = self.to_eigen(std::slice::from_ref(state));
        let mut rotated = Mat::zeros(self.dim(), 2);
        apply_phases(&self.decomp.values, t / self.decomp.hbar, -1.0, &tilde, &mut rotated);
        let mut fock = Mat::zeros(self.dim(), 2);
        linalg::gemm(&mut fock, &self.decomp.vectors, &rotated);
        StateVector {
            basis: state.basis.clone(),
            amps: (0..self.dim())
                .map(|i| C64::new(fock[(i, 0)], fock[(i, 1)]))
                .collect(),
        }
    }

    /// OTOC series for a batch of initial states on a shared time grid.
    pub fn otoc_batch(&self, states: &[StateVector], times: &[f64]) -> Result<Vec<TimeSeries>> {
        assert!(!states.is_empty());
        let dim = self.dim();
        let hbar = self.decomp.hbar;
        let n = states.len();
        let psi = self.to_eigen(states);
        // A (V^T psi) once per state: transform the momentum-kicked states
        let p_psi = {
            let fock = pack_states(states);
            let mut kicked = Mat::zeros(dim, 2 * n);
            sparse_imag_times_mat(&self.momentum, &fock, &mut kicked);
            linalg::gemm_tn(&self.decomp.vectors, &kicked)
        };

        let mut work_a = Mat::zeros(dim, 2 * n);
        let mut work_b = Mat::zeros(dim, 2 * n);
        let mut fock = Mat::zeros(dim, 2 * n);
        let mut scratch = Mat::zeros(dim, 2 * n);
        let mut leg_a = Mat::zeros(dim, 2 * n);
        let mut leg_b = Mat::zeros(dim, 2 * n);
        let mut values = vec![Vec::with_capacity(times.len()); n];
        for &t in times {
            let th = t / hbar;
            // A-leg: conj-phase . A . phase . (A psi)
            apply_phases(&self.decomp.values, th, -1.0, &p_psi, &mut work_a);
            self.momentum_sandwich(&work_a, &mut fock, &mut scratch, &mut work_b);
            apply_phases(&self.decomp.values, th, 1.0, &work_b, &mut leg_a);
            // B-leg: A . conj-phase . A . phase . psi
            apply_phases(&self.decomp.values, th, -1.0, &psi, &mut work_a);
            self.momentum_sandwich(&work_a, &mut fock, &mut scratch, &mut work_b);
            apply_phases(&self.decomp.values, th, 1.0, &work_b, &mut work_a);
            self.momentum_sandwich(&work_a, &mut fock, &mut scratch, &mut leg_b);
            for s in 0..n {
                let mut acc = 0.0;
                for i in 0..dim {
                    let dre = leg_a[(i, 2 * s)] - leg_b[(i, 2 * s)];
                    let dim_ = leg_a[(i, 2 * s + 1)] - leg_b[(i, 2 * s + 1)];
                    acc += dre * dre + dim_ * dim_;
                }
                values[s].push(acc / (hbar * hbar));
            }
        }
        values
            .into_iter()
            .enumerate()
            .map(|(s, vals)| {
                let mut meta = SeriesMeta::labeled("otoc_pp");
                meta.norm_drift = Some(norm_drift_of(&psi, s));
                meta.energy_expectation_drift = Some(0.0);
                TimeSeries::new(times.to_vec(), vals, meta)
            })
            .collect()
    }

    /// Harmonics-moment series for a batch of initial states; also monitors
    /// the truncation-leakage proxy (population of the top `shell` layers)
    /// and fails if it crosses `leak_bound`.
    pub fn m2_batch(
        &self,
        states: &[StateVector],
        times: &[f64],
        subtract_t0: bool,
        leak_bound: Option<f64>,
    ) -> Result<Vec<TimeSeries>> {
        assert!(!states.is_empty());
        let dim = self.dim();
        let hbar = self.decomp.hbar;
        let n = states.len();
        let l = states[0].basis.per_mode();
        let psi = self.to_eigen(states);
        let mut rotated = Mat::zeros(dim, 2 * n);
        let mut fock = Mat::zeros(dim, 2 * n);
        let mut values = vec![Vec::with_capacity(times.len()); n];
        let mut max_leak = 0.0f64;
        let shell_lo = (self.n_max.saturating_sub(4)) as usize;
        for &t in times {
            apply_phases(&self.decomp.values, t / hbar, -1.0, &psi, &mut rotated);
            linalg::gemm(&mut fock, &self.decomp.vectors, &rotated);
            for s in 0..n {
                let mut mean = [0.0f64; 2];
                let mut mean_sq = [0.0f64; 2];
                let mut leak = 0.0f64;
                for i in 0..dim {
                    let re = fock[(i, 2 * s)];
                    let im = fock[(i, 2 * s + 1)];
                    let pr = re * re + im * im;
                    if pr == 0.0 {
                        continue;
                    }
                    let n1 = i / l;
                    let n2 = i % l;
                    mean[0] += pr * n1 as f64;
                    mean_sq[0] += pr * (n1 * n1) as f64;
                    mean[1] += pr * n2 as f64;
                    mean_sq[1] += pr * (n2 * n2) as f64;
                    if n1 >= shell_lo || n2 >= shell_lo {
                        leak += pr;
                    }
                }
                max_leak = max_leak.max(leak);
                if let Some(bound) = leak_bound {
                    if leak > bound {
                        return Err(Error::CutoffLeakage { population: leak, time: t, bound });
                    }
                }
                let m2 =
                    2.0 * ((mean_sq[0] - mean[0] * mean[0]) + (mean_sq[1] - mean[1] * mean[1]));
                values[s].push(m2);
            }
        }
        values
            .into_iter()
            .enumerate()
            .map(|(s, vals)| {
                let mut meta = SeriesMeta::labeled("quantum_m2");
                meta.norm_drift = Some(norm_drift_of(&psi, s));
                meta.energy_expectation_drift = Some(0.0);
                meta.warnings = if max_leak > 1e-10 {
                    vec![format!("top-shell population up to {max_leak:.2e}")]
                } else {
                    Vec::new()
                };
                let series = TimeSeries::new(times.to_vec(), vals, meta)?;
                Ok(if subtract_t0 { series.subtract_t0() } else { series })
            })
            .collect()
    }

    /// Largest top-5-shell population across a batch at given times, without
    /// failing; useful for choosing `n_max`.
    pub fn probe_leakage(&self, states: &[StateVector], times: &[f64]) -> Result<f64> {
        let dim = self.dim();
        let n = states.len();
        let l = states[0].basis.per_mode();
        let psi = self.to_eigen(states);
        let mut rotated = Mat::zeros(dim, 2 * n);
        let mut fock = Mat::zeros(dim, 2 * n);
        let shell_lo = (self.n_max.saturating_sub(4)) as usize;
        let mut max_leak = 0.0f64;
        for &t in times {
            apply_phases(&self.decomp.values, t / self.decomp.hbar, -1.0, &psi, &mut rotated);
            linalg::gemm(&mut fock, &self.decomp.vectors, &rotated);
            for s in 0..n {
                let mut leak = 0.0;
                for i in 0..dim {
                    let n1 = i / l;
                    let n2 = i % l;
                    if n1 >= shell_lo || n2 >= shell_lo {
                        let re = fock[(i, 2 * s)];
                        let im = fock[(i, 2 * s + 1)];
                        leak += re * re + im * im;
                    }
                }
                max_leak = max_leak.max(leak);
            }
        }
        Ok(max_leak)
    }
}

fn norm_drift_of(psi: &Mat<f64>, s: usize) -> f64 {
    let mut n2 = 0.0;
    for i in 0..psi.nrows() {
        n2 += psi[(i, 2 * s)] * psi[(i, 2 * s)] + psi[(i, 2 * s + 1)] * psi[(i, 2 * s + 1)];
    }
    (n2.sqrt() - 1.0).abs()
}
