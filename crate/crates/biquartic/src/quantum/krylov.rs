//! Short-iterative Lanczos propagator for sparse Hermitian generators, and
//! the step-by-step OTOC / harmonics-moment pipelines built on it.

use num_complex::Complex64 as C64;

use super::{number_variance_m2, StateVector};
use crate::error::{Error, Result};
use crate::fock::OperatorMatrix;
use crate::linalg;
use crate::series::{SeriesMeta, TimeSeries};

/// Stepping parameters for the Krylov propagator.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct PropagatorSpec {
    /// Outer step; each step may be subdivided to meet `tol`.
    pub dt: f64,
    /// Krylov subspace dimension.
    pub krylov_dim: usize,
    /// Per-step truncation tolerance.
    pub tol: f64,
}

impl Default for PropagatorSpec {
    fn default() -> Self {
        Self { dt: 0.05, krylov_dim: 30, tol: 1e-10 }
    }
}

/// Norm and energy-conservation record of a propagation run.
#[derive(Debug, Clone, Copy, Default)]
pub struct KrylovDiagnostics {
    pub norm_drift: f64,
    pub steps: u64,
}

/// One Lanczos step: returns `exp(-i (H/hbar) tau) v` and an error estimate.
///
/// The basis is built with full reorthogonalization (the subspace is small);
/// the a-posteriori error is the weight that would flow into the next basis
/// vector.
fn lanczos_exp(
    h: &OperatorMatrix,
    v: &[C64],
    tau: f64,
    m_max: usize,
) -> (Vec<C64>, f64) {
    let dim = v.len();
    let hbar = h.basis.hbar;
    let norm0 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return (v.to_vec(), 0.0);
    }
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m_max + 1);
    basis.push(v.iter().map(|a| a / norm0).collect());
    let mut alphas: Vec<f64> = Vec::with_capacity(m_max);
    let mut betas: Vec<f64> = Vec::with_capacity(m_max);
    let mut breakdown = false;
    for j in 0..m_max {
        let mut w = h.matrix.apply(&basis[j]);
        for x in &mut w {
            *x /= hbar;
        }
        // subtract projections on all previous vectors (full reorthogonalization)
        let mut alpha = 0.0;
        for (k, b) in basis.iter().enumerate() {
            let proj: C64 = b.iter().zip(&w).map(|(a, c)| a.conj() * c).sum();
            if k == j {
                alpha = proj.re;
            }
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= proj * bi;
            }
        }
        alphas.push(alpha);
        let beta = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        betas.push(beta);
        if beta < 1e-14 {
            breakdown = true;
            break;
        }
        if j + 1 < m_max {
            basis.push(w.iter().map(|a| a / beta).collect());
        }
    }
    let m = alphas.len();
    // eigendecompose the tridiagonal projection
    let t = faer::Mat::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if j + 1 == i || i + 1 == j {
            betas[i.min(j)]
        } else {
            0.0
        }
    });
    let eig = linalg::eigh(&t).expect("tridiagonal eigendecomposition");
    // y = S exp(-i theta tau) S^T e1
    let mut y = vec![C64::new(0.0, 0.0); m];
    for (k, &theta) in eig.values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -theta * tau);
        let s_e1 = eig.vectors[(0, k)];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += eig.vectors[(i, k)] * phase * s_e1;
        }
    }
    let err = if breakdown || m < m_max {
        0.0
    } else {
        (betas[m - 1] * tau).abs() * y[m - 1].norm()
    };
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (i, b) in basis.iter().enumerate() {
        let c = y[i] * norm0;
        for (o, bi) in out.iter_mut().zip(b) {
            *o += c * bi;
        }
    }
    (out, err)
}

/// Propagate `state` by `exp(-i H t / hbar)` (either sign of `t`), stepping
/// with `spec.dt` and subdividing steps until the local error estimate meets
/// `spec.tol`.
pub fn evolve(
    state: &StateVector,
    h: &OperatorMatrix,
    t: f64,
    spec: &PropagatorSpec,
) -> Result<StateVector> {
    let (out, _) = evolve_tracked(state, h, t, spec)?;
    Ok(out)
}

pub(crate) fn evolve_tracked(
    state: &StateVector,
    h: &OperatorMatrix,
    t: f64,
    spec: &PropagatorSpec,
) -> Result<(StateVector, KrylovDiagnostics)> {
    assert!(h.hermitian, "propagation needs a Hermitian generator");
    assert_eq!(h.dim(), state.dim());
    let mut amps = state.amps.clone();
    let mut diag = KrylovDiagnostics::default();
    let mut remaining = t.abs();
    let sign = t.signum();
    if remaining == 0.0 {
        return Ok((StateVector { basis: state.basis.clone(), amps }, diag));
    }
    let mut step = spec.dt.min(remaining);
    let norm_in = state.norm();
    while remaining > 1e-15 {
        let tau = sign * step.min(remaining);
        let (next, err) = lanczos_exp(h, &amps, tau, spec.krylov_dim);
        if err > spec.tol {
            step *= 0.5;
            if step < spec.dt / 2f64.powi(24) {
                return Err(Error::KrylovBreakdown { dt: step });
            }
            continue;
        }
        amps = next;
        remaining -= tau.abs();
        diag.steps += 1;
    }
    let out = StateVector { basis: state.basis.clone(), amps };
    diag.norm_drift = (out.norm() - norm_in).abs();
    Ok((out, diag))
}

/// OTOC `C_pp(t) = ||A - B||^2 / hbar^2` with
/// `|A> = U^+(t) p1 U(t) p1 |psi0>` and `|B> = p1 U^+(t) p1 U(t) |psi0>`.
///
/// The two forward legs are advanced incrementally across the time grid; each
/// sample then costs two backward legs of length `t`.
pub fn otoc_pp(
    state0: &StateVector,
    h: &OperatorMatrix,
    p1: &OperatorMatrix,
    times: &[f64],
    spec: &PropagatorSpec,
) -> Result<TimeSeries> {
    assert!(times.windows(2).all(|w| w[0] < w[1]), "times must ascend");
    let hbar = h.basis.hbar;
    let mut norm_drift = 0.0f64;
    let e_ref = h.expectation(&state0.amps).re;

    let mut phi = state0.clone(); // U(t) |psi0>
    let mut chi = StateVector {
        basis: state0.basis.clone(),
        amps: p1.matrix.apply(&state0.amps),
    }; // U(t) p1 |psi0>
    let mut t_now = 0.0;
    let mut values = Vec::with_capacity(times.len());
    let mut out_times = Vec::with_capacity(times.len());
    for &t in times {
        let (phi_next, d1) = evolve_tracked(&phi, h, t - t_now, spec)?;
        let (chi_next, _) = evolve_tracked(&chi, h, t - t_now, spec)?;
        phi = phi_next;
        chi = chi_next;
        t_now = t;
        norm_drift = norm_drift.max(d1.norm_drift);

        let p_chi = StateVector { basis: phi.basis.clone(), amps: p1.matrix.apply(&chi.amps) };
        let p_phi = StateVector { basis: phi.basis.clone(), amps: p1.matrix.apply(&phi.amps) };
        let (a, _) = evolve_tracked(&p_chi, h, -t, spec)?;
        let (b_inner, _) = evolve_tracked(&p_phi, h, -t, spec)?;
        let b = p1.matrix.apply(&b_inner.amps);
        let diff_sq: f64 = a
            .amps
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        values.push(diff_sq / (hbar * hbar));
        out_times.push(t);
    }
    let e_end = h.expectation(&phi.amps).re;
    let mut meta = SeriesMeta::labeled("otoc_pp");
    meta.norm_drift = Some(norm_drift);
    meta.energy_expectation_drift = Some((e_end - e_ref).abs() / e_ref.abs().max(1e-12));
    TimeSeries::new(out_times, values, meta)
}

/// Harmonics second moment along a quantum trajectory, evaluated through the
/// number-variance form at each sample time.
pub fn m2_series(
    state0: &StateVector,
    h: &OperatorMatrix,
    times: &[f64],
    spec: &PropagatorSpec,
    subtract_t0: bool,
) -> Result<TimeSeries> {
    assert!(times.windows(2).all(|w| w[0] < w[1]), "times must ascend");
    let mut psi = state0.clone();
    let mut t_now = 0.0;
    let mut values = Vec::with_capacity(times.len());
    let mut norm_drift = 0.0f64;
    let e_ref = h.expectation(&state0.amps).re;
    for &t in times {
        let (next, d) = evolve_tracked(&psi, h, t - t_now, spec)?;
        psi = next;
        t_now = t;
        norm_drift = norm_drift.max(d.norm_drift);
        values.push(number_variance_m2(&psi));
    }
    let e_end = h.expectation(&psi.amps).re;
    let mut meta = SeriesMeta::labeled("quantum_m2");
    meta.norm_drift = Some(norm_drift);
    meta.energy_expectation_drift = Some((e_end - e_ref).abs() / e_ref.abs().max(1e-12));
    let series = TimeSeries::new(times.to_vec(), values, meta)?;
    Ok(if subtract_t0 { series.subtract_t0() } else { series })
}
