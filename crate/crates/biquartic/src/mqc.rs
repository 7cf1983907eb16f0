//! Multiple-quantum-coherence echo protocol: forward evolution, a diagonal
//! number-operator phase rotation, backward evolution, and the overlap with
//! the initial state. Fourier transforming the echo signal over the rotation
//! phases recovers the coherence intensities, whose second moment rebuilds
//! the harmonics moment of the evolved state.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::fock::OperatorMatrix;
use crate::quantum::{evolve, PropagatorSpec, SpectralEngine, StateVector};

/// Propagation backend for the echo legs.
pub enum Propagator<'a> {
    Krylov { h: &'a OperatorMatrix, spec: PropagatorSpec },
    Spectral(&'a SpectralEngine),
}

impl Propagator<'_> {
    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        match self {
            Propagator::Krylov { h, spec } => evolve(state, h, t, spec),
            Propagator::Spectral(engine) => Ok(engine.evolve(state, t)),
        }
    }
}

/// Uniform phase grid on `[0, 2*pi)^2`; `n_phi` points per mode.
#[derive(Debug, Clone, Copy)]
pub struct PhaseGrid {
    pub n_phi: [usize; 2],
}

impl PhaseGrid {
    /// Smallest alias-free grid for a basis truncated at `n_max`.
    pub fn nyquist(n_max: u32) -> Self {
        let n = 2 * n_max as usize + 1;
        Self { n_phi: [n, n] }
    }

    pub fn phase(&self, mode: usize, j: usize) -> f64 {
        std::f64::consts::TAU * j as f64 / self.n_phi[mode] as f64
    }

    fn check_nyquist(&self, n_max: u32) -> Result<()> {
        let need = 2 * n_max as usize + 1;
        for &n in &self.n_phi {
            if n < need {
                return Err(Error::GridBelowNyquist { n_phi: n, need });
            }
        }
        Ok(())
    }
}

/// Apply the mode-phase rotation `exp(-i (n1 phi1 + n2 phi2))` in place.
fn rotate(state: &mut StateVector, phi: [f64; 2]) {
    let l = state.basis.per_mode();
    for (idx, a) in state.amps.iter_mut().enumerate() {
        let n1 = (idx / l) as f64;
        let n2 = (idx % l) as f64;
        *a *= C64::from_polar(1.0, -(n1 * phi[0] + n2 * phi[1]));
    }
}

/// One echo run: evolve to `t`, rotate by `phi`, evolve back, and return the
/// probability of finding the initial state.
pub fn echo_signal(
    state0: &StateVector,
    prop: &Propagator,
    t: f64,
    phi: [f64; 2],
) -> Result<f64> {
    let psi_t = prop.evolve(state0, t)?;
    Ok(echo_from_forward(state0, prop, &psi_t, t, phi)?)
}

fn echo_from_forward(
    state0: &StateVector,
    prop: &Propagator,
    psi_t: &StateVector,
    t: f64,
    phi: [f64; 2],
) -> Result<f64> {
    let mut rotated = psi_t.clone();
    rotate(&mut rotated, phi);
    let back = prop.evolve(&rotated, -t)?;
    Ok(state0.inner(&back).norm_sqr())
}

/// Echo signals over a full phase grid; the forward leg is shared, each grid
/// point runs its own backward leg.
pub fn echo_signal_grid(
    state0: &StateVector,
    prop: &Propagator,
    t: f64,
    grid: &PhaseGrid,
    mode: Parallelism,
) -> Result<Vec<Vec<f64>>> {
    let psi_t = prop.evolve(state0, t)?;
    let (n1, n2) = (grid.n_phi[0], grid.n_phi[1]);
    let flat = exec::map_indexed(mode, n1 * n2, |k| {
        let (j1, j2) = (k / n2, k % n2);
        echo_from_forward(
            state0,
            prop,
            &psi_t,
            t,
            [grid.phase(0, j1), grid.phase(1, j2)],
        )
    });
    let mut rows = Vec::with_capacity(n1);
    let mut it = flat.into_iter();
    for _ in 0..n1 {
        let mut row = Vec::with_capacity(n2);
        for _ in 0..n2 {
            row.push(it.next().unwrap()?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Coherence intensities over integer offsets, from the Frobenius mass of
/// the density-matrix blocks.
#[derive(Debug, Clone)]
pub struct CoherenceSpectrum {
    pub intensities: BTreeMap<(i32, i32), f64>,
    /// Set when spectral weight above 1e-8 sits at the grid's fold boundary,
    /// the signature of aliasing from a sub-Nyquist grid.
    pub aliasing_warning: bool,
}

impl CoherenceSpectrum {
    pub fn total(&self) -> f64 {
        self.intensities.values().sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.intensities
            .iter()
            .map(|(&(m1, m2), w)| (m1 as f64 * m1 as f64 + m2 as f64 * m2 as f64) * w)
            .sum()
    }
}

/// Inverse discrete Fourier transform of the echo signal over both phases:
/// the signal is a finite sum `sum_m I_m exp(-i m . phi)`, so on an
/// alias-free grid the intensities are recovered exactly.
pub fn extract_intensities(signals: &[Vec<f64>], grid: &PhaseGrid, n_max: u32) -> Result<CoherenceSpectrum> {
    grid.check_nyquist(n_max)?;
    let (n1, n2) = (grid.n_phi[0], grid.n_phi[1]);
    assert_eq!(signals.len(), n1);
    assert!(signals.iter().all(|row| row.len() == n2));
    let half1 = (n1 - 1) / 2;
    let half2 = (n2 - 1) / 2;
    let mut intensities = BTreeMap::new();
    let mut aliasing = false;
    for m1 in -(half1 as i32)..=(half1 as i32) {
        for m2 in -(half2 as i32)..=(half2 as i32) {
            let mut acc = C64::new(0.0, 0.0);
            for (j1, row) in signals.iter().enumerate() {
                for (j2, &s) in row.iter().enumerate() {
                    let angle = m1 as f64 * grid.phase(0, j1) + m2 as f64 * grid.phase(1, j2);
                    acc += s * C64::from_polar(1.0, angle);
                }
            }
            let value = acc / (n1 as f64 * n2 as f64);
            let i_m = value.re;
            if value.im.abs() > 1e-8 {
                aliasing = true;
            }
            if i_m.abs() > 1e-14 {
                if (m1.unsigned_abs() as usize == half1 || m2.unsigned_abs() as usize == half2)
                    && i_m > 1e-8
                {
                    aliasing = true;
                }
                intensities.insert((m1, m2), i_m);
            }
        }
    }
    Ok(CoherenceSpectrum { intensities, aliasing_warning: aliasing })
}

/// Second moment of the harmonics distribution reconstructed from an MQC
/// spectrum: `sum_m |m|^2 I_m / purity` (for a pure state the purity is one
/// and the intensities coincide with the harmonic weights).
pub fn m2_from_mqc(spectrum: &CoherenceSpectrum, purity: f64) -> f64 {
    assert!(purity > 0.0 && purity <= 1.0 + 1e-12, "purity must lie in (0, 1]");
    spectrum.second_moment() / purity
}
