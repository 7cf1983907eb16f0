//! Pure-state quantum dynamics in the truncated Fock basis.

mod krylov;
mod spectral;

pub use krylov::{evolve, m2_series, otoc_pp, KrylovDiagnostics, PropagatorSpec};
pub use spectral::{eigensolve, EigenRange, SpectralDecomp, SpectralEngine};

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::model::PhasePoint;

/// Tail weight a coherent state may lose to truncation before preparation
/// is rejected.
pub const COHERENT_TAIL_BOUND: f64 = 1e-10;

/// Complex amplitude vector over a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct StateVector {
    pub basis: Arc<FockBasis>,
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Occupation probabilities |psi_{n1,n2}|^2 as a flat vector.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Mean and variance of the number operator of mode `k`.
    pub fn number_moments(&self, k: usize) -> (f64, f64) {
        let basis = &self.basis;
        let mut mean = 0.0;
        let mut mean_sq = 0.0;
        for (idx, a) in self.amps.iter().enumerate() {
            let pr = a.norm_sqr();
            if pr == 0.0 {
                continue;
            }
            let (n1, n2) = basis.occupations(idx);
            let n = if k == 0 { n1 } else { n2 } as f64;
            mean += pr * n;
            mean_sq += pr * n * n;
        }
        (mean, mean_sq - mean * mean)
    }

    /// Total population in the top `shell` occupation layers of either mode,
    /// the truncation-leakage proxy.
    pub fn top_shell_population(&self, shell: u32) -> f64 {
        let n_max = self.basis.n_max;
        let lo = n_max.saturating_sub(shell - 1);
        let mut pop = 0.0;
        for (idx, a) in self.amps.iter().enumerate() {
            let (n1, n2) = self.basis.occupations(idx);
            if n1 >= lo || n2 >= lo {
                pop += a.norm_sqr();
            }
        }
        pop
    }
}

/// Product of single-mode coherent states centered at the phase point, with
/// `alpha_k = (omega q_k + i p_k) / sqrt(2 hbar omega)`.
///
/// Rejects centers whose per-mode truncation tail exceeds
/// [`COHERENT_TAIL_BOUND`]; amplitudes are renormalized after truncation.
pub fn coherent_state(center: &PhasePoint, basis: &Arc<FockBasis>) -> Result<StateVector> {
    let l = basis.per_mode();
    let (hbar, omega) = (basis.hbar, basis.omega);
    let mut mode_amps: Vec<Vec<C64>> = Vec::with_capacity(2);
    for k in 0..2 {
        let alpha = C64::new(omega * center.q[k], center.p[k]) / (2.0 * hbar * omega).sqrt();
        let mut amps = Vec::with_capacity(l);
        // c_{n+1} = c_n * alpha / sqrt(n+1), c_0 = exp(-|alpha|^2/2)
        let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        let mut weight = 0.0;
        for n in 0..l {
            amps.push(c);
            weight += c.norm_sqr();
            c *= alpha / ((n + 1) as f64).sqrt();
        }
        let tail = 1.0 - weight;
        if tail > COHERENT_TAIL_BOUND {
            return Err(Error::CoherentTail { tail, bound: COHERENT_TAIL_BOUND });
        }
        mode_amps.push(amps);
    }
    let mut amps = vec![C64::new(0.0, 0.0); basis.dim()];
    for n1 in 0..l {
        for n2 in 0..l {
            amps[n1 * l + n2] = mode_amps[0][n1] * mode_amps[1][n2];
        }
    }
    let mut state = StateVector { basis: basis.clone(), amps };
    state.normalize();
    Ok(state)
}

/// `2 sum_k Var(n_k)`: the harmonics second moment of a pure state expressed
/// through number variances (the hbar factors of the action operators cancel).
pub fn number_variance_m2(state: &StateVector) -> f64 {
    let (_, var1) = state.number_moments(0);
    let (_, var2) = state.number_moments(1);
    2.0 * (var1 + var2)
}

/// Distribution of harmonic weights over integer offsets `m = (m1, m2)`.
#[derive(Debug, Clone)]
pub struct HarmonicsSpectrum {
    pub weights: BTreeMap<(i32, i32), f64>,
}

impl HarmonicsSpectrum {
    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.weights
            .iter()
            .map(|(&(m1, m2), w)| (m1 as f64 * m1 as f64 + m2 as f64 * m2 as f64) * w)
            .sum()
    }
}

/// Harmonic weights of a pure state: the squared Fock-coherence mass at each
/// index offset `m`, normalized to unit total.
pub fn harmonics_distribution(state: &StateVector) -> HarmonicsSpectrum {
    let l = state.basis.per_mode() as i32;
    let pr = state.probabilities();
    let at = |n1: i32, n2: i32| pr[(n1 * l + n2) as usize];
    let mut weights = BTreeMap::new();
    let mut total = 0.0;
    for m1 in -(l - 1)..l {
        for m2 in -(l - 1)..l {
            let mut w = 0.0;
            for n1 in 0.max(-m1)..l.min(l - m1) {
                for n2 in 0.max(-m2)..l.min(l - m2) {
                    w += at(n1 + m1, n2 + m2) * at(n1, n2);
                }
            }
            if w > 0.0 {
                weights.insert((m1, m2), w);
                total += w;
            }
        }
    }
    if total > 0.0 {
        for w in weights.values_mut() {
            *w /= total;
        }
    }
    HarmonicsSpectrum { weights }
}

/// Deterministic random normalized state, for identity tests.
pub fn random_state(basis: &Arc<FockBasis>, seed: u64) -> StateVector {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<C64> = (0..basis.dim())
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let mut s = StateVector { basis: basis.clone(), amps };
    s.normalize();
    s
}
