//! Model definition: polynomial two-mode potentials, phase-space state, and
//! the reference-oscillator action-angle map.
//!
//! The default model is
//!
//! ```text
//! H = (p1^2 + p2^2)/2 + (beta/4)(q1^4 + q2^4) + (1/2) q1^2 q2^2
//! ```
//!
//! generalized to an arbitrary list of monomials `c * q1^j * q2^k` so that
//! harmonic and other analytically solvable potentials can be swapped in
//! without touching the engines. Action-angle variables always refer to the
//! unit-frequency harmonic reference oscillator.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One potential monomial `c * q1^j * q2^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub j: u32,
    pub k: u32,
    pub c: f64,
}

impl Monomial {
    pub fn new(j: u32, k: u32, c: f64) -> Self {
        Self { j, k, c }
    }
}

/// Model parameters: the quartic coefficient, the cross-coupling, and the
/// monomial list actually used by every evaluation routine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub coupling: f64,
    pub potential_terms: Vec<Monomial>,
}

impl ModelParams {
    /// Standard coupled-quartic model with cross-coupling 1/2.
    pub fn quartic(beta: f64) -> Result<Self> {
        Self::with_coupling(beta, 0.5)
    }

    /// Coupled-quartic model with an explicit cross-coupling coefficient.
    pub fn with_coupling(beta: f64, coupling: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidModel(format!(
                "beta must be positive, got {beta}"
            )));
        }
        let terms = vec![
            Monomial::new(4, 0, beta / 4.0),
            Monomial::new(0, 4, beta / 4.0),
            Monomial::new(2, 2, coupling),
        ];
        Self::from_terms(beta, coupling, terms)
    }

    /// Isotropic harmonic potential `(q1^2 + q2^2)/2`, the analytic test bed.
    pub fn harmonic() -> Self {
        Self {
            beta: 0.0,
            coupling: 0.0,
            potential_terms: vec![Monomial::new(2, 0, 0.5), Monomial::new(0, 2, 0.5)],
        }
    }

    /// Build from an explicit monomial list, checking that the potential is
    /// bounded below: the leading power in each coordinate must be even with
    /// positive coefficients.
    pub fn from_terms(beta: f64, coupling: f64, terms: Vec<Monomial>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidModel("empty potential".into()));
        }
        for axis in 0..2 {
            let deg = |m: &Monomial| if axis == 0 { m.j } else { m.k };
            let lead = terms
                .iter()
                .filter(|m| m.c != 0.0)
                .map(&deg)
                .max()
                .unwrap_or(0);
            if lead == 0 {
                continue; // potential does not involve this coordinate
            }
            if lead % 2 != 0 {
                return Err(Error::InvalidModel(format!(
                    "leading power {lead} in q{} is odd; potential unbounded below",
                    axis + 1
                )));
            }
            if terms.iter().any(|m| deg(m) == lead && m.c < 0.0) {
                return Err(Error::InvalidModel(format!(
                    "negative coefficient on leading power in q{}",
                    axis + 1
                )));
            }
        }
        Ok(Self {
            beta,
            coupling,
            potential_terms: terms,
        })
    }

    /// V(q).
    pub fn potential(&self, q: [f64; 2]) -> f64 {
        self.potential_terms
            .iter()
            .map(|m| m.c * q[0].powi(m.j as i32) * q[1].powi(m.k as i32))
            .sum()
    }

    /// -grad V(q), evaluated analytically from the monomial list.
    pub fn force(&self, q: [f64; 2]) -> [f64; 2] {
        let mut f = [0.0, 0.0];
        for m in &self.potential_terms {
            if m.j > 0 {
                f[0] -= m.c * m.j as f64 * q[0].powi(m.j as i32 - 1) * q[1].powi(m.k as i32);
            }
            if m.k > 0 {
                f[1] -= m.c * m.k as f64 * q[0].powi(m.j as i32) * q[1].powi(m.k as i32 - 1);
            }
        }
        f
    }

    /// Hessian of V as `[[V11, V12], [V12, V22]]`.
    pub fn hessian(&self, q: [f64; 2]) -> [[f64; 2]; 2] {
        let mut h = [[0.0; 2]; 2];
        for m in &self.potential_terms {
            let (j, k, c) = (m.j as i32, m.k as i32, m.c);
            if j >= 2 {
                h[0][0] += c * (j * (j - 1)) as f64 * q[0].powi(j - 2) * q[1].powi(k);
            }
            if k >= 2 {
                h[1][1] += c * (k * (k - 1)) as f64 * q[0].powi(j) * q[1].powi(k - 2);
            }
            if j >= 1 && k >= 1 {
                h[0][1] += c * (j * k) as f64 * q[0].powi(j - 1) * q[1].powi(k - 1);
            }
        }
        h[1][0] = h[0][1];
        h
    }

    /// Total energy of a phase point.
    pub fn energy(&self, x: &PhasePoint) -> f64 {
        0.5 * (x.p[0] * x.p[0] + x.p[1] * x.p[1]) + self.potential(x.q)
    }

    /// Minimum of V over a coarse grid, a crude lower bound used for sanity
    /// checks and box construction.
    pub fn potential_floor(&self, half_width: f64, n: usize) -> f64 {
        let mut vmin = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                let q1 = -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64;
                let q2 = -half_width + 2.0 * half_width * j as f64 / (n - 1) as f64;
                vmin = vmin.min(self.potential([q1, q2]));
            }
        }
        vmin
    }

    /// Largest |q_k| on the energy surface along the axis of mode `k`
    /// (other coordinates at rest). Used for shell sampling boxes.
    pub fn axis_turning_point(&self, k: usize, energy: f64) -> f64 {
        let v_axis = |q: f64| {
            let mut x = [0.0, 0.0];
            x[k] = q;
            self.potential(x)
        };
        let mut hi = 1.0;
        while v_axis(hi) < energy && hi < 1e6 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if v_axis(mid) < energy {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Maximum reference action `(q_k^2 + p_k^2)/2` attainable in mode `k`
    /// on the energy surface. Sets the Fock-space support of shell states.
    pub fn max_mode_action(&self, k: usize, energy: f64) -> f64 {
        let q_turn = self.axis_turning_point(k, energy);
        let n = 4000;
        let mut best: f64 = energy; // all-kinetic point: q = 0, p^2 = 2E
        for i in 0..=n {
            let q = q_turn * i as f64 / n as f64;
            let mut x = [0.0, 0.0];
            x[k] = q;
            let v = self.potential(x);
            if v <= energy {
                best = best.max(0.5 * (q * q + 2.0 * (energy - v)));
            }
        }
        best
    }
}

/// Classical state in Cartesian coordinates (dimensionless units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: [f64; 2],
    pub p: [f64; 2],
}

impl PhasePoint {
    pub fn new(q: [f64; 2], p: [f64; 2]) -> Self {
        Self { q, p }
    }

    pub fn origin() -> Self {
        Self::new([0.0, 0.0], [0.0, 0.0])
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.p.iter()).all(|x| x.is_finite())
    }
}

/// State in the action-angle variables of the unit-frequency reference
/// oscillator: `alpha_k = sqrt(I_k) exp(i theta_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionAngle {
    pub actions: [f64; 2],
    pub angles: [f64; 2],
}

fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can return TAU itself when the argument is a tiny negative number
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Cartesian -> action-angle for reference frequency `omega`:
/// `alpha_k = (omega q_k + i p_k) / sqrt(2 omega)`, `I_k = |alpha_k|^2`,
/// `theta_k = arg alpha_k` wrapped to `[0, 2*pi)`.
pub fn to_action_angle(x: &PhasePoint, omega: f64) -> ActionAngle {
    let mut actions = [0.0; 2];
    let mut angles = [0.0; 2];
    for k in 0..2 {
        let re = omega.sqrt() * x.q[k] / 2f64.sqrt();
        let im = x.p[k] / (2.0 * omega).sqrt();
        actions[k] = re * re + im * im;
        angles[k] = wrap_angle(im.atan2(re));
    }
    ActionAngle { actions, angles }
}

/// Inverse of [`to_action_angle`].
pub fn from_action_angle(aa: &ActionAngle, omega: f64) -> PhasePoint {
    let mut q = [0.0; 2];
    let mut p = [0.0; 2];
    for k in 0..2 {
        let r = aa.actions[k].max(0.0).sqrt();
        let re = r * aa.angles[k].cos();
        let im = r * aa.angles[k].sin();
        q[k] = (2.0 / omega).sqrt() * re;
        p[k] = (2.0 * omega).sqrt() * im;
    }
    PhasePoint::new(q, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn potential_reference_values() {
        let m = ModelParams::quartic(1.0).unwrap();
        assert_eq!(m.potential([0.0, 0.0]), 0.0);
        assert!((m.potential([1.0, 1.0]) - 1.0).abs() < 1e-15);
        let m = ModelParams::quartic(0.1).unwrap();
        assert!((m.potential([2.0, 0.0]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn force_reference_values() {
        let m = ModelParams::quartic(1.0).unwrap();
        assert_eq!(m.force([0.0, 0.0]), [0.0, 0.0]);
        let f = m.force([1.0, 0.0]);
        assert!((f[0] + 1.0).abs() < 1e-15 && f[1].abs() < 1e-15);
    }

    #[test]
    fn force_matches_finite_difference() {
        let m = ModelParams::quartic(0.3).unwrap();
        let h = 1e-5;
        for &(q1, q2) in &[(0.7, -1.3), (1.9, 0.4), (-0.2, 2.2), (1.1, 1.7)] {
            let f = m.force([q1, q2]);
            let fd1 = -(m.potential([q1 + h, q2]) - m.potential([q1 - h, q2])) / (2.0 * h);
            let fd2 = -(m.potential([q1, q2 + h]) - m.potential([q1, q2 - h])) / (2.0 * h);
            assert!((f[0] - fd1).abs() <= 1e-6 * f[0].abs().max(1.0), "{} {}", f[0], fd1);
            assert!((f[1] - fd2).abs() <= 1e-6 * f[1].abs().max(1.0), "{} {}", f[1], fd2);
        }
    }

    #[test]
    fn hessian_matches_finite_difference() {
        let m = ModelParams::quartic(0.5).unwrap();
        let q = [0.9, -1.4];
        let h = 1e-4;
        let hess = m.hessian(q);
        let f0 = m.force(q);
        let fq1 = m.force([q[0] + h, q[1]]);
        let fq2 = m.force([q[0], q[1] + h]);
        // dF_a/dq_b = -Hess_ab
        assert!(((fq1[0] - f0[0]) / h + hess[0][0]).abs() < 1e-3);
        assert!(((fq1[1] - f0[1]) / h + hess[1][0]).abs() < 1e-3);
        assert!(((fq2[0] - f0[0]) / h + hess[0][1]).abs() < 1e-3);
        assert!(((fq2[1] - f0[1]) / h + hess[1][1]).abs() < 1e-3);
    }

    #[test]
    fn energy_reference_values() {
        let m = ModelParams::quartic(1.0).unwrap();
        assert_eq!(m.energy(&PhasePoint::origin()), 0.0);
        assert_eq!(m.energy(&PhasePoint::new([0.0, 0.0], [1.0, 1.0])), 1.0);
        assert!((m.energy(&PhasePoint::new([1.0, 1.0], [1.0, 1.0])) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn action_angle_reference_values() {
        let aa = to_action_angle(&PhasePoint::new([1.0, 0.0], [0.0, 0.0]), 1.0);
        assert!((aa.actions[0] - 0.5).abs() < 1e-15);
        assert!(aa.angles[0].abs() < 1e-15);
        assert!(aa.actions[1].abs() < 1e-15);

        let aa = to_action_angle(&PhasePoint::new([0.0, 0.0], [1.0, 0.0]), 1.0);
        assert!((aa.actions[0] - 0.5).abs() < 1e-15);
        assert!((aa.angles[0] - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn action_angle_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let x = PhasePoint::new(
                [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
                [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
            );
            for &omega in &[1.0, 0.7, 2.5] {
                let back = from_action_angle(&to_action_angle(&x, omega), omega);
                for k in 0..2 {
                    assert!((back.q[k] - x.q[k]).abs() < 1e-12);
                    assert!((back.p[k] - x.p[k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn action_angle_degenerate_cases() {
        let x = from_action_angle(
            &ActionAngle { actions: [0.0, 0.0], angles: [1.0, 2.0] },
            1.0,
        );
        assert_eq!(x, PhasePoint::origin());
        let a = ActionAngle { actions: [1.3, 0.2], angles: [0.4, 5.0] };
        let b = ActionAngle { actions: [1.3, 0.2], angles: [0.4 + TAU, 5.0] };
        let xa = from_action_angle(&a, 1.0);
        let xb = from_action_angle(&b, 1.0);
        assert!((xa.q[0] - xb.q[0]).abs() < 1e-12 && (xa.p[0] - xb.p[0]).abs() < 1e-12);
    }

    #[test]
    fn unbounded_potentials_rejected() {
        assert!(ModelParams::from_terms(1.0, 0.0, vec![Monomial::new(3, 0, 1.0)]).is_err());
        assert!(ModelParams::from_terms(1.0, 0.0, vec![Monomial::new(4, 0, -1.0)]).is_err());
        assert!(ModelParams::quartic(-1.0).is_err());
    }

    #[test]
    fn mode_action_bound_default_model() {
        // For V = (beta/4) q^4 on the axis, (q^2 + 2(E - V))/2 peaks at
        // q^2 = 1/beta with value E + 1/(4 beta) whenever V(1/sqrt(beta)) <= E.
        let m = ModelParams::quartic(0.1).unwrap();
        let i_max = m.max_mode_action(0, 5.0);
        assert!((i_max - 7.5).abs() < 1e-3, "{i_max}");
        let m = ModelParams::quartic(1.0).unwrap();
        let i_max = m.max_mode_action(1, 5.0);
        assert!((i_max - 5.25).abs() < 1e-3, "{i_max}");
    }

    #[test]
    fn energy_bounded_below_by_grid_floor() {
        let m = ModelParams::quartic(0.2).unwrap();
        let floor = m.potential_floor(4.0, 41);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = PhasePoint::new(
                [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            );
            assert!(m.energy(&x) >= floor - 1e-12);
        }
    }
}
