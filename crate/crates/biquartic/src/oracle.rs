//! Brute-force histogram estimate of the classical harmonics moment.
//!
//! This is the slow route kept deliberately independent of the tangent-map
//! estimator in [`crate::classical`]: samples are evolved, binned on an
//! `(action, angle)` grid per mode, the angle derivatives are taken by finite
//! differences, and the moment is assembled from the density directly.
//! Intended for short times and large sample counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classical::GaussianEnsemble;
use crate::error::Result;
use crate::model::{to_action_angle, ModelParams, PhasePoint};
use crate::series::{SeriesMeta, TimeSeries};

/// Histogram controls for the Fourier-grid oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleGrid {
    /// Angle bins per mode (periodic, even; the derivative is Richardson
    /// extrapolated from this resolution and its half).
    pub angle_bins: usize,
    /// Action bins per mode.
    pub action_bins: usize,
    /// Batches for the standard-error estimate.
    pub n_batches: usize,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self { angle_bins: 48, action_bins: 10, n_batches: 10 }
    }
}

/// Result of the oracle: the moment per sample time with batch standard
/// errors, plus the density-squared integral used as the (conserved)
/// denominator, for constancy checks.
#[derive(Debug, Clone)]
pub struct OracleOutput {
    pub m2: TimeSeries,
    /// Magnitude of the Richardson step per time: the residual angle
    /// discretization systematic is of this order.
    pub systematic: Vec<f64>,
    pub denominator: Vec<f64>,
    pub denominator_err: Vec<f64>,
    /// Mean count per occupied cell, worst over times (sparse-occupancy
    /// diagnostic; below ~10 the estimate is unreliable).
    pub min_occupancy: f64,
}

struct Histogram {
    counts: Vec<u32>,
    na: usize, // angle bins
    ni: usize, // action bins
    i_max: [f64; 2],
}

impl Histogram {
    fn new(grid: &OracleGrid, i_max: [f64; 2]) -> Self {
        let cells = (grid.na_cells()).pow(2);
        Self { counts: vec![0; cells], na: grid.angle_bins, ni: grid.action_bins, i_max }
    }

    fn index(&self, mode_bin: [(usize, usize); 2]) -> usize {
        let per_mode = self.na * self.ni;
        let m0 = mode_bin[0].0 * self.na + mode_bin[0].1;
        let m1 = mode_bin[1].0 * self.na + mode_bin[1].1;
        m0 * per_mode + m1
    }

    fn deposit(&mut self, x: &PhasePoint) {
        let aa = to_action_angle(x, 1.0);
        let mut bins = [(0usize, 0usize); 2];
        for k in 0..2 {
            let bi = ((aa.actions[k] / self.i_max[k]) * self.ni as f64).floor() as usize;
            let bt = ((aa.angles[k] / std::f64::consts::TAU) * self.na as f64).floor() as usize;
            bins[k] = (bi.min(self.ni - 1), bt.min(self.na - 1));
        }
        let idx = self.index(bins);
        self.counts[idx] += 1;
    }
}

impl OracleGrid {
    fn na_cells(&self) -> usize {
        self.angle_bins * self.action_bins
    }
}

/// Estimate the harmonics moment of an evolving Gaussian ensemble on a fixed
/// `(I, theta)` grid.
pub fn classical_m2_fourier_oracle(
    params: &ModelParams,
    ens: &GaussianEnsemble,
    times: &[f64],
    grid: &OracleGrid,
    dt: f64,
) -> Result<OracleOutput> {
    let m = ens.n_samples;
    // Pass 1: evolve everything once to find the global action ranges.
    let mut coords: Vec<Vec<PhasePoint>> = Vec::with_capacity(times.len());
    {
        let mut states: Vec<PhasePoint> = (0..m)
            .map(|member| {
                let mut rng = ChaCha8Rng::seed_from_u64(ens.seed ^ 0x517c_c1b7_2722_0a95);
                rng.set_stream(member as u64);
                draw_plain(ens, &mut rng)
            })
            .collect();
        let mut t_now = 0.0;
        for &t in times {
            let steps = ((t - t_now) / dt).round() as u64;
            for x in states.iter_mut() {
                for _ in 0..steps {
                    step_inline(params, x, dt);
                }
            }
            t_now += steps as f64 * dt;
            coords.push(states.clone());
        }
    }
    let mut i_max = [0.0f64; 2];
    for frame in &coords {
        for x in frame {
            let aa = to_action_angle(x, 1.0);
            for k in 0..2 {
                i_max[k] = i_max[k].max(aa.actions[k]);
            }
        }
    }
    for v in &mut i_max {
        *v *= 1.0 + 1e-9;
    }

    // Pass 2: per time and batch, histogram and assemble the estimators at
    // the fine and half angle resolution; Richardson extrapolation removes
    // the leading (quadratic) derivative-discretization error.
    assert!(grid.angle_bins % 2 == 0, "angle_bins must be even");
    let b = grid.n_batches.max(1);
    let mut values = Vec::with_capacity(times.len());
    let mut errors = Vec::with_capacity(times.len());
    let mut systematic = Vec::with_capacity(times.len());
    let mut denom = Vec::with_capacity(times.len());
    let mut denom_err = Vec::with_capacity(times.len());
    let mut min_occ = f64::INFINITY;
    for frame in &coords {
        let mut batch_m2 = Vec::with_capacity(b);
        let mut batch_step = Vec::with_capacity(b);
        let mut batch_d = Vec::with_capacity(b);
        let mut occupied = 0usize;
        let mut total_counts = 0u64;
        for bi in 0..b {
            let members: Vec<&PhasePoint> = frame
                .iter()
                .enumerate()
                .filter(|(i, _)| i * b / m == bi)
                .map(|(_, x)| x)
                .collect();
            let mut hist = Histogram::new(grid, i_max);
            for x in &members {
                hist.deposit(x);
            }
            let (num_f, den_f) = assemble(&hist, members.len());
            let coarse = hist.rebin_angles();
            let (num_c, _den_c) = assemble(&coarse, members.len());
            let fine = num_f / den_f;
            let step = (fine - num_c / den_f) / 3.0;
            batch_m2.push(fine + step);
            batch_step.push(step.abs());
            batch_d.push(den_f);
            if bi == 0 {
                occupied = hist.counts.iter().filter(|&&c| c > 0).count();
                total_counts = hist.counts.iter().map(|&c| c as u64).sum();
            }
        }
        if occupied > 0 {
            min_occ = min_occ.min(total_counts as f64 / occupied as f64);
        }
        let (mv, me) = mean_sem(&batch_m2);
        let (dv, de) = mean_sem(&batch_d);
        values.push(mv);
        errors.push(me);
        systematic.push(batch_step.iter().sum::<f64>() / b as f64);
        denom.push(dv);
        denom_err.push(de);
    }
    let mut meta = SeriesMeta::labeled("classical_m2_fourier_oracle");
    meta.seed = Some(ens.seed);
    meta.ensemble_size = Some(m);
    if min_occ < 10.0 {
        meta.warnings
            .push(format!("sparse histogram occupancy: {min_occ:.1} counts per occupied cell"));
    }
    let m2 = TimeSeries::new(times.to_vec(), values, meta)?.with_errors(errors)?;
    Ok(OracleOutput {
        m2,
        systematic,
        denominator: denom,
        denominator_err: denom_err,
        min_occupancy: min_occ,
    })
}

fn mean_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Density-squared and angle-derivative functionals from one histogram.
///
/// With Poisson cell counts `k ~ Po(M p)`, `k(k-1)` estimates `(Mp)^2` and
/// `(k+ - k-)^2 - (k+ + k-)` estimates `(M(p+ - p-))^2`, removing the
/// counting-noise bias that would otherwise swamp the derivative at low
/// occupancy.
fn assemble(hist: &Histogram, m: usize) -> (f64, f64) {
    let ni = hist.ni;
    let na = hist.na;
    let d_theta = std::f64::consts::TAU / na as f64;
    let d_i = [hist.i_max[0] / ni as f64, hist.i_max[1] / ni as f64];
    let vol = d_i[0] * d_i[1] * d_theta * d_theta;
    let mf = m as f64;

    let idx = |i1: usize, t1: usize, i2: usize, t2: usize| -> usize {
        ((i1 * na + t1) * ni + i2) * na + t2
    };
    let mut denominator = 0.0;
    let mut numerator = 0.0;
    for i1 in 0..ni {
        for t1 in 0..na {
            for i2 in 0..ni {
                for t2 in 0..na {
                    let k = hist.counts[idx(i1, t1, i2, t2)] as f64;
                    denominator += k * (k - 1.0);
                    // periodic neighbors along each angle
                    let kp1 = hist.counts[idx(i1, (t1 + 1) % na, i2, t2)] as f64;
                    let km1 = hist.counts[idx(i1, (t1 + na - 1) % na, i2, t2)] as f64;
                    let kp2 = hist.counts[idx(i1, t1, i2, (t2 + 1) % na)] as f64;
                    let km2 = hist.counts[idx(i1, t1, i2, (t2 + na - 1) % na)] as f64;
                    let d1 = (kp1 - km1) * (kp1 - km1) - (kp1 + km1);
                    let d2 = (kp2 - km2) * (kp2 - km2) - (kp2 + km2);
                    numerator += (d1 + d2) / (4.0 * d_theta * d_theta);
                }
            }
        }
    }
    // common 1/(M^2 vol) factors cancel in the ratio; keep them for the
    // denominator's physical normalization
    let den_norm = denominator / (mf * (mf - 1.0) * vol);
    let num_norm = numerator / (mf * mf * vol);
    (num_norm, den_norm)
}

fn draw_plain(ens: &GaussianEnsemble, rng: &mut ChaCha8Rng) -> PhasePoint {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let mut x = ens.center;
    for k in 0..2 {
        let gq: f64 = rng.sample(StandardNormal);
        let gp: f64 = rng.sample(StandardNormal);
        x.q[k] += ens.sigma_q * gq;
        x.p[k] += ens.sigma_p * gp;
    }
    x
}

// Local copy of the integrator step to keep the oracle free of the engine's
// code path (it is the cross-check).
const CBRT2: f64 = 1.259_921_049_894_873_2;
const W1: f64 = 1.0 / (2.0 - CBRT2);
const W0: f64 = -CBRT2 / (2.0 - CBRT2);

fn step_inline(params: &ModelParams, x: &mut PhasePoint, dt: f64) {
    let drift = [0.5 * W1, 0.5 * (W0 + W1), 0.5 * (W0 + W1), 0.5 * W1];
    let kick = [W1, W0, W1, 0.0];
    for s in 0..4 {
        x.q[0] += drift[s] * dt * x.p[0];
        x.q[1] += drift[s] * dt * x.p[1];
        if kick[s] != 0.0 {
            let f = params.force(x.q);
            x.p[0] += kick[s] * dt * f[0];
            x.p[1] += kick[s] * dt * f[1];
        }
    }
}
