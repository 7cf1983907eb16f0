//! Classical engine: symplectic trajectory and tangent-map integration,
//! Lyapunov estimates, energy-shell sampling, the ensemble OTOC, and the
//! second moment of the phase-space harmonics distribution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::model::{to_action_angle, ModelParams, PhasePoint};
use crate::series::{SeriesMeta, TimeSeries};

// Forest-Ruth 4th-order symplectic composition for separable Hamiltonians.
const CBRT2: f64 = 1.259_921_049_894_873_2;
const W1: f64 = 1.0 / (2.0 - CBRT2);
const W0: f64 = -CBRT2 / (2.0 - CBRT2);
const DRIFT: [f64; 4] = [0.5 * W1, 0.5 * (W0 + W1), 0.5 * (W0 + W1), 0.5 * W1];
const KICK: [f64; 4] = [W1, W0, W1, 0.0];

/// Default integrator step.
pub const DEFAULT_DT: f64 = 1e-3;
/// Default bound on relative energy drift per run.
pub const DEFAULT_DRIFT_BOUND: f64 = 1e-8;
/// How many times the step may be halved before giving up.
pub const MAX_DT_HALVINGS: u32 = 6;

/// Infinitesimal phase-space displacement carried by the linearized flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub dq: [f64; 2],
    pub dp: [f64; 2],
}

impl TangentVector {
    pub fn zero() -> Self {
        Self { dq: [0.0; 2], dp: [0.0; 2] }
    }

    pub fn norm(&self) -> f64 {
        (self.dq[0] * self.dq[0]
            + self.dq[1] * self.dq[1]
            + self.dp[0] * self.dp[0]
            + self.dp[1] * self.dp[1])
            .sqrt()
    }

    pub fn scale(&mut self, f: f64) {
        for k in 0..2 {
            self.dq[k] *= f;
            self.dp[k] *= f;
        }
    }
}

/// One Forest-Ruth step; the optional tangent vector is carried through the
/// exact linearization of the same map.
#[inline]
fn fr4_step(params: &ModelParams, x: &mut PhasePoint, tv: Option<&mut TangentVector>, dt: f64) {
    let mut tv = tv;
    for stage in 0..4 {
        let c = DRIFT[stage] * dt;
        x.q[0] += c * x.p[0];
        x.q[1] += c * x.p[1];
        if let Some(t) = tv.as_deref_mut() {
            t.dq[0] += c * t.dp[0];
            t.dq[1] += c * t.dp[1];
        }
        let d = KICK[stage] * dt;
        if d != 0.0 {
            let f = params.force(x.q);
            x.p[0] += d * f[0];
            x.p[1] += d * f[1];
            if let Some(t) = tv.as_deref_mut() {
                let h = params.hessian(x.q);
                let (dq0, dq1) = (t.dq[0], t.dq[1]);
                t.dp[0] -= d * (h[0][0] * dq0 + h[0][1] * dq1);
                t.dp[1] -= d * (h[1][0] * dq0 + h[1][1] * dq1);
            }
        }
    }
}

/// Integration output: states (and tangents, when requested) at sample times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    pub tangents: Option<Vec<TangentVector>>,
    /// Largest relative energy drift observed at the sample times.
    pub energy_drift: f64,
}

fn relative_drift(e: f64, e0: f64) -> f64 {
    (e - e0).abs() / e0.abs().max(1e-9)
}

/// Core loop: march with fixed `dt`, reporting at the requested times
/// (each snapped to the nearest step). Checks the energy-drift bound.
fn run_flow(
    params: &ModelParams,
    start: &PhasePoint,
    tangent: Option<TangentVector>,
    dt: f64,
    times: &[f64],
    drift_bound: f64,
) -> Result<Trajectory> {
    assert!(dt > 0.0, "dt must be positive");
    assert!(!times.is_empty(), "need at least one sample time");
    let mut x = *start;
    let mut tv = tangent;
    let e0 = params.energy(&x);
    let mut out_t = Vec::with_capacity(times.len());
    let mut out_x = Vec::with_capacity(times.len());
    let mut out_tv = tv.is_some().then(|| Vec::with_capacity(times.len()));
    let mut drift = 0.0f64;

    let mut step_now: u64 = 0;
    for &t in times {
        let target = (t / dt).round() as u64;
        while step_now < target {
            fr4_step(params, &mut x, tv.as_mut(), dt);
            step_now += 1;
        }
        drift = drift.max(relative_drift(params.energy(&x), e0));
        out_t.push(step_now as f64 * dt);
        out_x.push(x);
        if let (Some(buf), Some(t)) = (out_tv.as_mut(), tv.as_ref()) {
            buf.push(*t);
        }
    }
    if drift > drift_bound {
        return Err(Error::EnergyDrift { drift, bound: drift_bound });
    }
    Ok(Trajectory {
        times: out_t,
        points: out_x,
        tangents: out_tv,
        energy_drift: drift,
    })
}

/// Integrate a single trajectory, sampling at `times` (multiples of `dt`
/// after snapping). Fails if the relative energy drift exceeds the default
/// bound; the caller should then shrink `dt`.
pub fn integrate(
    params: &ModelParams,
    start: &PhasePoint,
    dt: f64,
    times: &[f64],
) -> Result<Trajectory> {
    run_flow(params, start, None, dt, times, DEFAULT_DRIFT_BOUND)
}

/// Integrate a trajectory together with a tangent vector propagated by the
/// exact linearization of the numerical flow.
pub fn tangent_integrate(
    params: &ModelParams,
    start: &PhasePoint,
    tangent: TangentVector,
    dt: f64,
    times: &[f64],
) -> Result<Trajectory> {
    run_flow(params, start, Some(tangent), dt, times, DEFAULT_DRIFT_BOUND)
}

/// As [`run_flow`] but retries with a halved step if the drift bound fails.
fn run_flow_auto(
    params: &ModelParams,
    start: &PhasePoint,
    tangent: Option<TangentVector>,
    dt0: f64,
    times: &[f64],
    drift_bound: f64,
) -> Result<Trajectory> {
    let mut dt = dt0;
    let mut last = None;
    for _ in 0..=MAX_DT_HALVINGS {
        match run_flow(params, start, tangent, dt, times, drift_bound) {
            Ok(tr) => return Ok(tr),
            Err(e) => {
                last = Some(e);
                dt *= 0.5;
            }
        }
    }
    Err(last.unwrap())
}

/// Benettin finite-time Lyapunov estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub lambda: f64,
    /// Spread of the running estimate over the final 20% of the run; small
    /// values indicate convergence.
    pub tail_variation: f64,
}

/// Largest Lyapunov exponent of the trajectory through `start`, from tangent
/// growth with periodic renormalization.
pub fn lyapunov(
    params: &ModelParams,
    start: &PhasePoint,
    t_total: f64,
    renorm_interval: f64,
    dt: f64,
) -> Result<LyapunovEstimate> {
    assert!(t_total > 10.0 * renorm_interval, "t_total must cover many renormalizations");
    let steps_per_block = (renorm_interval / dt).round().max(1.0) as u64;
    let n_blocks = (t_total / (steps_per_block as f64 * dt)).round() as u64;
    let mut x = *start;
    let mut tv = TangentVector { dq: [1.0, 0.0], dp: [0.0, 0.0] };
    let e0 = params.energy(&x);
    let mut log_sum = 0.0;
    let mut history = Vec::with_capacity(n_blocks as usize);
    for b in 0..n_blocks {
        for _ in 0..steps_per_block {
            fr4_step(params, &mut x, Some(&mut tv), dt);
        }
        let r = tv.norm();
        log_sum += r.ln();
        tv.scale(1.0 / r);
        let t_elapsed = (b + 1) as f64 * steps_per_block as f64 * dt;
        history.push(log_sum / t_elapsed);
    }
    let drift = relative_drift(params.energy(&x), e0);
    if drift > 1e-6 {
        return Err(Error::EnergyDrift { drift, bound: 1e-6 });
    }
    let lambda = *history.last().unwrap();
    let tail_start = history.len() - (history.len() / 5).max(1);
    let tail_variation = history[tail_start..]
        .iter()
        .map(|l| (l - lambda).abs())
        .fold(0.0, f64::max);
    Ok(LyapunovEstimate { lambda, tail_variation })
}

/// Isotropic Gaussian phase-space ensemble mirroring a coherent state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GaussianEnsemble {
    pub center: PhasePoint,
    pub sigma_q: f64,
    pub sigma_p: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl GaussianEnsemble {
    /// Ensemble with widths `sqrt(hbar/2)`, matching the phase-space
    /// distribution of a coherent state at `center` (omega = 1).
    pub fn coherent_mirror(center: PhasePoint, hbar: f64, n_samples: usize, seed: u64) -> Self {
        let sigma = (hbar / 2.0).sqrt();
        Self { center, sigma_q: sigma, sigma_p: sigma, n_samples, seed }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> PhasePoint {
        let mut x = self.center;
        for k in 0..2 {
            let gq: f64 = rng.sample(StandardNormal);
            let gp: f64 = rng.sample(StandardNormal);
            x.q[k] += self.sigma_q * gq;
            x.p[k] += self.sigma_p * gp;
        }
        x
    }

    /// Draw from the squared density (a Gaussian with widths `sigma/sqrt(2)`),
    /// the importance-sampling proposal for the harmonics moment.
    fn draw_squared(&self, rng: &mut ChaCha8Rng) -> PhasePoint {
        let mut x = self.center;
        let f = std::f64::consts::FRAC_1_SQRT_2;
        for k in 0..2 {
            let gq: f64 = rng.sample(StandardNormal);
            let gp: f64 = rng.sample(StandardNormal);
            x.q[k] += f * self.sigma_q * gq;
            x.p[k] += f * self.sigma_p * gp;
        }
        x
    }
}

/// Bounds of the rejection-sampling box, per coordinate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoxBounds {
    pub q_half_width: [f64; 2],
    pub p_half_width: [f64; 2],
}

/// Specification of an energy-shell ensemble of initial conditions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShellSpec {
    pub e0: f64,
    pub de: f64,
    pub n_centers: usize,
    pub seed: u64,
    pub bounds: Option<BoxBounds>,
}

impl ShellSpec {
    pub fn new(e0: f64, de: f64, n_centers: usize, seed: u64) -> Self {
        Self { e0, de, n_centers, seed, bounds: None }
    }
}

/// Box guaranteed to contain the shell `|H - E0| <= dE/2`: kinetic bound on
/// momenta, axis turning points on positions.
pub fn default_bounds(params: &ModelParams, e0: f64, de: f64) -> BoxBounds {
    let e_top = e0 + 0.5 * de;
    let floor = params.potential_floor(8.0, 65).min(0.0);
    let p_max = (2.0 * (e_top - floor)).sqrt();
    BoxBounds {
        q_half_width: [
            params.axis_turning_point(0, e_top) * 1.0001,
            params.axis_turning_point(1, e_top) * 1.0001,
        ],
        p_half_width: [p_max, p_max],
    }
}

const MAX_SHELL_REJECTIONS: u64 = 200_000_000;

/// Rejection-sample `n_centers` phase points from the energy shell;
/// deterministic under the spec seed.
pub fn sample_shell(params: &ModelParams, spec: &ShellSpec) -> Result<Vec<PhasePoint>> {
    if spec.de / spec.e0.abs().max(1e-12) > 0.1 {
        // wide shell: still valid, but the microcanonical reading is dubious
    }
    let bounds = spec.bounds.unwrap_or_else(|| default_bounds(params, spec.e0, spec.de));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut centers = Vec::with_capacity(spec.n_centers);
    let mut attempts: u64 = 0;
    while centers.len() < spec.n_centers {
        attempts += 1;
        if attempts > MAX_SHELL_REJECTIONS {
            return Err(Error::ShellSampling { attempts });
        }
        let x = PhasePoint::new(
            [
                rng.gen_range(-bounds.q_half_width[0]..bounds.q_half_width[0]),
                rng.gen_range(-bounds.q_half_width[1]..bounds.q_half_width[1]),
            ],
            [
                rng.gen_range(-bounds.p_half_width[0]..bounds.p_half_width[0]),
                rng.gen_range(-bounds.p_half_width[1]..bounds.p_half_width[1]),
            ],
        );
        if (params.energy(&x) - spec.e0).abs() <= 0.5 * spec.de {
            centers.push(x);
        }
    }
    Ok(centers)
}

/// Knobs shared by the ensemble pipelines.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalOpts {
    pub dt: f64,
    pub drift_bound: f64,
    pub parallelism: Parallelism,
    /// Number of batches used for standard-error estimates.
    pub n_batches: usize,
}

impl Default for ClassicalOpts {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            drift_bound: DEFAULT_DRIFT_BOUND,
            parallelism: Parallelism::default(),
            n_batches: 10,
        }
    }
}

fn batch_stats(per_member: &[Vec<f64>], n_batches: usize) -> (Vec<f64>, Vec<f64>) {
    let n_t = per_member.first().map_or(0, Vec::len);
    let m = per_member.len();
    let mut mean = vec![0.0; n_t];
    for row in per_member {
        for (acc, v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= m as f64;
    }
    // contiguous member batches; SEM of batch means
    let b = n_batches.min(m).max(1);
    let mut sem = vec![0.0; n_t];
    if b > 1 {
        let mut batch_means = vec![vec![0.0; n_t]; b];
        let mut batch_counts = vec![0usize; b];
        for (i, row) in per_member.iter().enumerate() {
            let bi = i * b / m;
            batch_counts[bi] += 1;
            for (acc, v) in batch_means[bi].iter_mut().zip(row) {
                *acc += v;
            }
        }
        for (bm, &count) in batch_means.iter_mut().zip(&batch_counts) {
            for v in bm.iter_mut() {
                *v /= count.max(1) as f64;
            }
        }
        for t in 0..n_t {
            let mu = batch_means.iter().map(|bm| bm[t]).sum::<f64>() / b as f64;
            let var =
                batch_means.iter().map(|bm| (bm[t] - mu) * (bm[t] - mu)).sum::<f64>() / (b - 1) as f64;
            sem[t] = (var / b as f64).sqrt();
        }
    }
    (mean, sem)
}

/// Ensemble-averaged classical OTOC: the mean of `(dp1(t))^2` over Gaussian
/// initial conditions, with the tangent vector seeded as a unit displacement
/// of `q1(0)`.
pub fn classical_otoc(
    params: &ModelParams,
    ensembles: &[GaussianEnsemble],
    times: &[f64],
    opts: &ClassicalOpts,
) -> Result<Vec<TimeSeries>> {
    let results = exec::map_slice(opts.parallelism, ensembles, |idx, ens| {
        otoc_single_ensemble(params, ens, times, opts)
            .map_err(|e| (idx, e))
    });
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(s) => out.push(s),
            Err((_, e)) => return Err(e),
        }
    }
    Ok(out)
}

fn otoc_single_ensemble(
    params: &ModelParams,
    ens: &GaussianEnsemble,
    times: &[f64],
    opts: &ClassicalOpts,
) -> Result<TimeSeries> {
    let mut per_member = Vec::with_capacity(ens.n_samples);
    let mut drift = 0.0f64;
    let mut actual_times = None;
    for member in 0..ens.n_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(ens.seed);
        rng.set_stream(member as u64);
        let x0 = ens.draw(&mut rng);
        let tv = TangentVector { dq: [1.0, 0.0], dp: [0.0, 0.0] };
        let tr = run_flow_auto(params, &x0, Some(tv), opts.dt, times, opts.drift_bound)?;
        drift = drift.max(tr.energy_drift);
        let tangents = tr.tangents.as_ref().unwrap();
        per_member.push(tangents.iter().map(|t| t.dp[0] * t.dp[0]).collect::<Vec<f64>>());
        if actual_times.is_none() {
            actual_times = Some(tr.times);
        }
    }
    let (mean, sem) = batch_stats(&per_member, opts.n_batches);
    let mut meta = SeriesMeta::labeled("classical_otoc");
    meta.seed = Some(ens.seed);
    meta.ensemble_size = Some(ens.n_samples);
    meta.energy_drift = Some(drift);
    TimeSeries::new(actual_times.unwrap(), mean, meta)?.with_errors(sem)
}

/// Monte Carlo estimate of the harmonics second moment for one Gaussian
/// ensemble.
///
/// Samples are drawn from the squared density; the initial tangent vector is
/// the (unnormalized) symplectic gradient of `ln rho0`, whose action-space
/// components after transport give the integrand directly — the gradient
/// weight of the numerator cancels against the displacement normalization,
/// so no explicit weights appear.
pub fn classical_m2(
    params: &ModelParams,
    ens: &GaussianEnsemble,
    times: &[f64],
    opts: &ClassicalOpts,
) -> Result<TimeSeries> {
    let aa = to_action_angle(&ens.center, 1.0);
    for k in 0..2 {
        if aa.actions[k] <= 0.0 {
            return Err(Error::DegenerateCenter { mode: k });
        }
    }
    let inv_sq = 1.0 / (ens.sigma_q * ens.sigma_q);
    let inv_sp = 1.0 / (ens.sigma_p * ens.sigma_p);
    let mut per_member = Vec::with_capacity(ens.n_samples);
    let mut drift = 0.0f64;
    let mut actual_times = None;
    for member in 0..ens.n_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(ens.seed ^ 0x9e37_79b9_7f4a_7c15);
        rng.set_stream(member as u64);
        let x0 = ens.draw_squared(&mut rng);
        let tv = TangentVector {
            dq: [
                (x0.p[0] - ens.center.p[0]) * inv_sp,
                (x0.p[1] - ens.center.p[1]) * inv_sp,
            ],
            dp: [
                -(x0.q[0] - ens.center.q[0]) * inv_sq,
                -(x0.q[1] - ens.center.q[1]) * inv_sq,
            ],
        };
        let tr = run_flow_auto(params, &x0, Some(tv), opts.dt, times, opts.drift_bound)?;
        drift = drift.max(tr.energy_drift);
        let tangents = tr.tangents.as_ref().unwrap();
        let row: Vec<f64> = tr
            .points
            .iter()
            .zip(tangents)
            .map(|(x, t)| {
                let di1 = x.q[0] * t.dq[0] + x.p[0] * t.dp[0];
                let di2 = x.q[1] * t.dq[1] + x.p[1] * t.dp[1];
                di1 * di1 + di2 * di2
            })
            .collect();
        per_member.push(row);
        if actual_times.is_none() {
            actual_times = Some(tr.times);
        }
    }
    let (mean, sem) = batch_stats(&per_member, opts.n_batches);
    let mut meta = SeriesMeta::labeled("classical_m2");
    meta.seed = Some(ens.seed);
    meta.ensemble_size = Some(ens.n_samples);
    meta.energy_drift = Some(drift);
    TimeSeries::new(actual_times.unwrap(), mean, meta)?.with_errors(sem)
}

/// Analytic value of the harmonics moment of the Gaussian itself (t = 0):
/// `sum_k I_k(center) / sigma^2` for isotropic widths.
pub fn m2_initial_value(ens: &GaussianEnsemble) -> f64 {
    let aa = to_action_angle(&ens.center, 1.0);
    aa.actions[0] / (ens.sigma_q * ens.sigma_q) + aa.actions[1] / (ens.sigma_q * ens.sigma_q)
}

/// Parallel map over ensembles for [`classical_m2`].
pub fn classical_m2_ensembles(
    params: &ModelParams,
    ensembles: &[GaussianEnsemble],
    times: &[f64],
    opts: &ClassicalOpts,
) -> Result<Vec<TimeSeries>> {
    let results = exec::map_slice(opts.parallelism, ensembles, |idx, ens| {
        classical_m2(params, ens, times, opts).map_err(|e| (idx, e))
    });
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(s) => out.push(s),
            Err((_, e)) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::TimeGrid;

    fn harmonic() -> ModelParams {
        ModelParams::harmonic()
    }

    #[test]
    fn harmonic_period_returns_to_start() {
        let params = harmonic();
        let x0 = PhasePoint::new([1.0, 0.0], [0.0, 0.0]);
        // step chosen commensurate with the period
        let dt = std::f64::consts::TAU / 6000.0;
        let times = vec![std::f64::consts::TAU];
        let tr = integrate(&params, &x0, dt, &times).unwrap();
        let end = tr.points.last().unwrap();
        assert!((end.q[0] - 1.0).abs() < 1e-8, "{:?}", end);
        assert!(end.p[0].abs() < 1e-8);
    }

    #[test]
    fn energy_conserved_on_chaotic_run() {
        let params = ModelParams::quartic(1.0).unwrap();
        let x0 = PhasePoint::new([1.1, -0.3], [0.7, 1.9]);
        let times = TimeGrid::linear(100.0, 50).build(1e-3);
        let tr = integrate(&params, &x0, 1e-3, &times).unwrap();
        assert!(tr.energy_drift < 1e-8, "drift {:.3e}", tr.energy_drift);
    }

    #[test]
    fn fourth_order_step_scaling() {
        let params = ModelParams::quartic(1.0).unwrap();
        let x0 = PhasePoint::new([1.0, 0.5], [0.0, -0.4]);
        let t_end = 2.0;
        let endpoint = |dt: f64| {
            let mut x = x0;
            let steps = (t_end / dt).round() as u64;
            for _ in 0..steps {
                fr4_step(&params, &mut x, None, dt);
            }
            x
        };
        let reference = endpoint(1.25e-4);
        let err = |x: &PhasePoint| {
            ((x.q[0] - reference.q[0]).powi(2)
                + (x.q[1] - reference.q[1]).powi(2)
                + (x.p[0] - reference.p[0]).powi(2)
                + (x.p[1] - reference.p[1]).powi(2))
            .sqrt()
        };
        let e1 = err(&endpoint(0.02));
        let e2 = err(&endpoint(0.01));
        let ratio = e1 / e2;
        assert!((8.0..32.0).contains(&ratio), "ratio {ratio}, e1={e1:.3e}, e2={e2:.3e}");
    }

    #[test]
    fn tangent_matches_harmonic_linear_flow() {
        let params = harmonic();
        let x0 = PhasePoint::new([0.3, -0.2], [0.5, 0.1]);
        let tv = TangentVector { dq: [1.0, 0.0], dp: [0.0, 0.0] };
        let times = TimeGrid::linear(10.0, 100).build(1e-3);
        let tr = tangent_integrate(&params, &x0, tv, 1e-3, &times).unwrap();
        for (t, tv) in tr.times.iter().zip(tr.tangents.as_ref().unwrap()) {
            // dq1(t) = cos t, dp1(t) = -sin t
            assert!((tv.dq[0] - t.cos()).abs() < 1e-8);
            assert!((tv.dp[0] + t.sin()).abs() < 1e-8);
            assert!(tv.dq[1].abs() < 1e-12 && tv.dp[1].abs() < 1e-12);
        }
    }

    #[test]
    fn zero_tangent_stays_zero() {
        let params = ModelParams::quartic(0.5).unwrap();
        let x0 = PhasePoint::new([1.0, 0.2], [0.1, 1.4]);
        let times = vec![5.0];
        let tr = tangent_integrate(&params, &x0, TangentVector::zero(), 1e-3, &times).unwrap();
        assert_eq!(tr.tangents.unwrap()[0], TangentVector::zero());
    }

    #[test]
    fn tangent_matches_finite_difference_pair() {
        let params = ModelParams::quartic(0.1).unwrap();
        // a shell-energy point
        let x0 = PhasePoint::new([1.3, -0.9], [2.2, -1.373]);
        let d = 1e-7;
        let tv = TangentVector { dq: [1.0, 0.0], dp: [0.0, 0.0] };
        let times = TimeGrid::linear(5.0, 10).build(1e-3);
        let tr = tangent_integrate(&params, &x0, tv, 1e-3, &times).unwrap();
        let mut x_shift = x0;
        x_shift.q[0] += d;
        let tr_shift = integrate(&params, &x_shift, 1e-3, &times).unwrap();
        for i in 1..times.len() {
            let fd = (tr_shift.points[i].p[0] - tr.points[i].p[0]) / d;
            let exact = tr.tangents.as_ref().unwrap()[i].dp[0];
            let rel = (fd - exact).abs() / exact.abs().max(1e-9);
            assert!(rel < 1e-4, "t={} fd={fd} exact={exact} rel={rel:.2e}", times[i]);
        }
    }

    #[test]
    fn lyapunov_vanishes_for_harmonic() {
        let params = harmonic();
        let x0 = PhasePoint::new([1.0, 0.3], [0.2, -0.5]);
        let est = lyapunov(&params, &x0, 1000.0, 1.0, 1e-2).unwrap();
        assert!(est.lambda.abs() < 0.01, "lambda {}", est.lambda);
    }

    #[test]
    fn lyapunov_vanishes_for_integrable_quartic() {
        // beta = 1 is the rotationally symmetric (integrable) point
        let params = ModelParams::quartic(1.0).unwrap();
        // a shell-energy start: solve p2 so that E = 5
        let (q, p1) = ([1.2, -0.8], 1.9);
        let p2 = -(2.0 * (5.0 - params.potential(q)) - p1 * p1).sqrt();
        let x0 = PhasePoint::new(q, [p1, p2]);
        assert!((params.energy(&x0) - 5.0).abs() < 1e-12);
        let est = lyapunov(&params, &x0, 1000.0, 1.0, 1e-3).unwrap();
        assert!(est.lambda.abs() < 0.05, "lambda {}", est.lambda);
    }

    #[test]
    fn lyapunov_positive_on_chaotic_shell() {
        let params = ModelParams::quartic(0.1).unwrap();
        let spec = ShellSpec::new(5.0, 0.002, 6, 7);
        let centers = sample_shell(&params, &spec).unwrap();
        let mut doubled = Vec::new();
        for c in &centers {
            let est = lyapunov(&params, c, 300.0, 0.5, 1e-3).unwrap();
            doubled.push(2.0 * est.lambda);
        }
        let mean = doubled.iter().sum::<f64>() / doubled.len() as f64;
        // positive and of the same order as the ensemble-growth rate; the
        // two are not assumed equal (annealed vs typical exponents differ)
        assert!((0.6..1.3).contains(&mean), "2*lambda = {mean}");
    }

    #[test]
    fn shell_sampling_is_deterministic_and_on_shell() {
        let params = ModelParams::quartic(0.1).unwrap();
        let spec = ShellSpec::new(5.0, 0.002, 20, 99);
        let a = sample_shell(&params, &spec).unwrap();
        let b = sample_shell(&params, &spec).unwrap();
        assert_eq!(a.len(), 20);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x, y);
        }
        for x in &a {
            assert!((params.energy(x) - 5.0).abs() <= 0.001);
        }
    }

    #[test]
    fn otoc_harmonic_is_sin_squared() {
        let params = harmonic();
        let ens = GaussianEnsemble::coherent_mirror(
            PhasePoint::new([1.0, 0.4], [0.0, -0.2]),
            0.25,
            32,
            7,
        );
        let times = TimeGrid::linear(10.0, 40).build(1e-3);
        let opts = ClassicalOpts { parallelism: Parallelism::Sequential, ..Default::default() };
        let series = classical_otoc(&params, &[ens], &times, &opts).unwrap();
        for (t, v) in series[0].times.iter().zip(&series[0].values) {
            let expect = t.sin() * t.sin();
            assert!((v - expect).abs() < 1e-6, "t={t} v={v} expect={expect}");
        }
    }

    #[test]
    fn otoc_starts_at_zero() {
        let params = ModelParams::quartic(0.3).unwrap();
        let ens = GaussianEnsemble::coherent_mirror(
            PhasePoint::new([1.0, 0.4], [0.3, -0.2]),
            0.125,
            8,
            3,
        );
        let opts = ClassicalOpts { parallelism: Parallelism::Sequential, ..Default::default() };
        let series = classical_otoc(&params, &[ens], &[0.0, 1.0], &opts).unwrap();
        assert_eq!(series[0].values[0], 0.0);
    }

    #[test]
    fn m2_rejects_degenerate_center() {
        let params = ModelParams::quartic(0.3).unwrap();
        let ens = GaussianEnsemble::coherent_mirror(
            PhasePoint::new([0.0, 1.0], [0.0, 0.0]),
            0.125,
            8,
            3,
        );
        let opts = ClassicalOpts::default();
        assert!(matches!(
            classical_m2(&params, &ens, &[0.0, 1.0], &opts),
            Err(Error::DegenerateCenter { mode: 0 })
        ));
    }

    #[test]
    fn m2_initial_value_matches_analytic() {
        let params = harmonic();
        let center = PhasePoint::new([1.1, 0.6], [0.4, -0.8]);
        let hbar = 0.25;
        let ens = GaussianEnsemble::coherent_mirror(center, hbar, 4000, 13);
        let opts = ClassicalOpts { parallelism: Parallelism::Sequential, ..Default::default() };
        let series = classical_m2(&params, &ens, &[0.0], &opts).unwrap();
        let expect = m2_initial_value(&ens);
        let sem = series.errors.as_ref().unwrap()[0];
        assert!(
            (series.values[0] - expect).abs() < 4.0 * sem + 0.01 * expect,
            "got {} expect {} sem {}",
            series.values[0],
            expect,
            sem
        );
    }

    #[test]
    fn m2_constant_for_harmonic() {
        // rigid angle rotation leaves the harmonic content unchanged
        let params = harmonic();
        let center = PhasePoint::new([1.0, 0.5], [0.2, -0.3]);
        let ens = GaussianEnsemble::coherent_mirror(center, 0.25, 2000, 5);
        let times = vec![0.0, 1.0, 2.0, 4.0];
        let opts = ClassicalOpts { parallelism: Parallelism::Sequential, ..Default::default() };
        let series = classical_m2(&params, &ens, &times, &opts).unwrap();
        let v0 = series.values[0];
        for (i, v) in series.values.iter().enumerate() {
            let sem = series.errors.as_ref().unwrap()[i];
            assert!((v - v0).abs() < 4.0 * sem + 1e-9 * v0.abs(), "i={i} v={v} v0={v0}");
        }
    }
}
