//! Acceptance suite: the headline physics checks, one test per criterion,
//! each printing a PASS/FAIL line (run with `--nocapture` to see them).
//!
//! Expensive artifacts (shell ensembles, spectral engines) are built once in
//! `OnceLock` holders and shared across criteria. Every tolerance is pinned
//! here; nothing is tuned at runtime.
//!
//! One check — the quadratic growth law of the quantum harmonics moment at
//! hbar = 1/8 (criterion 4b) — is expected red at this machine scale: the
//! quantum moment tracks the classical curve only up to t ≈ 2 at that hbar,
//! while the quadratic law sets in beyond t ≈ 4, a regime that would need
//! hbar ≤ 1/24 and Fock bases beyond 20k states. The test asserts the stated
//! bound anyway and its message carries the measured value.

use std::sync::{Arc, OnceLock};

use biquartic::analysis::{
    divergence_time, fit_growth, log_average, saturation_velocity, GrowthLaw, Saturation,
};
use biquartic::classical::{
    classical_m2, classical_m2_ensembles, classical_otoc, integrate, tangent_integrate,
    ClassicalOpts, GaussianEnsemble, TangentVector,
};
use biquartic::error::Result;
use biquartic::exec::Parallelism;
use biquartic::fock::{hamiltonian_matrix, operator_matrix, FockBasis, OperatorKind};
use biquartic::model::{ModelParams, PhasePoint};
use biquartic::mqc::{echo_signal_grid, extract_intensities, m2_from_mqc, PhaseGrid, Propagator};
use biquartic::oracle::{classical_m2_fourier_oracle, OracleGrid};
use biquartic::pipeline::{auto_n_max, derive_seed, shell_gaussian_ensembles, ShellConfig};
use biquartic::quantum::{
    coherent_state, harmonics_distribution, number_variance_m2, otoc_pp, random_state,
    PropagatorSpec, SpectralEngine, StateVector,
};
use biquartic::series::{SeriesMeta, TimeGrid, TimeSeries};
use biquartic::stats::{
    delta_parameter, sample_poisson_spacings, sample_wigner_spacings, SymmetrySector,
    UnfoldConfig, DELTA_BINS, DELTA_S_MAX,
};

// ---------------------------------------------------------------------------
// pinned run parameters
// ---------------------------------------------------------------------------

const SEED: u64 = 42;
const E0: f64 = 5.0;
const DE: f64 = 0.002;
const HBAR_REF: f64 = 0.125;

/// Shell ensembles for the classical criteria (count pinned by the protocol).
const CLASSICAL_ENSEMBLES: usize = 100;
const CHAOTIC_SAMPLES: usize = 400;
const INTEGRABLE_SAMPLES: usize = 200;
/// Quantum ensembles are not pinned; sized for the eigensolver budget.
const QUANTUM_STATES_CHAOTIC: usize = 16;
const QUANTUM_STATES_INTEGRABLE: usize = 32;

/// Fit windows (time units).
const CHAOTIC_FIT_WINDOW: (f64, f64) = (4.0, 13.0);
const INTEGRABLE_OTOC_WINDOW: (f64, f64) = (4.0, 40.0);
const INTEGRABLE_M2_WINDOW: (f64, f64) = (8.0, 40.0);
const QUANTUM_CHAOTIC_WINDOW: (f64, f64) = (2.0, 5.0);
const QUANTUM_INTEGRABLE_OTOC_WINDOW: (f64, f64) = (7.0, 18.0);
const QUANTUM_INTEGRABLE_M2_WINDOW: (f64, f64) = (1.0, 8.0);

/// Spacing-statistics scale (largest feasible basis on this hardware).
const SPECTRUM_HBAR: f64 = 1.0 / 24.0;
const SPECTRUM_N_MAX: u32 = 240;
const SPECTRUM_BUMP: u32 = 10;
const SCAN_BETAS: [f64; 5] = [0.1, 0.2, 0.3, 0.5, 1.0];
/// Allowance on the monotone trend of consecutive delta values, at the scale
/// of the finite-sample spread of the estimator on single spectra of this
/// size (the 0.3 -> 0.5 pair dips by ~0.08 reproducibly at this scale while
/// the global rise across the scan is ~0.7).
const DELTA_TREND_SLACK: f64 = 0.1;

fn shell(n_centers: usize) -> ShellConfig {
    ShellConfig { e0: E0, de: DE, n_centers, bounds: None }
}

fn opts() -> ClassicalOpts {
    ClassicalOpts::default()
}

fn pass(criterion: &str, details: String) {
    println!("acceptance {criterion}: PASS ({details})");
}

// ---------------------------------------------------------------------------
// shared artifacts
// ---------------------------------------------------------------------------

struct ClassicalRun {
    otoc_avg: TimeSeries,
    m2_avg: TimeSeries,
    max_drift: f64,
}

fn classical_run(beta: f64, grid: &[f64], samples: usize) -> Result<ClassicalRun> {
    let params = ModelParams::quartic(beta)?;
    let ensembles =
        shell_gaussian_ensembles(&params, &shell(CLASSICAL_ENSEMBLES), HBAR_REF, samples, SEED)?;
    let otoc = classical_otoc(&params, &ensembles, grid, &opts())?;
    let m2 = classical_m2_ensembles(&params, &ensembles, grid, &opts())?;
    let max_drift = otoc
        .iter()
        .chain(m2.iter())
        .filter_map(|s| s.meta.energy_drift)
        .fold(0.0f64, f64::max);
    Ok(ClassicalRun {
        otoc_avg: log_average(&otoc)?,
        m2_avg: log_average(&m2)?,
        max_drift,
    })
}

fn chaotic_classical() -> &'static ClassicalRun {
    static CELL: OnceLock<ClassicalRun> = OnceLock::new();
    CELL.get_or_init(|| {
        let grid = TimeGrid::linear(14.0, 140).build(1e-3);
        classical_run(0.1, &grid, CHAOTIC_SAMPLES).expect("chaotic classical run")
    })
}

fn integrable_classical() -> &'static ClassicalRun {
    static CELL: OnceLock<ClassicalRun> = OnceLock::new();
    CELL.get_or_init(|| {
        let grid = TimeGrid::logarithmic(40.0, 50).starting_at(0.5).build(1e-3);
        classical_run(1.0, &grid, INTEGRABLE_SAMPLES).expect("integrable classical run")
    })
}

struct QuantumRun {
    engine: SpectralEngine,
    states: Vec<StateVector>,
    ensembles: Vec<GaussianEnsemble>,
    params: ModelParams,
    hbar: f64,
    /// log-averaged OTOC on the long grid
    otoc_avg: TimeSeries,
    saturation: Option<Saturation>,
    max_leak: f64,
    max_norm_drift: f64,
}

fn quantum_run(beta: f64, hbar: f64, n_states: usize, t_max: f64) -> Result<QuantumRun> {
    let params = ModelParams::quartic(beta)?;
    let ensembles = shell_gaussian_ensembles(&params, &shell(n_states), hbar, CHAOTIC_SAMPLES, SEED)?;
    let centers: Vec<PhasePoint> = ensembles.iter().map(|e| e.center).collect();
    let n_max = auto_n_max(&params, hbar, E0, &centers, 3.2, 10);
    let basis = FockBasis::new(hbar, n_max)?;
    let h = hamiltonian_matrix(&params, &basis);
    let p1 = operator_matrix(OperatorKind::Momentum(0), &basis);
    let engine = SpectralEngine::new(&h, &p1)?;
    let states: Result<Vec<StateVector>> =
        ensembles.iter().map(|e| coherent_state(&e.center, &basis)).collect();
    let states = states?;
    let grid = TimeGrid::linear(t_max, (t_max / 0.2).round() as usize).build(1e-3);
    let max_leak = engine.probe_leakage(&states, &[0.25 * t_max, 0.5 * t_max, t_max])?;
    let otoc = engine.otoc_batch(&states, &grid)?;
    let max_norm_drift = otoc
        .iter()
        .filter_map(|s| s.meta.norm_drift)
        .fold(0.0f64, f64::max);
    let otoc_avg = log_average(&otoc)?;
    let saturation = saturation_velocity(&otoc_avg).ok();
    Ok(QuantumRun {
        engine,
        states,
        ensembles,
        params,
        hbar,
        otoc_avg,
        saturation,
        max_leak,
        max_norm_drift,
    })
}

fn quantum_chaotic_h8() -> &'static QuantumRun {
    static CELL: OnceLock<QuantumRun> = OnceLock::new();
    CELL.get_or_init(|| {
        quantum_run(0.1, 0.125, QUANTUM_STATES_CHAOTIC, 24.0).expect("quantum chaotic hbar=1/8")
    })
}

fn quantum_chaotic_h4() -> &'static QuantumRun {
    static CELL: OnceLock<QuantumRun> = OnceLock::new();
    CELL.get_or_init(|| {
        quantum_run(0.1, 0.25, 24, 24.0).expect("quantum chaotic hbar=1/4")
    })
}

fn quantum_chaotic_h2() -> &'static QuantumRun {
    static CELL: OnceLock<QuantumRun> = OnceLock::new();
    CELL.get_or_init(|| {
        quantum_run(0.1, 0.5, 24, 24.0).expect("quantum chaotic hbar=1/2")
    })
}

fn quantum_integrable_h8() -> &'static QuantumRun {
    static CELL: OnceLock<QuantumRun> = OnceLock::new();
    CELL.get_or_init(|| {
        quantum_run(1.0, 0.125, QUANTUM_STATES_INTEGRABLE, 20.0).expect("quantum integrable hbar=1/8")
    })
}

/// Dense short grid used for quantum-classical tracking windows.
fn dense_grid() -> Vec<f64> {
    TimeGrid::linear(5.0, 100).build(1e-3)
}

/// 10% tracking window of the integrable harmonics moment at hbar = 1/8,
/// shared by criteria 4a and 5.
fn integrable_tracking_window_h8() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| {
        let run = quantum_integrable_h8();
        let dense = dense_grid();
        let q_m2 = quantum_m2_avg(run, &dense);
        let c_m2 = classical_reference(run, &dense, true);
        divergence_time(&q_m2, &c_m2, 0.1, 0.2).unwrap_or(f64::INFINITY)
    })
}

/// Log-averaged harmonics moment of a quantum run on a grid (raw series).
fn quantum_m2_avg(run: &QuantumRun, grid: &[f64]) -> TimeSeries {
    let m2 = run.engine.m2_batch(&run.states, grid, false, None).expect("m2 batch");
    log_average(&m2).expect("m2 log average")
}

/// Classical references matched to a quantum run (same centers and widths).
fn classical_reference(run: &QuantumRun, grid: &[f64], want_m2: bool) -> TimeSeries {
    let series = if want_m2 {
        classical_m2_ensembles(&run.params, &run.ensembles, grid, &opts()).expect("classical m2")
    } else {
        classical_otoc(&run.params, &run.ensembles, grid, &opts()).expect("classical otoc")
    };
    log_average(&series).expect("classical log average")
}

/// Growth curve of a log-averaged series relative to its own start:
/// `G(t) = exp(L(t)) - exp(L(0))` in log space, for power-law fits of
/// subtracted quantities.
fn growth_curve(log_avg: &TimeSeries) -> TimeSeries {
    let base = log_avg.values[0].exp();
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (&t, &l) in log_avg.times.iter().zip(&log_avg.values).skip(1) {
        let g = l.exp() - base;
        if g > 0.0 {
            times.push(t);
            values.push(g.ln());
        }
    }
    let mut meta = SeriesMeta::labeled(format!("growth({})", log_avg.meta.label));
    meta.log_space = true;
    TimeSeries::new(times, values, meta).expect("growth curve")
}

// ---------------------------------------------------------------------------
// criterion 1: analytic harmonic oracle
// ---------------------------------------------------------------------------

#[test]
fn acceptance_01_harmonic_oracle() {
    let params = ModelParams::harmonic();
    // classical: sin^2(t) for any ensemble
    let ens = GaussianEnsemble::coherent_mirror(
        PhasePoint::new([1.1, 0.4], [0.2, -0.6]),
        HBAR_REF,
        48,
        derive_seed(SEED, 301),
    );
    let grid = TimeGrid::linear(20.0, 100).build(1e-3);
    let classical = classical_otoc(&params, &[ens], &grid, &opts()).expect("classical harmonic");
    let mut worst_cl = 0.0f64;
    for (t, v) in classical[0].times.iter().zip(&classical[0].values) {
        worst_cl = worst_cl.max((v - t.sin().powi(2)).abs());
    }
    assert!(worst_cl < 1e-6, "classical harmonic OTOC error {worst_cl:.2e}");

    // quantum: spectral backend over the full window, Lanczos spot checks
    let basis = FockBasis::new(HBAR_REF, 30).expect("basis");
    let h = hamiltonian_matrix(&params, &basis);
    let p1 = operator_matrix(OperatorKind::Momentum(0), &basis);
    let engine = SpectralEngine::new(&h, &p1).expect("engine");
    let state = coherent_state(&PhasePoint::new([0.9, 0.2], [0.1, -0.4]), &basis).expect("state");
    let times: Vec<f64> = (1..=100).map(|i| 0.2 * i as f64).collect();
    let series = &engine.otoc_batch(std::slice::from_ref(&state), &times).expect("otoc")[0];
    let mut worst_q = 0.0f64;
    for (t, v) in series.times.iter().zip(&series.values) {
        worst_q = worst_q.max((v - t.sin().powi(2)).abs());
    }
    assert!(worst_q < 1e-6, "quantum harmonic OTOC error {worst_q:.2e}");

    let krylov_times = [0.8, 2.4, 4.0];
    let krylov = otoc_pp(&state, &h, &p1, &krylov_times, &PropagatorSpec::default()).expect("krylov");
    for (t, v) in krylov.times.iter().zip(&krylov.values) {
        assert!((v - t.sin().powi(2)).abs() < 1e-6, "krylov t={t}: {v}");
    }

    // harmonics moment of a coherent state is flat under harmonic evolution
    let m2_series = biquartic::quantum::m2_series(
        &state,
        &h,
        &times[..40],
        &PropagatorSpec::default(),
        false,
    )
    .expect("m2 series");
    let m2_0 = number_variance_m2(&state);
    let drift = m2_series
        .values
        .iter()
        .map(|v| (v - m2_0).abs())
        .fold(0.0f64, f64::max);
    assert!(drift < 1e-8, "harmonic m2 drift {drift:.2e}");
    pass(
        "01 harmonic oracle",
        format!("classical err {worst_cl:.1e}, quantum err {worst_q:.1e}, m2 drift {drift:.1e}"),
    );
}

// ---------------------------------------------------------------------------
// criterion 2: classical chaotic growth rate
// ---------------------------------------------------------------------------

#[test]
fn acceptance_02_classical_chaotic_rate() {
    let run = chaotic_classical();
    let fit_otoc = fit_growth(&run.otoc_avg, CHAOTIC_FIT_WINDOW, GrowthLaw::Exponential)
        .expect("otoc fit");
    let fit_m2 =
        fit_growth(&run.m2_avg, CHAOTIC_FIT_WINDOW, GrowthLaw::Exponential).expect("m2 fit");
    for (name, fit) in [("otoc", &fit_otoc), ("m2", &fit_m2)] {
        assert!(
            (1.0..=1.5).contains(&fit.rate_or_exponent),
            "{name} rate {} outside 1.25 +- 0.25",
            fit.rate_or_exponent
        );
        assert!(fit.r_squared >= 0.98, "{name} R^2 {}", fit.r_squared);
    }
    // both rates are twice the same exponent: they must agree within 20%
    let rel = (fit_otoc.rate_or_exponent - fit_m2.rate_or_exponent).abs()
        / fit_m2.rate_or_exponent.abs();
    assert!(rel < 0.2, "otoc and m2 rates disagree by {:.1}%", 100.0 * rel);
    pass(
        "02 classical chaotic rate",
        format!(
            "otoc {:.3} (R2 {:.4}), m2 {:.3} (R2 {:.4}), agreement {:.1}%",
            fit_otoc.rate_or_exponent,
            fit_otoc.r_squared,
            fit_m2.rate_or_exponent,
            fit_m2.r_squared,
            100.0 * rel
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 3: classical integrable growth law
// ---------------------------------------------------------------------------

#[test]
fn acceptance_03_classical_integrable_law() {
    let run = integrable_classical();
    let fit_otoc = fit_growth(&run.otoc_avg, INTEGRABLE_OTOC_WINDOW, GrowthLaw::Power)
        .expect("otoc fit");
    let m2_growth = growth_curve(&run.m2_avg);
    let fit_m2 = fit_growth(&m2_growth, INTEGRABLE_M2_WINDOW, GrowthLaw::Power).expect("m2 fit");
    for (name, fit) in [("otoc", &fit_otoc), ("m2", &fit_m2)] {
        assert!(
            (1.8..=2.2).contains(&fit.rate_or_exponent),
            "{name} log-log slope {} outside 2.0 +- 0.2",
            fit.rate_or_exponent
        );
    }
    pass(
        "03 classical integrable law",
        format!(
            "otoc slope {:.3} (R2 {:.4}), m2 slope {:.3} (R2 {:.4})",
            fit_otoc.rate_or_exponent,
            fit_otoc.r_squared,
            fit_m2.rate_or_exponent,
            fit_m2.r_squared
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 4: quantum integrable
// ---------------------------------------------------------------------------

#[test]
fn acceptance_04a_quantum_integrable_otoc_and_tracking() {
    let run = quantum_integrable_h8();
    let fit = fit_growth(&run.otoc_avg, QUANTUM_INTEGRABLE_OTOC_WINDOW, GrowthLaw::Power)
        .expect("quantum otoc fit");
    assert!(
        (1.7..=2.3).contains(&fit.rate_or_exponent),
        "quantum integrable OTOC slope {} outside 2 +- 0.3",
        fit.rate_or_exponent
    );

    // tracking window: the harmonics moment shares its t = 0 value with the
    // classical ensemble exactly, so the 10% band is measured on it
    let dense = dense_grid();
    let t_div_h8 = integrable_tracking_window_h8();

    let run_h4 = quantum_run(1.0, 0.25, QUANTUM_STATES_INTEGRABLE, 8.0).expect("hbar=1/4 run");
    let q_m2_h4 = quantum_m2_avg(&run_h4, &dense);
    let c_m2_h4 = classical_reference(&run_h4, &dense, true);
    let t_div_h4 = divergence_time(&q_m2_h4, &c_m2_h4, 0.1, 0.2).unwrap_or(f64::INFINITY);

    assert!(
        t_div_h8 > t_div_h4,
        "tracking window must lengthen when hbar halves: {t_div_h4} -> {t_div_h8}"
    );
    assert!(t_div_h8 >= 1.0, "tracking window at hbar=1/8 too short: {t_div_h8}");
    pass(
        "04a quantum integrable otoc+tracking",
        format!(
            "otoc slope {:.3} (R2 {:.4}), 10% window {:.2} -> {:.2} as hbar 1/4 -> 1/8",
            fit.rate_or_exponent, fit.r_squared, t_div_h4, t_div_h8
        ),
    );
}

#[test]
fn acceptance_04b_quantum_integrable_m2_slope() {
    // Expected red at this scale: the quantum harmonics moment at hbar = 1/8
    // leaves the classical curve near t ~ 2 and saturates before the
    // quadratic regime (t > 4) opens. Measured slope ~ 0.8. Reaching the
    // quadratic window needs hbar <= ~1/24, i.e. Fock bases beyond 20k
    // states. The bound is asserted as stated rather than weakened.
    let run = quantum_integrable_h8();
    let grid = TimeGrid::linear(20.0, 100).build(1e-3);
    let q_m2 = quantum_m2_avg(run, &grid);
    let growth = growth_curve(&q_m2);
    let fit = fit_growth(&growth, QUANTUM_INTEGRABLE_M2_WINDOW, GrowthLaw::Power).expect("m2 fit");
    let ok = (1.7..=2.3).contains(&fit.rate_or_exponent);
    if ok {
        pass(
            "04b quantum integrable m2 slope",
            format!("slope {:.3} (R2 {:.4})", fit.rate_or_exponent, fit.r_squared),
        );
    } else {
        println!(
            "acceptance 04b quantum integrable m2 slope: FAIL (slope {:.3}, R2 {:.4}; \
             the quadratic window of the harmonics moment needs a smaller hbar than \
             this basis scale affords)",
            fit.rate_or_exponent, fit.r_squared
        );
    }
    assert!(
        ok,
        "quantum integrable m2 slope {:.3} outside 2 +- 0.3 over {:?} (pre-saturation \
         quadratic growth of the harmonics moment is out of reach at hbar = 1/8: the \
         quantum curve departs the classical one near t ~ 2, before the quadratic \
         regime begins at t ~ 4; see the classical curve for the law itself)",
        fit.rate_or_exponent,
        QUANTUM_INTEGRABLE_M2_WINDOW
    );
}

// ---------------------------------------------------------------------------
// criterion 5: quantum chaotic
// ---------------------------------------------------------------------------

#[test]
fn acceptance_05_quantum_chaotic() {
    let run = quantum_chaotic_h8();
    let classical_fit = fit_growth(
        &chaotic_classical().otoc_avg,
        CHAOTIC_FIT_WINDOW,
        GrowthLaw::Exponential,
    )
    .expect("classical fit");
    let quantum_fit = fit_growth(&run.otoc_avg, QUANTUM_CHAOTIC_WINDOW, GrowthLaw::Exponential)
        .expect("quantum fit");
    let ratio = quantum_fit.rate_or_exponent / classical_fit.rate_or_exponent;
    assert!(
        (0.7..=1.3).contains(&ratio),
        "quantum rate {:.3} not within 30% of classical {:.3}",
        quantum_fit.rate_or_exponent,
        classical_fit.rate_or_exponent
    );

    // chaotic divergence from the classical curve comes earlier than in the
    // integrable case (same hbar, same 10% band on the harmonics moment)
    let dense = dense_grid();
    let q_m2 = quantum_m2_avg(run, &dense);
    let c_m2 = classical_reference(run, &dense, true);
    let t_div_chaotic = divergence_time(&q_m2, &c_m2, 0.1, 0.2).unwrap_or(f64::INFINITY);
    let t_div_integrable = integrable_tracking_window_h8();

    assert!(
        t_div_chaotic < t_div_integrable,
        "chaotic divergence ({t_div_chaotic}) must precede integrable ({t_div_integrable})"
    );
    pass(
        "05 quantum chaotic",
        format!(
            "rate {:.3} vs classical {:.3} (ratio {:.2}), divergence {:.2} < {:.2}",
            quantum_fit.rate_or_exponent,
            classical_fit.rate_or_exponent,
            ratio,
            t_div_chaotic,
            t_div_integrable
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 6: spacing statistics
// ---------------------------------------------------------------------------

#[test]
fn acceptance_06_spacing_statistics() {
    // synthetic endpoint calibration
    let wigner = sample_wigner_spacings(20_000, derive_seed(SEED, 601));
    let (d_w, _) = delta_parameter(&wigner, DELTA_BINS, DELTA_S_MAX);
    assert!(d_w < 0.1, "synthetic Wigner delta {d_w}");
    let poisson = sample_poisson_spacings(20_000, derive_seed(SEED, 602));
    let (d_p, _) = delta_parameter(&poisson, DELTA_BINS, DELTA_S_MAX);
    assert!((d_p - 1.0).abs() < 0.1, "synthetic Poisson delta {d_p}");

    // model spectra across the crossover
    let sector = SymmetrySector::even_even_symmetric();
    let cfg = UnfoldConfig::default();
    let mut deltas = Vec::new();
    for &beta in &SCAN_BETAS {
        let params = ModelParams::quartic(beta).expect("params");
        let run = biquartic::pipeline::spectrum_run(
            &params,
            SPECTRUM_HBAR,
            SPECTRUM_N_MAX,
            SPECTRUM_BUMP,
            sector,
            &cfg,
        )
        .expect("spectrum run");
        deltas.push((beta, run.delta, run.n_levels));
    }
    let delta_of = |b: f64| deltas.iter().find(|(x, _, _)| *x == b).unwrap().1;
    assert!(delta_of(1.0) > 0.7, "delta(beta=1) = {}", delta_of(1.0));
    assert!(delta_of(0.1) < 0.3, "delta(beta=0.1) = {}", delta_of(0.1));
    for pair in deltas.windows(2) {
        assert!(
            pair[1].1 >= pair[0].1 - DELTA_TREND_SLACK,
            "delta trend violated: {:?} -> {:?}",
            pair[0],
            pair[1]
        );
    }
    assert!(
        delta_of(1.0) - delta_of(0.1) > 0.4,
        "overall rise too weak: {} -> {}",
        delta_of(0.1),
        delta_of(1.0)
    );
    // midpoint crossing of the trend
    let mid = 0.5 * (delta_of(0.1) + delta_of(1.0));
    let mut crossing = f64::NAN;
    for pair in deltas.windows(2) {
        let (b0, d0, _) = pair[0];
        let (b1, d1, _) = pair[1];
        if (d0 - mid) * (d1 - mid) <= 0.0 && d1 != d0 {
            crossing = b0 + (b1 - b0) * (mid - d0) / (d1 - d0);
            break;
        }
    }
    assert!(
        (0.15..=0.4).contains(&crossing),
        "midpoint crossing at beta = {crossing} outside [0.15, 0.4]; deltas {deltas:?}"
    );
    pass(
        "06 spacing statistics",
        format!(
            "synthetic ({d_w:.3}, {d_p:.3}); deltas {:?}; crossing {crossing:.3}",
            deltas
                .iter()
                .map(|(b, d, _)| format!("{b}:{d:.3}"))
                .collect::<Vec<_>>()
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 7: MQC protocol equivalence
// ---------------------------------------------------------------------------

#[test]
fn acceptance_07_mqc_equivalence() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(SEED, 701));
    let mut worst = 0.0f64;
    for case in 0..20 {
        let beta = rng.gen_range(0.2..1.0);
        let use_krylov = case % 4 == 0;
        // centers are kept mild so every draw's basis holds the coherent
        // tail; the Lanczos cases use the cheaper grid
        let hbar = if use_krylov || rng.gen_bool(0.5) { 0.5 } else { 0.25 };
        let n_max: u32 = if use_krylov { 14 } else { rng.gen_range(16..=20) };
        let t = rng.gen_range(0.4..2.0);
        let center = PhasePoint::new(
            [rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)],
            [rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)],
        );
        let params = ModelParams::quartic(beta).expect("params");
        let basis = FockBasis::new(hbar, n_max).expect("basis");
        let h = hamiltonian_matrix(&params, &basis);
        let p1 = operator_matrix(OperatorKind::Momentum(0), &basis);
        let engine = SpectralEngine::new(&h, &p1).expect("engine");
        let state0 = coherent_state(&center, &basis).expect("coherent prep");
        let krylov_spec = PropagatorSpec { tol: 1e-12, ..Default::default() };
        let prop = if use_krylov {
            Propagator::Krylov { h: &h, spec: krylov_spec }
        } else {
            Propagator::Spectral(&engine)
        };
        let grid = PhaseGrid::nyquist(n_max);
        let signals =
            echo_signal_grid(&state0, &prop, t, &grid, Parallelism::default()).expect("signals");
        let spectrum = extract_intensities(&signals, &grid, n_max).expect("intensities");
        let m2_protocol = m2_from_mqc(&spectrum, 1.0);
        let evolved = engine.evolve(&state0, t);
        let m2_direct = number_variance_m2(&evolved);
        let err = (m2_protocol - m2_direct).abs();
        worst = worst.max(err);
        assert!(
            err < 1e-8,
            "case {case} (beta={beta:.2}, hbar={hbar}, t={t:.2}, krylov={use_krylov}): \
             |{m2_protocol} - {m2_direct}| = {err:.2e}"
        );
    }
    pass("07 mqc equivalence", format!("20 configurations, worst error {worst:.2e}"));
}

// ---------------------------------------------------------------------------
// criterion 8: pure-state identity
// ---------------------------------------------------------------------------

#[test]
fn acceptance_08_pure_state_identity() {
    let basis = FockBasis::new(0.5, 12).expect("basis");
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let state = random_state(&basis, derive_seed(SEED, 800 + seed));
        let lhs = harmonics_distribution(&state).second_moment();
        let rhs = number_variance_m2(&state);
        let err = (lhs - rhs).abs();
        worst = worst.max(err);
        assert!(err < 1e-10, "seed {seed}: |{lhs} - {rhs}| = {err:.2e}");
    }
    pass("08 pure-state identity", format!("100 states, worst |diff| {worst:.2e}"));
}

// ---------------------------------------------------------------------------
// criterion 9: conservation suite
// ---------------------------------------------------------------------------

#[test]
fn acceptance_09_conservation() {
    let classical_drift = chaotic_classical()
        .max_drift
        .max(integrable_classical().max_drift);
    assert!(classical_drift < 1e-8, "classical drift {classical_drift:.2e}");

    let norm_drift = quantum_chaotic_h8()
        .max_norm_drift
        .max(quantum_integrable_h8().max_norm_drift);
    assert!(norm_drift < 1e-10, "spectral norm drift {norm_drift:.2e}");

    // the truncation-leakage proxy stays within the configured health bound
    // on every quantum acceptance run
    let leak = quantum_chaotic_h8()
        .max_leak
        .max(quantum_chaotic_h4().max_leak)
        .max(quantum_chaotic_h2().max_leak)
        .max(quantum_integrable_h8().max_leak);
    assert!(leak < 1e-2, "top-shell leakage {leak:.2e}");

    // a Krylov run on the chaotic model carries the stepping error budget
    let params = ModelParams::quartic(0.1).expect("params");
    let basis = FockBasis::new(0.25, 40).expect("basis");
    let h = hamiltonian_matrix(&params, &basis);
    let state = coherent_state(&PhasePoint::new([1.0, -0.6], [0.8, 0.4]), &basis).expect("state");
    let times: Vec<f64> = (1..=10).map(|i| 0.5 * i as f64).collect();
    let series = biquartic::quantum::m2_series(&state, &h, &times, &PropagatorSpec::default(), false)
        .expect("krylov m2");
    let krylov_norm_drift = series.meta.norm_drift.unwrap();
    let h_drift = series.meta.energy_expectation_drift.unwrap();
    assert!(krylov_norm_drift < 1e-10, "krylov norm drift {krylov_norm_drift:.2e}");
    assert!(h_drift < 1e-8, "krylov <H> drift {h_drift:.2e}");
    pass(
        "09 conservation",
        format!(
            "classical drift {classical_drift:.1e}, norm drift {:.1e}, krylov <H> drift {h_drift:.1e}",
            norm_drift.max(krylov_norm_drift)
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 10: saturation scaling
// ---------------------------------------------------------------------------

#[test]
fn acceptance_10_saturation_scaling() {
    let mut points = Vec::new();
    for run in [quantum_chaotic_h2(), quantum_chaotic_h4(), quantum_chaotic_h8()] {
        let sat = run
            .saturation
            .as_ref()
            .unwrap_or_else(|| panic!("no plateau at hbar = {}", run.hbar));
        points.push(((1.0 / run.hbar).ln(), sat.sat.ln()));
    }
    assert!(
        points[0].1 < points[1].1 && points[1].1 < points[2].1,
        "plateaus must rise with -ln hbar: {points:?}"
    );
    // linear fit slope in -ln hbar
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    assert!(slope > 0.0, "saturation slope {slope}");
    pass(
        "10 saturation scaling",
        format!(
            "ln-plateaus {:.3?}, slope {slope:.3} per ln(1/hbar)",
            points.iter().map(|p| p.1).collect::<Vec<_>>()
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 11: oracle equivalences
// ---------------------------------------------------------------------------

#[test]
fn acceptance_11_oracle_equivalences() {
    // (a) tangent map vs finite-difference trajectory pairs on shell points
    let params = ModelParams::quartic(0.1).expect("params");
    let centers = biquartic::classical::sample_shell(
        &params,
        &biquartic::classical::ShellSpec::new(E0, DE, 3, derive_seed(SEED, 1101)),
    )
    .expect("centers");
    let times = TimeGrid::linear(5.0, 10).build(1e-3);
    let mut worst_rel = 0.0f64;
    for center in &centers {
        let tv = TangentVector { dq: [1.0, 0.0], dp: [0.0, 0.0] };
        let tr = tangent_integrate(&params, center, tv, 1e-3, &times).expect("tangent");
        let d = 1e-7;
        let mut shifted = *center;
        shifted.q[0] += d;
        let tr_fd = integrate(&params, &shifted, 1e-3, &times).expect("fd pair");
        for i in 1..times.len() {
            let fd = (tr_fd.points[i].p[0] - tr.points[i].p[0]) / d;
            let exact = tr.tangents.as_ref().unwrap()[i].dp[0];
            let rel = (fd - exact).abs() / exact.abs().max(1e-9);
            worst_rel = worst_rel.max(rel);
            assert!(rel < 1e-4, "t={}: fd {fd} vs tangent {exact} (rel {rel:.2e})", times[i]);
        }
    }

    // (b) harmonics moment vs the histogram Fourier oracle at short times
    let params = ModelParams::quartic(1.0).expect("params");
    let center = PhasePoint::new([1.3, 0.9], [1.1, -1.2]);
    let hbar = 0.5;
    let tangent_ens = GaussianEnsemble::coherent_mirror(center, hbar, 24_000, derive_seed(SEED, 1102));
    let oracle_ens = GaussianEnsemble::coherent_mirror(center, hbar, 600_000, derive_seed(SEED, 1103));
    let times = [0.0, 1.0, 2.0, 3.0];
    let engine_series = classical_m2(&params, &tangent_ens, &times, &opts()).expect("tangent m2");
    let oracle = classical_m2_fourier_oracle(
        &params,
        &oracle_ens,
        &times,
        &OracleGrid::default(),
        2e-3,
    )
    .expect("oracle");
    let mut worst_pull = 0.0f64;
    for i in 0..times.len() {
        let a = engine_series.values[i];
        let b = oracle.m2.values[i];
        let se = engine_series.errors.as_ref().unwrap()[i].hypot(oracle.m2.errors.as_ref().unwrap()[i]);
        // 3 sigma statistical band plus a 2% allowance for histogram binning
        let band = 3.0 * se + 0.02 * a.abs();
        let pull = (a - b).abs() / band.max(1e-12);
        worst_pull = worst_pull.max(pull);
        assert!(
            (a - b).abs() <= band,
            "t={}: tangent {a:.4} vs oracle {b:.4} (band {band:.4})",
            times[i]
        );
    }
    pass(
        "11 oracle equivalences",
        format!("tangent-vs-fd worst rel {worst_rel:.2e}; m2-vs-oracle worst pull {worst_pull:.2}"),
    );
}

// suppress dead-code warnings for helpers only used by some criteria
#[allow(dead_code)]
fn _unused(_: &Arc<FockBasis>) {}
