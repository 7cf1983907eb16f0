//! Orchestration: turn a [`RunConfig`] into ensembles, engines, series,
//! fits, and files. The same helpers back the command-line tool and the
//! acceptance suite.

mod config;

pub use config::{
    ClassicalConfig, FitRequest, Mode, ModelConfig, MqcConfig, QuantumBackend, QuantumConfig,
    RunConfig, ShellConfig, SpectrumConfig,
};

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    auto_fit_window, fit_growth, log_average, saturation_velocity, GrowthFit, Saturation,
};
use crate::classical::{
    classical_m2_ensembles, classical_otoc, sample_shell, ClassicalOpts, GaussianEnsemble,
    ShellSpec,
};
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::fock::{hamiltonian_matrix, operator_matrix, FockBasis, OperatorKind, OperatorMatrix};
use crate::model::{ModelParams, PhasePoint};
use crate::mqc::{echo_signal_grid, extract_intensities, m2_from_mqc, PhaseGrid, Propagator};
use crate::output::{self, Provenance};
use crate::quantum::{
    coherent_state, eigensolve, number_variance_m2, EigenRange, SpectralEngine, StateVector,
};
use crate::series::TimeSeries;
use crate::stats::{
    delta_parameter, sector_eigenvalues, unfold, SpacingHistogram, SymmetrySector, UnfoldConfig,
    DELTA_BINS, DELTA_S_MAX,
};

/// splitmix64, used to derive independent per-job seeds from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sample shell centers and dress each one as a coherent-mirror Gaussian
/// ensemble with its own derived seed.
pub fn shell_gaussian_ensembles(
    params: &ModelParams,
    shell: &ShellConfig,
    hbar: f64,
    samples_per_ensemble: usize,
    master_seed: u64,
) -> Result<Vec<GaussianEnsemble>> {
    let spec = ShellSpec {
        e0: shell.e0,
        de: shell.de,
        n_centers: shell.n_centers,
        seed: derive_seed(master_seed, 0),
        bounds: shell.bounds,
    };
    let centers = sample_shell(params, &spec)?;
    Ok(centers
        .into_iter()
        .enumerate()
        .map(|(i, center)| {
            GaussianEnsemble::coherent_mirror(
                center,
                hbar,
                samples_per_ensemble,
                derive_seed(master_seed, 1 + i as u64),
            )
        })
        .collect())
}

/// Smallest occupation cutoff whose Poissonian tail beyond it stays below
/// `bound` for mean occupation `lambda`.
fn poisson_tail_cutoff(lambda: f64, bound: f64) -> u32 {
    if lambda <= 0.0 {
        return 0;
    }
    let mut log_p = -lambda; // ln P(0)
    let mut cdf = log_p.exp();
    let mut n = 0u32;
    while 1.0 - cdf > bound && n < 100_000 {
        n += 1;
        log_p += lambda.ln() - (n as f64).ln();
        cdf += log_p.exp();
    }
    n
}

/// Automatic per-mode cutoff: whichever is larger of
/// - the exact preparation requirement (coherent tails of the given centers
///   below the preparation bound), and
/// - the dynamical requirement (classical action reach of the shell plus a
///   width margin for quantum spreading).
pub fn auto_n_max(
    params: &ModelParams,
    hbar: f64,
    e0: f64,
    centers: &[PhasePoint],
    margin_sigmas: f64,
    extra: u32,
) -> u32 {
    let i_max = params.max_mode_action(0, e0).max(params.max_mode_action(1, e0));
    let n_base = i_max / hbar;
    let n_dyn = (n_base + margin_sigmas * n_base.sqrt()).ceil() as u32 + extra;
    let mut n_prep = 0u32;
    for c in centers {
        for k in 0..2 {
            let lambda = (c.q[k] * c.q[k] + c.p[k] * c.p[k]) / (2.0 * hbar);
            n_prep = n_prep.max(poisson_tail_cutoff(lambda, 0.2 * crate::quantum::COHERENT_TAIL_BOUND));
        }
    }
    n_dyn.max(n_prep + 2)
}

/// Coherent states at the ensemble centers on a shared basis.
pub fn coherent_states_at(
    basis: &Arc<FockBasis>,
    ensembles: &[GaussianEnsemble],
) -> Result<Vec<StateVector>> {
    ensembles
        .iter()
        .map(|e| coherent_state(&e.center, basis))
        .collect()
}

/// Everything a run produces in memory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: Mode,
    pub beta: f64,
    pub hbar: f64,
    pub fit: Option<GrowthFit>,
    pub saturation: Option<Saturation>,
    pub delta: Option<f64>,
    pub n_levels: Option<usize>,
    pub mqc_m2: Option<f64>,
    pub mqc_m2_direct: Option<f64>,
    pub max_energy_drift: Option<f64>,
    pub max_norm_drift: Option<f64>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

/// In-memory result of one run.
pub struct RunResult {
    pub summary: RunSummary,
    pub series: Vec<TimeSeries>,
    pub log_avg: Option<TimeSeries>,
    pub histogram: Option<SpacingHistogram>,
}

fn collect_drifts(series: &[TimeSeries]) -> (Option<f64>, Option<f64>) {
    let energy = series
        .iter()
        .filter_map(|s| s.meta.energy_drift)
        .fold(None, |a: Option<f64>, d| Some(a.map_or(d, |x| x.max(d))));
    let norm = series
        .iter()
        .filter_map(|s| s.meta.norm_drift)
        .fold(None, |a: Option<f64>, d| Some(a.map_or(d, |x| x.max(d))));
    (energy, norm)
}

/// Run a classical ensemble pipeline (OTOC or harmonics moment).
pub fn run_classical(cfg: &RunConfig, want_m2: bool) -> Result<RunResult> {
    let params = cfg.model.build()?;
    let shell = cfg.shell.as_ref().expect("validated");
    let grid = cfg.times.as_ref().expect("validated");
    let times = grid.build(cfg.classical.dt);
    let ensembles = shell_gaussian_ensembles(
        &params,
        shell,
        cfg.hbar,
        cfg.classical.samples_per_ensemble,
        cfg.seed,
    )?;
    let opts = ClassicalOpts {
        dt: cfg.classical.dt,
        drift_bound: cfg.classical.drift_bound,
        parallelism: Parallelism::default(),
        n_batches: 10,
    };
    let mut series = if want_m2 {
        classical_m2_ensembles(&params, &ensembles, &times, &opts)?
    } else {
        classical_otoc(&params, &ensembles, &times, &opts)?
    };
    if cfg.subtract_t0 {
        series = series.into_iter().map(TimeSeries::subtract_t0).collect();
    }
    let log_avg = log_average(&series)?;
    let fit = fit_from_request(&log_avg, cfg)?;
    let (energy_drift, norm_drift) = collect_drifts(&series);
    let provenance = Provenance::new(cfg.seed, &cfg.canonical_json());
    Ok(RunResult {
        summary: RunSummary {
            mode: cfg.mode,
            beta: cfg.model.beta,
            hbar: cfg.hbar,
            fit,
            saturation: None,
            delta: None,
            n_levels: None,
            mqc_m2: None,
            mqc_m2_direct: None,
            max_energy_drift: energy_drift,
            max_norm_drift: norm_drift,
            warnings: log_avg.meta.warnings.clone(),
            provenance,
        },
        series,
        log_avg: Some(log_avg),
        histogram: None,
    })
}

fn fit_from_request(log_avg: &TimeSeries, cfg: &RunConfig) -> Result<Option<GrowthFit>> {
    let Some(req) = &cfg.fit else {
        return Ok(None);
    };
    let window = match req.window {
        Some(w) => w,
        None => {
            let sat = saturation_velocity(log_avg).ok();
            auto_fit_window(log_avg, sat.as_ref())
        }
    };
    Ok(Some(fit_growth(log_avg, window, req.law)?))
}

/// Build the quantum machinery shared by the quantum pipelines.
pub struct QuantumSetup {
    pub params: ModelParams,
    pub basis: Arc<FockBasis>,
    pub hamiltonian: OperatorMatrix,
    pub momentum1: OperatorMatrix,
    pub engine: SpectralEngine,
    pub states: Vec<StateVector>,
    pub ensembles: Vec<GaussianEnsemble>,
}

/// Assemble basis, Hamiltonian, spectral engine, and coherent states for a
/// quantum shell run.
pub fn quantum_setup(cfg: &RunConfig) -> Result<QuantumSetup> {
    let params = cfg.model.build()?;
    let shell = cfg.shell.as_ref().expect("validated");
    let ensembles = shell_gaussian_ensembles(
        &params,
        shell,
        cfg.hbar,
        cfg.classical.samples_per_ensemble,
        cfg.seed,
    )?;
    let centers: Vec<PhasePoint> = ensembles.iter().map(|e| e.center).collect();
    let n_max = cfg.quantum.n_max.unwrap_or_else(|| {
        auto_n_max(
            &params,
            cfg.hbar,
            shell.e0,
            &centers,
            cfg.quantum.margin_sigmas,
            cfg.quantum.margin_extra,
        )
    });
    let basis = FockBasis::new(cfg.hbar, n_max)?;
    let hamiltonian = hamiltonian_matrix(&params, &basis);
    let momentum1 = operator_matrix(OperatorKind::Momentum(0), &basis);
    let engine = SpectralEngine::new(&hamiltonian, &momentum1)?;
    let states = coherent_states_at(&basis, &ensembles)?;
    Ok(QuantumSetup { params, basis, hamiltonian, momentum1, engine, states, ensembles })
}

/// Run a quantum ensemble pipeline (OTOC or harmonics moment) on the
/// spectral backend.
pub fn run_quantum(cfg: &RunConfig, want_m2: bool) -> Result<RunResult> {
    let setup = quantum_setup(cfg)?;
    let grid = cfg.times.as_ref().expect("validated");
    let times = grid.build(cfg.classical.dt);
    let times_pos: Vec<f64> = times.iter().copied().filter(|&t| t >= 0.0).collect();
    let mut series = if want_m2 {
        setup.engine.m2_batch(
            &setup.states,
            &times_pos,
            cfg.subtract_t0,
            Some(cfg.quantum.leak_bound),
        )?
    } else {
        // enforce the leakage bound on the same footing as the moment runs
        let leak = setup.engine.probe_leakage(&setup.states, &times_pos)?;
        if leak > cfg.quantum.leak_bound {
            return Err(Error::CutoffLeakage {
                population: leak,
                time: *times_pos.last().unwrap(),
                bound: cfg.quantum.leak_bound,
            });
        }
        setup.engine.otoc_batch(&setup.states, &times_pos)?
    };
    if cfg.subtract_t0 && !want_m2 {
        series = series.into_iter().map(TimeSeries::subtract_t0).collect();
    }
    let log_avg = log_average(&series)?;
    let saturation = saturation_velocity(&log_avg).ok();
    let fit = fit_from_request(&log_avg, cfg)?;
    let (energy_drift, norm_drift) = collect_drifts(&series);
    let provenance = Provenance::new(cfg.seed, &cfg.canonical_json());
    Ok(RunResult {
        summary: RunSummary {
            mode: cfg.mode,
            beta: cfg.model.beta,
            hbar: cfg.hbar,
            fit,
            saturation,
            delta: None,
            n_levels: None,
            mqc_m2: None,
            mqc_m2_direct: None,
            max_energy_drift: energy_drift,
            max_norm_drift: norm_drift,
            warnings: log_avg.meta.warnings.clone(),
            provenance,
        },
        series,
        log_avg: Some(log_avg),
        histogram: None,
    })
}

/// Converged sector spectrum with its chaos-distance parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub delta: f64,
    pub n_levels: usize,
    pub levels: Vec<f64>,
    pub spacings: Vec<f64>,
    pub histogram: SpacingHistogram,
    pub warnings: Vec<String>,
}

/// Diagonalize one symmetry sector at `n_max` and `n_max + bump`, keep the
/// prefix of levels stable between the two, unfold, and measure the distance
/// to the Wigner-Dyson distribution.
pub fn spectrum_run(
    params: &ModelParams,
    hbar: f64,
    n_max: u32,
    bump: u32,
    sector: SymmetrySector,
    unfold_cfg: &UnfoldConfig,
) -> Result<SpectrumResult> {
    let small = FockBasis::new(hbar, n_max)?;
    let large = FockBasis::new(hbar, n_max + bump)?;
    let ev_small = sector_eigenvalues(&hamiltonian_matrix(params, &small), sector)?;
    let ev_large = sector_eigenvalues(&hamiltonian_matrix(params, &large), sector)?;
    let mut levels = Vec::new();
    for (a, b) in ev_small.iter().zip(&ev_large) {
        if (a - b).abs() <= 1e-8 * b.abs().max(1.0) {
            levels.push(*b);
        } else {
            break;
        }
    }
    let mut warnings = Vec::new();
    if levels.len() < 100 {
        warnings.push(format!(
            "only {} converged levels; spacing statistics will be noisy",
            levels.len()
        ));
    }
    let spacings = unfold(&levels, unfold_cfg)?;
    let (delta, histogram) = delta_parameter(&spacings, DELTA_BINS, DELTA_S_MAX);
    if spacings.len() < 100 {
        warnings.push("fewer than 100 spacings".into());
    }
    Ok(SpectrumResult {
        delta,
        n_levels: levels.len(),
        levels,
        spacings,
        histogram,
        warnings,
    })
}

/// Run the spectrum mode from a config.
pub fn run_spectrum(cfg: &RunConfig) -> Result<RunResult> {
    let params = cfg.model.build()?;
    let spec = cfg.spectrum.as_ref().expect("validated");
    let result = spectrum_run(
        &params,
        cfg.hbar,
        spec.n_max,
        spec.n_max_bump,
        spec.sector,
        &spec.unfold,
    )?;
    let provenance = Provenance::new(cfg.seed, &cfg.canonical_json());
    Ok(RunResult {
        summary: RunSummary {
            mode: cfg.mode,
            beta: cfg.model.beta,
            hbar: cfg.hbar,
            fit: None,
            saturation: None,
            delta: Some(result.delta),
            n_levels: Some(result.n_levels),
            mqc_m2: None,
            mqc_m2_direct: None,
            max_energy_drift: None,
            max_norm_drift: None,
            warnings: result.warnings.clone(),
            provenance,
        },
        series: Vec::new(),
        log_avg: None,
        histogram: Some(result.histogram),
    })
}

/// MQC echo pipeline: signal grid, intensity extraction, and the moment
/// reconstruction checked against the directly evolved state.
pub struct MqcRunData {
    pub signals: Vec<Vec<f64>>,
    pub grid: PhaseGrid,
    pub intensities: crate::mqc::CoherenceSpectrum,
    pub m2: f64,
    pub m2_direct: f64,
}

pub fn mqc_run(cfg: &RunConfig) -> Result<MqcRunData> {
    let params = cfg.model.build()?;
    let spec = cfg.mqc.as_ref().expect("validated");
    let basis = FockBasis::new(cfg.hbar, spec.n_max)?;
    let h = hamiltonian_matrix(&params, &basis);
    let p1 = operator_matrix(OperatorKind::Momentum(0), &basis);
    let engine = SpectralEngine::new(&h, &p1)?;
    let center = PhasePoint::new([spec.center[0], spec.center[1]], [spec.center[2], spec.center[3]]);
    let state0 = coherent_state(&center, &basis)?;
    let prop = Propagator::Spectral(&engine);
    let grid = PhaseGrid::nyquist(spec.n_max);
    let signals = echo_signal_grid(&state0, &prop, spec.t, &grid, Parallelism::default())?;
    let intensities = extract_intensities(&signals, &grid, spec.n_max)?;
    let m2 = m2_from_mqc(&intensities, 1.0);
    let evolved = engine.evolve(&state0, spec.t);
    let m2_direct = number_variance_m2(&evolved);
    Ok(MqcRunData { signals, grid, intensities, m2, m2_direct })
}

pub fn run_mqc(cfg: &RunConfig) -> Result<RunResult> {
    let data = mqc_run(cfg)?;
    let provenance = Provenance::new(cfg.seed, &cfg.canonical_json());
    let mut warnings = Vec::new();
    if data.intensities.aliasing_warning {
        warnings.push("aliasing detected at the phase-grid fold boundary".into());
    }
    Ok(RunResult {
        summary: RunSummary {
            mode: cfg.mode,
            beta: cfg.model.beta,
            hbar: cfg.hbar,
            fit: None,
            saturation: None,
            delta: None,
            n_levels: None,
            mqc_m2: Some(data.m2),
            mqc_m2_direct: Some(data.m2_direct),
            max_energy_drift: None,
            max_norm_drift: None,
            warnings,
            provenance,
        },
        series: Vec::new(),
        log_avg: None,
        histogram: None,
    })
}

/// One row of the crossover scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub beta: f64,
    pub v_bar: f64,
    pub v_bar_normalized: f64,
    pub delta: f64,
    pub n_levels: usize,
}

/// Scan the coupling ratio: per beta, the quantum OTOC average velocity and
/// the spacing-statistics distance. Completed rows found in `out_dir` are
/// reused, so interrupted scans restart where they stopped.
pub fn run_scan(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<Vec<ScanRow>> {
    let spec = cfg.spectrum.as_ref().expect("validated");
    let mut raw = Vec::new();
    for &beta in &cfg.scan_betas {
        if let Some(dir) = out_dir {
            let marker = dir.join(format!("scan_beta_{beta:.4}.json"));
            if let Ok(text) = std::fs::read_to_string(&marker) {
                if let Ok(row) = serde_json::from_str::<ScanRow>(&text) {
                    raw.push(row);
                    continue;
                }
            }
        }
        let mut sub = cfg.clone();
        sub.mode = Mode::QuantumOtoc;
        sub.model.beta = beta;
        sub.model.potential_terms = None;
        sub.subtract_t0 = false;
        let quantum = run_quantum(&sub, false)?;
        let saturation = match quantum.summary.saturation {
            Some(s) => s,
            None => saturation_velocity(quantum.log_avg.as_ref().unwrap())?,
        };
        let params = sub.model.build()?;
        let spectrum = spectrum_run(
            &params,
            cfg.hbar,
            spec.n_max,
            spec.n_max_bump,
            spec.sector,
            &spec.unfold,
        )?;
        let row = ScanRow {
            beta,
            v_bar: saturation.v_bar,
            v_bar_normalized: 0.0,
            delta: spectrum.delta,
            n_levels: spectrum.n_levels,
        };
        if let Some(dir) = out_dir {
            output::write_json(&dir.join(format!("scan_beta_{beta:.4}.json")), &row)?;
        }
        raw.push(row);
    }
    let v_max = raw.iter().map(|r| r.v_bar).fold(f64::NEG_INFINITY, f64::max);
    for row in &mut raw {
        row.v_bar_normalized = row.v_bar / v_max;
    }
    Ok(raw)
}

/// Dispatch a full configured run and write its outputs.
pub fn run(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<RunSummary> {
    cfg.validate()?;
    let provenance = Provenance::new(cfg.seed, &cfg.canonical_json());
    match cfg.mode {
        Mode::ClassicalOtoc | Mode::ClassicalM2 | Mode::QuantumOtoc | Mode::QuantumM2 => {
            let want_m2 = matches!(cfg.mode, Mode::ClassicalM2 | Mode::QuantumM2);
            let quantum = matches!(cfg.mode, Mode::QuantumOtoc | Mode::QuantumM2);
            let result = if quantum {
                run_quantum(cfg, want_m2)?
            } else {
                run_classical(cfg, want_m2)?
            };
            if let Some(dir) = out_dir {
                let stem = mode_stem(cfg.mode);
                output::write_series_table(
                    &dir.join(format!("{stem}_ensembles.csv")),
                    &provenance,
                    &result.series,
                )?;
                let log_avg = result.log_avg.as_ref().unwrap();
                output::write_series(&dir.join(format!("{stem}_log_avg.csv")), &provenance, log_avg)?;
                let fits: Vec<GrowthFit> = result.summary.fit.clone().into_iter().collect();
                output::write_svg_chart(
                    &dir.join(format!("{stem}_log_avg.svg")),
                    stem,
                    &[("log average", log_avg)],
                    &fits,
                )?;
                output::write_json(&dir.join(format!("{stem}_summary.json")), &result.summary)?;
                if cfg.classical.dump_trajectory && !quantum {
                    dump_first_trajectory(cfg, dir, &provenance)?;
                }
            }
            Ok(result.summary)
        }
        Mode::Spectrum => {
            let result = run_spectrum(cfg)?;
            if let Some(dir) = out_dir {
                let hist = result.histogram.as_ref().unwrap();
                let rows = (0..hist.densities.len())
                    .map(|i| vec![hist.bin_mid(i), hist.densities[i]]);
                output::write_csv(
                    &dir.join("spacing_density.csv"),
                    &provenance,
                    &["s_bin_center", "p_of_s"],
                    rows,
                )?;
                output::write_json(&dir.join("spectrum_summary.json"), &result.summary)?;
            }
            Ok(result.summary)
        }
        Mode::Mqc => {
            let data = mqc_run(cfg)?;
            let result = run_mqc(cfg)?;
            if let Some(dir) = out_dir {
                let grid = &data.grid;
                let rows = (0..grid.n_phi[0]).flat_map(|j1| {
                    let signals = &data.signals;
                    (0..grid.n_phi[1]).map(move |j2| {
                        vec![grid.phase(0, j1), grid.phase(1, j2), signals[j1][j2]]
                    })
                });
                output::write_csv(
                    &dir.join("mqc_signals.csv"),
                    &provenance,
                    &["phi1", "phi2", "signal"],
                    rows,
                )?;
                let rows = data
                    .intensities
                    .intensities
                    .iter()
                    .map(|(&(m1, m2), &v)| vec![m1 as f64, m2 as f64, v]);
                output::write_csv(
                    &dir.join("mqc_intensities.csv"),
                    &provenance,
                    &["m1", "m2", "intensity"],
                    rows,
                )?;
                output::write_json(&dir.join("mqc_summary.json"), &result.summary)?;
            }
            Ok(result.summary)
        }
        Mode::Scan => {
            let rows = run_scan(cfg, out_dir)?;
            if let Some(dir) = out_dir {
                let csv_rows = rows
                    .iter()
                    .map(|r| vec![r.beta, r.v_bar_normalized, r.delta]);
                output::write_csv(
                    &dir.join("scan.csv"),
                    &provenance,
                    &["beta", "v_bar_normalized", "delta"],
                    csv_rows,
                )?;
                output::write_json(&dir.join("scan_summary.json"), &rows)?;
            }
            Ok(RunSummary {
                mode: cfg.mode,
                beta: cfg.model.beta,
                hbar: cfg.hbar,
                fit: None,
                saturation: None,
                delta: rows.last().map(|r| r.delta),
                n_levels: rows.last().map(|r| r.n_levels),
                mqc_m2: None,
                mqc_m2_direct: None,
                max_energy_drift: None,
                max_norm_drift: None,
                warnings: Vec::new(),
                provenance,
            })
        }
    }
}

fn mode_stem(mode: Mode) -> &'static str {
    match mode {
        Mode::ClassicalOtoc => "classical_otoc",
        Mode::QuantumOtoc => "quantum_otoc",
        Mode::ClassicalM2 => "classical_m2",
        Mode::QuantumM2 => "quantum_m2",
        Mode::Spectrum => "spectrum",
        Mode::Mqc => "mqc",
        Mode::Scan => "scan",
    }
}

fn dump_first_trajectory(cfg: &RunConfig, dir: &Path, provenance: &Provenance) -> Result<()> {
    let params = cfg.model.build()?;
    let shell = cfg.shell.as_ref().expect("validated");
    let ensembles = shell_gaussian_ensembles(&params, shell, cfg.hbar, 1, cfg.seed)?;
    let grid = cfg.times.as_ref().expect("validated");
    let times = grid.build(cfg.classical.dt);
    let tr = crate::classical::integrate(&params, &ensembles[0].center, cfg.classical.dt, &times)?;
    let rows = tr
        .times
        .iter()
        .zip(&tr.points)
        .map(|(&t, x)| vec![t, x.q[0], x.q[1], x.p[0], x.p[1]]);
    output::write_csv(
        &dir.join("trajectory.csv"),
        provenance,
        &["t", "q1", "q2", "p1", "p2"],
        rows,
    )
}

/// Eigensolve wrapper kept at pipeline level for CLI use.
pub fn full_spectrum(params: &ModelParams, hbar: f64, n_max: u32) -> Result<Vec<f64>> {
    let basis = FockBasis::new(hbar, n_max)?;
    let h = hamiltonian_matrix(params, &basis);
    Ok(eigensolve(&h, EigenRange::Full, false)?.0)
}
