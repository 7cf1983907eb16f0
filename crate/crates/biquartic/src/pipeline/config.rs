//! Run configuration: a JSON document validated before any computation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classical::{BoxBounds, DEFAULT_DRIFT_BOUND, DEFAULT_DT};
use crate::error::{Error, Result};
use crate::model::{ModelParams, Monomial};
use crate::quantum::PropagatorSpec;
use crate::series::TimeGrid;
use crate::stats::{SymmetrySector, UnfoldConfig};

/// What the run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ClassicalOtoc,
    QuantumOtoc,
    ClassicalM2,
    QuantumM2,
    Spectrum,
    Mqc,
    Scan,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub beta: f64,
    #[serde(default = "default_coupling")]
    pub coupling: f64,
    /// Explicit monomials `c * q1^j q2^k`; omitted means the standard model.
    #[serde(default)]
    pub potential_terms: Option<Vec<Monomial>>,
}

fn default_coupling() -> f64 {
    0.5
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelParams> {
        match &self.potential_terms {
            Some(terms) => ModelParams::from_terms(self.beta, self.coupling, terms.clone()),
            None => ModelParams::with_coupling(self.beta, self.coupling),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShellConfig {
    pub e0: f64,
    pub de: f64,
    pub n_centers: usize,
    #[serde(default)]
    pub bounds: Option<BoxBounds>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalConfig {
    #[serde(default = "default_classical_dt")]
    pub dt: f64,
    #[serde(default = "default_samples")]
    pub samples_per_ensemble: usize,
    #[serde(default = "default_drift_bound")]
    pub drift_bound: f64,
    /// Write the first member's trajectory as CSV.
    #[serde(default)]
    pub dump_trajectory: bool,
}

fn default_classical_dt() -> f64 {
    DEFAULT_DT
}
fn default_samples() -> usize {
    400
}
fn default_drift_bound() -> f64 {
    DEFAULT_DRIFT_BOUND
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            samples_per_ensemble: 400,
            drift_bound: DEFAULT_DRIFT_BOUND,
            dump_trajectory: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantumBackend {
    /// Full diagonalization, exact on the truncated basis; best for
    /// ensembles sharing one Hamiltonian.
    Spectral,
    /// Short-iterative Lanczos stepping; best for very large bases.
    Krylov,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantumConfig {
    #[serde(default)]
    pub backend: Option<QuantumBackend>,
    /// Per-mode cutoff; omitted means automatic from the shell energy.
    #[serde(default)]
    pub n_max: Option<u32>,
    /// Tail-width multiplier of the automatic cutoff rule.
    #[serde(default = "default_margin_sigmas")]
    pub margin_sigmas: f64,
    /// Additive occupation margin of the automatic cutoff rule.
    #[serde(default = "default_margin_extra")]
    pub margin_extra: u32,
    /// Bound on the top-shell population during a run.
    #[serde(default = "default_leak_bound")]
    pub leak_bound: f64,
}

fn default_margin_sigmas() -> f64 {
    3.2
}
fn default_margin_extra() -> u32 {
    10
}
// The initial coherent states carry a broad upper energy tail in the quartic
// well, and its classically allowed action reach touches any affordable
// cutoff, so one part in 1e3 of top-shell population is normal physics at
// moderate hbar. The bound only flags genuinely undersized bases.
fn default_leak_bound() -> f64 {
    1e-2
}

impl Default for QuantumConfig {
    fn default() -> Self {
        Self {
            backend: None,
            n_max: None,
            margin_sigmas: default_margin_sigmas(),
            margin_extra: default_margin_extra(),
            leak_bound: default_leak_bound(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub n_max: u32,
    /// Enlargement used for the convergence check.
    #[serde(default = "default_bump")]
    pub n_max_bump: u32,
    #[serde(default = "default_sector")]
    pub sector: SymmetrySector,
    #[serde(default)]
    pub unfold: UnfoldConfig,
}

fn default_bump() -> u32 {
    10
}
fn default_sector() -> SymmetrySector {
    SymmetrySector::even_even_symmetric()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MqcConfig {
    /// Evolution time of the echo.
    pub t: f64,
    /// Initial coherent-state center.
    pub center: [f64; 4],
    pub n_max: u32,
    /// Rotate only the first mode and extract marginal intensities.
    #[serde(default)]
    pub single_mode: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitRequest {
    pub law: crate::analysis::GrowthLaw,
    #[serde(default)]
    pub window: Option<(f64, f64)>,
}

/// Top-level run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub model: ModelConfig,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default)]
    pub shell: Option<ShellConfig>,
    #[serde(default)]
    pub times: Option<TimeGrid>,
    #[serde(default = "PropagatorSpec::default")]
    pub propagator: PropagatorSpec,
    #[serde(default)]
    pub classical: ClassicalConfig,
    #[serde(default)]
    pub quantum: QuantumConfig,
    #[serde(default)]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default)]
    pub mqc: Option<MqcConfig>,
    #[serde(default)]
    pub scan_betas: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub subtract_t0: bool,
    #[serde(default)]
    pub fit: Option<FitRequest>,
}

fn default_hbar() -> f64 {
    0.125
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.hbar > 0.0) {
            return fail(format!("hbar must be positive, got {}", self.hbar));
        }
        self.model.build()?;
        if let Some(shell) = &self.shell {
            if !(shell.de > 0.0) || shell.n_centers == 0 {
                return fail("shell needs de > 0 and n_centers > 0".into());
            }
            if shell.de / shell.e0.abs().max(1e-12) > 0.1 {
                // tolerated, but flagged during the run
            }
        }
        if let Some(times) = &self.times {
            if !(times.t_max > 0.0) || times.n_samples < 2 {
                return fail("times need t_max > 0 and n_samples >= 2".into());
            }
        }
        if !(self.propagator.dt > 0.0)
            || self.propagator.krylov_dim < 2
            || !(self.propagator.tol > 0.0)
        {
            return fail("propagator needs dt > 0, krylov_dim >= 2, tol > 0".into());
        }
        if !(self.classical.dt > 0.0) || self.classical.samples_per_ensemble == 0 {
            return fail("classical needs dt > 0 and samples_per_ensemble > 0".into());
        }
        if !(self.quantum.leak_bound > 0.0) {
            return fail("quantum.leak_bound must be positive".into());
        }
        match self.mode {
            Mode::ClassicalOtoc | Mode::QuantumOtoc | Mode::ClassicalM2 | Mode::QuantumM2 => {
                if self.shell.is_none() || self.times.is_none() {
                    return fail(format!("mode {:?} needs `shell` and `times`", self.mode));
                }
            }
            Mode::Spectrum => {
                if self.spectrum.is_none() {
                    return fail("mode spectrum needs `spectrum`".into());
                }
            }
            Mode::Mqc => {
                if self.mqc.is_none() {
                    return fail("mode mqc needs `mqc`".into());
                }
            }
            Mode::Scan => {
                if self.scan_betas.is_empty() {
                    return fail("mode scan needs `scan_betas`".into());
                }
                if self.shell.is_none() || self.times.is_none() || self.spectrum.is_none() {
                    return fail("mode scan needs `shell`, `times`, and `spectrum`".into());
                }
            }
        }
        Ok(())
    }
}
