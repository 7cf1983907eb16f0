//! Error types shared across the toolkit.

use thiserror::Error;

/// Toolkit-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("relative energy drift {drift:.3e} exceeds bound {bound:.3e}; shrink dt")]
    EnergyDrift { drift: f64, bound: f64 },

    #[error("shell sampling failed after {attempts} rejections; enlarge the box or the shell width")]
    ShellSampling { attempts: u64 },

    #[error("ensemble center has vanishing action in mode {mode}; angle undefined")]
    DegenerateCenter { mode: usize },

    #[error("basis dimension {dim} exceeds the configured bound {max}")]
    BasisTooLarge { dim: usize, max: usize },

    #[error("coherent-state tail weight {tail:.3e} above {bound:.3e}; increase n_max")]
    CoherentTail { tail: f64, bound: f64 },

    #[error("cutoff leakage: top-shell population {population:.3e} at t={time:.3} exceeds {bound:.3e}; increase n_max")]
    CutoffLeakage { population: f64, time: f64, bound: f64 },

    #[error("Krylov propagation failed to reach tolerance at dt={dt:.3e}; shrink dt")]
    KrylovBreakdown { dt: f64 },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("symmetry sector is empty")]
    EmptySector,

    #[error("operator does not commute with the requested sector (off-block norm {norm:.3e})")]
    SectorMismatch { norm: f64 },

    #[error("fitted level staircase is non-monotone on the retained window; reduce the polynomial degree (got {degree})")]
    NonMonotoneUnfolding { degree: usize },

    #[error("too few data points for fit: {got} < {need}")]
    FitWindow { got: usize, need: usize },

    #[error("no saturation plateau detected (tail slope {tail_slope:.3e})")]
    NoPlateau { tail_slope: f64 },

    #[error("non-positive value {value:.3e} at t={time} cannot be log-averaged")]
    LogNonPositive { time: f64, value: f64 },

    #[error("time series do not share a common grid")]
    GridMismatch,

    #[error("phase grid with {n_phi} points per mode is below the Nyquist bound {need}")]
    GridBelowNyquist { n_phi: usize, need: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
