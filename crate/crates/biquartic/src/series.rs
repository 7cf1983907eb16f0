//! Time-series record shared by all engines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance and diagnostics attached to a series.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub label: String,
    pub seed: Option<u64>,
    pub ensemble_size: Option<usize>,
    /// Values are natural logs of the underlying quantity.
    pub log_space: bool,
    /// Value removed from every point by the subtract-t0 convention.
    pub subtracted_t0: Option<f64>,
    /// Largest relative energy drift seen while producing the series.
    pub energy_drift: Option<f64>,
    /// Largest norm deviation from 1 seen during quantum propagation.
    pub norm_drift: Option<f64>,
    /// Relative drift of the Hamiltonian expectation value.
    pub energy_expectation_drift: Option<f64>,
    pub warnings: Vec<String>,
}

impl SeriesMeta {
    pub fn labeled(label: impl Into<String>) -> Self {
        Self { label: label.into(), ..Self::default() }
    }
}

/// Ordered (time, value) samples with optional per-point standard errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Option<Vec<f64>>,
    pub meta: SeriesMeta,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, meta: SeriesMeta) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::GridMismatch);
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { times, values, errors: None, meta })
    }

    pub fn with_errors(mut self, errors: Vec<f64>) -> Result<Self> {
        if errors.len() != self.times.len() {
            return Err(Error::GridMismatch);
        }
        self.errors = Some(errors);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Subtract the first value from every point (records it in the meta).
    pub fn subtract_t0(mut self) -> Self {
        if let Some(&v0) = self.values.first() {
            for v in &mut self.values {
                *v -= v0;
            }
            self.meta.subtracted_t0 = Some(v0);
        }
        self
    }

    /// Keep only samples with `t_a <= t <= t_b`.
    pub fn restrict(&self, t_a: f64, t_b: f64) -> Self {
        let keep: Vec<usize> = self
            .times
            .iter()
            .enumerate()
            .filter(|(_, &t)| t >= t_a && t <= t_b)
            .map(|(i, _)| i)
            .collect();
        Self {
            times: keep.iter().map(|&i| self.times[i]).collect(),
            values: keep.iter().map(|&i| self.values[i]).collect(),
            errors: self
                .errors
                .as_ref()
                .map(|e| keep.iter().map(|&i| e[i]).collect()),
            meta: self.meta.clone(),
        }
    }

    /// True when both series share the same time grid to within `tol`.
    pub fn same_grid(&self, other: &Self, tol: f64) -> bool {
        self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Sample-time grid specification: `n` points over `[t_min, t_max]`, linear
/// or logarithmic. Times are snapped to multiples of the integrator step so
/// the classical and quantum engines can share grids exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_samples: usize,
    #[serde(default)]
    pub log_spaced: bool,
    /// First sample time; defaults to 0 for linear grids and to a small
    /// positive time for logarithmic ones.
    #[serde(default)]
    pub t_min: Option<f64>,
}

impl TimeGrid {
    pub fn linear(t_max: f64, n_samples: usize) -> Self {
        Self { t_max, n_samples, log_spaced: false, t_min: None }
    }

    pub fn logarithmic(t_max: f64, n_samples: usize) -> Self {
        Self { t_max, n_samples, log_spaced: true, t_min: None }
    }

    pub fn starting_at(mut self, t_min: f64) -> Self {
        self.t_min = Some(t_min);
        self
    }

    /// Materialize the grid, snapping each time to a multiple of `dt` and
    /// removing duplicates. Log grids keep a leading t = 0 sample so the
    /// subtract-t0 convention has its reference point.
    pub fn build(&self, dt: f64) -> Vec<f64> {
        let mut times = Vec::with_capacity(self.n_samples + 1);
        if self.log_spaced {
            let t_min = self
                .t_min
                .unwrap_or((10.0 * dt).min(self.t_max / 10.0))
                .max(dt);
            let ratio = (self.t_max / t_min).ln();
            times.push(0.0);
            for i in 0..self.n_samples {
                let f = i as f64 / (self.n_samples - 1).max(1) as f64;
                times.push(t_min * (ratio * f).exp());
            }
        } else {
            let t_min = self.t_min.unwrap_or(0.0);
            for i in 0..=self.n_samples {
                times.push(t_min + (self.t_max - t_min) * i as f64 / self.n_samples as f64);
            }
        }
        let mut snapped: Vec<f64> = times
            .iter()
            .map(|t| (t / dt).round() * dt)
            .collect();
        snapped.dedup_by(|a, b| (*a - *b).abs() < 0.5 * dt);
        snapped
    }
}
