//! Ensemble log-averaging, growth-law fits, and saturation analysis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{SeriesMeta, TimeSeries};

/// Grid-agreement tolerance when combining series.
const GRID_TOL: f64 = 1e-9;

/// Average the logarithms of many series sharing one time grid:
/// `value(t) = mean_k ln v_k(t)`, returned with the log-space flag set.
///
/// A leading sample where any member vanishes (the t = 0 point of an OTOC)
/// is dropped; a non-positive value anywhere else is a hard error, since the
/// averaged quantities are positive by construction.
pub fn log_average(series: &[TimeSeries]) -> Result<TimeSeries> {
    let first = series.first().ok_or(Error::GridMismatch)?;
    for s in series {
        if !first.same_grid(s, GRID_TOL) {
            return Err(Error::GridMismatch);
        }
    }
    let mut times = first.times.clone();
    let mut start = 0usize;
    if series.iter().any(|s| s.values[0] <= 0.0) {
        start = 1;
        times.remove(0);
    }
    let mut values = Vec::with_capacity(times.len());
    for i in start..first.values.len() {
        let mut acc = 0.0;
        for s in series {
            let v = s.values[i];
            if v <= 0.0 {
                return Err(Error::LogNonPositive { time: s.times[i], value: v });
            }
            acc += v.ln();
        }
        values.push(acc / series.len() as f64);
    }
    let mut meta = SeriesMeta::labeled(format!("log_average({})", first.meta.label));
    meta.log_space = true;
    meta.ensemble_size = Some(series.len());
    meta.seed = first.meta.seed;
    if start == 1 {
        meta.warnings.push("dropped t=0 sample with vanishing values".into());
    }
    meta.energy_drift = series.iter().filter_map(|s| s.meta.energy_drift).fold(None, |a, d| {
        Some(a.map_or(d, |x: f64| x.max(d)))
    });
    meta.norm_drift = series.iter().filter_map(|s| s.meta.norm_drift).fold(None, |a, d| {
        Some(a.map_or(d, |x: f64| x.max(d)))
    });
    TimeSeries::new(times, values, meta)
}

/// Functional form of a growth fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthLaw {
    /// `v ~ exp(rate * t)`: regress ln v on t.
    Exponential,
    /// `v ~ t^exponent`: regress ln v on ln t.
    Power,
}

/// Least-squares growth fit over a time window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthFit {
    pub law: GrowthLaw,
    /// Exponential rate or power-law exponent, by `law`.
    pub rate_or_exponent: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub n_points: usize,
}

const MIN_FIT_POINTS: usize = 8;

/// Fit a growth law to a log-space series inside `window` (inclusive).
pub fn fit_growth(series: &TimeSeries, window: (f64, f64), law: GrowthLaw) -> Result<GrowthFit> {
    assert!(series.meta.log_space, "fit_growth expects a log-space series");
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in series.times.iter().zip(&series.values) {
        if t < window.0 - GRID_TOL || t > window.1 + GRID_TOL {
            continue;
        }
        let x = match law {
            GrowthLaw::Exponential => t,
            GrowthLaw::Power => {
                if t <= 0.0 {
                    continue;
                }
                t.ln()
            }
        };
        xs.push(x);
        ys.push(v);
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::FitWindow { got: xs.len(), need: MIN_FIT_POINTS });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(GrowthFit {
        law,
        rate_or_exponent: slope,
        intercept,
        window,
        r_squared,
        n_points: xs.len(),
    })
}

/// Saturation analysis of a (log-space) series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Saturation {
    /// Mean of the linear-space series over the tail window.
    pub sat: f64,
    /// First time the linear-space series reaches half the plateau.
    pub t_star: f64,
    /// `C(t_star) / t_star`.
    pub v_bar: f64,
    /// Fitted log-slope over the tail window (plateau check).
    pub tail_slope: f64,
}

/// Tail fraction (by time) used for the plateau estimate.
pub const SATURATION_TAIL_FRACTION: f64 = 0.2;
/// Largest tolerated log-slope per unit time over the tail.
pub const PLATEAU_SLOPE_BOUND: f64 = 0.01;

/// Detect the saturation plateau and the half-saturation crossing.
pub fn saturation_velocity(series: &TimeSeries) -> Result<Saturation> {
    let linear: Vec<f64> = if series.meta.log_space {
        series.values.iter().map(|v| v.exp()).collect()
    } else {
        series.values.clone()
    };
    let t_end = *series.times.last().ok_or(Error::GridMismatch)?;
    let t_tail = t_end - SATURATION_TAIL_FRACTION * (t_end - series.times[0]);
    let tail: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&linear)
        .filter(|(&t, _)| t >= t_tail)
        .map(|(&t, &v)| (t, v.max(1e-300).ln()))
        .collect();
    if tail.len() < 3 {
        return Err(Error::FitWindow { got: tail.len(), need: 3 });
    }
    let n = tail.len() as f64;
    let mx = tail.iter().map(|(t, _)| t).sum::<f64>() / n;
    let my = tail.iter().map(|(_, v)| v).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|(t, _)| (t - mx) * (t - mx)).sum();
    let sxy: f64 = tail.iter().map(|(t, v)| (t - mx) * (v - my)).sum();
    let tail_slope = sxy / sxx;
    if tail_slope.abs() > PLATEAU_SLOPE_BOUND {
        return Err(Error::NoPlateau { tail_slope });
    }
    let sat = series
        .times
        .iter()
        .zip(&linear)
        .filter(|(&t, _)| t >= t_tail)
        .map(|(_, &v)| v)
        .sum::<f64>()
        / tail.len() as f64;
    let (t_star, c_star) = series
        .times
        .iter()
        .zip(&linear)
        .find(|(&t, &v)| t > 0.0 && v >= 0.5 * sat)
        .map(|(&t, &v)| (t, v))
        .ok_or(Error::NoPlateau { tail_slope })?;
    Ok(Saturation { sat, t_star, v_bar: c_star / t_star, tail_slope })
}

/// First time (at or after `t_floor`) where two log-space series deviate by
/// more than `rel` in linear space; `None` if they track throughout.
pub fn divergence_time(
    a: &TimeSeries,
    b: &TimeSeries,
    rel: f64,
    t_floor: f64,
) -> Option<f64> {
    assert!(a.meta.log_space && b.meta.log_space);
    for ((&t, &va), &vb) in a.times.iter().zip(&a.values).zip(&b.values) {
        if t < t_floor {
            continue;
        }
        if ((va - vb).exp() - 1.0).abs() > rel {
            return Some(t);
        }
    }
    None
}

/// Automatic fit window: from the first time the series exceeds twice its
/// initial value to the half-saturation time (or the grid end when the
/// series never saturates).
pub fn auto_fit_window(series: &TimeSeries, saturation: Option<&Saturation>) -> (f64, f64) {
    assert!(series.meta.log_space);
    let l0 = series.values[0];
    let t_a = series
        .times
        .iter()
        .zip(&series.values)
        .find(|(_, &v)| v > l0 + std::f64::consts::LN_2)
        .map(|(&t, _)| t)
        .unwrap_or(series.times[0]);
    let t_b = saturation
        .map(|s| s.t_star)
        .unwrap_or_else(|| *series.times.last().unwrap());
    (t_a, t_b)
}
