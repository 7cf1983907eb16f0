//! File outputs: CSV tables with a provenance header, JSON run summaries,
//! and minimal SVG line charts of log-averaged series.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::GrowthFit;
use crate::error::Result;
use crate::series::TimeSeries;

/// Provenance stamped on every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(seed: u64, config_json: &str) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_hash: format!("{:016x}", fnv1a(config_json.as_bytes())),
        }
    }

    fn header_lines(&self) -> String {
        format!(
            "# biquartic {}\n# config_hash={} seed={}\n",
            self.version, self.config_hash, self.seed
        )
    }
}

/// 64-bit FNV-1a, enough to fingerprint a canonical config string.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Write a CSV table; floats use shortest round-trip formatting.
pub fn write_csv(
    path: &Path,
    provenance: &Provenance,
    headers: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<()> {
    let mut out = provenance.header_lines();
    out.push_str(&headers.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
            first = false;
        }
        out.push('\n');
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, out)?;
    Ok(())
}

/// One column per series on the shared grid: `t, s0, s1, ...`.
pub fn write_series_table(path: &Path, provenance: &Provenance, series: &[TimeSeries]) -> Result<()> {
    let first = &series[0];
    let mut headers: Vec<String> = vec!["t".into()];
    headers.extend((0..series.len()).map(|i| format!("s{i}")));
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let rows = (0..first.times.len()).map(|i| {
        let mut row = Vec::with_capacity(series.len() + 1);
        row.push(first.times[i]);
        for s in series {
            row.push(s.values[i]);
        }
        row
    });
    write_csv(path, provenance, &header_refs, rows)
}

/// Single `t,value` series.
pub fn write_series(path: &Path, provenance: &Provenance, series: &TimeSeries) -> Result<()> {
    let rows = series
        .times
        .iter()
        .zip(&series.values)
        .map(|(&t, &v)| vec![t, v]);
    write_csv(path, provenance, &["t", "value"], rows)
}

/// Pretty-printed JSON summary next to the CSVs.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// A minimal SVG polyline chart of one or more series (log-averaged curves),
/// with optional straight guide lines for fitted growth laws.
pub fn write_svg_chart(
    path: &Path,
    title: &str,
    series: &[(&str, &TimeSeries)],
    fits: &[GrowthFit],
) -> Result<()> {
    const W: f64 = 760.0;
    const H: f64 = 480.0;
    const ML: f64 = 60.0;
    const MB: f64 = 40.0;
    const MT: f64 = 30.0;
    const MR: f64 = 20.0;
    let (mut t_min, mut t_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut v_min, mut v_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, s) in series {
        for (&t, &v) in s.times.iter().zip(&s.values) {
            t_min = t_min.min(t);
            t_max = t_max.max(t);
            v_min = v_min.min(v);
            v_max = v_max.max(v);
        }
    }
    if !(t_min.is_finite() && v_min.is_finite()) || t_max <= t_min || v_max <= v_min {
        v_min = 0.0;
        v_max = 1.0;
        t_min = 0.0;
        t_max = 1.0;
    }
    let sx = |t: f64| ML + (t - t_min) / (t_max - t_min) * (W - ML - MR);
    let sy = |v: f64| H - MB - (v - v_min) / (v_max - v_min) * (H - MB - MT);
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];
    let mut svg = String::new();
    write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\
         <text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>",
        ML
    )
    .unwrap();
    // axes
    write!(
        svg,
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\
         <line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>",
        H - MB,
        W - MR,
        H - MB,
        H - MB
    )
    .unwrap();
    for (i, (name, s)) in series.iter().enumerate() {
        let color = palette[i % palette.len()];
        let mut points = String::new();
        for (&t, &v) in s.times.iter().zip(&s.values) {
            write!(points, "{:.2},{:.2} ", sx(t), sy(v)).unwrap();
        }
        write!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{points}\"/>\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{name}</text>",
            W - MR - 150.0,
            MT + 16.0 * (i as f64 + 1.0),
        )
        .unwrap();
    }
    for fit in fits {
        let (a, b) = fit.window;
        let f = |t: f64| fit.intercept + fit.rate_or_exponent * t;
        write!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-dasharray=\"6,4\"/>",
            sx(a),
            sy(f(a)),
            sx(b),
            sy(f(b))
        )
        .unwrap();
    }
    svg.push_str("</svg>");
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SeriesMeta;

    #[test]
    fn csv_round_trips_doubles_exactly() {
        let dir = std::env::temp_dir().join("biquartic_output_test");
        let path = dir.join("series.csv");
        let prov = Provenance::new(7, "{}");
        let series = TimeSeries::new(
            vec![0.0, 0.1, 0.2],
            vec![1.0 / 3.0, 2.0_f64.sqrt(), 1e-17],
            SeriesMeta::default(),
        )
        .unwrap();
        write_series(&path, &prov, &series).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# biquartic"));
        let data_line = text.lines().nth(3).unwrap();
        let v: f64 = data_line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, 1.0 / 3.0);
    }

    #[test]
    fn fnv_hash_is_stable() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
    }
}
