//! Level-spacing statistics: symmetry-resolved spectra, unfolding, the
//! nearest-neighbor spacing distribution, and the chaos-distance parameter.
//!
//! Meaningful spacing statistics require desymmetrization: the default model
//! conserves the parity of each mode's occupation number and is symmetric
//! under mode exchange, so pooled spectra pile up uncorrelated levels and
//! fake Poisson statistics. Spectra here are computed inside one irreducible
//! sector (even-even exchange-symmetric by default).

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::OperatorMatrix;
use crate::linalg;

/// Parity label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn matches(self, n: u32) -> bool {
        (n % 2 == 0) == (self == Parity::Even)
    }
}

/// One irreducible symmetry sector of the two-mode model: per-mode occupation
/// parity (the Fock-space image of `q_k -> -q_k`), optionally resolved under
/// mode exchange. Exchange only combines with equal parities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetrySector {
    pub parity1: Parity,
    pub parity2: Parity,
    pub exchange: Option<Parity>,
}

impl SymmetrySector {
    pub fn new(parity1: Parity, parity2: Parity, exchange: Option<Parity>) -> Result<Self> {
        if exchange.is_some() && parity1 != parity2 {
            return Err(Error::InvalidConfig(
                "exchange symmetry only combines with equal mode parities".into(),
            ));
        }
        Ok(Self { parity1, parity2, exchange })
    }

    /// The default sector for spacing statistics.
    pub fn even_even_symmetric() -> Self {
        Self { parity1: Parity::Even, parity2: Parity::Even, exchange: Some(Parity::Even) }
    }

    /// The four parity-only sectors.
    pub fn parity_sectors() -> [Self; 4] {
        use Parity::*;
        [
            Self { parity1: Even, parity2: Even, exchange: None },
            Self { parity1: Even, parity2: Odd, exchange: None },
            Self { parity1: Odd, parity2: Even, exchange: None },
            Self { parity1: Odd, parity2: Odd, exchange: None },
        ]
    }
}

/// Symmetry-adapted basis: each vector is one or two Fock states with
/// coefficients.
pub struct SectorTransform {
    pub sector: SymmetrySector,
    dim_full: usize,
    /// (state index, coefficient) entries per sector vector.
    vectors: Vec<Vec<(usize, f64)>>,
    /// state index -> (sector vector, coefficient), for fast projection
    membership: Vec<Option<(usize, f64)>>,
}

impl SectorTransform {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// Build the symmetry-adapted basis of a sector.
pub fn sector_project(
    basis: &crate::fock::FockBasis,
    sector: SymmetrySector,
) -> Result<SectorTransform> {
    let l = basis.per_mode() as u32;
    let mut vectors = Vec::new();
    let mut membership = vec![None; basis.dim()];
    for n1 in 0..l {
        if !sector.parity1.matches(n1) {
            continue;
        }
        for n2 in 0..l {
            if !sector.parity2.matches(n2) {
                continue;
            }
            let idx = basis.index(n1, n2);
            match sector.exchange {
                None => {
                    membership[idx] = Some((vectors.len(), 1.0));
                    vectors.push(vec![(idx, 1.0)]);
                }
                Some(Parity::Even) => {
                    if n1 < n2 {
                        let partner = basis.index(n2, n1);
                        let c = std::f64::consts::FRAC_1_SQRT_2;
                        membership[idx] = Some((vectors.len(), c));
                        membership[partner] = Some((vectors.len(), c));
                        vectors.push(vec![(idx, c), (partner, c)]);
                    } else if n1 == n2 {
                        membership[idx] = Some((vectors.len(), 1.0));
                        vectors.push(vec![(idx, 1.0)]);
                    }
                }
                Some(Parity::Odd) => {
                    if n1 < n2 {
                        let partner = basis.index(n2, n1);
                        let c = std::f64::consts::FRAC_1_SQRT_2;
                        membership[idx] = Some((vectors.len(), c));
                        membership[partner] = Some((vectors.len(), -c));
                        vectors.push(vec![(idx, c), (partner, -c)]);
                    }
                }
            }
        }
    }
    if vectors.is_empty() {
        return Err(Error::EmptySector);
    }
    Ok(SectorTransform { sector, dim_full: basis.dim(), vectors, membership })
}

/// Frobenius norm of the block of `h` connecting the sector to its
/// complement; zero when the operator respects the sector.
pub fn off_sector_norm(h: &OperatorMatrix, transform: &SectorTransform) -> f64 {
    assert_eq!(h.dim(), transform.dim_full);
    let mut acc = 0.0;
    for vec in &transform.vectors {
        // y = H phi, phi supported on <= 2 states
        let mut y: Vec<(usize, f64)> = Vec::new();
        for &(idx, coef) in vec {
            let (cols, vals) = h.matrix.row(idx);
            for (c, v) in cols.iter().zip(vals) {
                y.push((*c as usize, coef * v.re));
            }
        }
        for (i, v) in y {
            let inside = transform.membership[i].is_some();
            if !inside {
                acc += v * v;
            }
        }
    }
    acc.sqrt()
}

/// Project a real Hermitian operator onto the sector as a dense matrix.
pub fn project_operator(h: &OperatorMatrix, transform: &SectorTransform) -> Result<Mat<f64>> {
    assert_eq!(h.dim(), transform.dim_full);
    if h.matrix.max_imag() > 1e-10 {
        return Err(Error::Eigen("sector projection needs a real operator".into()));
    }
    let d = transform.dim();
    let mut out = Mat::zeros(d, d);
    for (b, vec) in transform.vectors.iter().enumerate() {
        for &(idx, coef) in vec {
            let (cols, vals) = h.matrix.row(idx);
            for (c, v) in cols.iter().zip(vals) {
                if let Some((a, ca)) = transform.membership[*c as usize] {
                    out[(a, b)] += ca * coef * v.re;
                }
            }
        }
    }
    // numerical symmetrization of rounding-level asymmetry
    for a in 0..d {
        for b in a + 1..d {
            let m = 0.5 * (out[(a, b)] + out[(b, a)]);
            out[(a, b)] = m;
            out[(b, a)] = m;
        }
    }
    Ok(out)
}

/// Eigenvalues of the sector block of `h`, ascending.
pub fn sector_eigenvalues(h: &OperatorMatrix, sector: SymmetrySector) -> Result<Vec<f64>> {
    let transform = sector_project(&h.basis, sector)?;
    let norm = off_sector_norm(h, &transform);
    if norm > 1e-10 {
        return Err(Error::SectorMismatch { norm });
    }
    let block = project_operator(h, &transform)?;
    linalg::eigvalsh(&block)
}

/// Unfolding configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct UnfoldConfig {
    pub poly_degree: usize,
    /// Fraction of levels discarded at each spectral edge.
    pub trim_fraction: f64,
}

impl Default for UnfoldConfig {
    fn default() -> Self {
        Self { poly_degree: 7, trim_fraction: 0.05 }
    }
}

/// Rescale a spectrum so the local mean spacing is one: fit the cumulative
/// staircase with a polynomial in the (affinely normalized) energy and take
/// differences of the fitted counting function at consecutive levels.
pub fn unfold(eigenvalues: &[f64], cfg: &UnfoldConfig) -> Result<Vec<f64>> {
    let mut levels = eigenvalues.to_vec();
    levels.sort_by(f64::total_cmp);
    let n = levels.len();
    let min_needed = 4 * (cfg.poly_degree + 1);
    if n < min_needed {
        return Err(Error::FitWindow { got: n, need: min_needed });
    }
    let trim = ((n as f64) * cfg.trim_fraction).floor() as usize;
    let kept = &levels[trim..n - trim];
    let m = kept.len();
    let (lo, hi) = (kept[0], kept[m - 1]);
    let scale = (hi - lo).max(1e-300);
    let xi = |e: f64| 2.0 * (e - lo) / scale - 1.0;

    // least squares on a Legendre basis (well conditioned on [-1, 1])
    let deg = cfg.poly_degree;
    let legendre = |x: f64| {
        let mut p = vec![0.0; deg + 1];
        p[0] = 1.0;
        if deg >= 1 {
            p[1] = x;
        }
        for k in 2..=deg {
            p[k] = ((2 * k - 1) as f64 * x * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64;
        }
        p
    };
    let mut normal = vec![vec![0.0; deg + 1]; deg + 1];
    let mut rhs = vec![0.0; deg + 1];
    for (i, &e) in kept.iter().enumerate() {
        let p = legendre(xi(e));
        let target = i as f64 + 0.5;
        for a in 0..=deg {
            rhs[a] += p[a] * target;
            for b in 0..=deg {
                normal[a][b] += p[a] * p[b];
            }
        }
    }
    let coef = linalg::solve_small(&mut normal, &mut rhs)?;
    let smooth = |e: f64| -> f64 {
        let p = legendre(xi(e));
        p.iter().zip(&coef).map(|(a, b)| a * b).sum()
    };
    let staircase: Vec<f64> = kept.iter().map(|&e| smooth(e)).collect();
    if staircase.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonMonotoneUnfolding { degree: deg });
    }
    Ok(staircase.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Wigner-Dyson (GOE surmise) spacing density.
pub fn wigner_dyson_density(s: f64) -> f64 {
    use std::f64::consts::PI;
    0.5 * PI * s * (-0.25 * PI * s * s).exp()
}

/// Poisson spacing density.
pub fn poisson_density(s: f64) -> f64 {
    (-s).exp()
}

/// Nearest-neighbor spacing histogram normalized to unit mass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpacingHistogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub n_spacings: usize,
}

impl SpacingHistogram {
    pub fn from_spacings(spacings: &[f64], bins: usize, s_max: f64) -> Self {
        let ds = s_max / bins as f64;
        let mut counts = vec![0usize; bins];
        let mut n_in = 0usize;
        for &s in spacings {
            if s >= 0.0 && s < s_max {
                counts[(s / ds) as usize] += 1;
                n_in += 1;
            }
        }
        // normalize over the histogram window so the density has unit mass
        let densities = counts
            .iter()
            .map(|&c| c as f64 / (n_in.max(1) as f64 * ds))
            .collect();
        let bin_edges = (0..=bins).map(|i| i as f64 * ds).collect();
        Self { bin_edges, densities, n_spacings: spacings.len() }
    }

    pub fn bin_mid(&self, i: usize) -> f64 {
        0.5 * (self.bin_edges[i] + self.bin_edges[i + 1])
    }
}

/// Histogram discretization for the distance parameter; fixed so results are
/// bit-reproducible.
pub const DELTA_BINS: usize = 60;
pub const DELTA_S_MAX: f64 = 6.0;

/// Distance of the spacing distribution from Wigner-Dyson, normalized by the
/// Poisson to Wigner-Dyson distance: 0 is Wigner-Dyson, 1 is Poisson.
/// Computed by the midpoint rule on the shared histogram grid.
pub fn delta_parameter(spacings: &[f64], bins: usize, s_max: f64) -> (f64, SpacingHistogram) {
    let hist = SpacingHistogram::from_spacings(spacings, bins, s_max);
    let ds = s_max / bins as f64;
    let mut top = 0.0;
    let mut bottom = 0.0;
    for i in 0..bins {
        let s = hist.bin_mid(i);
        top += (hist.densities[i] - wigner_dyson_density(s)).abs() * ds;
        bottom += (poisson_density(s) - wigner_dyson_density(s)).abs() * ds;
    }
    (top / bottom, hist)
}

/// i.i.d. spacings drawn from the Wigner surmise (synthetic GOE-like data).
pub fn sample_wigner_spacings(n: usize, seed: u64) -> Vec<f64> {
    use std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(0.0..1.0);
            (-(4.0 / PI) * (1.0 - u).ln()).sqrt()
        })
        .collect()
}

/// i.i.d. exponential spacings (synthetic Poisson data).
pub fn sample_poisson_spacings(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| -(1.0 - rng.gen_range(0.0..1.0f64)).ln()).collect()
}
