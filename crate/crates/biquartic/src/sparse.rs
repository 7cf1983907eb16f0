//! Minimal complex CSR matrix: just enough for banded Fock-space operators
//! and the Lanczos propagator.

use num_complex::Complex64 as C64;

/// Compressed sparse row matrix over complex doubles.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    vals: Vec<C64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed, entries
    /// below `drop_tol` in magnitude are dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(u32, u32, C64)>, drop_tol: f64) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                // close out previous rows
                col_idx.push(c);
                vals.push(v);
                row_ptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        // prefix sums, then filter small entries row by row
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut f_row_ptr = vec![0usize; dim + 1];
        let mut f_cols = Vec::with_capacity(col_idx.len());
        let mut f_vals = Vec::with_capacity(vals.len());
        for r in 0..dim {
            for i in row_ptr[r]..row_ptr[r + 1] {
                if vals[i].norm() > drop_tol {
                    f_cols.push(col_idx[i]);
                    f_vals.push(vals[i]);
                }
            }
            f_row_ptr[r + 1] = f_cols.len();
        }
        Self {
            dim,
            row_ptr: f_row_ptr,
            col_idx: f_cols,
            vals: f_vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Row view as parallel (columns, values) slices.
    pub fn row(&self, r: usize) -> (&[u32], &[C64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.vals[span])
    }

    /// y = A x.
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[i] * x[self.col_idx[i] as usize];
            }
            y[r] = acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                triplets.push((*c, r as u32, v.conj()));
            }
        }
        CsrMatrix::from_triplets(self.dim, triplets, 0.0)
    }

    /// Largest entry-wise deviation from the conjugate transpose.
    pub fn hermiticity_residual(&self) -> f64 {
        let at = self.adjoint();
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            let (ca, va) = self.row(r);
            let (cb, vb) = at.row(r);
            // both column lists are sorted; merge-compare
            let (mut i, mut j) = (0, 0);
            while i < ca.len() || j < cb.len() {
                match (ca.get(i), cb.get(j)) {
                    (Some(&x), Some(&y)) if x == y => {
                        worst = worst.max((va[i] - vb[j]).norm());
                        i += 1;
                        j += 1;
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        worst = worst.max(va[i].norm());
                        i += 1;
                    }
                    (Some(_), Some(_)) => {
                        worst = worst.max(vb[j].norm());
                        j += 1;
                    }
                    (Some(_), None) => {
                        worst = worst.max(va[i].norm());
                        i += 1;
                    }
                    (None, Some(_)) => {
                        worst = worst.max(vb[j].norm());
                        j += 1;
                    }
                    (None, None) => break,
                }
            }
        }
        worst
    }

    /// (A + A^H)/2, making Hermiticity exact.
    pub fn symmetrized(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(2 * self.nnz());
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                triplets.push((r as u32, *c, 0.5 * v));
                triplets.push((*c, r as u32, 0.5 * v.conj()));
            }
        }
        CsrMatrix::from_triplets(self.dim, triplets, 0.0)
    }

    /// Dense copy (test and small-basis use only).
    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let mut m = vec![vec![C64::new(0.0, 0.0); self.dim]; self.dim];
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                m[r][*c as usize] = *v;
            }
        }
        m
    }

    /// Largest imaginary part over all entries.
    pub fn max_imag(&self) -> f64 {
        self.vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Iterate over stored entries as (row, col, value).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(c, v)| (r, *c as usize, *v))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = CsrMatrix::from_triplets(
            2,
            vec![
                (0, 1, c(1.0, 0.0)),
                (0, 1, c(2.0, 0.0)),
                (1, 0, c(3.0, 0.0)),
                (1, 1, c(0.0, 0.0)),
            ],
            1e-300,
        );
        assert_eq!(m.nnz(), 2);
        let y = m.apply(&[c(1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(y[0], c(3.0, 0.0));
        assert_eq!(y[1], c(3.0, 0.0));
    }

    #[test]
    fn hermiticity_and_symmetrization() {
        let m = CsrMatrix::from_triplets(
            2,
            vec![(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0)), (0, 0, c(2.0, 0.0))],
            0.0,
        );
        assert!(m.hermiticity_residual() < 1e-15);
        let skew = CsrMatrix::from_triplets(2, vec![(0, 1, c(1.0, 0.0))], 0.0);
        assert!((skew.hermiticity_residual() - 1.0).abs() < 1e-15);
        assert!(skew.symmetrized().hermiticity_residual() < 1e-15);
    }
}
