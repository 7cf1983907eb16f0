//! Dense linear algebra helpers.
//!
//! Everything runs through faer with `Par::Seq` pinned explicitly: results
//! must be byte-identical regardless of the job-pool width chosen for the
//! ensemble loops, so the dense kernels themselves stay sequential.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};

use crate::error::{Error, Result};

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

/// Full eigendecomposition of a real symmetric matrix.
pub fn eigh(a: &Mat<f64>) -> Result<SymmetricEigen> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigh needs a square matrix");
    let mut s = Diag::<f64>::zeros(n);
    let mut u = Mat::<f64>::zeros(n, n);
    let mut mem = MemBuffer::new(evd::self_adjoint_evd_scratch::<f64>(
        n,
        ComputeEigenvectors::Yes,
        Par::Seq,
        Default::default(),
    ));
    evd::self_adjoint_evd(
        a.as_ref(),
        s.as_mut(),
        Some(u.as_mut()),
        Par::Seq,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values: Vec<f64> = (0..n).map(|i| s[i]).collect();
    debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
    Ok(SymmetricEigen { values, vectors: u })
}

/// Eigenvalues only (ascending) of a real symmetric matrix.
pub fn eigvalsh(a: &Mat<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigvalsh needs a square matrix");
    let mut s = Diag::<f64>::zeros(n);
    let mut mem = MemBuffer::new(evd::self_adjoint_evd_scratch::<f64>(
        n,
        ComputeEigenvectors::No,
        Par::Seq,
        Default::default(),
    ));
    evd::self_adjoint_evd(
        a.as_ref(),
        s.as_mut(),
        None,
        Par::Seq,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok((0..n).map(|i| s[i]).collect())
}

/// `dst = a * b`.
pub fn gemm(dst: &mut Mat<f64>, a: &Mat<f64>, b: &Mat<f64>) {
    matmul(dst.as_mut(), Accum::Replace, a.as_ref(), b.as_ref(), 1.0, Par::Seq);
}

/// `a^T * b` as a fresh matrix.
pub fn gemm_tn(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    let mut dst = Mat::zeros(a.ncols(), b.ncols());
    gemm_tn_into(&mut dst, a, b);
    dst
}

/// `dst = a^T * b`.
pub fn gemm_tn_into(dst: &mut Mat<f64>, a: &Mat<f64>, b: &Mat<f64>) {
    matmul(
        dst.as_mut(),
        Accum::Replace,
        a.transpose(),
        b.as_ref(),
        1.0,
        Par::Seq,
    );
}

/// Solve the small symmetric positive-definite system `m x = rhs` in place
/// (Gaussian elimination with partial pivoting; used for polynomial fits).
pub fn solve_small(m: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>) -> Result<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let (pivot, pmax) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if pmax < 1e-300 {
            return Err(Error::Eigen("singular normal equations".into()));
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in r + 1..n {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    Ok(x)
}
