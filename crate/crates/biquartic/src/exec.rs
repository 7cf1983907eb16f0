//! Execution policy for the embarrassingly parallel loops (ensemble members,
//! phase-grid points, scan entries).
//!
//! Every reduction in the toolkit is written against index-addressed output
//! slots, so results are bit-identical no matter how the work is scheduled.
//! The `parallel` feature provides the rayon path; without it everything runs
//! on the calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How to schedule independent jobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    /// Run on the calling thread in index order.
    Sequential,
    /// Fan out over the global rayon pool.
    #[cfg(feature = "parallel")]
    Rayon,
}

impl Default for Parallelism {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        Parallelism::Rayon
    }
    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        Parallelism::Sequential
    }
}

/// Map `f` over `0..n`, collecting results in index order.
pub fn map_indexed<R, F>(mode: Parallelism, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match mode {
        Parallelism::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => (0..n).into_par_iter().map(f).collect(),
    }
}

/// Map `f` over a slice, collecting results in input order.
pub fn map_slice<T, R, F>(mode: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    match mode {
        Parallelism::Sequential => items.iter().enumerate().map(|(i, x)| f(i, x)).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect(),
    }
}
