//! Execution backends for the data-parallel loops (ensemble forecasts, analysis
//! fold chains, per-line solver sweeps).
//!
//! Every helper returns results in input order, so reductions performed by the
//! caller see the same ordering whichever backend runs the map. Without the
//! `parallel` feature, [`Backend::Parallel`] falls back to the sequential path.

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    Sequential,
    #[default]
    Parallel,
}

impl Backend {
    /// Whether this backend actually runs on the rayon pool in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Backend::Parallel
    }
}

/// Maps `f` over `0..n`.
pub fn map_range<R, F>(backend: Backend, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if backend.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = backend;
    (0..n).map(f).collect()
}

pub fn map<T, R, F>(backend: Backend, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_range(backend, items.len(), |i| f(&items[i]))
}

/// Fallible map; the first error in input order is returned.
pub fn try_map<T, R, F>(backend: Backend, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    map(backend, items, f).into_iter().collect()
}

pub fn try_map_range<R, F>(backend: Backend, n: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    map_range(backend, n, f).into_iter().collect()
}

/// Runs `f` on consecutive chunks of `out` (chunk `k` covers
/// `out[k * chunk..(k + 1) * chunk]`).
pub fn for_each_chunk_mut<F>(backend: Backend, out: &mut [f64], chunk: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if backend.is_parallel() {
        use rayon::prelude::*;
        out.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(k, c)| f(k, c));
        return;
    }
    let _ = backend;
    for (k, c) in out.chunks_mut(chunk).enumerate() {
        f(k, c);
    }
}
