//! Data-parallel execution helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the closures run on the rayon pool;
//! without it the same code compiles to a plain iterator loop. Callers must
//! keep closures pure per index — outputs are collected in index order, so
//! the result never depends on scheduling.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
