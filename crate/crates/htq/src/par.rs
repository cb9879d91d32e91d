//! Dispatch point for the data-parallel inner loops.
//!
//! With the `parallel` feature (default) the closures run on rayon; without
//! it they run sequentially. Either way the result vector is ordered by
//! index, so outputs are identical.

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
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Always-sequential twin of [`map_indexed`], used by the `*_seq` entry
/// points and the benchmark baseline.
pub(crate) fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
