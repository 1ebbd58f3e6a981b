//! Scheduling helpers that run data-parallel loops on rayon when the
//! `rayon` feature is enabled and fall back to plain sequential loops
//! otherwise.
//!
//! Every helper preserves element order, so results are identical between
//! the two builds; the feature only changes how work is scheduled.

/// Applies `f` to each row of a row-major buffer. `f` receives the row
/// index and the mutable row slice.
pub(crate) fn for_each_row_mut<T, F>(data: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Send + Sync,
{
    #[cfg(feature = "rayon")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(width)
            .enumerate()
            .for_each(|(y, row)| f(y, row));
    }
    #[cfg(not(feature = "rayon"))]
    {
        data.chunks_mut(width)
            .enumerate()
            .for_each(|(y, row)| f(y, row));
    }
}

/// Maps `0..n` through `f`, returning results in index order. Used both
/// for per-row reductions (map rows, then fold sequentially so float sums
/// are order-stable) and for frame-level batches.
pub(crate) fn indexed_map<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Send + Sync,
{
    #[cfg(feature = "rayon")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "rayon"))]
    {
        (0..n).map(f).collect()
    }
}

/// Runs `f` inside a rayon pool of `jobs` threads (`0` = rayon's default
/// pool). Without the `rayon` feature, `jobs` is ignored and `f` runs on
/// the calling thread.
pub fn with_jobs<R, F>(jobs: usize, f: F) -> crate::error::Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "rayon")]
    {
        if jobs == 0 {
            Ok(f())
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| crate::error::Error::Internal(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
    #[cfg(not(feature = "rayon"))]
    {
        let _ = jobs;
        Ok(f())
    }
}
