//! Data-parallel execution helper.
//!
//! Monte-Carlo runs, solver multistarts and the grid oracle all map an
//! index range through a pure function. With the `parallel` feature (the
//! default) the map runs on rayon; without it, sequentially. Results come
//! back in index order either way, so reductions downstream are
//! deterministic regardless of the feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Caps the number of worker threads. Call once at startup; returns an
/// error string if a global pool already exists. No-op without `parallel`.
pub fn limit_threads(n: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        Ok(())
    }
}
