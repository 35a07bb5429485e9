//! Ordered data-parallel maps with a sequential fallback.
//!
//! Results always come back in input order, and callers reduce them
//! sequentially, so output never depends on the number of workers.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items the rayon split overhead dominates.
#[cfg(feature = "parallel")]
const MIN_PARALLEL: usize = 16;

/// `(0..n).map(f).collect()`, evaluated on the current rayon pool.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= MIN_PARALLEL {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// `items.iter().map(f).collect()`, evaluated on the current rayon pool.
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if items.len() >= 2 {
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Runs `op` on a dedicated pool of `workers` threads. `None` uses the
/// global pool; without the `parallel` feature `op` simply runs inline.
pub fn with_workers<R, F>(workers: Option<usize>, op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if let Some(w) = workers {
            match rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build() {
                Ok(pool) => return pool.install(op),
                Err(e) => log::warn!("falling back to global pool: {e}"),
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    op()
}

/// Number of workers the current context would use.
pub fn current_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
