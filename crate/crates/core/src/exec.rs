//! Data-parallel helpers.
//!
//! Every batch loop in the crate goes through [`Parallelism`] so that callers
//! (and the benchmarks) can pick the sequential path explicitly. Without the
//! `parallel` feature both variants run sequentially.

/// Execution strategy for data-parallel loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// Whether this build can actually run in parallel.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Parallelism::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Maps `f` over `0..n`, preserving order.
    pub fn map_range<U, F>(self, n: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Parallelism::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Runs `f` with the measured region pinned to one thread.
    pub fn single_threaded<R: Send>(f: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(1).build() {
                return pool.install(f);
            }
        }
        f()
    }

    /// Runs `f` inside a pool of `jobs` threads (0 = rayon default).
    pub fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        {
            if jobs > 0 {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                    return pool.install(f);
                }
            }
        }
        let _ = jobs;
        f()
    }
}
