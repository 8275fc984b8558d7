//! Index-based map/reduce that runs on a rayon pool or on the calling thread.
//!
//! Callers supply an associative, commutative reduction. The result then
//! does not depend on how indices are split between workers.

#[cfg(feature = "parallel")]
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Environment variable that overrides the worker count.
pub const THREADS_ENV: &str = "TGA_THREADS";

#[derive(Clone)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    Pool(Arc<rayon::ThreadPool>),
}

impl std::fmt::Debug for Exec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Exec({} threads)", self.threads())
    }
}

impl Default for Exec {
    fn default() -> Self {
        Exec::Sequential
    }
}

impl Exec {
    /// Builds an executor with `n` workers. One worker (or a build without
    /// the `parallel` feature) runs everything on the calling thread.
    pub fn with_threads(n: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            if n > 1 {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    return Exec::Pool(Arc::new(pool));
                }
            }
        }
        let _ = n;
        Exec::Sequential
    }

    /// Worker count from `TGA_THREADS`, then the explicit request, then the
    /// number of available cores.
    pub fn from_env(requested: Option<usize>) -> Self {
        let env = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&n| n >= 1);
        let n = env.or(requested).unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        });
        Self::with_threads(n)
    }

    pub fn threads(&self) -> usize {
        match self {
            Exec::Sequential => 1,
            #[cfg(feature = "parallel")]
            Exec::Pool(pool) => pool.current_num_threads(),
        }
    }

    /// Folds `map(i)` for `i in 0..n` with `reduce`.
    pub fn map_reduce<T, M, R>(&self, n: usize, identity: T, map: M, reduce: R) -> T
    where
        T: Send + Sync + Clone,
        M: Fn(usize) -> T + Sync + Send,
        R: Fn(T, T) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).fold(identity, |acc, i| reduce(acc, map(i))),
            #[cfg(feature = "parallel")]
            Exec::Pool(pool) => pool.install(|| {
                (0..n)
                    .into_par_iter()
                    .with_min_len(16)
                    .map(&map)
                    .reduce(|| identity.clone(), &reduce)
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_matches_across_workers() {
        let seq = Exec::Sequential.map_reduce(1000, 0u64, |i| i as u64, |a, b| a + b);
        let par = Exec::with_threads(4).map_reduce(1000, 0u64, |i| i as u64, |a, b| a + b);
        assert_eq!(seq, 499_500);
        assert_eq!(seq, par);
    }

    #[test]
    fn one_thread_is_sequential() {
        assert_eq!(Exec::with_threads(1).threads(), 1);
    }
}
