//! Execution policy for the data-parallel loops.
//!
//! Conformal grid points and Monte Carlo replicates are independent, so
//! they can fan out across worker threads. Results are always collected in
//! index order and reductions stay sequential, so the output is identical
//! whatever the scheduling. `Parallelism::Sequential` is a plain loop with
//! no rayon involvement at all; `Parallelism::Rayon` uses the current rayon
//! pool when the `parallel` feature is enabled and silently degrades to the
//! sequential loop when it is not.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    #[default]
    Rayon,
}

impl Parallelism {
    /// Maps `f` over `0..count`, returning results in index order.
    pub fn map_indexed<T, F>(self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Parallelism::Sequential => (0..count).map(f).collect(),
            Parallelism::Rayon => {
                #[cfg(feature = "parallel")]
                {
                    (0..count).into_par_iter().map(f).collect()
                }
                #[cfg(not(feature = "parallel"))]
                {
                    (0..count).map(f).collect()
                }
            }
        }
    }
}

/// Runs `body` under the requested worker count. `Some(1)` forces the pure
/// sequential path; `Some(k)` runs inside a dedicated `k`-thread pool;
/// `None` uses the default pool. Without the `parallel` feature everything
/// runs sequentially.
pub fn with_threads<R: Send>(
    threads: Option<usize>,
    body: impl FnOnce(Parallelism) -> R + Send,
) -> R {
    match threads {
        Some(1) => body(Parallelism::Sequential),
        #[cfg(feature = "parallel")]
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .expect("failed to build thread pool");
            pool.install(|| body(Parallelism::Rayon))
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => body(Parallelism::Sequential),
        None => body(Parallelism::Rayon),
    }
}
