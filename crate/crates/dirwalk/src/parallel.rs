//! Deterministic fan-out of independent Monte Carlo tasks.
//!
//! Task `i` draws only from the stream `(seed, domain, i)`, and results are
//! collected in task order, so output does not depend on the worker count.

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::{Error, Result};

#[derive(Debug)]
pub struct Runner {
    seed: u64,
    workers: usize,
    pool: ThreadPool,
}

impl Runner {
    pub fn new(seed: u64, workers: usize) -> Result<Self> {
        let workers = if workers == 0 { default_workers() } else { workers };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
        Ok(Self { seed, workers, pool })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// `f(0), ..., f(n−1)` in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }

    /// Like [`Runner::map`] for fallible tasks; the first error in index order wins.
    pub fn try_map<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
