//! Thread-pool executor for sweeps.

use rayon::prelude::*;
use windflex_core::sweep::Executor;

use crate::error::{IoError, Result};

/// Runs indexed jobs on a dedicated rayon pool. Results come back in index
/// order, so the pool size never changes an output.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// `threads = 0` uses one worker per available core.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| IoError::invalid("--threads", e.to_string()))?;
        Ok(RayonExecutor { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..n).into_par_iter().map(f).collect())
    }
}
