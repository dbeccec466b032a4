use std::ops::Range;

use rayon::prelude::*;
use rayon::ThreadPool;
use sampled_sde::PathExecutor;

use crate::{CliError, Result};

/// Runs path batches on rayon, either on the global pool or on a private pool
/// with a fixed worker count. Results always come back in index order.
#[derive(Debug, Default)]
pub struct RayonExecutor {
    pool: Option<ThreadPool>,
}

impl RayonExecutor {
    /// `None` uses the global pool.
    pub fn new(threads: Option<usize>) -> Result<Self> {
        let pool = match threads {
            None => None,
            Some(0) => return Err(CliError::config("threads", "must be >= 1")),
            Some(n) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| CliError::config("threads", e.to_string()))?,
            ),
        };
        Ok(RayonExecutor { pool })
    }
}

impl PathExecutor for RayonExecutor {
    fn map_indexed<T, F>(&self, range: Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let run = || range.into_par_iter().map(&f).collect();
        match &self.pool {
            Some(pool) => pool.install(run),
            None => run(),
        }
    }
}
