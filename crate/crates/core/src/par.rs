//! Execution strategy for the Monte Carlo layers.
//!
//! Every replicated workload is expressed as an indexed map `0..n -> T`
//! whose results are gathered in index order. Reductions happen afterwards,
//! sequentially, so the output does not depend on the worker count. With the
//! `parallel` feature disabled every strategy runs on the calling thread.

/// How replicated work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Run on the calling thread.
    Sequential,
    /// Run on the global rayon pool.
    #[default]
    Parallel,
    /// Run on a dedicated pool with exactly this many workers.
    Threads(usize),
}

impl Execution {
    /// Reads `PLUGIN_FDR_THREADS`; unset or unparsable falls back to the global pool.
    pub fn from_env() -> Self {
        match std::env::var("PLUGIN_FDR_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            Some(0) | None => Execution::Parallel,
            Some(1) => Execution::Sequential,
            Some(n) => Execution::Threads(n),
        }
    }

    /// Evaluates `f(0), ..., f(n-1)` and returns the results in index order.
    pub fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(feature = "parallel")]
            Execution::Threads(threads) => {
                use rayon::prelude::*;
                match rayon::ThreadPoolBuilder::new().num_threads(*threads).build() {
                    Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
                    Err(_) => (0..n).map(f).collect(),
                }
            }
            #[cfg(not(feature = "parallel"))]
            _ => (0..n).map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_for_every_strategy() {
        let expected: Vec<usize> = (0..1000).map(|i| i * i).collect();
        for exec in [Execution::Sequential, Execution::Parallel, Execution::Threads(3)] {
            assert_eq!(exec.map_indexed(1000, |i| i * i), expected);
        }
    }
}
