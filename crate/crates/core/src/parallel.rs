//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (on by default) work is spread over a rayon
//! pool; without it every [`Execution`] runs on the calling thread. Results
//! never depend on the worker count: callers reduce with commutative,
//! associative operations and `map_ordered` keeps input order.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Execution {
    Sequential,
    /// `threads = None` uses the global pool.
    Parallel {
        threads: Option<usize>,
    },
}

impl Default for Execution {
    fn default() -> Self {
        Execution::Parallel { threads: None }
    }
}

impl Execution {
    pub fn with_threads(threads: usize) -> Self {
        if threads <= 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { threads: Some(threads) }
        }
    }

    /// Number of workers this execution will actually use.
    pub fn workers(&self) -> usize {
        match self {
            Execution::Sequential => 1,
            #[cfg(feature = "parallel")]
            Execution::Parallel { threads: Some(n) } => *n,
            #[cfg(feature = "parallel")]
            Execution::Parallel { threads: None } => rayon::current_num_threads(),
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel { .. } => 1,
        }
    }

    /// Maps `f` over `items`, returning results in input order.
    pub fn map_ordered<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel { threads } => {
                use rayon::prelude::*;
                self.install(*threads, || items.par_iter().map(&f).collect())
            }
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel { .. } => items.iter().map(f).collect(),
        }
    }

    /// Folds `f(i)` for `i in 0..n` into an accumulator and merges the
    /// per-worker partials with `merge`. `merge` must be commutative and
    /// associative for the result to be independent of scheduling.
    pub fn fold_range<A, F, I, M>(&self, n: u64, init: I, f: F, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut A, u64) + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        let sequential = |init: &I| {
            let mut acc = init();
            for i in 0..n {
                f(&mut acc, i);
            }
            acc
        };
        match self {
            Execution::Sequential => sequential(&init),
            #[cfg(feature = "parallel")]
            Execution::Parallel { threads } => {
                use rayon::prelude::*;
                self.install(*threads, || {
                    (0..n)
                        .into_par_iter()
                        .fold(&init, |mut acc, i| {
                            f(&mut acc, i);
                            acc
                        })
                        .reduce(&init, &merge)
                })
            }
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel { .. } => {
                let _ = &merge;
                sequential(&init)
            }
        }
    }

    #[cfg(feature = "parallel")]
    fn install<R: Send>(&self, threads: Option<usize>, op: impl FnOnce() -> R + Send) -> R {
        match threads {
            None => op(),
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(op),
                Err(_) => op(),
            },
        }
    }
}
