//! Batch evaluation helpers.
//!
//! Sweeps, oracle suites, and Monte-Carlo repetitions are embarrassingly
//! parallel: every item is evaluated independently and results are collected
//! in input order. With the `parallel` feature (default) [`map`] fans out
//! over a rayon pool; without it, it is a plain sequential loop. [`map_seq`]
//! is always sequential and is kept available so the two paths can be
//! benchmarked against each other.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving input order in the output.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential map, available regardless of features.
pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Run `f` inside a thread pool limited to `threads` workers. `None` uses
/// the default pool. Without the `parallel` feature this just calls `f`.
pub fn with_thread_limit<R, F>(threads: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match threads {
            Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool construction")
                .install(f),
            _ => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}
