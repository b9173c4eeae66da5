//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the work is spread over a rayon pool whose size
//! can be capped by the `QTM_THREADS` environment variable. Without it every
//! map runs on the calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Environment variable that caps the worker count.
pub const THREADS_ENV: &str = "QTM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this mode actually fans out work.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

#[cfg(feature = "parallel")]
fn pool() -> &'static rayon::ThreadPool {
    use std::sync::OnceLock;
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_cap() {
            builder = builder.num_threads(n);
        }
        builder.build().expect("failed to start worker pool")
    })
}

/// Worker cap from the environment, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Number of workers a parallel map will use.
pub fn workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        pool().current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Applies `f` to every item; results come back in input order.
pub fn map<T, R, F>(items: &[T], mode: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return pool().install(|| items.par_iter().map(&f).collect());
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Like [`map`] over an index range.
pub fn map_range<R, F>(n: usize, mode: Execution, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return pool().install(|| (0..n).into_par_iter().map(&f).collect());
    }
    let _ = mode;
    (0..n).map(f).collect()
}
