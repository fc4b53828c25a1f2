//! Shared thread pool. `PSEUDOVEM_THREADS` caps the number of workers.

use std::sync::OnceLock;

use rayon::{ThreadPool, ThreadPoolBuilder};

pub const THREADS_ENV: &str = "PSEUDOVEM_THREADS";

/// Worker count: `PSEUDOVEM_THREADS` if set to a positive integer, otherwise
/// the available parallelism.
pub fn thread_count() -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => n,
        _ => available,
    }
}

pub fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        ThreadPoolBuilder::new()
            .num_threads(thread_count())
            .thread_name(|i| format!("pseudovem-{i}"))
            .build()
            .expect("thread pool")
    })
}

/// Runs `f` inside the shared pool.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    pool().install(f)
}
