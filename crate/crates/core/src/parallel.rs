//! Thread-pool sizing for batch work.

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "WINDSHAPE_THREADS";

pub fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs `f` on a pool sized by `WINDSHAPE_THREADS`, or on rayon's global pool.
pub fn with_thread_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match thread_count() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}
