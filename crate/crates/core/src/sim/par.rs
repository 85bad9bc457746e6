use std::sync::OnceLock;

use rayon::prelude::*;
use rayon::ThreadPool;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "BENCHTRACK_THREADS";

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()) {
            b = b.num_threads(n.max(1));
        }
        b.build().expect("thread pool")
    })
}

pub fn thread_count() -> usize {
    pool().current_num_threads()
}

/// Maps `f` over path indices 0..n in parallel; output order is by index.
pub fn par_map<T: Send>(n: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    pool().install(|| (0..n as u64).into_par_iter().map(&f).collect())
}
