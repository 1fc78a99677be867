//! Parallel/sequential execution switch.
//!
//! With the `parallel` feature (default) the helpers run on rayon; a runtime
//! toggle lets benchmarks compare both paths in one process. Without the
//! feature everything is sequential and rayon is not linked. Results are
//! bit-identical either way: work is mapped by index and reduced in index
//! order.

#[cfg(feature = "parallel")]
use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
static SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force the sequential path at runtime (used by benches). No-op without the
/// `parallel` feature, which is already sequential.
pub fn set_sequential(seq: bool) {
    #[cfg(feature = "parallel")]
    SEQUENTIAL.store(seq, Ordering::SeqCst);
    #[cfg(not(feature = "parallel"))]
    let _ = seq;
}

/// True when work will actually be distributed over threads.
pub fn is_parallel() -> bool {
    #[cfg(feature = "parallel")]
    {
        !SEQUENTIAL.load(Ordering::SeqCst)
    }
    #[cfg(not(feature = "parallel"))]
    {
        false
    }
}

/// Map `f` over `items`, preserving order.
pub fn map_vec<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            use rayon::prelude::*;
            return items.into_par_iter().map(f).collect();
        }
    }
    items.into_iter().map(f).collect()
}

/// Map `f` over indices `0..n`, preserving order.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}
