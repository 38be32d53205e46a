//! Data-parallel map with a sequential fallback.
//!
//! All heavy kernels funnel through [`par_collect`]: results are collected
//! in index order, so the output is identical whether the work runs on the
//! rayon pool or on the current thread. Nothing here may introduce
//! iteration-order-dependent reductions.

#[cfg(feature = "parallel")]
pub(crate) fn par_collect<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_collect<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}

/// Human-readable name of the active execution mode, used by benches.
pub fn execution_mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    }
}
