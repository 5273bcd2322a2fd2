//! Row-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (default) rows are handed to rayon; without it
//! every request runs on the calling thread. Both paths write each output row
//! from the same per-row closure, so results are bitwise identical.

/// How a per-row kernel is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this request will actually fan out to a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Fill `out` row by row. `row_fn(y, row)` receives the row index and the
/// output slice of length `width`.
pub(crate) fn for_each_row<T, F>(exec: Execution, out: &mut [T], width: usize, row_fn: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    debug_assert!(width > 0 && out.len().is_multiple_of(width));
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        out.par_chunks_mut(width)
            .enumerate()
            .for_each(|(y, row)| row_fn(y, row));
        return;
    }
    let _ = exec;
    for (y, row) in out.chunks_mut(width).enumerate() {
        row_fn(y, row);
    }
}

/// Map `items` to a vector of results preserving input order.
pub fn map_ordered<I, O, F>(exec: Execution, items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}
