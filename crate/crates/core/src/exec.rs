//! Data-parallel map used by the per-step scoring pass.
//!
//! Results are always collected in index order, so both modes produce
//! bit-identical output. Without the `parallel` feature, `Parallel` falls
//! back to the sequential path.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..len).into_par_iter().map(f).collect(),
            _ => (0..len).map(f).collect(),
        }
    }

    /// Whether this build can actually run `Parallel` on a thread pool.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}
