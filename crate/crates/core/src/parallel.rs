//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] fans work
//! out over the rayon global pool. Without it, every call runs sequentially.
//! Results are always returned in index order, so outputs never depend on the
//! schedule.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this mode actually runs on multiple threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(i)` for `i in 0..len`, preserving index order.
pub fn map_indices<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Maps over a slice, preserving order.
pub fn map_slice<S, T, F>(exec: Execution, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Minimum of `key(i)` over `0..len`, with ties going to the smaller index.
pub fn min_by_key_indices<K, F>(exec: Execution, len: u64, key: F) -> Option<(K, u64)>
where
    K: Ord + Send + Copy,
    F: Fn(u64) -> Option<K> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len)
            .into_par_iter()
            .filter_map(|i| key(i).map(|k| (k, i)))
            .min();
    }
    let _ = exec;
    (0..len).filter_map(|i| key(i).map(|k| (k, i))).min()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i * i) % 17;
        assert_eq!(
            map_indices(Execution::Sequential, 1000, f),
            map_indices(Execution::Parallel, 1000, f)
        );
        let key = |i: u64| if i % 7 == 3 { Some(i % 5) } else { None };
        let seq = min_by_key_indices(Execution::Sequential, 500, key);
        assert_eq!(seq, min_by_key_indices(Execution::Parallel, 500, key));
        assert_eq!(seq, Some((0, 10)));
    }
}
