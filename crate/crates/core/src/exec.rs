//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] runs on the
//! rayon pool; without it both variants run on the calling thread. Results
//! always come back in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Environment variable overriding the worker/partition count.
pub const THREADS_ENV: &str = "NOMA_AWGGN_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Like [`Self::map`] but stops at an error (the first by input order
    /// when sequential, any when parallel).
    pub fn try_map<T, R, E, F>(self, items: &[T], f: F) -> Result<Vec<R>, E>
    where
        T: Sync,
        R: Send,
        E: Send,
        F: Fn(&T) -> Result<R, E> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }
}

/// Partition count: the [`THREADS_ENV`] override when set to a positive
/// integer, otherwise the available parallelism.
pub fn default_partitions() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_preserve_order() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = Execution::Sequential.map(&items, |x| x * x);
        let par = Execution::Parallel.map(&items, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 998_001);
    }

    #[test]
    fn try_map_propagates_errors() {
        let items = [1, 2, 3];
        let r: Result<Vec<i32>, String> = Execution::Sequential.try_map(&items, |&x| {
            if x == 2 {
                Err("two".to_string())
            } else {
                Ok(x)
            }
        });
        assert_eq!(r, Err("two".to_string()));
        let ok: Result<Vec<i32>, String> = Execution::Parallel.try_map(&items, |&x| Ok(x + 1));
        assert_eq!(ok.unwrap(), vec![2, 3, 4]);
    }

    #[test]
    fn partitions_are_positive() {
        assert!(default_partitions() >= 1);
    }
}
