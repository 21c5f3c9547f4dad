//! Fan-out over independent work items.
//!
//! Every batch operation in the crate routes its outer loop through
//! [`map_indices`], so results are always collected in index order and are
//! identical whichever strategy runs them. With the `parallel` feature
//! disabled, [`Parallelism::Parallel`] degrades to the sequential path.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Parallel,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Parallel
        } else {
            Parallelism::Sequential
        }
    }
}

impl Parallelism {
    /// True when work will actually be spread over a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

pub(crate) fn map_indices<T, F>(par: Parallelism, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par == Parallelism::Parallel {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = par;
    (0..len).map(f).collect()
}

pub(crate) fn try_map_indices<T, E, F>(par: Parallelism, len: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par == Parallelism::Parallel {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = par;
    (0..len).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_strategies_preserve_order() {
        let seq = map_indices(Parallelism::Sequential, 1000, |i| i * i);
        let par = map_indices(Parallelism::Parallel, 1000, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[31], 961);
    }

    #[test]
    fn try_map_reports_error() {
        let r: Result<Vec<usize>, String> =
            try_map_indices(Parallelism::Parallel, 100, |i| {
                if i == 57 {
                    Err(format!("bad {i}"))
                } else {
                    Ok(i)
                }
            });
        assert_eq!(r.unwrap_err(), "bad 57");
    }
}
