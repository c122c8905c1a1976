//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the map fans out over rayon's pool; results are
//! always returned in input order so downstream reductions are deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Schedule {
    Sequential,
    #[default]
    Parallel,
}

impl Schedule {
    /// `Parallel` only when the crate was built with the `parallel` feature.
    pub fn effective(self) -> Schedule {
        if cfg!(feature = "parallel") {
            self
        } else {
            Schedule::Sequential
        }
    }
}

pub fn map<T, R, F>(schedule: Schedule, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match schedule.effective() {
        Schedule::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Schedule::Parallel => items.par_iter().map(f).collect(),
        #[cfg(not(feature = "parallel"))]
        Schedule::Parallel => unreachable!("effective() never yields Parallel without the feature"),
    }
}

/// Like [`map`] but short-circuits on the first error in input order.
pub fn try_map<T, R, E, F>(schedule: Schedule, items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map(schedule, items, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_schedules_preserve_order() {
        let xs: Vec<u64> = (0..100).collect();
        let a = map(Schedule::Sequential, &xs, |x| x * x);
        let b = map(Schedule::Parallel, &xs, |x| x * x);
        assert_eq!(a, b);
    }
}
