//! Data-parallel map over indices with a sequential fallback.
//!
//! With the `parallel` feature the work is spread over rayon's pool;
//! without it, or with [`Execution::Sequential`], it runs in index order on
//! the calling thread. Results always come back ordered by index.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// Whether `Parallel` actually fans out in this build.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

pub fn map_indexed<T, F>(count: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
        _ => (0..count).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_in_both_modes() {
        let p = map_indexed(100, Execution::Parallel, |i| i * i);
        let s = map_indexed(100, Execution::Sequential, |i| i * i);
        assert_eq!(p, s);
        assert_eq!(p[7], 49);
    }
}
