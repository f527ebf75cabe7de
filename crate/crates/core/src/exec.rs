//! Sequential or rayon-backed execution of independent work items.
//!
//! Outputs always come back in index order, so any reduction done by the
//! caller sees the same sequence regardless of scheduling.

/// How realization loops are executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon on the global pool.
    #[default]
    Parallel,
    /// Rayon on a dedicated pool of `threads` workers.
    ParallelWith { threads: usize },
}

impl Execution {
    /// Parallel execution capped at `threads` workers (`0` means no cap).
    pub fn with_threads(threads: usize) -> Self {
        match threads {
            0 => Execution::Parallel,
            1 => Execution::Sequential,
            n => Execution::ParallelWith { threads: n },
        }
    }

    /// Evaluate `f(0..n)` and return the results in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => par_map(n, &f),
            #[cfg(feature = "parallel")]
            Execution::ParallelWith { threads } => {
                match rayon::ThreadPoolBuilder::new().num_threads(*threads).build() {
                    Ok(pool) => pool.install(|| par_map(n, &f)),
                    // no pool available: fall back to the calling thread
                    Err(_) => (0..n).map(f).collect(),
                }
            }
            #[cfg(not(feature = "parallel"))]
            _ => (0..n).map(f).collect(),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, F>(n: usize, f: &F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_keep_index_order() {
        for exec in [
            Execution::Sequential,
            Execution::Parallel,
            Execution::with_threads(3),
        ] {
            let v = exec.map(100, |i| i * i);
            assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn thread_cap_mapping() {
        assert_eq!(Execution::with_threads(0), Execution::Parallel);
        assert_eq!(Execution::with_threads(1), Execution::Sequential);
        assert_eq!(Execution::with_threads(4), Execution::ParallelWith { threads: 4 });
    }
}
