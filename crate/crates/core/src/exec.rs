//! Execution policy for data-parallel loops. With the `parallel` feature the
//! work is spread over a rayon pool; without it, or with
//! [`Execution::Sequential`], loops run on the calling thread. Results are
//! always returned in index order, so output never depends on scheduling.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon with the given worker count, or the global pool when `None`.
    #[default]
    Parallel,
    Threads(usize),
}

impl Execution {
    /// Reads a worker count from an environment variable: `0` means
    /// sequential, a positive value caps the workers, anything else falls back
    /// to the default pool.
    pub fn from_env(var: &str) -> Self {
        match std::env::var(var).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            Some(0) => Execution::Sequential,
            Some(k) => Execution::Threads(k),
            None => Execution::Parallel,
        }
    }

    /// `(0..n).map(f).collect()`, possibly in parallel.
    pub fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => par_map(n, &f),
            #[cfg(feature = "parallel")]
            Execution::Threads(k) => match rayon::ThreadPoolBuilder::new().num_threads(*k).build() {
                Ok(pool) => pool.install(|| par_map(n, &f)),
                Err(_) => par_map(n, &f),
            },
            #[cfg(not(feature = "parallel"))]
            _ => (0..n).map(f).collect(),
        }
    }

    /// Fallible variant of [`Execution::map_indexed`]; returns the error with
    /// the lowest index.
    pub fn try_map_indexed<T, E, F>(&self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map_indexed(n, f).into_iter().collect()
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
    fn order_is_preserved() {
        for ex in [Execution::Sequential, Execution::Parallel, Execution::Threads(3)] {
            let v = ex.map_indexed(1000, |i| i * i);
            assert_eq!(v, (0..1000).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn first_error_wins() {
        let r: Result<Vec<usize>, usize> =
            Execution::Parallel.try_map_indexed(100, |i| if i % 30 == 29 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(29));
    }
}
