//! Data-parallel map helpers.
//!
//! With the `parallel` feature (default) [`map`] fans work items out on the
//! rayon pool; without it the same call runs sequentially. [`map_seq`] is the
//! always-sequential variant kept public so benchmarks can compare the two on
//! identical workloads. Results are collected in input order either way, so
//! output is independent of scheduling.

#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Sequential reference implementation of [`map`].
pub fn map_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn map_preserves_order() {
        let out = super::map((0..100).collect::<Vec<_>>(), |i| i * i);
        let expect = super::map_seq((0..100).collect::<Vec<_>>(), |i| i * i);
        assert_eq!(out, expect);
    }
}
