//! Optional data parallelism.
//!
//! `par_collect` evaluates `f(0..n)` and returns results in index order,
//! on the rayon pool when the `parallel` feature is enabled and serially
//! otherwise. Callers must pass an `f` whose output depends only on its
//! index, never on evaluation order; aggregation stays sequential at the
//! call site, so output bytes do not depend on the pool size.

#[cfg(feature = "parallel")]
pub fn par_collect<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_collect<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).map(f).collect()
}
