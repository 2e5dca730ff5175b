//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature enabled and `parallel == true`, work is spread
//! over the rayon pool. Every helper produces output in index order, so the
//! result is the same whichever path runs.

/// Evaluates `f(i)` for `i in 0..n`, in parallel when requested and available.
pub fn map_range<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, in parallel when requested and available.
pub fn map_slice<S, T, F>(items: &[S], parallel: bool, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// Splits `0..n` into fixed-size chunks and maps each chunk; the chunking is
/// independent of the worker count.
pub fn map_chunks<T, F>(n: usize, chunk: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let count = n.div_ceil(chunk);
    map_range(count, parallel, |c| f(c * chunk..((c + 1) * chunk).min(n)))
}

/// Whether the crate was built with rayon support.
pub const fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}
