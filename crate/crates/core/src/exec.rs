//! Data-parallel helpers.
//!
//! With the `parallel` feature the helpers dispatch to rayon; without it
//! they run on the calling thread. Work is always split into fixed-size
//! chunks whose partial results are combined in chunk order, so results are
//! bit-identical regardless of the number of worker threads.
//!
//! [`sequential`] forces the sequential path for the duration of a closure
//! on the calling thread, which is what the benchmarks use to compare both
//! schedules inside one binary.

use std::cell::Cell;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Run `f` with parallel dispatch disabled on this thread.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    let prev = FORCE_SEQUENTIAL.with(|c| c.replace(true));
    let out = f();
    FORCE_SEQUENTIAL.with(|c| c.set(prev));
    out
}

/// Whether the helpers in this module will use worker threads.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(|c| c.get())
}

/// Map `f` over consecutive chunks of `data`; `f` receives the offset of the
/// chunk. Results are returned in chunk order.
pub fn map_chunks<T, R, F>(data: &[T], chunk: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return data
            .par_chunks(chunk)
            .enumerate()
            .map(|(i, c)| f(i * chunk, c))
            .collect();
    }
    data.chunks(chunk).enumerate().map(|(i, c)| f(i * chunk, c)).collect()
}

/// Map `f` over a range of indices, preserving order.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Fill `out` chunk by chunk; `f` receives the chunk offset and the chunk.
pub fn fill_chunks<R, F>(out: &mut [R], chunk: usize, f: F)
where
    R: Send,
    F: Fn(usize, &mut [R]) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        out.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i * chunk, c));
        return;
    }
    out.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i * chunk, c));
}

/// Sum equal-length vectors in order into a fresh vector of length `len`.
pub fn sum_vectors(parts: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    let mut acc = vec![0.0; len];
    for p in parts {
        debug_assert_eq!(p.len(), len);
        for (a, b) in acc.iter_mut().zip(p) {
            *a += b;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_is_schedule_independent() {
        let data: Vec<f64> = (0..10_000).map(|i| (i as f64).sin() * 1e-3).collect();
        let sum = |d: &[f64]| map_chunks(d, 97, |_, c| c.iter().sum::<f64>()).into_iter().sum::<f64>();
        let par = sum(&data);
        let seq = sequential(|| sum(&data));
        assert_eq!(par.to_bits(), seq.to_bits());
    }

    #[test]
    fn sequential_flag_is_scoped() {
        sequential(|| assert!(!is_parallel()));
        assert_eq!(is_parallel(), cfg!(feature = "parallel"));
    }
}
