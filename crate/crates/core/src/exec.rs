//! Row-parallel execution helpers.
//!
//! Every kernel in the crate walks fields row by row (fixed `i_r`). With the
//! `parallel` feature the rows are distributed over the rayon pool, otherwise
//! they run in order on the calling thread. Reductions are always formed from
//! per-row partials summed in row order, so results are bit-identical between
//! the two paths and across thread counts.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Route all kernels through the sequential path at runtime. Used by the
/// benches to compare both paths in one binary.
pub fn set_force_sequential(on: bool) {
    FORCE_SEQUENTIAL.store(on, Ordering::Relaxed);
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.load(Ordering::Relaxed)
}

/// Configure the global worker pool. Has no effect without the `parallel`
/// feature or when the pool was already initialised.
pub fn init_threads(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}

/// Calls `f(row_index, row)` for every `row_len`-sized chunk of `out`.
pub fn for_each_row<F>(out: &mut [f64], row_len: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        out.par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
        return;
    }
    out.chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

/// Like [`for_each_row`] over two outputs with identical layout.
pub fn for_each_row2<F>(a: &mut [f64], b: &mut [f64], row_len: usize, f: F)
where
    F: Fn(usize, &mut [f64], &mut [f64]) + Sync + Send,
{
    assert_eq!(a.len(), b.len());
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        a.par_chunks_mut(row_len)
            .zip(b.par_chunks_mut(row_len))
            .enumerate()
            .for_each(|(i, (ra, rb))| f(i, ra, rb));
        return;
    }
    a.chunks_mut(row_len)
        .zip(b.chunks_mut(row_len))
        .enumerate()
        .for_each(|(i, (ra, rb))| f(i, ra, rb));
}

/// Evaluates `f(i)` for `i in 0..n` and returns the results in index order.
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Deterministic sum of per-row partials.
pub fn sum_rows<F>(n_rows: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indices(n_rows, f).into_iter().sum()
}

/// Deterministic max of per-row partials (NaN-free inputs assumed).
pub fn max_rows<F>(n_rows: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indices(n_rows, f)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Runs two closures, concurrently when parallelism is enabled.
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        return rayon::join(a, b);
    }
    (a(), b())
}

/// Shared mutable view used by the red-black smoother, where rows updated in
/// parallel only read cells of the opposite colour.
#[derive(Clone, Copy)]
pub(crate) struct SharedSlice {
    ptr: *mut f64,
    len: usize,
}

// SAFETY: callers guarantee disjoint writes and no read of a cell that is
// being written in the same parallel phase.
unsafe impl Send for SharedSlice {}
unsafe impl Sync for SharedSlice {}

impl SharedSlice {
    pub(crate) fn new(s: &mut [f64]) -> Self {
        SharedSlice {
            ptr: s.as_mut_ptr(),
            len: s.len(),
        }
    }

    #[inline]
    pub(crate) fn get(&self, k: usize) -> f64 {
        debug_assert!(k < self.len);
        // SAFETY: index in bounds; see type-level contract.
        unsafe { *self.ptr.add(k) }
    }

    #[inline]
    pub(crate) fn set(&self, k: usize, v: f64) {
        debug_assert!(k < self.len);
        // SAFETY: index in bounds; see type-level contract.
        unsafe { *self.ptr.add(k) = v }
    }
}

/// Runs `f(i)` for each `i in 0..n`, in parallel when enabled.
pub(crate) fn for_each_index<F>(n: usize, f: F)
where
    F: Fn(usize) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        (0..n).into_par_iter().for_each(f);
        return;
    }
    (0..n).for_each(f);
}
