//! Data-parallel helpers that fall back to sequential loops without the
//! `parallel` feature. Every helper preserves output order, so results never
//! depend on the worker count.

use alloc::vec::Vec;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Calls `f(i, &mut a[i], &mut b[i*chunk..(i+1)*chunk])` for every `i`.
pub(crate) fn zip_chunks_for_each<A, B, F>(a: &mut [A], b: &mut [B], chunk: usize, f: F)
where
    A: Send,
    B: Send,
    F: Fn(usize, &mut A, &mut [B]) + Sync + Send,
{
    debug_assert_eq!(a.len() * chunk, b.len());
    #[cfg(feature = "parallel")]
    a.par_iter_mut()
        .zip(b.par_chunks_mut(chunk))
        .enumerate()
        .for_each(|(i, (x, y))| f(i, x, y));
    #[cfg(not(feature = "parallel"))]
    a.iter_mut()
        .zip(b.chunks_mut(chunk))
        .enumerate()
        .for_each(|(i, (x, y))| f(i, x, y));
}

/// Calls `f(i, &mut a[i])` for every `i`.
pub(crate) fn for_each_mut<A, F>(a: &mut [A], f: F)
where
    A: Send,
    F: Fn(usize, &mut A) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    a.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    #[cfg(not(feature = "parallel"))]
    a.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub(crate) fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return (0..n).map(f).collect();
}
