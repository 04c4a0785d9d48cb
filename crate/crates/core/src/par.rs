//! Thin switch between rayon and sequential execution. Every helper here
//! produces the same output in the same order either way.

use alloc::vec::Vec;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

pub(crate) fn map_range<U, F>(len: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

pub(crate) fn sort_unstable<T: Ord + Send>(v: &mut [T]) {
    #[cfg(feature = "parallel")]
    {
        v.par_sort_unstable()
    }
    #[cfg(not(feature = "parallel"))]
    {
        v.sort_unstable()
    }
}

pub(crate) fn sort_f64(v: &mut [f64]) {
    #[cfg(feature = "parallel")]
    {
        v.par_sort_unstable_by(|a, b| a.total_cmp(b))
    }
    #[cfg(not(feature = "parallel"))]
    {
        v.sort_unstable_by(|a, b| a.total_cmp(b))
    }
}
