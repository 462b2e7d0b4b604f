use alloc::vec::Vec;

/// Maps `f` over `0..len`, collecting results in index order. Runs on the
/// rayon pool when the `std` feature is on.
pub(crate) fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "std")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "std"))]
    {
        (0..len).map(f).collect()
    }
}
