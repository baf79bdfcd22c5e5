//! Data-parallel execution of independent per-point work.
//!
//! Sweeps over frequency grids and profile samples have no ordering
//! constraints; with the `parallel` feature they run on the global rayon
//! pool, otherwise sequentially. Results are assembled in input order either
//! way, so outputs are identical byte for byte.

#[cfg(feature = "parallel")]
pub(crate) fn map_points<T, U, F>(points: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    points.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_points<T, U, F>(points: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    points.iter().map(f).collect()
}

/// Fallible variant: the first error wins, in input order.
pub(crate) fn try_map_points<T, U, F>(points: &[T], f: F) -> crate::Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> crate::Result<U> + Sync + Send,
{
    map_points(points, f).into_iter().collect()
}
