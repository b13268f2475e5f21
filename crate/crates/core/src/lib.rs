//! Dirichlet eigenvalues of convex planar domains, the set functionals that
//! constrain them, certificates for the inequalities relating the two, and a
//! small shape optimizer for eigenvalue minimization under those constraints.

pub mod analytic;
pub mod bessel;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod inequalities;
pub mod linalg;
pub mod sampling;
pub mod spectral;
pub mod variational;

pub use error::{Error, Result};
pub use geometry::{BodyUnion, ConvexBody, GeometricSummary, Vec2};

/// `(0..n).map(f)`, in parallel when the `parallel` feature is on. Output
/// order never depends on scheduling.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Size the global worker pool. Only the first call has an effect.
pub fn configure_threads(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidConfig(e.to_string()))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}
