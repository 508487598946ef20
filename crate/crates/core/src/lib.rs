//! Verification and computation toolkit for first-order elliptic boundary
//! value problems.
//!
//! * [`symbolalg`]: linear principal symbols, ellipticity, Clifford
//!   relations and the symbol norm bound.
//! * [`raritaschwinger`]: bundle maps and principal symbol of the
//!   Rarita-Schwinger operator built from a Dirac-type seed.
//! * [`adapted`]: adapted boundary symbols, boundary operators on the circle
//!   and spectral projectors `chi_+`, `chi_-`.
//! * [`bconds`]: boundary conditions in graphical form (APS, deformations,
//!   adjoints, matching) and the symbol-level Lopatinsky-Schapiro checks.
//! * [`indexlab`]: finite-difference cylinder models and numerical indices.

pub mod adapted;
pub mod bconds;
pub mod clifford;
pub mod error;
pub mod indexlab;
pub mod linalg;
pub mod raritaschwinger;
pub mod serde_cmat;
pub mod symbolalg;

pub use error::{Error, Result};

/// Order-preserving map, parallel when the `parallel` feature is on.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
