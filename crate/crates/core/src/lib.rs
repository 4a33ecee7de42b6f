//! Invariant random fields on S² and S³.
//!
//! The crate builds the SU(2) irreducible modules as polynomial spaces, puts
//! self-conjugated orthonormal bases on the corresponding modules of L²(S²)
//! and L²(S³), decides the mixing condition on such bases, samples random
//! Fourier coefficients and tests their distributional properties.

pub mod bases;
pub mod error;
pub mod exact;
pub mod fields;
pub mod group;
pub mod irrep;
pub mod mixing;
pub mod rng;
pub mod sphere;
pub mod stats;

pub use error::{Error, Result};
pub use group::{GroupElement, SO4Element, SU2Element};
pub use rng::RngStream;
