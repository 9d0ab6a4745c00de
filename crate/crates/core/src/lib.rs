//! Numerical apparatus for harmonic functions vanishing on part of a convex
//! boundary: Almgren frequency profiles, quantitative symmetry strata, Jones
//! beta-numbers with a brute-force cross-check, discrete Reifenberg packing
//! verification, and the good/bad-tree covering algorithm, all validated at
//! desk scale against closed-form wedge and polynomial fields.

pub mod beta;
pub mod covering;
pub mod critical;
pub mod error;
pub mod fields;
pub mod frequency;
pub mod geometry;
pub mod linalg;
pub mod oracles;
pub mod plot;
pub mod quadrature;
pub mod reifenberg;
pub mod symmetry;
pub mod verify;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;
