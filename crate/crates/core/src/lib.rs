//! Numerical verification engine for the structure of K-finite matrix
//! elements of SL(2,ℝ) principal series: each one is a finite sum of
//! finite-dimensional matrix elements times left/right derivative words
//! applied to spherical functions.

pub mod continuation;
pub mod decomposition;
pub mod enveloping;
pub mod error;
pub mod group;
pub mod jet;
pub mod principal_series;
pub mod sampling;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// "a+bi" with 17 significant digits in each part.
pub fn format_complex(z: Complex64) -> String {
    format!("{:.16e}{:+.16e}i", z.re, z.im)
}
