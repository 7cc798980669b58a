//! Gauss hypergeometric series and Legendre functions of complex degree.
//!
//! These are the independent oracle for the quadrature-defined spherical
//! functions; nothing in the verification pipeline calls them.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Radius inside which the power series is summed directly.
pub const SERIES_RADIUS: f64 = 0.75;
const STOP_RATIO: f64 = 1e-17;
const STOP_RUN: usize = 3;
const MAX_TERMS: usize = 10_000;

/// ₂F₁(a, b; c; z).
///
/// Direct series for |z| ≤ 0.75, otherwise the Pfaff transformation
/// ₂F₁(a, b; c; z) = (1 − z)^{−a} ₂F₁(a, c − b; c; z/(z − 1)) when it lands
/// in the same disk. The pair (a, b) is put in a canonical order first so
/// the result is bit-for-bit symmetric in a and b.
pub fn gauss_2f1(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Complex64> {
    if c.im == 0.0 && c.re <= 0.0 && c.re.fract() == 0.0 {
        return Err(Error::ParameterDegenerate { c });
    }
    let (a, b) = if (a.re, a.im) <= (b.re, b.im) { (a, b) } else { (b, a) };
    if z.norm() <= SERIES_RADIUS {
        return series(a, b, c, z);
    }
    let one = Complex64::new(1.0, 0.0);
    if (z - one).norm() == 0.0 {
        return Err(Error::NoConvergentRegime {
            z,
            reason: "z = 1 is a branch point",
        });
    }
    let w = z / (z - one);
    if w.norm() <= SERIES_RADIUS {
        let prefactor = (-a * (one - z).ln()).exp();
        return Ok(prefactor * series(a, c - b, c, w)?);
    }
    Err(Error::NoConvergentRegime {
        z,
        reason: "neither |z| nor |z/(z-1)| is within 0.75",
    })
}

fn series(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Complex64> {
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut small_run = 0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term = term * ((a + kf) * (b + kf)) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.norm() < STOP_RATIO * sum.norm() || term.norm() == 0.0 {
            small_run += 1;
            if small_run >= STOP_RUN {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NoConvergentRegime {
        z,
        reason: "series did not converge within 10000 terms",
    })
}

/// Legendre function P_ν(z) = ₂F₁(−ν, ν + 1; 1; (1 − z)/2).
pub fn legendre_p(nu: Complex64, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= -1.0 {
        return Err(Error::NoConvergentRegime {
            z,
            reason: "z lies on the cut (-inf, -1]",
        });
    }
    let one = Complex64::new(1.0, 0.0);
    gauss_2f1(-nu, nu + one, one, (one - z) * 0.5)
}

/// dP_ν/dz from the contiguity relation (z² − 1)P′_ν = ν(z P_ν − P_{ν−1}).
pub fn legendre_p_derivative(nu: Complex64, z: Complex64) -> Result<Complex64> {
    let p = legendre_p(nu, z)?;
    let pm = legendre_p(nu - 1.0, z)?;
    Ok(nu * (z * p - pm) / (z * z - 1.0))
}
