//! Spherical functions and derivative words at complex Cartan parameter
//! a(t), t ∈ ℂ, with mean-value holomorphy checks.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::enveloping::{lie_derivative_word, EnvelopingWord};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::jet::GroupFunction;
use crate::principal_series::{Parity, PrincipalSeries, DEFAULT_GRID};
use crate::special::legendre_p;

/// Certified half-width of the strip in Im t.
pub const WINDOW: f64 = 0.45 * std::f64::consts::PI;

/// A point a(t) of the complexified Cartan slice inside the window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexCartanPoint {
    t: Complex64,
}

impl ComplexCartanPoint {
    /// Checks |Im t| ≤ 0.45π and that cosh t + sinh t·cos φ avoids
    /// (−∞, 0] on the default grid.
    pub fn new(t: Complex64) -> Result<Self> {
        if !(t.im.abs() <= WINDOW) || !t.re.is_finite() {
            return Err(Error::BranchViolation {
                t,
                reason: format!("|Im t| = {:.6} exceeds the window 0.45*pi", t.im.abs()),
            });
        }
        let (ch, sh) = (t.cosh(), t.sinh());
        for j in 0..DEFAULT_GRID {
            let base = ch + sh * (TAU * j as f64 / DEFAULT_GRID as f64).cos();
            if base.im == 0.0 && base.re <= 0.0 {
                return Err(Error::BranchViolation {
                    t,
                    reason: format!("integrand base {base} lies on the cut"),
                });
            }
        }
        Ok(ComplexCartanPoint { t })
    }

    pub fn t(&self) -> Complex64 {
        self.t
    }

    pub fn element(&self) -> GroupElement {
        GroupElement::boost_complex(self.t)
    }
}

/// min over the grid of |cosh t + sinh t·cos φ|; no window check.
pub fn min_base_modulus(t: Complex64, grid: usize) -> f64 {
    let (ch, sh) = (t.cosh(), t.sinh());
    (0..grid)
        .map(|j| (ch + sh * (TAU * j as f64 / grid as f64).cos()).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Ψ_s(a(t)) for complex t: the real-group integrand with the principal
/// branch of the power.
pub fn complexified_spherical(s: Complex64, p: &ComplexCartanPoint) -> Result<Complex64> {
    complexified_spherical_on_grid(s, p, DEFAULT_GRID)
}

pub fn complexified_spherical_on_grid(s: Complex64, p: &ComplexCartanPoint, grid: usize) -> Result<Complex64> {
    let f = PrincipalSeries::new(s, Parity::Even, grid)?.coefficient(0, 0)?;
    Ok(f.eval(&p.element()))
}

/// A derivative word applied to Ψ_s at a(t), t complex, through jets in
/// the complexified directions.
pub fn derivative_word_continuation(s: Complex64, word: &EnvelopingWord, p: &ComplexCartanPoint) -> Result<Complex64> {
    let f = PrincipalSeries::with_default_grid(s, Parity::Even).coefficient(0, 0)?;
    lie_derivative_word(word, &f, &p.element())
}

/// Mean-value and first-moment test of F on the circle |t − c| = r:
/// max(|mean F − F(c)|, |mean F·e^{iφ}|) / max(1, |F(c)|).
///
/// Both moments vanish for holomorphic F; an anti-holomorphic F passes the
/// first and fails the second.
pub fn holomorphy_test(
    f: &(dyn Fn(Complex64) -> Result<Complex64> + Sync),
    center: &ComplexCartanPoint,
    radius: f64,
    points: usize,
) -> Result<f64> {
    let c = center.t();
    if c.im.abs() + radius > WINDOW {
        return Err(Error::BranchViolation {
            t: c,
            reason: "the test disk leaves the window".into(),
        });
    }
    if points < 3 {
        return Err(Error::invalid("continuation", "need at least 3 circle points"));
    }
    let samples = (0..points)
        .into_par_iter()
        .map(|k| {
            let w = Complex64::cis(TAU * k as f64 / points as f64);
            Ok((f(c + w * radius)?, w))
        })
        .collect::<Result<Vec<_>>>()?;
    let k = points as f64;
    let mean: Complex64 = samples.iter().map(|(v, _)| v).sum::<Complex64>() / k;
    let moment: Complex64 = samples.iter().map(|(v, w)| v * w).sum::<Complex64>() / k;
    let at_center = f(c)?;
    Ok((mean - at_center).norm().max(moment.norm()) / at_center.norm().max(1.0))
}

/// One cell of the crown table.
#[derive(Clone, Debug, PartialEq)]
pub struct CrownCell {
    pub t: Complex64,
    pub quadrature: Complex64,
    pub oracle: Complex64,
    pub rel_err: f64,
    /// |Ψ on 2M nodes − Ψ on M nodes| / |Ψ|.
    pub refinement: f64,
    pub min_base: f64,
}

/// Quadrature vs Legendre oracle over a rectangular t grid.
pub fn crown_scan(s: Complex64, re_values: &[f64], im_values: &[f64]) -> Result<Vec<CrownCell>> {
    let cells: Vec<Complex64> = re_values
        .iter()
        .flat_map(|&re| im_values.iter().map(move |&im| Complex64::new(re, im)))
        .collect();
    cells
        .par_iter()
        .map(|&t| {
            let p = ComplexCartanPoint::new(t)?;
            let quadrature = complexified_spherical(s, &p)?;
            let fine = complexified_spherical_on_grid(s, &p, 2 * DEFAULT_GRID)?;
            let oracle = legendre_p(s - 0.5, t.cosh())?;
            let scale = quadrature.norm().max(f64::MIN_POSITIVE);
            Ok(CrownCell {
                t,
                quadrature,
                oracle,
                rel_err: (quadrature - oracle).norm() / oracle.norm().max(f64::MIN_POSITIVE),
                refinement: (fine - quadrature).norm() / scale,
                min_base: min_base_modulus(t, DEFAULT_GRID),
            })
        })
        .collect()
}

/// (Im t, min-base modulus) for Im t on `count` equispaced points of
/// [0, π/2) at fixed Re t.
pub fn breakdown_profile(re_t: f64, count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|k| {
            let im = FRAC_PI_2 * k as f64 / count as f64;
            (im, min_base_modulus(Complex64::new(re_t, im), DEFAULT_GRID))
        })
        .collect()
}
