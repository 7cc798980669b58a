//! The principal series of SL(2,ℝ) in the compact picture.
//!
//! Functions live on the circle θ ∈ [0, 2π) (the double cover of G/P) with
//! the M-character encoded as f(θ + π) = ±f(θ). The group acts by
//!
//! ```text
//! (ρ(g)f)(θ) = f(θ″) · j^{1/2 + s},   (θ″, j) = circle_action(g⁻¹, θ)
//! ```
//!
//! so the rotation subgroup acts by translation independently of s and the
//! operators depend continuously (indeed holomorphically) on s. Matrix
//! elements are trapezoid-rule quadratures over an equispaced grid.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::jet::{power_taylor, GroupFunction, Jet, JetLayout, JetMatrix};

/// Default quadrature grid: spectrally converged to ~1e−15 on the window
/// ‖g‖_F ≤ 3.
pub const DEFAULT_GRID: usize = 512;
/// Frobenius-norm window used by the test suites.
pub const WINDOW_NORM: f64 = 3.0;

const PARITY_TOLERANCE: f64 = 1e-10;
const BANDWIDTH_TOLERANCE: f64 = 1e-10;

/// Character of M = {±I}: even (trivial) or odd (sign).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: i32) -> Parity {
        if n.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn admits(self, n: i32) -> bool {
        Parity::of(n) == self
    }

    /// Value of the character at −I.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            other => Err(Error::invalid(
                "principal_series",
                format!("unknown parity {other:?} (expected even or odd)"),
            )),
        }
    }
}

/// A K-finite vector Σ c_n e_n, e_n(θ) = e^{inθ}, with n ≡ parity (mod 2).
#[derive(Clone, Debug, PartialEq)]
pub struct KTypeVector {
    parity: Parity,
    coeffs: BTreeMap<i32, Complex64>,
}

impl KTypeVector {
    pub fn zero(parity: Parity) -> Self {
        KTypeVector {
            parity,
            coeffs: BTreeMap::new(),
        }
    }

    /// The K-type e_n.
    pub fn basis(parity: Parity, n: i32) -> Result<Self> {
        let mut v = KTypeVector::zero(parity);
        v.set(n, Complex64::new(1.0, 0.0))?;
        Ok(v)
    }

    pub fn from_coefficients<I>(parity: Parity, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i32, Complex64)>,
    {
        let mut v = KTypeVector::zero(parity);
        for (n, c) in coeffs {
            v.set(n, v.get(n) + c)?;
        }
        Ok(v)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn get(&self, n: i32) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    pub fn set(&mut self, n: i32, c: Complex64) -> Result<()> {
        if !self.parity.admits(n) {
            return Err(Error::ParityMismatch {
                detail: format!("mode {n} in a {} vector", self.parity),
            });
        }
        self.coeffs.insert(n, c);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    pub fn support(&self) -> Vec<i32> {
        self.coeffs
            .iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(&n, _)| n)
            .collect()
    }

    /// Largest |n| with a nonzero coefficient.
    pub fn bandwidth(&self) -> usize {
        self.support().iter().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, k: Complex64) -> KTypeVector {
        KTypeVector {
            parity: self.parity,
            coeffs: self.coeffs.iter().map(|(&n, &c)| (n, c * k)).collect(),
        }
    }

    pub fn add(&self, other: &KTypeVector) -> Result<KTypeVector> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &KTypeVector) -> Result<KTypeVector> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &KTypeVector, sign: f64) -> Result<KTypeVector> {
        if self.parity != other.parity {
            return Err(Error::ParityMismatch {
                detail: "cannot combine vectors of different parity".into(),
            });
        }
        let mut out = self.clone();
        for (n, c) in other.iter() {
            *out.coeffs.entry(n).or_default() += c * sign;
        }
        Ok(out)
    }

    /// Samples Σ c_n e^{inθ_j} on an equispaced grid.
    pub fn samples(&self, grid: usize) -> Vec<Complex64> {
        (0..grid)
            .map(|j| {
                let theta = TAU * j as f64 / grid as f64;
                self.iter()
                    .map(|(n, c)| c * Complex64::cis(n as f64 * theta))
                    .sum()
            })
            .collect()
    }
}

/// Action of g on the circle: θ′ is the angle of g·ω(θ) with
/// ω(θ) = (cos θ, sin θ), and the Jacobian is dθ′/dθ = ‖g·ω‖^{−2}.
pub fn circle_action(g: &GroupElement, theta: f64) -> (f64, f64) {
    let [a, b, c, d] = g.entries().map(|z| z.re);
    let (s, co) = theta.sin_cos();
    let x = a * co + b * s;
    let y = c * co + d * s;
    let angle = y.atan2(x).rem_euclid(TAU);
    (angle, 1.0 / (x * x + y * y))
}

/// Discrete Fourier coefficients (1/M)Σ_j f_j e^{−ikθ_j}, indexed by
/// k ∈ [−M/2, M/2).
pub fn fourier_coefficients(samples: &[Complex64]) -> Vec<(i32, Complex64)> {
    let m = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::<f64>::new().plan_fft_forward(m).process(&mut buf);
    let inv = 1.0 / m as f64;
    let half = (m / 2) as i32;
    let mut out: Vec<(i32, Complex64)> = buf
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let k = i as i32;
            (if k >= half { k - m as i32 } else { k }, c * inv)
        })
        .collect();
    out.sort_by_key(|(k, _)| *k);
    out
}

/// A member of the family ρ_s on one parity sector, discretized on an
/// equispaced grid.
#[derive(Clone, Debug)]
pub struct PrincipalSeries {
    s: Complex64,
    parity: Parity,
    grid: usize,
    trig: Arc<[(f64, f64)]>,
}

impl PartialEq for PrincipalSeries {
    fn eq(&self, other: &Self) -> bool {
        self.s == other.s && self.parity == other.parity && self.grid == other.grid
    }
}

impl PrincipalSeries {
    pub fn new(s: Complex64, parity: Parity, grid: usize) -> Result<Self> {
        if !grid.is_power_of_two() || grid < 256 {
            return Err(Error::invalid(
                "principal_series",
                format!("grid size {grid} must be a power of two >= 256"),
            ));
        }
        let trig: Arc<[(f64, f64)]> = (0..grid)
            .map(|j| (TAU * j as f64 / grid as f64).sin_cos())
            .map(|(s, c)| (c, s))
            .collect();
        Ok(PrincipalSeries {
            s,
            parity,
            grid,
            trig,
        })
    }

    pub fn with_default_grid(s: Complex64, parity: Parity) -> Self {
        Self::new(s, parity, DEFAULT_GRID).expect("default grid is valid")
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Same realization at another spectral parameter.
    pub fn at(&self, s: Complex64) -> PrincipalSeries {
        PrincipalSeries { s, ..self.clone() }
    }

    /// The contragredient family: the bilinear pairing
    /// ⟨f, w⟩ = (1/2π)∫ f·w dθ is invariant between ρ_s and ρ_{−s}.
    pub fn dual(&self) -> PrincipalSeries {
        self.at(-self.s)
    }

    /// Cocycle exponent 1/2 + s.
    pub fn exponent(&self) -> Complex64 {
        self.s + 0.5
    }

    pub fn angle(&self, j: usize) -> f64 {
        TAU * j as f64 / self.grid as f64
    }

    pub(crate) fn trig(&self) -> &[(f64, f64)] {
        &self.trig
    }

    fn check_mode(&self, n: i32) -> Result<()> {
        if !self.parity.admits(n) {
            return Err(Error::ParityMismatch {
                detail: format!("K-type {n} is not in the {} sector", self.parity),
            });
        }
        Ok(())
    }

    fn check_real(g: &GroupElement) -> Result<()> {
        if !g.is_real(1e-14 * g.frobenius_norm()) {
            return Err(Error::invalid(
                "principal_series",
                "the circle model acts by real group elements only",
            ));
        }
        Ok(())
    }

    /// ρ(g) applied to grid samples; off-grid values come from the
    /// trigonometric interpolant, which must be band-limited to M/4.
    pub fn act(&self, g: &GroupElement, f: &[Complex64]) -> Result<Vec<Complex64>> {
        Self::check_real(g)?;
        if f.len() != self.grid {
            return Err(Error::invalid(
                "principal_series",
                format!("expected {} samples, got {}", self.grid, f.len()),
            ));
        }
        let scale = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let half = self.grid / 2;
        let sign = self.parity.sign();
        for j in 0..half {
            if (f[j + half] - f[j] * sign).norm() > PARITY_TOLERANCE * scale.max(1e-300) {
                return Err(Error::ParityMismatch {
                    detail: format!("samples violate f(θ+π) = {sign}·f(θ)"),
                });
            }
        }
        let limit = (self.grid / 4) as i32;
        let spectrum = fourier_coefficients(f);
        let peak = spectrum.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        let tail = spectrum
            .iter()
            .filter(|(k, _)| k.abs() > limit)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        if peak > 0.0 && tail > BANDWIDTH_TOLERANCE * peak {
            return Err(Error::BandwidthOverflow {
                limit: limit as usize,
                tail: tail / peak,
            });
        }
        let band: Vec<Complex64> = (-limit..=limit)
            .map(|k| {
                if self.parity.admits(k) {
                    spectrum[(k + half as i32) as usize].1
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let lambda = self.exponent();
        let ginv = g.inverse();
        Ok((0..self.grid)
            .map(|j| {
                let (phi, jac) = circle_action(&ginv, self.angle(j));
                let w = Complex64::cis(phi);
                let mut z = Complex64::cis(-(limit as f64) * phi);
                let mut value = Complex64::new(0.0, 0.0);
                for c in &band {
                    value += c * z;
                    z *= w;
                }
                value * (lambda * jac.ln()).exp()
            })
            .collect())
    }

    /// ρ(g)v on the grid, evaluating the K-types exactly at the moved points.
    pub fn act_ktype(&self, g: &GroupElement, v: &KTypeVector) -> Result<Vec<Complex64>> {
        Self::check_real(g)?;
        if v.parity() != self.parity {
            return Err(Error::ParityMismatch {
                detail: "vector and realization have different parity".into(),
            });
        }
        let lambda = self.exponent();
        let ginv = g.inverse();
        Ok((0..self.grid)
            .map(|j| {
                let (phi, jac) = circle_action(&ginv, self.angle(j));
                let f: Complex64 = v.iter().map(|(n, c)| c * Complex64::cis(n as f64 * phi)).sum();
                f * (lambda * jac.ln()).exp()
            })
            .collect())
    }

    /// ⟨ρ(g)e_n, e_m⟩ = (1/2π)∫ (ρ(g)e_n)(θ) e^{−imθ} dθ by the trapezoid rule.
    pub fn matrix_element(&self, m: i32, n: i32, g: &GroupElement) -> Result<Complex64> {
        self.check_mode(m)?;
        self.check_mode(n)?;
        Self::check_real(g)?;
        let lambda = self.exponent();
        let ginv = g.inverse();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.grid {
            let theta = self.angle(j);
            let (phi, jac) = circle_action(&ginv, theta);
            acc += Complex64::cis(n as f64 * phi - m as f64 * theta) * (lambda * jac.ln()).exp();
        }
        Ok(acc / self.grid as f64)
    }

    /// Ψ_s(g) = ⟨ρ(g)e₀, e₀⟩ on the even sector.
    pub fn spherical(&self, g: &GroupElement) -> Result<Complex64> {
        self.at_parity(Parity::Even).matrix_element(0, 0, g)
    }

    fn at_parity(&self, parity: Parity) -> PrincipalSeries {
        PrincipalSeries {
            parity,
            ..self.clone()
        }
    }

    /// g ↦ ⟨ρ(g)e_n, e_m⟩ as a function evaluable on jets and on complex
    /// group elements.
    pub fn coefficient(&self, m: i32, n: i32) -> Result<MatrixCoefficient> {
        self.check_mode(m)?;
        self.check_mode(n)?;
        Ok(MatrixCoefficient {
            series: self.clone(),
            m,
            n,
        })
    }
}

/// Ψ_s(g) on the default grid.
pub fn spherical_function(s: Complex64, g: &GroupElement) -> Result<Complex64> {
    PrincipalSeries::with_default_grid(s, Parity::Even).spherical(g)
}

/// Scratch buffers for [`transformed_ktype`].
pub(crate) struct IntegrandScratch {
    x: Jet,
    y: Jet,
    r2: Jet,
    tmp: Jet,
    delta: Jet,
    pub(crate) out: Jet,
    u: Jet,
    taylor: Vec<Complex64>,
}

impl IntegrandScratch {
    pub(crate) fn new(layout: &Arc<JetLayout>) -> Self {
        IntegrandScratch {
            x: Jet::zero(layout),
            y: Jet::zero(layout),
            r2: Jet::zero(layout),
            tmp: Jet::zero(layout),
            delta: Jet::zero(layout),
            out: Jet::zero(layout),
            u: Jet::zero(layout),
            taylor: Vec::new(),
        }
    }
}

/// (ρ(G)e_n)(θ) for a jet-valued G, given ginv = adjugate(G).
///
/// With (x, y) = G⁻¹ω(θ) and r² = x² + y² (bilinear, so the expression is
/// holomorphic in the entries): e^{inθ″}·j^λ = (x ± iy)^{|n|}·(r²)^{−λ−|n|/2}.
/// The result is left in `scratch.out`.
pub(crate) fn transformed_ktype(
    lambda: Complex64,
    n: i32,
    ginv: &JetMatrix,
    (cos, sin): (f64, f64),
    scratch: &mut IntegrandScratch,
) {
    let IntegrandScratch {
        x,
        y,
        r2,
        tmp,
        delta,
        out,
        u,
        taylor,
    } = scratch;
    {
        let (xa, ya) = (x.coeffs_mut(), y.coeffs_mut());
        let (ga, gb, gc, gd) = (ginv.a.coeffs(), ginv.b.coeffs(), ginv.c.coeffs(), ginv.d.coeffs());
        for i in 0..xa.len() {
            xa[i] = ga[i] * cos + gb[i] * sin;
            ya[i] = gc[i] * cos + gd[i] * sin;
        }
    }
    x.mul_into(x, r2);
    y.mul_into(y, tmp);
    r2.axpy(Complex64::new(1.0, 0.0), tmp);
    let order = r2.layout().nilpotency();
    let k = n.unsigned_abs();
    let power = -(lambda + 0.5 * k as f64);
    *taylor = power_taylor(r2.value(), power, order);
    r2.compose_into(taylor, delta, tmp, out);
    if k == 0 {
        return;
    }
    let i_sign = if n > 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) };
    u.copy_from(x);
    u.axpy(i_sign, y);
    for _ in 0..k {
        out.mul_into(u, tmp);
        std::mem::swap(out, tmp);
    }
}

/// The matrix coefficient g ↦ ⟨ρ_s(g)e_n, e_m⟩ evaluated through the
/// holomorphic form of its integrand.
#[derive(Clone, Debug)]
pub struct MatrixCoefficient {
    series: PrincipalSeries,
    m: i32,
    n: i32,
}

impl MatrixCoefficient {
    pub fn series(&self) -> &PrincipalSeries {
        &self.series
    }

    pub fn modes(&self) -> (i32, i32) {
        (self.m, self.n)
    }
}

impl GroupFunction for MatrixCoefficient {
    fn eval_jet(&self, g: &JetMatrix) -> Jet {
        let layout = g.layout().clone();
        let ginv = g.adjugate();
        let lambda = self.series.exponent();
        let mut scratch = IntegrandScratch::new(&layout);
        let mut acc = Jet::zero(&layout);
        let grid = self.series.grid();
        for (j, &(c, s)) in self.series.trig().iter().enumerate() {
            transformed_ktype(lambda, self.n, &ginv, (c, s), &mut scratch);
            let weight = if self.m == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::cis(-(self.m as f64) * TAU * j as f64 / grid as f64)
            };
            acc.axpy(weight, &scratch.out);
        }
        acc.scale(Complex64::new(1.0 / grid as f64, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CartanCoordinates;
    use crate::special::legendre_p;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circle_action_examples() {
        let (t, j) = circle_action(&GroupElement::identity(), 1.3);
        assert!((t - 1.3).abs() < 1e-15 && (j - 1.0).abs() < 1e-15);

        let (t, j) = circle_action(&GroupElement::rotation(0.5), 6.0);
        assert!((t - (6.5 - TAU)).abs() < 1e-14 && (j - 1.0).abs() < 1e-14);

        let tt = 0.8;
        let g = GroupElement::boost(tt);
        let (_, j) = circle_action(&g, 0.0);
        assert!((j - (-tt).exp()).abs() < 1e-15);
        // Jacobian against a central difference of θ′(θ)
        let h = 1e-6;
        for theta in [0.0, 0.7, 2.0, 4.4] {
            let (_, jac) = circle_action(&g, theta);
            let (p, _) = circle_action(&g, theta + h);
            let (q, _) = circle_action(&g, theta - h);
            let mut diff = p - q;
            if diff < -PI {
                diff += TAU;
            }
            assert!((diff / (2.0 * h) - jac).abs() < 1e-8);
        }
    }

    #[test]
    fn identity_acts_trivially() {
        let series = PrincipalSeries::with_default_grid(c(0.3, 0.7), Parity::Odd);
        let f = KTypeVector::from_coefficients(Parity::Odd, [(1, c(1.0, 0.0)), (-3, c(0.2, 0.5))])
            .unwrap()
            .samples(series.grid());
        let g = series.act(&GroupElement::identity(), &f).unwrap();
        for (a, b) in f.iter().zip(g.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn act_rejects_wide_or_wrong_parity_input() {
        let series = PrincipalSeries::new(c(0.1, 0.0), Parity::Even, 256).unwrap();
        let wide = KTypeVector::basis(Parity::Even, 80).unwrap().samples(256);
        assert!(matches!(
            series.act(&GroupElement::boost(0.3), &wide),
            Err(Error::BandwidthOverflow { .. })
        ));
        let odd = KTypeVector::basis(Parity::Odd, 1).unwrap().samples(256);
        assert!(matches!(
            series.act(&GroupElement::boost(0.3), &odd),
            Err(Error::ParityMismatch { .. })
        ));
    }

    #[test]
    fn matrix_element_at_identity_is_kronecker() {
        let series = PrincipalSeries::with_default_grid(c(-0.4, 1.2), Parity::Even);
        for m in [-4, -2, 0, 2, 4] {
            for n in [-4, -2, 0, 2, 4] {
                let v = series.matrix_element(m, n, &GroupElement::identity()).unwrap();
                let expected = if m == n { 1.0 } else { 0.0 };
                assert!((v - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn matrix_element_rejects_parity_mismatch() {
        let series = PrincipalSeries::with_default_grid(c(0.0, 1.0), Parity::Odd);
        assert!(matches!(
            series.matrix_element(0, 1, &GroupElement::identity()),
            Err(Error::ParityMismatch { .. })
        ));
    }

    #[test]
    fn cross_sector_quadrature_vanishes() {
        let grid = 512;
        let series = PrincipalSeries::new(c(0.0, 0.0), Parity::Even, grid).unwrap();
        for (m, n) in [(0, 1), (2, -3), (4, 5)] {
            let sum: Complex64 = (0..grid)
                .map(|j| Complex64::cis((n - m) as f64 * series.angle(j)))
                .sum::<Complex64>()
                / grid as f64;
            assert!(sum.norm() < 1e-14);
        }
    }

    #[test]
    fn spherical_matches_legendre_at_reference_point() {
        let s = c(0.0, 0.9);
        let t = 0.7;
        let psi = spherical_function(s, &GroupElement::boost(t)).unwrap();
        let oracle = legendre_p(s - 0.5, c(t.cosh(), 0.0)).unwrap();
        assert!((psi - oracle).norm() < 1e-10 * oracle.norm());
    }

    #[test]
    fn spherical_function_properties() {
        let s = c(0.35, -0.6);
        assert!((spherical_function(s, &GroupElement::identity()).unwrap() - 1.0).norm() < 1e-14);
        let g = CartanCoordinates::new(0.3, 1.1, 2.0).reconstruct();
        let base = spherical_function(s, &g).unwrap();
        let moved = GroupElement::rotation(1.7)
            .compose(&g)
            .compose(&GroupElement::rotation(-0.4));
        assert!((spherical_function(s, &moved).unwrap() - base).norm() < 1e-10);
        let a = GroupElement::boost(1.1);
        let weyl = spherical_function(-s, &a).unwrap();
        assert!((spherical_function(s, &a).unwrap() - weyl).norm() < 1e-10);
    }

    #[test]
    fn k_equivariance() {
        let series = PrincipalSeries::with_default_grid(c(0.2, 0.5), Parity::Odd);
        let g = CartanCoordinates::new(0.9, 0.8, 0.1).reconstruct();
        let phi = 0.77;
        for (m, n) in [(1, 1), (3, -1), (-5, 3)] {
            let rotated = series
                .matrix_element(m, n, &GroupElement::rotation(phi).compose(&g))
                .unwrap();
            let base = series.matrix_element(m, n, &g).unwrap();
            // k(φ) translates θ by φ, so the left factor contributes e^{−imφ}
            assert!((rotated - Complex64::cis(-(m as f64) * phi) * base).norm() < 1e-10);
        }
    }

    #[test]
    fn holomorphic_integrand_matches_circle_action_path() {
        for parity in [Parity::Even, Parity::Odd] {
            let series = PrincipalSeries::with_default_grid(c(-0.3, 0.8), parity);
            let g = CartanCoordinates::new(2.1, 1.4, 0.6).reconstruct();
            let base = if parity == Parity::Even { 0 } else { 1 };
            for (m, n) in [(base, base), (base + 2, base - 4), (base - 2, base + 2)] {
                let direct = series.matrix_element(m, n, &g).unwrap();
                let via_jets = series.coefficient(m, n).unwrap().eval(&g);
                assert!((direct - via_jets).norm() < 1e-12 * direct.norm().max(1.0));
            }
        }
    }

    #[test]
    fn grid_doubling_is_converged() {
        let g = CartanCoordinates::new(0.2, 2.1, 1.0).reconstruct();
        assert!(g.frobenius_norm() <= WINDOW_NORM);
        for parity in [Parity::Even, Parity::Odd] {
            let base = if parity == Parity::Even { 0 } else { 1 };
            let coarse = PrincipalSeries::new(c(0.4, 1.0), parity, 512).unwrap();
            let fine = PrincipalSeries::new(c(0.4, 1.0), parity, 1024).unwrap();
            for (m, n) in [(base, base), (base + 2, base - 2)] {
                let a = coarse.matrix_element(m, n, &g).unwrap();
                let b = fine.matrix_element(m, n, &g).unwrap();
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fourier_coefficients_recover_modes() {
        let v = KTypeVector::from_coefficients(Parity::Even, [(-4, c(0.5, 0.0)), (6, c(0.0, 2.0))]).unwrap();
        let spectrum = fourier_coefficients(&v.samples(256));
        for (k, coeff) in spectrum {
            assert!((coeff - v.get(k)).norm() < 1e-14);
        }
    }
}
