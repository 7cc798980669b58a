//! 2×2 unimodular group arithmetic for SL(2,ℝ) and its complexification,
//! the Lie algebra sl(2) in the basis H, E, F, and Cartan (KAK) coordinates.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const DET_TOLERANCE: f64 = 1e-12;
const CHAIN_RECHECK: usize = 100;

/// An element of SL(2,ℂ); real entries describe SL(2,ℝ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl GroupElement {
    /// Builds `[[a, b], [c, d]]`, rejecting entries whose determinant is not 1.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let g = GroupElement { a, b, c, d };
        g.check_determinant()?;
        Ok(g)
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub(crate) fn from_entries_unchecked(entries: [Complex64; 4]) -> Self {
        let [a, b, c, d] = entries;
        GroupElement { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::from_entries_unchecked([1.0.into(), 0.0.into(), 0.0.into(), 1.0.into()])
    }

    /// Counter-clockwise rotation k(θ) = [[cos θ, −sin θ], [sin θ, cos θ]].
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_entries_unchecked([c.into(), (-s).into(), s.into(), c.into()])
    }

    /// a(t) = diag(e^{t/2}, e^{−t/2}).
    pub fn boost(t: f64) -> Self {
        Self::boost_complex(t.into())
    }

    /// a(t) for complex t; the complexified Cartan direction.
    pub fn boost_complex(t: Complex64) -> Self {
        let half = (t * 0.5).exp();
        Self::from_entries_unchecked([half, 0.0.into(), 0.0.into(), half.inv()])
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }
    pub fn b(&self) -> Complex64 {
        self.b
    }
    pub fn c(&self) -> Complex64 {
        self.c
    }
    pub fn d(&self) -> Complex64 {
        self.d
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    fn check_determinant(&self) -> Result<()> {
        let scale = (self.a * self.d).norm().max((self.b * self.c).norm()).max(1.0);
        let deviation = (self.determinant() - 1.0).norm() / scale;
        if deviation > DET_TOLERANCE || !deviation.is_finite() {
            return Err(Error::Determinant { deviation });
        }
        Ok(())
    }

    /// Inverse by the adjugate, exact for unimodular matrices.
    pub fn inverse(&self) -> Self {
        Self::from_entries_unchecked([self.d, -self.b, -self.c, self.a])
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// Ordered product of a chain; the determinant is re-checked for chains
    /// longer than 100 factors.
    pub fn product<'a, I>(factors: I) -> Result<GroupElement>
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        let mut acc = GroupElement::identity();
        let mut count = 0usize;
        for g in factors {
            acc = acc.compose(g);
            count += 1;
        }
        if count > CHAIN_RECHECK {
            acc.check_determinant()?;
        }
        Ok(acc)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.entries().iter().all(|z| z.im.abs() <= tol)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &GroupElement) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

impl Neg for GroupElement {
    type Output = GroupElement;

    /// −g, the action of the nontrivial element of M = {±I}.
    fn neg(self) -> GroupElement {
        GroupElement::from_entries_unchecked([-self.a, -self.b, -self.c, -self.d])
    }
}

/// x_H·H + x_E·E + x_F·F in sl(2,ℂ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LieAlgebraElement {
    pub h: Complex64,
    pub e: Complex64,
    pub f: Complex64,
}

impl LieAlgebraElement {
    pub const H: LieAlgebraElement = LieAlgebraElement::real(1.0, 0.0, 0.0);
    pub const E: LieAlgebraElement = LieAlgebraElement::real(0.0, 1.0, 0.0);
    pub const F: LieAlgebraElement = LieAlgebraElement::real(0.0, 0.0, 1.0);

    pub const fn new(h: Complex64, e: Complex64, f: Complex64) -> Self {
        LieAlgebraElement { h, e, f }
    }

    pub const fn real(h: f64, e: f64, f: f64) -> Self {
        LieAlgebraElement {
            h: Complex64::new(h, 0.0),
            e: Complex64::new(e, 0.0),
            f: Complex64::new(f, 0.0),
        }
    }

    /// E − F, generating exp(τ(E − F)) = k(−τ).
    pub const fn rotation_generator() -> Self {
        LieAlgebraElement::real(0.0, 1.0, -1.0)
    }

    /// Raising operator H + i(E + F): shifts the K-type index by +2.
    pub const fn raising() -> Self {
        LieAlgebraElement::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 1.0),
        )
    }

    /// Lowering operator H − i(E + F): shifts the K-type index by −2.
    pub const fn lowering() -> Self {
        LieAlgebraElement::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, -1.0),
        )
    }

    /// The 2×2 matrix `[[x_H, x_E], [x_F, −x_H]]`, row-major.
    pub fn matrix(&self) -> [Complex64; 4] {
        [self.h, self.e, self.f, -self.h]
    }

    pub fn from_matrix(m: [Complex64; 4]) -> Self {
        LieAlgebraElement::new(m[0], m[1], m[2])
    }

    /// Lie bracket via the matrix commutator.
    pub fn bracket(&self, other: &LieAlgebraElement) -> LieAlgebraElement {
        let x = self.matrix();
        let y = other.matrix();
        let xy = mat_mul(&x, &y);
        let yx = mat_mul(&y, &x);
        LieAlgebraElement::from_matrix([xy[0] - yx[0], xy[1] - yx[1], xy[2] - yx[2], xy[3] - yx[3]])
    }

    pub fn scale(&self, k: Complex64) -> Self {
        LieAlgebraElement::new(self.h * k, self.e * k, self.f * k)
    }

    pub fn max_abs_diff(&self, other: &LieAlgebraElement) -> f64 {
        [(self.h - other.h), (self.e - other.e), (self.f - other.f)]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl Add for LieAlgebraElement {
    type Output = LieAlgebraElement;
    fn add(self, o: Self) -> Self {
        LieAlgebraElement::new(self.h + o.h, self.e + o.e, self.f + o.f)
    }
}

impl Sub for LieAlgebraElement {
    type Output = LieAlgebraElement;
    fn sub(self, o: Self) -> Self {
        LieAlgebraElement::new(self.h - o.h, self.e - o.e, self.f - o.f)
    }
}

impl Neg for LieAlgebraElement {
    type Output = LieAlgebraElement;
    fn neg(self) -> Self {
        LieAlgebraElement::new(-self.h, -self.e, -self.f)
    }
}

impl Mul<Complex64> for LieAlgebraElement {
    type Output = LieAlgebraElement;
    fn mul(self, k: Complex64) -> Self {
        self.scale(k)
    }
}

pub(crate) fn mat_mul(x: &[Complex64; 4], y: &[Complex64; 4]) -> [Complex64; 4] {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

/// exp(τX) in closed form.
///
/// For traceless M = τX one has M² = δ·I with δ = −det M, hence
/// exp(M) = cosh(√δ)·I + (sinh(√δ)/√δ)·M. Both coefficients are entire in δ;
/// near δ = 0 they are summed from their power series.
pub fn exp_algebra(x: &LieAlgebraElement, tau: Complex64) -> GroupElement {
    let m = x.scale(tau).matrix();
    let delta = -(m[0] * m[3] - m[1] * m[2]);
    let (ch, sh_over) = if delta.norm() < 1e-6 {
        // cosh √δ = Σ δ^k/(2k)!, sinh √δ/√δ = Σ δ^k/(2k+1)!
        let mut ch = Complex64::new(0.0, 0.0);
        let mut sh = Complex64::new(0.0, 0.0);
        let mut term_c = Complex64::new(1.0, 0.0);
        let mut term_s = Complex64::new(1.0, 0.0);
        for k in 0..8 {
            ch += term_c;
            sh += term_s;
            let k = k as f64;
            term_c = term_c * delta / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
            term_s = term_s * delta / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
        }
        (ch, sh)
    } else {
        let r = delta.sqrt();
        (r.cosh(), r.sinh() / r)
    };
    GroupElement::from_entries_unchecked([
        ch + sh_over * m[0],
        sh_over * m[1],
        sh_over * m[2],
        ch + sh_over * m[3],
    ])
}

/// Cartan coordinates g = k(θ₁)·a(t)·k(θ₂).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartanCoordinates {
    pub theta1: f64,
    pub t: f64,
    pub theta2: f64,
}

impl CartanCoordinates {
    pub fn new(theta1: f64, t: f64, theta2: f64) -> Self {
        CartanCoordinates { theta1, t, theta2 }
    }

    pub fn reconstruct(&self) -> GroupElement {
        GroupElement::rotation(self.theta1)
            .compose(&GroupElement::boost(self.t))
            .compose(&GroupElement::rotation(self.theta2))
    }

    /// Canonical representative: θ₁ ∈ [0, π), θ₂ ∈ [0, 2π), and θ₁ = 0 when
    /// t < 1e−10.
    pub fn canonical(&self) -> Self {
        if self.t < 1e-10 {
            return CartanCoordinates::new(0.0, 0.0, wrap(self.theta1 + self.theta2));
        }
        let mut theta1 = wrap(self.theta1);
        let mut theta2 = self.theta2;
        if theta1 >= PI {
            theta1 -= PI;
            theta2 -= PI;
        }
        CartanCoordinates::new(theta1, self.t, wrap(theta2))
    }
}

fn wrap(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// KAK decomposition of a real unimodular matrix.
///
/// Splits g into its rotation-like part ρ₁·k(α) and its reflection-like
/// part ρ₂·[[cos β, sin β], [sin β, −cos β]]; then e^{±t/2} = ρ₁ ± ρ₂,
/// θ₁ = (α + β)/2 and θ₂ = (α − β)/2.
pub fn cartan_decompose(g: &GroupElement) -> Result<CartanCoordinates> {
    if !g.is_real(1e-14 * g.frobenius_norm().max(1.0)) {
        return Err(Error::invalid(
            "group_core",
            "cartan_decompose requires real entries",
        ));
    }
    let [a, b, c, d] = g.entries().map(|z| z.re);
    let p = 0.5 * (a + d);
    let q = 0.5 * (c - b);
    let r = 0.5 * (a - d);
    let u = 0.5 * (b + c);
    let rho2 = r.hypot(u);
    let alpha = q.atan2(p);
    let t = 2.0 * rho2.asinh();
    if t < 1e-10 {
        return Ok(CartanCoordinates::new(0.0, 0.0, wrap(alpha)));
    }
    let beta = u.atan2(r);
    Ok(CartanCoordinates::new(0.5 * (alpha + beta), t, 0.5 * (alpha - beta)).canonical())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn series_exp(m: [Complex64; 4]) -> [Complex64; 4] {
        let mut acc = [c(1.0), c(0.0), c(0.0), c(1.0)];
        let mut term = acc;
        for k in 1..20 {
            term = mat_mul(&term, &m);
            for z in term.iter_mut() {
                *z /= k as f64;
            }
            for i in 0..4 {
                acc[i] += term[i];
            }
        }
        acc
    }

    #[test]
    fn identity_and_inverse() {
        let g = CartanCoordinates::new(0.4, 0.9, 1.1).reconstruct();
        assert_eq!(GroupElement::identity().compose(&g), g);
        let e = g.compose(&g.inverse());
        assert!(e.max_abs_diff(&GroupElement::identity()) < 1e-12);
    }

    #[test]
    fn one_parameter_subgroup_is_additive() {
        let g = GroupElement::boost(0.3).compose(&GroupElement::boost(0.5));
        assert!(g.max_abs_diff(&GroupElement::boost(0.8)) < 1e-14);
    }

    #[test]
    fn bracket_table() {
        let (h, e, f) = (LieAlgebraElement::H, LieAlgebraElement::E, LieAlgebraElement::F);
        assert!(h.bracket(&e).max_abs_diff(&e.scale(c(2.0))) < 1e-14);
        assert!(h.bracket(&f).max_abs_diff(&f.scale(c(-2.0))) < 1e-14);
        assert!(e.bracket(&f).max_abs_diff(&h) < 1e-14);
    }

    #[test]
    fn exponential_examples() {
        let id = exp_algebra(&LieAlgebraElement::H, c(0.0));
        assert!(id.max_abs_diff(&GroupElement::identity()) < 1e-15);

        let t = 0.7;
        let diag = exp_algebra(&LieAlgebraElement::H, c(t));
        let expected = GroupElement::from_real(t.exp(), 0.0, 0.0, (-t).exp()).unwrap();
        assert!(diag.max_abs_diff(&expected) < 1e-14);

        // exp(θ(E − F)) = [[cos θ, sin θ], [−sin θ, cos θ]] = k(−θ)
        let theta = 0.83;
        let x = LieAlgebraElement::rotation_generator();
        let closed = exp_algebra(&x, c(theta));
        let series = series_exp(x.scale(c(theta)).matrix());
        let from_series = GroupElement::from_entries_unchecked(series);
        assert!(closed.max_abs_diff(&from_series) < 1e-12);
        assert!(closed.max_abs_diff(&GroupElement::rotation(-theta)) < 1e-14);
    }

    #[test]
    fn exponential_agrees_with_series_for_complex_elements() {
        let xs = [
            LieAlgebraElement::new(Complex64::new(0.3, -0.2), c(0.7), Complex64::new(-0.1, 0.4)),
            LieAlgebraElement::raising(),
            LieAlgebraElement::E,
            LieAlgebraElement::real(1e-5, 2e-4, -3e-4),
        ];
        for x in xs {
            for tau in [c(0.5), Complex64::new(-0.3, 0.8), c(1.3)] {
                let closed = exp_algebra(&x, tau);
                let series = GroupElement::from_entries_unchecked(series_exp(x.scale(tau).matrix()));
                assert!(closed.max_abs_diff(&series) < 1e-12, "x = {x:?}, tau = {tau}");
            }
        }
    }

    #[test]
    fn cartan_examples() {
        let id = cartan_decompose(&GroupElement::identity()).unwrap();
        assert_eq!(id, CartanCoordinates::new(0.0, 0.0, 0.0));

        let a = cartan_decompose(&GroupElement::boost(1.2)).unwrap();
        assert!(a.theta1.abs() < 1e-15 && (a.t - 1.2).abs() < 1e-14 && a.theta2.abs() < 1e-15);

        let g = CartanCoordinates::new(0.4, 0.9, 1.1).reconstruct();
        let kak = cartan_decompose(&g).unwrap();
        assert!(kak.reconstruct().max_abs_diff(&g) < 1e-10);
        assert!((kak.theta1 - 0.4).abs() < 1e-12 && (kak.theta2 - 1.1).abs() < 1e-12);
    }

    #[test]
    fn cartan_rejects_complex_input() {
        let g = GroupElement::boost_complex(Complex64::new(0.2, 0.3));
        assert!(cartan_decompose(&g).is_err());
    }

    #[test]
    fn determinant_is_checked() {
        assert!(GroupElement::from_real(1.0, 1.0, 0.0, 1.0).is_ok());
        assert!(matches!(
            GroupElement::from_real(2.0, 0.0, 0.0, 1.0),
            Err(Error::Determinant { .. })
        ));
    }

    #[test]
    fn long_chains_keep_unit_determinant() {
        let factors: Vec<_> = (0..150)
            .map(|i| CartanCoordinates::new(0.1 * i as f64, 0.01, -0.07 * i as f64).reconstruct())
            .collect();
        let g = GroupElement::product(factors.iter()).unwrap();
        assert!((g.determinant() - 1.0).norm() < 1e-12);
    }
}
