//! Truncated multivariate Taylor polynomials ("jets") and jet-valued 2×2
//! matrices, used to carry left/right Lie derivatives through quadratures.
//!
//! A [`JetLayout`] fixes the monomial basis: either all monomials of total
//! degree ≤ N ([`Truncation::TotalDegree`]) or the square-free monomials
//! ([`Truncation::Multilinear`]), which is all a derivative word of
//! distinct letters needs.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{mat_mul, GroupElement, LieAlgebraElement};

/// Maximum number of jet variables (one per derivative letter).
pub const JET_BUDGET: usize = 8;
/// Maximum truncation order for dense layouts.
pub const MAX_JET_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    TotalDegree(usize),
    Multilinear,
}

#[derive(Debug)]
pub struct JetLayout {
    nvars: usize,
    truncation: Truncation,
    exponents: Vec<[u8; JET_BUDGET]>,
    index: HashMap<u64, usize>,
    products: Vec<[u32; 3]>,
}

fn key(e: &[u8; JET_BUDGET]) -> u64 {
    e.iter()
        .enumerate()
        .fold(0u64, |acc, (v, &x)| acc | ((x as u64) << (8 * v)))
}

impl JetLayout {
    /// All monomials in `nvars` variables of total degree ≤ `order`.
    pub fn dense(nvars: usize, order: usize) -> Result<Arc<Self>> {
        check_budget(nvars)?;
        if order > MAX_JET_ORDER {
            return Err(Error::BudgetExceeded {
                requested: order,
                budget: MAX_JET_ORDER,
            });
        }
        let mut exponents = Vec::new();
        let mut current = [0u8; JET_BUDGET];
        enumerate_monomials(nvars, order, 0, &mut current, &mut exponents);
        exponents.sort_by_key(|e| (e.iter().map(|&x| x as u32).sum::<u32>(), std::cmp::Reverse(*e)));
        let index: HashMap<u64, usize> =
            exponents.iter().enumerate().map(|(i, e)| (key(e), i)).collect();
        let degree: Vec<usize> = exponents
            .iter()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .collect();
        let mut products = Vec::new();
        for i in 0..exponents.len() {
            for j in 0..exponents.len() {
                if degree[i] + degree[j] > order {
                    break;
                }
                let k = index[&(key(&exponents[i]) + key(&exponents[j]))];
                products.push([i as u32, j as u32, k as u32]);
            }
        }
        Ok(Arc::new(JetLayout {
            nvars,
            truncation: Truncation::TotalDegree(order),
            exponents,
            index,
            products,
        }))
    }

    /// Square-free monomials in `nvars` variables, indexed by bit mask.
    pub fn multilinear(nvars: usize) -> Result<Arc<Self>> {
        check_budget(nvars)?;
        Ok(cached_multilinear()[nvars].clone())
    }

    fn build_multilinear(nvars: usize) -> Self {
        let size = 1usize << nvars;
        let exponents: Vec<[u8; JET_BUDGET]> = (0..size)
            .map(|mask| {
                let mut e = [0u8; JET_BUDGET];
                for (v, slot) in e.iter_mut().enumerate().take(nvars) {
                    *slot = ((mask >> v) & 1) as u8;
                }
                e
            })
            .collect();
        let index = exponents.iter().enumerate().map(|(i, e)| (key(e), i)).collect();
        let mut products = Vec::new();
        for a in 0..size {
            for b in 0..size {
                if a & b == 0 {
                    products.push([a as u32, b as u32, (a | b) as u32]);
                }
            }
        }
        JetLayout {
            nvars,
            truncation: Truncation::Multilinear,
            exponents,
            index,
            products,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Highest power of a nilpotent jet that can be nonzero.
    pub fn nilpotency(&self) -> usize {
        match self.truncation {
            Truncation::TotalDegree(n) => n,
            Truncation::Multilinear => self.nvars,
        }
    }

    /// Index of the monomial with the given exponents, if it is kept.
    pub fn index_of(&self, exponents: &[u8]) -> Option<usize> {
        if exponents.len() > JET_BUDGET || exponents[self.nvars.min(exponents.len())..].iter().any(|&x| x != 0) {
            return None;
        }
        let mut e = [0u8; JET_BUDGET];
        e[..exponents.len()].copy_from_slice(exponents);
        self.index.get(&key(&e)).copied()
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        &self.exponents[i][..self.nvars]
    }
}

fn check_budget(nvars: usize) -> Result<()> {
    if nvars > JET_BUDGET {
        return Err(Error::BudgetExceeded {
            requested: nvars,
            budget: JET_BUDGET,
        });
    }
    Ok(())
}

fn cached_multilinear() -> &'static [Arc<JetLayout>] {
    static LAYOUTS: OnceLock<Vec<Arc<JetLayout>>> = OnceLock::new();
    LAYOUTS.get_or_init(|| {
        (0..=JET_BUDGET)
            .map(|k| Arc::new(JetLayout::build_multilinear(k)))
            .collect()
    })
}

fn enumerate_monomials(
    nvars: usize,
    remaining: usize,
    var: usize,
    current: &mut [u8; JET_BUDGET],
    out: &mut Vec<[u8; JET_BUDGET]>,
) {
    if var == nvars {
        out.push(*current);
        return;
    }
    for p in 0..=remaining {
        current[var] = p as u8;
        enumerate_monomials(nvars, remaining - p, var + 1, current, out);
    }
    current[var] = 0;
}

/// A truncated Taylor polynomial over a shared [`JetLayout`].
#[derive(Clone, Debug)]
pub struct Jet {
    layout: Arc<JetLayout>,
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn zero(layout: &Arc<JetLayout>) -> Self {
        Jet {
            layout: layout.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); layout.len()],
        }
    }

    pub fn constant(layout: &Arc<JetLayout>, value: Complex64) -> Self {
        let mut j = Jet::zero(layout);
        j.coeffs[0] = value;
        j
    }

    /// `value + ε_var`.
    pub fn variable(layout: &Arc<JetLayout>, var: usize, value: Complex64) -> Self {
        let mut j = Jet::constant(layout, value);
        let mut e = [0u8; JET_BUDGET];
        e[var] = 1;
        let idx = layout.index_of(&e[..layout.nvars]).expect("variable index within layout");
        j.coeffs[idx] = Complex64::new(1.0, 0.0);
        j
    }

    pub fn from_coeffs(layout: &Arc<JetLayout>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), layout.len(), "coefficient count must match layout");
        Jet {
            layout: layout.clone(),
            coeffs,
        }
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// The order-0 part.
    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Taylor coefficient of the monomial with the given exponents (zero if
    /// the monomial is truncated away).
    pub fn coeff(&self, exponents: &[u8]) -> Complex64 {
        self.layout
            .index_of(exponents)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// Coefficient of ε₁ε₂…ε_d, i.e. the mixed first-order derivative
    /// ∂^d/∂ε₁…∂ε_d at 0.
    pub fn mixed(&self) -> Complex64 {
        let ones = [1u8; JET_BUDGET];
        self.coeff(&ones[..self.layout.nvars])
    }

    pub fn fill(&mut self, value: Complex64) {
        self.coeffs.iter_mut().for_each(|c| *c = value);
    }

    pub fn copy_from(&mut self, other: &Jet) {
        self.coeffs.copy_from_slice(&other.coeffs);
    }

    /// `out = self · other`.
    pub fn mul_into(&self, other: &Jet, out: &mut Jet) {
        out.fill(Complex64::new(0.0, 0.0));
        let a = &self.coeffs;
        let b = &other.coeffs;
        let o = &mut out.coeffs;
        for &[i, j, k] in &self.layout.products {
            o[k as usize] += a[i as usize] * b[j as usize];
        }
    }

    /// `self += k · other`.
    pub fn axpy(&mut self, k: Complex64, other: &Jet) {
        for (x, y) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *x += k * y;
        }
    }

    pub fn scale(&self, k: Complex64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// φ(self) from the Taylor coefficients `taylor[k] = φ^{(k)}(v)/k!` of φ
    /// at the order-0 value v; missing high-order entries count as zero.
    pub fn compose(&self, taylor: &[Complex64]) -> Jet {
        let mut out = Jet::zero(&self.layout);
        let mut tmp = Jet::zero(&self.layout);
        let mut delta = self.clone();
        self.compose_into(taylor, &mut delta, &mut tmp, &mut out);
        out
    }

    /// Allocation-free [`Jet::compose`]; `delta` and `tmp` are scratch.
    pub fn compose_into(&self, taylor: &[Complex64], delta: &mut Jet, tmp: &mut Jet, out: &mut Jet) {
        let top = self.layout.nilpotency().min(taylor.len().saturating_sub(1));
        delta.copy_from(self);
        delta.coeffs[0] = Complex64::new(0.0, 0.0);
        out.fill(Complex64::new(0.0, 0.0));
        out.coeffs[0] = taylor.get(top).copied().unwrap_or_default();
        for k in (0..top).rev() {
            out.mul_into(delta, tmp);
            std::mem::swap(out, tmp);
            out.coeffs[0] += taylor[k];
        }
    }

    /// Principal-branch power `self^p`.
    pub fn powc(&self, p: Complex64) -> Jet {
        let taylor = power_taylor(self.value(), p, self.layout.nilpotency());
        self.compose(&taylor)
    }

    pub fn exp(&self) -> Jet {
        let v = self.value().exp();
        let mut taylor = Vec::with_capacity(self.layout.nilpotency() + 1);
        let mut fact = 1.0;
        for k in 0..=self.layout.nilpotency() {
            if k > 0 {
                fact *= k as f64;
            }
            taylor.push(v / fact);
        }
        self.compose(&taylor)
    }

    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Taylor coefficients of z ↦ z^p at z = v (principal branch), up to `order`.
pub fn power_taylor(v: Complex64, p: Complex64, order: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut c = (p * v.ln()).exp();
    let inv = v.inv();
    out.push(c);
    for k in 1..=order {
        c = c * (p - (k as f64 - 1.0)) * inv / k as f64;
        out.push(c);
    }
    out
}

fn same_layout(a: &Jet, b: &Jet) {
    assert!(Arc::ptr_eq(&a.layout, &b.layout), "jets must share a layout");
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        same_layout(self, o);
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        same_layout(self, o);
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        same_layout(self, o);
        let mut out = Jet::zero(&self.layout);
        self.mul_into(o, &mut out);
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// A 2×2 matrix `[[a, b], [c, d]]` of jets.
#[derive(Clone, Debug)]
pub struct JetMatrix {
    pub a: Jet,
    pub b: Jet,
    pub c: Jet,
    pub d: Jet,
}

impl JetMatrix {
    pub fn constant(layout: &Arc<JetLayout>, g: &GroupElement) -> Self {
        let [a, b, c, d] = g.entries();
        JetMatrix {
            a: Jet::constant(layout, a),
            b: Jet::constant(layout, b),
            c: Jet::constant(layout, c),
            d: Jet::constant(layout, d),
        }
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        self.a.layout()
    }

    pub fn mul(&self, o: &JetMatrix) -> JetMatrix {
        JetMatrix {
            a: &(&self.a * &o.a) + &(&self.b * &o.c),
            b: &(&self.a * &o.b) + &(&self.b * &o.d),
            c: &(&self.c * &o.a) + &(&self.d * &o.c),
            d: &(&self.c * &o.b) + &(&self.d * &o.d),
        }
    }

    /// Adjugate `[[d, −b], [−c, a]]`: the inverse of a unimodular matrix.
    pub fn adjugate(&self) -> JetMatrix {
        JetMatrix {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    /// The order-0 matrix.
    pub fn value(&self) -> [Complex64; 4] {
        [self.a.value(), self.b.value(), self.c.value(), self.d.value()]
    }

    pub fn determinant(&self) -> Jet {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    /// Truncated exp(ε_var·X) = Σ ε^k X^k / k!.
    pub fn exponential(layout: &Arc<JetLayout>, var: usize, x: &LieAlgebraElement) -> JetMatrix {
        let m = x.matrix();
        let mut entries: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); layout.len()]);
        let mut power = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let mut fact = 1.0;
        let mut e = [0u8; JET_BUDGET];
        for k in 0..=layout.nilpotency() {
            if k > 0 {
                power = mat_mul(&power, &m);
                fact *= k as f64;
            }
            e[var] = k as u8;
            if let Some(idx) = layout.index_of(&e[..layout.nvars()]) {
                for (slot, p) in entries.iter_mut().zip(power.iter()) {
                    slot[idx] = p / fact;
                }
            }
        }
        let [a, b, c, d] = entries;
        JetMatrix {
            a: Jet::from_coeffs(layout, a),
            b: Jet::from_coeffs(layout, b),
            c: Jet::from_coeffs(layout, c),
            d: Jet::from_coeffs(layout, d),
        }
    }
}

/// Which side a derivative letter acts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// L_X F(g) = d/dε F(exp(εX)·g)
    Left,
    /// R_X F(g) = d/dε F(g·exp(εX))
    Right,
}

/// Lifts g to the jet matrix
/// exp(ε_{l_p}X_{l_p})···exp(ε_{l_1}X_{l_1})·g·exp(ε_{r_1}Y_{r_1})···exp(ε_{r_q}Y_{r_q}),
/// one jet variable per direction (variable i belongs to `directions[i]`).
///
/// The first left and first right direction sit next to g, so that the
/// mixed coefficient equals the operator product D₁D₂…D_k F(g) with the
/// letters in list order.
pub fn jet_lift(
    g: &GroupElement,
    directions: &[(Side, LieAlgebraElement)],
    layout: &Arc<JetLayout>,
) -> Result<JetMatrix> {
    check_budget(directions.len())?;
    if directions.len() != layout.nvars() {
        return Err(Error::invalid(
            "group_core",
            format!(
                "jet layout has {} variables but {} directions were given",
                layout.nvars(),
                directions.len()
            ),
        ));
    }
    let mut m = JetMatrix::constant(layout, g);
    for (var, (side, x)) in directions.iter().enumerate() {
        let e = JetMatrix::exponential(layout, var, x);
        m = match side {
            Side::Left => e.mul(&m),
            Side::Right => m.mul(&e),
        };
    }
    Ok(m)
}

/// A function on the group that can be evaluated on jet-valued matrices,
/// i.e. a holomorphic function of the matrix entries near the group.
pub trait GroupFunction: Sync {
    fn eval_jet(&self, g: &JetMatrix) -> Jet;

    fn eval(&self, g: &GroupElement) -> Complex64 {
        let layout = JetLayout::multilinear(0).expect("empty layout");
        self.eval_jet(&JetMatrix::constant(&layout, g)).value()
    }
}
