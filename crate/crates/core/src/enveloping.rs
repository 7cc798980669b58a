//! Left/right derivative words on functions on G, the derived action of
//! sl(2) on K-types, ladder coefficients, and the expression of K-types as
//! ladder words applied to the spherical vector.
//!
//! Ladder coefficients are measured by differentiating the group action,
//! never taken from a closed formula.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{GroupElement, LieAlgebraElement};
use crate::jet::{jet_lift, GroupFunction, JetLayout, Side, JET_BUDGET};
use crate::principal_series::{
    fourier_coefficients, transformed_ktype, IntegrandScratch, KTypeVector, Parity, PrincipalSeries,
};

/// Below this modulus a ladder coefficient counts as vanishing.
pub const EXCEPTIONAL_THRESHOLD: f64 = 1e-8;
/// Maximum off-target mass tolerated in a ladder step.
pub const OFF_TARGET_TOLERANCE: f64 = 1e-9;
const PRUNE_RELATIVE: f64 = 1e-13;

/// One derivative letter: L_X or R_X.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Letter {
    pub side: Side,
    pub element: LieAlgebraElement,
}

impl Letter {
    pub fn left(element: LieAlgebraElement) -> Self {
        Letter {
            side: Side::Left,
            element,
        }
    }

    pub fn right(element: LieAlgebraElement) -> Self {
        Letter {
            side: Side::Right,
            element,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::Left => 'L',
            Side::Right => 'R',
        };
        write!(f, "{side}[{}]", element_label(&self.element))
    }
}

/// Short name for the standard basis and ladder elements, coefficients
/// otherwise.
pub fn element_label(x: &LieAlgebraElement) -> String {
    let named = [
        (LieAlgebraElement::H, "H"),
        (LieAlgebraElement::E, "E"),
        (LieAlgebraElement::F, "F"),
        (LieAlgebraElement::raising(), "X+"),
        (LieAlgebraElement::lowering(), "X-"),
        (LieAlgebraElement::rotation_generator(), "E-F"),
    ];
    for (y, name) in named {
        if x.max_abs_diff(&y) == 0.0 {
            return name.to_string();
        }
        if x.max_abs_diff(&-y) == 0.0 {
            return format!("-{name}");
        }
    }
    format!("({},{},{})", x.h, x.e, x.f)
}

/// coefficient · D₁D₂…D_k, letters in operator order (D₁ applied last).
#[derive(Clone, Debug, PartialEq)]
pub struct WordTerm {
    pub coefficient: Complex64,
    pub letters: Vec<Letter>,
}

/// A finite linear combination of products of left/right derivative letters.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct EnvelopingWord {
    terms: Vec<WordTerm>,
}

impl EnvelopingWord {
    /// The identity operator (empty product).
    pub fn one() -> Self {
        EnvelopingWord::monomial(Vec::new())
    }

    pub fn monomial(letters: Vec<Letter>) -> Self {
        EnvelopingWord {
            terms: vec![WordTerm {
                coefficient: Complex64::new(1.0, 0.0),
                letters,
            }],
        }
    }

    pub fn from_terms(terms: Vec<WordTerm>) -> Self {
        EnvelopingWord { terms }
    }

    pub fn terms(&self) -> &[WordTerm] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.letters.len()).max().unwrap_or(0)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        EnvelopingWord {
            terms: self
                .terms
                .iter()
                .map(|t| WordTerm {
                    coefficient: t.coefficient * k,
                    letters: t.letters.clone(),
                })
                .collect(),
        }
    }

    pub fn plus(&self, other: &EnvelopingWord) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        EnvelopingWord { terms }
    }

    /// Operator product `self ∘ other`.
    pub fn then(&self, other: &EnvelopingWord) -> Self {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let mut letters = a.letters.clone();
                letters.extend(b.letters.iter().copied());
                terms.push(WordTerm {
                    coefficient: a.coefficient * b.coefficient,
                    letters,
                });
            }
        }
        EnvelopingWord { terms }
    }

    /// Every term reordered with its left letters first (stable within each
    /// side).
    pub fn partitioned(&self) -> Self {
        EnvelopingWord {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let (mut left, right): (Vec<Letter>, Vec<Letter>) =
                        t.letters.iter().partition(|l| l.side == Side::Left);
                    left.extend(right);
                    WordTerm {
                        coefficient: t.coefficient,
                        letters: left,
                    }
                })
                .collect(),
        }
    }

    /// All letters moved to `side`; with `negate`, X ↦ −X letterwise
    /// (the transpose rule ⟨ρ(g)f, dπ°(Y)w⟩ = −L_Y⟨ρ(·)f, w⟩(g)).
    pub fn on_side(&self, side: Side, negate: bool) -> Self {
        EnvelopingWord {
            terms: self
                .terms
                .iter()
                .map(|t| WordTerm {
                    coefficient: t.coefficient,
                    letters: t
                        .letters
                        .iter()
                        .map(|l| Letter {
                            side,
                            element: if negate { -l.element } else { l.element },
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for EnvelopingWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if t.coefficient != Complex64::new(1.0, 0.0) {
                write!(f, "({})", t.coefficient)?;
            }
            if t.letters.is_empty() {
                f.write_str("1")?;
            }
            for (k, l) in t.letters.iter().enumerate() {
                if k > 0 || t.coefficient != Complex64::new(1.0, 0.0) {
                    f.write_str("·")?;
                }
                write!(f, "{l}")?;
            }
        }
        Ok(())
    }
}

/// Applies a derivative word to F at g: each term is the mixed first-order
/// jet coefficient of F(jet_lift(g, letters)), with
/// L_X F(g) = d/dε F(exp(εX)g) and R_X F(g) = d/dε F(g·exp(εX)).
pub fn lie_derivative_word(
    word: &EnvelopingWord,
    f: &dyn GroupFunction,
    g: &GroupElement,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for term in &word.terms {
        if term.letters.len() > JET_BUDGET {
            return Err(Error::BudgetExceeded {
                requested: term.letters.len(),
                budget: JET_BUDGET,
            });
        }
        let layout = JetLayout::multilinear(term.letters.len())?;
        let directions: Vec<(Side, LieAlgebraElement)> =
            term.letters.iter().map(|l| (l.side, l.element)).collect();
        let lifted = jet_lift(g, &directions, &layout)?;
        acc += term.coefficient * f.eval_jet(&lifted).mixed();
    }
    Ok(acc)
}

/// dπ(X)v = d/dε ρ(exp(εX))v at ε = 0, computed by carrying an order-1 jet
/// through the action on the grid and projecting onto Fourier modes.
pub fn derived_action(
    series: &PrincipalSeries,
    x: &LieAlgebraElement,
    v: &KTypeVector,
) -> Result<KTypeVector> {
    if v.parity() != series.parity() {
        return Err(Error::ParityMismatch {
            detail: "vector and realization have different parity".into(),
        });
    }
    let limit = series.grid() / 4;
    if v.bandwidth() + 2 > limit {
        return Err(Error::BandwidthOverflow {
            limit,
            tail: 1.0,
        });
    }
    let layout = JetLayout::multilinear(1)?;
    let lifted = jet_lift(&GroupElement::identity(), &[(Side::Left, *x)], &layout)?;
    let ginv = lifted.adjugate();
    let lambda = series.exponent();
    let mut scratch = IntegrandScratch::new(&layout);
    let modes: Vec<(i32, Complex64)> = v.iter().filter(|(_, c)| c.norm() > 0.0).collect();
    let samples: Vec<Complex64> = series
        .trig()
        .iter()
        .map(|&cs| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(n, c) in &modes {
                transformed_ktype(lambda, n, &ginv, cs, &mut scratch);
                acc += c * scratch.out.coeffs()[1];
            }
            acc
        })
        .collect();
    let spectrum = fourier_coefficients(&samples);
    let peak = spectrum.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    KTypeVector::from_coefficients(
        series.parity(),
        spectrum.into_iter().filter(|(k, c)| {
            series.parity().admits(*k) && k.unsigned_abs() as usize <= limit && c.norm() > PRUNE_RELATIVE * peak
        }),
    )
}

/// Raising (X₊ = H + i(E+F)) or lowering (X₋ = H − i(E+F)) direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ladder {
    Raising,
    Lowering,
}

impl Ladder {
    pub fn element(self) -> LieAlgebraElement {
        match self {
            Ladder::Raising => LieAlgebraElement::raising(),
            Ladder::Lowering => LieAlgebraElement::lowering(),
        }
    }

    pub fn shift(self) -> i32 {
        match self {
            Ladder::Raising => 2,
            Ladder::Lowering => -2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Ladder::Raising => "X+",
            Ladder::Lowering => "X-",
        }
    }

    /// The direction that walks from 0 towards `n`.
    pub fn towards(n: i32) -> Ladder {
        if n >= 0 {
            Ladder::Raising
        } else {
            Ladder::Lowering
        }
    }
}

/// Measures c_n^± (the e_{n±2} coefficient of dπ(X±)e_n), rejecting
/// steps that leak into other modes.
pub fn ladder_coefficient(series: &PrincipalSeries, n: i32, ladder: Ladder) -> Result<Complex64> {
    let image = derived_action(series, &ladder.element(), &KTypeVector::basis(series.parity(), n)?)?;
    let target = n + ladder.shift();
    let c = image.get(target);
    let residual = image
        .iter()
        .filter(|(k, _)| *k != target)
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > OFF_TARGET_TOLERANCE {
        return Err(Error::OffTargetResidual { mode: n, residual });
    }
    Ok(c)
}

/// Table n ↦ (c_n⁺, c_n⁻) for |n| ≤ N_max.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderCoefficients {
    pub s: Complex64,
    pub parity: Parity,
    pub table: Vec<(i32, Complex64, Complex64)>,
}

impl LadderCoefficients {
    pub fn get(&self, n: i32) -> Option<(Complex64, Complex64)> {
        self.table
            .iter()
            .find(|(k, _, _)| *k == n)
            .map(|&(_, p, m)| (p, m))
    }
}

pub fn ladder_coefficients(series: &PrincipalSeries, n_max: usize) -> Result<LadderCoefficients> {
    if n_max > series.grid() / 8 {
        return Err(Error::invalid(
            "enveloping",
            format!("N_max = {n_max} exceeds grid/8 = {}", series.grid() / 8),
        ));
    }
    let n_max = n_max as i32;
    let mut table = Vec::new();
    for n in -n_max..=n_max {
        if !series.parity().admits(n) {
            continue;
        }
        let up = ladder_coefficient(series, n, Ladder::Raising)?;
        let down = ladder_coefficient(series, n, Ladder::Lowering)?;
        table.push((n, up, down));
    }
    Ok(LadderCoefficients {
        s: series.s(),
        parity: series.parity(),
        table,
    })
}

/// e_n written as scale · (X±)^{|n|/2} applied to the spherical vector e₀.
#[derive(Clone, Debug, PartialEq)]
pub struct KTypeExpression {
    pub n: i32,
    /// Single product of |n|/2 ladder letters, tagged right-acting.
    pub word: EnvelopingWord,
    pub scale: Complex64,
    /// Measured ladder coefficients along the path e₀ → e_n.
    pub path: Vec<Complex64>,
    /// ‖scale·word·e₀ − e_n‖.
    pub residual: f64,
}

/// A★ step: e_n = scale · dπ(X)^{|n|/2} e₀, with X the ladder towards n.
///
/// Fails with `ExceptionalParameter` when a ladder coefficient on the path
/// vanishes, i.e. e_n is not reachable from e₀ at this s.
pub fn express_ktype(series: &PrincipalSeries, n: i32) -> Result<KTypeExpression> {
    if series.parity() != Parity::Even || !Parity::Even.admits(n) {
        return Err(Error::invalid(
            "enveloping",
            "only the even series has a spherical vector; n must be even",
        ));
    }
    let ladder = Ladder::towards(n);
    let steps = (n.unsigned_abs() / 2) as usize;
    let mut path = Vec::with_capacity(steps);
    let mut scale = Complex64::new(1.0, 0.0);
    let mut k = 0;
    for _ in 0..steps {
        let c = ladder_coefficient(series, k, ladder)?;
        if c.norm() < EXCEPTIONAL_THRESHOLD {
            return Err(Error::ExceptionalParameter {
                s: series.s(),
                mode: k,
                modulus: c.norm(),
            });
        }
        path.push(c);
        scale /= c;
        k += ladder.shift();
    }
    let mut v = KTypeVector::basis(Parity::Even, 0)?;
    for _ in 0..steps {
        v = derived_action(series, &ladder.element(), &v)?;
    }
    let residual = v
        .scale(scale)
        .sub(&KTypeVector::basis(Parity::Even, n)?)?
        .norm();
    Ok(KTypeExpression {
        n,
        word: EnvelopingWord::monomial(vec![Letter::right(ladder.element()); steps]),
        scale,
        path,
        residual,
    })
}

/// A located zero of a ladder coefficient on the real s axis.
#[derive(Clone, Debug, PartialEq)]
pub struct ExceptionalPoint {
    pub s: f64,
    pub modulus: f64,
    /// (mode n, direction) of every path coefficient vanishing here.
    pub coefficients: Vec<(i32, Ladder)>,
}

/// Scans the ladder coefficients used by `express_ktype` for |n| ≤ n_max
/// along real s ∈ [lo, hi] and refines every local minimum of |c| by
/// golden-section search; minima below 1e−8 are reported.
pub fn scan_exceptional(
    lo: f64,
    hi: f64,
    n_max: usize,
    grid: usize,
    step: f64,
) -> Result<Vec<ExceptionalPoint>> {
    if !(hi > lo) || step <= 0.0 {
        return Err(Error::invalid("enveloping", "scan needs lo < hi and a positive step"));
    }
    let series = PrincipalSeries::new(Complex64::new(lo, 0.0), Parity::Even, grid)?;
    let count = ((hi - lo) / step).ceil() as usize;
    let nodes: Vec<f64> = (0..=count).map(|i| (lo + i as f64 * step).min(hi)).collect();
    let mut found: Vec<(f64, f64, i32, Ladder)> = Vec::new();
    let max_k = n_max.saturating_sub(2) as i32;
    for ladder in [Ladder::Raising, Ladder::Lowering] {
        for k in (0..=max_k).step_by(2) {
            let mode = if ladder == Ladder::Raising { k } else { -k };
            let modulus = |s: f64| -> Result<f64> {
                Ok(ladder_coefficient(&series.at(Complex64::new(s, 0.0)), mode, ladder)?.norm())
            };
            let values = nodes.iter().map(|&s| modulus(s)).collect::<Result<Vec<f64>>>()?;
            for i in 0..values.len() {
                let left = if i == 0 { f64::INFINITY } else { values[i - 1] };
                let right = values.get(i + 1).copied().unwrap_or(f64::INFINITY);
                if values[i] > left || values[i] > right {
                    continue;
                }
                let a = nodes[i.saturating_sub(1)];
                let b = nodes[(i + 1).min(nodes.len() - 1)];
                let (s, m) = golden_section(a, b, &modulus)?;
                if m < EXCEPTIONAL_THRESHOLD {
                    found.push((s, m, mode, ladder));
                }
            }
        }
    }
    found.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut points: Vec<ExceptionalPoint> = Vec::new();
    for (s, m, mode, ladder) in found {
        match points.last_mut() {
            Some(p) if (p.s - s).abs() < 1e-6 => {
                if !p.coefficients.contains(&(mode, ladder)) {
                    p.coefficients.push((mode, ladder));
                }
                if m < p.modulus {
                    p.s = s;
                    p.modulus = m;
                }
            }
            _ => points.push(ExceptionalPoint {
                s,
                modulus: m,
                coefficients: vec![(mode, ladder)],
            }),
        }
    }
    Ok(points)
}

fn golden_section(mut a: f64, mut b: f64, f: &dyn Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}
