//! Decomposition of K-finite matrix elements: the spherical-case derivative
//! identity, finite-dimensional matrix elements, dictionary fits for the
//! non-spherical case, and limits at exceptional parameters.

use std::f64::consts::TAU;
use std::fmt::{self, Write as _};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::enveloping::{express_ktype, lie_derivative_word, EnvelopingWord, KTypeExpression, Ladder, Letter};
use crate::error::{Error, Result};
use crate::format_complex;
use crate::group::GroupElement;
use crate::jet::{jet_lift, GroupFunction, JetLayout, Side, MAX_JET_ORDER};
use crate::principal_series::{MatrixCoefficient, Parity, PrincipalSeries, DEFAULT_GRID};
use crate::sampling::fit_and_holdout;

/// Relative pivot below which a column is pruned.
pub const PRUNE_PIVOT: f64 = 1e-10;
/// Largest accepted condition number of the retained block.
pub const MAX_CONDITION: f64 = 1e12;
/// Holdout residual a certificate must reach.
pub const HOLDOUT_TOLERANCE: f64 = 1e-6;
/// Relative change of the circle mean under r → r/2 that signals a pole.
pub const REMOVABILITY_TOLERANCE: f64 = 1e-4;
/// Default fit grid. At 256 nodes the degree-4 jets of Ψ at t ≈ 1.8 carry
/// enough quadrature error to lift a dependent column above the pruning
/// threshold.
pub const FIT_GRID: usize = 512;

/// Sym^ℓ of the standard representation on x^{ℓ−i}y^i, with
/// (g·p)(x, y) = p(ax + cy, bx + dy).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiniteDimRep {
    ell: usize,
}

impl FiniteDimRep {
    pub fn new(ell: usize) -> Self {
        FiniteDimRep { ell }
    }

    pub fn highest_weight(&self) -> usize {
        self.ell
    }

    pub fn dimension(&self) -> usize {
        self.ell + 1
    }

    /// M(g)[i][j] = coefficient of y^i in (a + cy)^{ℓ−j}(b + dy)^j.
    pub fn matrix(&self, g: &GroupElement) -> Vec<Vec<Complex64>> {
        let [a, b, c, d] = g.entries();
        let dim = self.dimension();
        let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for j in 0..dim {
            let mut poly = vec![Complex64::new(1.0, 0.0)];
            for _ in 0..self.ell - j {
                poly = poly_mul_linear(&poly, a, c);
            }
            for _ in 0..j {
                poly = poly_mul_linear(&poly, b, d);
            }
            for (i, z) in poly.into_iter().enumerate() {
                m[i][j] = z;
            }
        }
        m
    }

    pub fn entry(&self, i: usize, j: usize, g: &GroupElement) -> Complex64 {
        self.matrix(g)[i][j]
    }

    /// The same representation in the K-weight basis
    /// p_j = (x + iy)^{ℓ−j}(x − iy)^j: entry (i, j) is the coefficient of
    /// τ^i in (P + Qτ)^{ℓ−j}(R + Sτ)^j, where g·(x ± iy) is expanded in
    /// x + iy and x − iy.
    pub fn weight_matrix(&self, g: &GroupElement) -> Vec<Vec<Complex64>> {
        let [a, b, c, d] = g.entries();
        let i = Complex64::new(0.0, 1.0);
        let (up, vp) = (a + i * b, c + i * d);
        let (um, vm) = (a - i * b, c - i * d);
        let (p, q) = (0.5 * (up - i * vp), 0.5 * (up + i * vp));
        let (r, s) = (0.5 * (um - i * vm), 0.5 * (um + i * vm));
        let dim = self.dimension();
        let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for j in 0..dim {
            let mut poly = vec![Complex64::new(1.0, 0.0)];
            for _ in 0..self.ell - j {
                poly = poly_mul_linear(&poly, p, q);
            }
            for _ in 0..j {
                poly = poly_mul_linear(&poly, r, s);
            }
            for (k, z) in poly.into_iter().enumerate() {
                m[k][j] = z;
            }
        }
        m
    }

    /// (μ, ν) with h(k(φ₁)gk(φ₂)) = e^{−i(μφ₁ + νφ₂)}h(g) for weight-basis
    /// entry (i, j).
    pub fn entry_weights(&self, i: usize, j: usize) -> (i32, i32) {
        let ell = self.ell as i32;
        (ell - 2 * i as i32, ell - 2 * j as i32)
    }
}

fn poly_mul_linear(p: &[Complex64], c0: Complex64, c1: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); p.len() + 1];
    for (k, z) in p.iter().enumerate() {
        out[k] += z * c0;
        out[k + 1] += z * c1;
    }
    out
}

/// All (ℓ+1)² entries of Sym^ℓ(g), row-major.
pub fn finite_dim_matrix_elements(ell: usize, g: &GroupElement) -> Vec<Complex64> {
    FiniteDimRep::new(ell).matrix(g).into_iter().flatten().collect()
}

/// ⟨ρ_s(g)e_n, e_m⟩ = scale · (−L_Y)^j (R_X)^k Ψ_s(g), where
/// e_n = scale_n·dπ(X)^k e₀ in V_s and the functional e_m is the vector
/// e_{−m} = scale°·dπ°(Y)^j e₀ of the dual realization V_{−s}.
#[derive(Clone, Debug)]
pub struct SphericalIdentity {
    pub s: Complex64,
    pub m: i32,
    pub n: i32,
    pub left: KTypeExpression,
    pub right: KTypeExpression,
    pub word: EnvelopingWord,
    pub scale: Complex64,
    spherical: MatrixCoefficient,
}

impl SphericalIdentity {
    pub fn new(s: Complex64, m: i32, n: i32, grid: usize) -> Result<Self> {
        let series = PrincipalSeries::new(s, Parity::Even, grid)?;
        let right = express_ktype(&series, n)?;
        let left = express_ktype(&series.dual(), -m)?;
        let word = left.word.on_side(Side::Left, true).then(&right.word);
        Ok(SphericalIdentity {
            s,
            m,
            n,
            scale: left.scale * right.scale,
            left,
            right,
            word,
            spherical: series.coefficient(0, 0)?,
        })
    }

    pub fn rhs(&self, g: &GroupElement) -> Result<Complex64> {
        Ok(self.scale * lie_derivative_word(&self.word, &self.spherical, g)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentitySample {
    pub g: GroupElement,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub s: Complex64,
    pub m: i32,
    pub n: i32,
    pub samples: Vec<IdentitySample>,
    pub max_rel_err: f64,
}

/// Compares the quadrature matrix element with the derivative word applied
/// to Ψ_s at every sample; errors are |lhs − rhs|/|lhs| per sample.
pub fn verify_spherical_identity(
    s: Complex64,
    m: i32,
    n: i32,
    samples: &[GroupElement],
    grid: usize,
) -> Result<IdentityReport> {
    let identity = SphericalIdentity::new(s, m, n, grid)?;
    let series = PrincipalSeries::new(s, Parity::Even, grid)?;
    let rows = samples
        .par_iter()
        .map(|g| {
            let lhs = series.matrix_element(m, n, g)?;
            let rhs = identity.rhs(g)?;
            Ok(IdentitySample {
                g: *g,
                lhs,
                rhs,
                rel_err: relative_error(lhs, rhs),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    Ok(IdentityReport {
        s,
        m,
        n,
        samples: rows,
        max_rel_err,
    })
}

fn relative_error(reference: Complex64, value: Complex64) -> f64 {
    let diff = (reference - value).norm();
    if diff == 0.0 {
        0.0
    } else {
        diff / reference.norm()
    }
}

/// (X±)^p as a one-sided word; power 0 is the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LadderPower {
    pub ladder: Ladder,
    pub power: usize,
}

impl LadderPower {
    pub const IDENTITY: LadderPower = LadderPower {
        ladder: Ladder::Raising,
        power: 0,
    };

    /// [1, X₊, …, X₊^N, X₋, …, X₋^N].
    pub fn all(max_power: usize) -> Vec<LadderPower> {
        let mut out = vec![LadderPower::IDENTITY];
        for ladder in [Ladder::Raising, Ladder::Lowering] {
            out.extend((1..=max_power).map(|power| LadderPower { ladder, power }));
        }
        out
    }

    pub fn word(&self, side: Side) -> EnvelopingWord {
        let letter = Letter {
            side,
            element: self.ladder.element(),
        };
        EnvelopingWord::monomial(vec![letter; self.power])
    }

    /// K-weight this word contributes on the given side of Ψ:
    /// R_{X±}^b gives ±2b, L_{X±}^a gives ∓2a.
    pub fn weight(&self, side: Side) -> i32 {
        let w = 2 * self.power as i32 * self.ladder.shift().signum();
        match side {
            Side::Right => w,
            Side::Left => -w,
        }
    }

    fn slot(&self, max_power: usize) -> usize {
        match (self.power, self.ladder) {
            (0, _) => 0,
            (p, Ladder::Raising) => p,
            (p, Ladder::Lowering) => max_power + p,
        }
    }
}

/// One dictionary atom g ↦ h_i(g)·(L^a R^b Ψ_{s₀+δ})(g), with h_i a
/// weight-basis entry of Sym^ℓ (row-major index).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub h_index: usize,
    pub left: LadderPower,
    pub right: LadderPower,
    pub shift: Complex64,
    /// (μ, ν): atom(k(φ₁)gk(φ₂)) = e^{−i(μφ₁ + νφ₂)}·atom(g).
    pub bi_weight: (i32, i32),
}

/// The fit dictionary: Sym^ℓ entries times ladder-power word pairs of
/// degree ≤ N per side on Ψ at shifted spectral parameters.
#[derive(Clone, Debug)]
pub struct Dictionary {
    s0: Complex64,
    ell: usize,
    word_degree: usize,
    shifts: Vec<Complex64>,
    atoms: Vec<Atom>,
    spherical: Vec<MatrixCoefficient>,
    layout: std::sync::Arc<JetLayout>,
}

impl Dictionary {
    pub fn new(s0: Complex64, ell: usize, word_degree: usize, shifts: &[Complex64], grid: usize) -> Result<Self> {
        if 2 * word_degree > MAX_JET_ORDER {
            return Err(Error::BudgetExceeded {
                requested: 2 * word_degree,
                budget: MAX_JET_ORDER,
            });
        }
        if shifts.is_empty() {
            return Err(Error::invalid("decomposition", "at least one spectral shift is required"));
        }
        let words = LadderPower::all(word_degree);
        let rep = FiniteDimRep::new(ell);
        let dim = rep.dimension();
        let mut atoms = Vec::new();
        for &shift in shifts {
            for h_index in 0..dim * dim {
                let (mu, nu) = rep.entry_weights(h_index / dim, h_index % dim);
                for &left in &words {
                    for &right in &words {
                        atoms.push(Atom {
                            h_index,
                            left,
                            right,
                            shift,
                            bi_weight: (mu + left.weight(Side::Left), nu + right.weight(Side::Right)),
                        });
                    }
                }
            }
        }
        let spherical = shifts
            .iter()
            .map(|&d| PrincipalSeries::new(s0 + d, Parity::Even, grid)?.coefficient(0, 0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dictionary {
            s0,
            ell,
            word_degree,
            shifts: shifts.to_vec(),
            atoms,
            spherical,
            layout: JetLayout::dense(2, 2 * word_degree)?,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Keeps the atoms of bi-K-type (μ, ν); the others are orthogonal to
    /// every function of that type under K × K averaging.
    pub fn screened(&self, bi_weight: (i32, i32)) -> Dictionary {
        Dictionary {
            atoms: self.atoms.iter().copied().filter(|a| a.bi_weight == bi_weight).collect(),
            ..self.clone()
        }
    }

    pub fn s0(&self) -> Complex64 {
        self.s0
    }

    /// Parity of every atom under g ↦ −g.
    pub fn parity(&self) -> Parity {
        Parity::of(self.ell as i32)
    }

    /// L_{X_l}^a R_{X_r}^b Ψ(g) for every word pair, from the Taylor
    /// coefficients of Ψ(exp(τ₁X_l)·g·exp(τ₂X_r)).
    pub fn derivative_table(&self, shift_index: usize, g: &GroupElement) -> Result<Vec<Vec<Complex64>>> {
        let n = self.word_degree;
        let slots = 2 * n + 1;
        let mut table = vec![vec![Complex64::new(0.0, 0.0); slots]; slots];
        let f = &self.spherical[shift_index];
        for l in [Ladder::Raising, Ladder::Lowering] {
            for r in [Ladder::Raising, Ladder::Lowering] {
                let lifted = jet_lift(g, &[(Side::Left, l.element()), (Side::Right, r.element())], &self.layout)?;
                let jet = f.eval_jet(&lifted);
                for a in 0..=n {
                    for b in 0..=n {
                        let left = LadderPower { ladder: l, power: a };
                        let right = LadderPower { ladder: r, power: b };
                        table[left.slot(n)][right.slot(n)] =
                            jet.coeff(&[a as u8, b as u8]) * factorial(a) * factorial(b);
                    }
                }
            }
        }
        Ok(table)
    }

    /// Values of all atoms at g, in atom order.
    pub fn evaluate(&self, g: &GroupElement) -> Result<Vec<Complex64>> {
        let h: Vec<Complex64> = FiniteDimRep::new(self.ell).weight_matrix(g).into_iter().flatten().collect();
        let tables = (0..self.shifts.len())
            .map(|i| self.derivative_table(i, g))
            .collect::<Result<Vec<_>>>()?;
        let n = self.word_degree;
        Ok(self
            .atoms
            .iter()
            .map(|atom| {
                let si = self.shifts.iter().position(|&d| d == atom.shift).unwrap_or(0);
                h[atom.h_index] * tables[si][atom.left.slot(n)][atom.right.slot(n)]
            })
            .collect())
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Result of the pruned, column-pivoted least-squares solve.
#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquares {
    /// One coefficient per input column; pruned columns are zero.
    pub coefficients: Vec<Complex64>,
    /// Retained columns in pivot order.
    pub retained: Vec<usize>,
    /// Condition number of the retained triangular block.
    pub condition: f64,
}

/// Column selection rule of [`pivoted_least_squares`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pivoting {
    /// Largest remaining column norm first; stops at the first pivot below
    /// `prune` times the leading one.
    ColumnNorm,
    /// Columns in input order; a column whose remaining norm is below
    /// `prune` (columns are unit-normalized) is pruned and the scan goes on.
    /// The retained set is then the same for every parameter value with the
    /// same dependency pattern.
    Ordered,
}

/// min ‖Ax − b‖ by Householder QR with column pivoting on unit-norm
/// columns and pruning at relative pivot `prune`.
pub fn pivoted_least_squares(
    columns: &[Vec<Complex64>],
    rhs: &[Complex64],
    prune: f64,
    pivoting: Pivoting,
) -> Result<LeastSquares> {
    let rows = rhs.len();
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::invalid("decomposition", "column length differs from right-hand side"));
    }
    let norms: Vec<f64> = columns.iter().map(|c| vec_norm(c)).collect();
    let mut order: Vec<usize> = (0..columns.len()).filter(|&j| norms[j] > 0.0).collect();
    let mut a: Vec<Vec<Complex64>> = order
        .iter()
        .map(|&j| columns[j].iter().map(|z| z / norms[j]).collect())
        .collect();
    let mut b = rhs.to_vec();
    let steps = rows;
    let mut diag = Vec::new();
    let mut lead = 0.0f64;
    let mut k = 0;
    while k < steps.min(a.len()) {
        let (best, best_norm) = match pivoting {
            Pivoting::ColumnNorm => (k..a.len())
                .map(|j| (j, vec_norm(&a[j][k..])))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc }),
            Pivoting::Ordered => (k, vec_norm(&a[k][k..])),
        };
        if k == 0 && pivoting == Pivoting::ColumnNorm {
            lead = best_norm;
        } else if pivoting == Pivoting::Ordered {
            lead = 1.0;
        }
        if best_norm <= prune * lead || best_norm == 0.0 {
            match pivoting {
                Pivoting::ColumnNorm => break,
                Pivoting::Ordered => {
                    a.remove(k);
                    order.remove(k);
                    continue;
                }
            }
        }
        a.swap(k, best);
        order.swap(k, best);
        let x0 = a[k][k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * best_norm;
        let mut v: Vec<Complex64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vv > 0.0 {
            let reflect = |col: &mut [Complex64]| {
                let dot: Complex64 = v.iter().zip(col.iter()).map(|(vi, ci)| vi.conj() * ci).sum();
                let f = dot * (2.0 / vv);
                for (ci, vi) in col.iter_mut().zip(&v) {
                    *ci -= f * vi;
                }
            };
            for col in a.iter_mut().skip(k) {
                reflect(&mut col[k..]);
            }
            reflect(&mut b[k..]);
        }
        a[k][k] = alpha;
        for z in a[k][k + 1..].iter_mut() {
            *z = Complex64::new(0.0, 0.0);
        }
        diag.push(alpha);
        k += 1;
    }
    let rank = diag.len();
    if rank == 0 {
        return Err(Error::RankDeficient {
            reason: "every dictionary column vanishes on the samples".into(),
        });
    }
    let r11 = DMatrix::from_fn(rank, rank, |i, j| a[j][i]);
    let sv = r11.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::RankDeficient {
            reason: format!("condition number {condition:e} of the retained block exceeds 1e12"),
        });
    }
    let mut z = vec![Complex64::new(0.0, 0.0); rank];
    for i in (0..rank).rev() {
        let mut acc = b[i];
        for j in i + 1..rank {
            acc -= a[j][i] * z[j];
        }
        z[i] = acc / a[i][i];
    }
    let mut coefficients = vec![Complex64::new(0.0, 0.0); columns.len()];
    for (k, &col) in order.iter().take(rank).enumerate() {
        coefficients[col] = z[k] / norms[col];
    }
    Ok(LeastSquares {
        coefficients,
        retained: order[..rank].to_vec(),
        condition,
    })
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Parameters of a dictionary fit.
#[derive(Clone, Debug, PartialEq)]
pub struct FitSpec {
    pub s0: Complex64,
    pub parity: Parity,
    pub m: i32,
    pub n: i32,
    pub ell: usize,
    pub word_degree: usize,
    pub shifts: Vec<Complex64>,
    pub n_fit: usize,
    pub n_holdout: usize,
    pub seed: u64,
    pub grid: usize,
    /// Restrict the dictionary to the target's bi-K-type before solving.
    pub screen: bool,
}

impl FitSpec {
    /// ℓ = 1, N = 2, shifts ±1/2, 400 fit and 100 holdout points.
    pub fn new(s0: Complex64, parity: Parity, m: i32, n: i32) -> Self {
        FitSpec {
            s0,
            parity,
            m,
            n,
            ell: 1,
            word_degree: 2,
            shifts: vec![Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0)],
            n_fit: 400,
            n_holdout: 100,
            seed: 20240601,
            grid: FIT_GRID,
            screen: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateTerm {
    pub atom: Atom,
    pub left: EnvelopingWord,
    pub right: EnvelopingWord,
    pub coefficient: Complex64,
    /// |coefficient|·‖column‖/‖target‖ on the fit samples.
    pub weight: f64,
}

/// A fitted decomposition with its held-out validation.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionCertificate {
    pub s0: Complex64,
    pub parity: Parity,
    pub m: i32,
    pub n: i32,
    pub ell: usize,
    pub word_degree: usize,
    pub shifts: Vec<Complex64>,
    pub dictionary_size: usize,
    /// Atoms left after bi-K-type screening.
    pub screened_size: usize,
    pub terms: Vec<CertificateTerm>,
    pub fit_residual: f64,
    pub holdout_residual: f64,
    pub condition: f64,
    pub fit_samples: Vec<GroupElement>,
    pub holdout_samples: Vec<GroupElement>,
}

impl DecompositionCertificate {
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// (max left degree, max right degree) over the retained terms.
    pub fn degrees(&self) -> (usize, usize) {
        self.terms.iter().fold((0, 0), |(l, r), t| {
            (l.max(t.atom.left.power), r.max(t.atom.right.power))
        })
    }

    pub fn passes(&self) -> bool {
        self.holdout_residual < HOLDOUT_TOLERANCE
    }
}

impl fmt::Display for DecompositionCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shifts: Vec<String> = self.shifts.iter().map(|&z| format_complex(z)).collect();
        let (ldeg, rdeg) = self.degrees();
        writeln!(f, "[certificate]")?;
        writeln!(f, "[target]")?;
        writeln!(f, "s0 = {}", format_complex(self.s0))?;
        writeln!(f, "parity = {}", self.parity)?;
        writeln!(f, "m = {}", self.m)?;
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "[dictionary]")?;
        writeln!(f, "ell = {}", self.ell)?;
        writeln!(f, "word_degree = {}", self.word_degree)?;
        writeln!(f, "shifts = {}", shifts.join(";"))?;
        writeln!(f, "atoms = {}", self.dictionary_size)?;
        writeln!(f, "screened_atoms = {}", self.screened_size)?;
        writeln!(f, "[fit]")?;
        writeln!(f, "fit_samples = {}", self.fit_samples.len())?;
        writeln!(f, "holdout_samples = {}", self.holdout_samples.len())?;
        writeln!(f, "fit_residual = {:.16e}", self.fit_residual)?;
        writeln!(f, "holdout_residual = {:.16e}", self.holdout_residual)?;
        writeln!(f, "condition = {:.16e}", self.condition)?;
        writeln!(f, "term_count = {}", self.term_count())?;
        writeln!(f, "left_degree = {ldeg}")?;
        writeln!(f, "right_degree = {rdeg}")?;
        for (i, t) in self.terms.iter().enumerate() {
            writeln!(f, "[term.{i}]")?;
            writeln!(f, "h = {}", t.atom.h_index)?;
            writeln!(f, "p = {}", t.left)?;
            writeln!(f, "q = {}", t.right)?;
            writeln!(f, "shift = {}", format_complex(t.atom.shift))?;
            writeln!(f, "coefficient = {}", format_complex(t.coefficient))?;
            writeln!(f, "weight = {:.16e}", t.weight)?;
        }
        for (name, set) in [("samples.fit", &self.fit_samples), ("samples.holdout", &self.holdout_samples)] {
            writeln!(f, "[{name}]")?;
            for (i, g) in set.iter().enumerate() {
                let mut line = String::new();
                for (k, z) in g.entries().iter().enumerate() {
                    if k > 0 {
                        line.push(',');
                    }
                    let _ = write!(line, "{:.16e}", z.re);
                }
                writeln!(f, "{i} = {line}")?;
            }
        }
        Ok(())
    }
}

/// Fits matrix_element(s₀, parity, m, n, ·) in the dictionary span.
pub fn fit_decomposition(spec: &FitSpec) -> Result<DecompositionCertificate> {
    let series = PrincipalSeries::new(spec.s0, spec.parity, spec.grid)?;
    let (m, n) = (spec.m, spec.n);
    fit_to_target(spec, &|g: &GroupElement| series.matrix_element(m, n, g))
}

/// Fits an arbitrary target function; the target entries of `spec` only
/// label the certificate.
pub fn fit_to_target(
    spec: &FitSpec,
    target: &(dyn Fn(&GroupElement) -> Result<Complex64> + Sync),
) -> Result<DecompositionCertificate> {
    if Parity::of(spec.ell as i32) != spec.parity {
        return Err(Error::RankDeficient {
            reason: format!(
                "no atom has {} parity: Sym^{} entries are {} under g -> -g",
                spec.parity,
                spec.ell,
                Parity::of(spec.ell as i32)
            ),
        });
    }
    if spec.n_fit == 0 || spec.n_holdout == 0 {
        return Err(Error::invalid("decomposition", "fit and holdout sets must be nonempty"));
    }
    let full = Dictionary::new(spec.s0, spec.ell, spec.word_degree, &spec.shifts, spec.grid)?;
    let dictionary = if spec.screen { full.screened((spec.m, spec.n)) } else { full.clone() };
    if dictionary.atoms().is_empty() {
        return Err(Error::RankDeficient {
            reason: format!("no atom has bi-K-type ({}, {})", spec.m, spec.n),
        });
    }
    let (fit_samples, holdout_samples) = fit_and_holdout(spec.seed, spec.n_fit, spec.n_holdout);
    let evaluate = |set: &[GroupElement]| -> Result<(Vec<Vec<Complex64>>, Vec<Complex64>)> {
        let rows = set
            .par_iter()
            .map(|g| Ok((dictionary.evaluate(g)?, target(g)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(rows.into_iter().unzip())
    };
    let (fit_rows, fit_target) = evaluate(&fit_samples)?;
    let (hold_rows, hold_target) = evaluate(&holdout_samples)?;
    let size = dictionary.atoms().len();
    let columns: Vec<Vec<Complex64>> = (0..size).map(|j| fit_rows.iter().map(|r| r[j]).collect()).collect();
    let solution = pivoted_least_squares(&columns, &fit_target, PRUNE_PIVOT, Pivoting::Ordered)?;
    let residual = |rows: &[Vec<Complex64>], b: &[Complex64]| {
        let diff: Vec<Complex64> = rows
            .iter()
            .zip(b)
            .map(|(r, bi)| {
                let fitted: Complex64 = solution.retained.iter().map(|&j| r[j] * solution.coefficients[j]).sum();
                fitted - bi
            })
            .collect();
        vec_norm(&diff) / vec_norm(b).max(f64::MIN_POSITIVE)
    };
    let fit_residual = residual(&fit_rows, &fit_target);
    let holdout_residual = residual(&hold_rows, &hold_target);
    if fit_residual < HOLDOUT_TOLERANCE && holdout_residual >= HOLDOUT_TOLERANCE {
        return Err(Error::HoldoutMismatch {
            fit: fit_residual,
            holdout: holdout_residual,
        });
    }
    let target_norm = vec_norm(&fit_target).max(f64::MIN_POSITIVE);
    let terms = solution
        .retained
        .iter()
        .map(|&j| {
            let atom = dictionary.atoms()[j];
            CertificateTerm {
                atom,
                left: atom.left.word(Side::Left),
                right: atom.right.word(Side::Right),
                coefficient: solution.coefficients[j],
                weight: solution.coefficients[j].norm() * vec_norm(&columns[j]) / target_norm,
            }
        })
        .collect();
    Ok(DecompositionCertificate {
        s0: spec.s0,
        parity: spec.parity,
        m: spec.m,
        n: spec.n,
        ell: spec.ell,
        word_degree: spec.word_degree,
        shifts: spec.shifts.clone(),
        dictionary_size: full.atoms().len(),
        screened_size: size,
        terms,
        fit_residual,
        holdout_residual,
        condition: solution.condition,
        fit_samples,
        holdout_samples,
    })
}

/// Circle-mean estimate of lim_{s→s₀} of the derivative-word side of the
/// spherical identity, with the r/2 stability check and the direct
/// quadrature value at s₀.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitEstimate {
    pub s0: Complex64,
    pub m: i32,
    pub n: i32,
    pub radius: f64,
    pub points: usize,
    pub value: Complex64,
    pub half_radius_value: Complex64,
    pub direct: Complex64,
    /// |value − half_radius_value| / max(1, |value|).
    pub change: f64,
    /// |value − direct| / |direct|.
    pub rel_err: f64,
}

pub fn limit_matrix_element(
    s0: Complex64,
    parity: Parity,
    m: i32,
    n: i32,
    g: &GroupElement,
    radius: f64,
    points: usize,
) -> Result<LimitEstimate> {
    if parity != Parity::Even {
        return Err(Error::invalid(
            "decomposition",
            "limits are taken through the spherical identity, which needs the even series",
        ));
    }
    if !(radius > 0.0) || points < 3 {
        return Err(Error::invalid("decomposition", "need radius > 0 and at least 3 circle points"));
    }
    let mean = |r: f64| -> Result<Complex64> {
        let values = (0..points)
            .into_par_iter()
            .map(|k| {
                let s = s0 + Complex64::from_polar(r, TAU * k as f64 / points as f64);
                SphericalIdentity::new(s, m, n, DEFAULT_GRID)?.rhs(g)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(values.iter().sum::<Complex64>() / points as f64)
    };
    let value = mean(radius)?;
    let half_radius_value = mean(0.5 * radius)?;
    let change = (value - half_radius_value).norm() / value.norm().max(1.0);
    if change > REMOVABILITY_TOLERANCE {
        return Err(Error::NonRemovable { change });
    }
    let direct = PrincipalSeries::new(s0, Parity::Even, DEFAULT_GRID)?.matrix_element(m, n, g)?;
    Ok(LimitEstimate {
        s0,
        m,
        n,
        radius,
        points,
        value,
        half_radius_value,
        direct,
        change,
        rel_err: relative_error(direct, value),
    })
}
