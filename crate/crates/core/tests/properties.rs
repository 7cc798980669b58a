use hcme_core::decomposition::{fit_decomposition, FiniteDimRep, FitSpec};
use hcme_core::group::{CartanCoordinates, GroupElement};
use hcme_core::principal_series::{Parity, PrincipalSeries};
use hcme_core::special::legendre_p;
use hcme_core::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn max_diff(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn trace(a: &[Vec<Complex64>]) -> Complex64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

fn element() -> impl Strategy<Value = GroupElement> {
    (0.0..std::f64::consts::TAU, 0.0..1.5f64, 0.0..std::f64::consts::TAU)
        .prop_map(|(a, t, b)| CartanCoordinates::new(a, t, b).reconstruct())
}

/// Sum of z^k for k = −ℓ, −ℓ+2, …, ℓ: the Sym^ℓ character at diag(z, 1/z).
fn character(ell: usize, z: Complex64) -> Complex64 {
    (0..=ell).map(|j| z.powi(ell as i32 - 2 * j as i32)).sum()
}

/// P_ν(cosh t) by the half-angle series.
fn legendre_half_angle(nu: Complex64, t: f64) -> Complex64 {
    let w = (t / 2.0).tanh().powi(2);
    let (mut term, mut sum) = (c(1.0, 0.0), c(1.0, 0.0));
    for k in 0..5000 {
        let kf = k as f64;
        term *= (-nu + kf) * (-nu + kf) / ((kf + 1.0) * (kf + 1.0)) * w;
        sum += term;
    }
    c((t / 2.0).cosh(), 0.0).powc(2.0 * nu) * sum
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sym_is_multiplicative(ell in 0usize..5, g in element(), h in element()) {
        let rep = FiniteDimRep::new(ell);
        let lhs = rep.matrix(&g.compose(&h));
        let rhs = matmul(&rep.matrix(&g), &rep.matrix(&h));
        let scale = rep.matrix(&g).iter().flatten().map(|z| z.norm()).fold(1.0, f64::max)
            * rep.matrix(&h).iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12 * scale * (ell + 1) as f64);
        let wl = rep.weight_matrix(&g.compose(&h));
        let wr = matmul(&rep.weight_matrix(&g), &rep.weight_matrix(&h));
        prop_assert!(max_diff(&wl, &wr) < 1e-11 * scale * (ell + 1) as f64);
    }

    #[test]
    fn both_bases_have_the_sym_character(ell in 0usize..5, theta in -3.0..3.0f64, t in 0.0..1.5f64) {
        let rep = FiniteDimRep::new(ell);
        let rotation = character(ell, Complex64::cis(theta));
        let boost = character(ell, c((t / 2.0).exp(), 0.0));
        for (g, expected) in [(GroupElement::rotation(theta), rotation), (GroupElement::boost(t), boost)] {
            prop_assert!((trace(&rep.matrix(&g)) - expected).norm() < 1e-10 * expected.norm().max(1.0));
            prop_assert!((trace(&rep.weight_matrix(&g)) - expected).norm() < 1e-10 * expected.norm().max(1.0));
        }
    }

    #[test]
    fn spherical_quadrature_matches_half_angle_series(
        re in -1.5..1.5f64, im in -2.0..2.0f64, t in 0.0..2.0f64
    ) {
        let s = c(re, im);
        let quad = PrincipalSeries::with_default_grid(s, Parity::Even).spherical(&GroupElement::boost(t)).unwrap();
        let series = legendre_half_angle(s - 0.5, t);
        let library = legendre_p(s - 0.5, c(t.cosh(), 0.0)).unwrap();
        prop_assert!((quad - series).norm() < 1e-10 * series.norm());
        prop_assert!((library - series).norm() < 1e-10 * series.norm());
    }
}

#[test]
fn sym_one_is_the_defining_representation() {
    let g = CartanCoordinates::new(0.4, 0.9, -1.1).reconstruct();
    let m = FiniteDimRep::new(1).matrix(&g);
    let [a, b, cc, d] = g.entries();
    assert_eq!(m, vec![vec![a, b], vec![cc, d]]);
}

#[test]
fn holdout_does_not_degrade_with_more_samples() {
    let mut spec = FitSpec::new(c(0.9, -0.4), Parity::Odd, 1, 1);
    spec.n_fit = 100;
    spec.n_holdout = 50;
    let coarse = fit_decomposition(&spec).unwrap();
    spec.n_fit = 200;
    let fine = fit_decomposition(&spec).unwrap();
    assert!(fine.holdout_residual <= coarse.holdout_residual.max(1e-12));
    assert_eq!(fine.term_count(), coarse.term_count());
}
