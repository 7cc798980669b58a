//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::Command;
use std::time::{Duration, Instant};

use hcme::commands::{crown_centers, crown_words, group_law_defect, linspace, DEFAULT_SEED, GENERIC_S};
use hcme_core::continuation::{
    complexified_spherical, crown_scan, derivative_word_continuation, holomorphy_test, ComplexCartanPoint, WINDOW,
};
use hcme_core::decomposition::{
    fit_decomposition, fit_to_target, limit_matrix_element, verify_spherical_identity, Dictionary, FitSpec,
};
use hcme_core::enveloping::{express_ktype, scan_exceptional};
use hcme_core::group::GroupElement;
use hcme_core::principal_series::{Parity, PrincipalSeries, DEFAULT_GRID};
use hcme_core::sampling::sample_points;
use hcme_core::{Complex64, Error};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// P_ν(cosh t) = cosh(t/2)^{2ν} · 2F1(−ν, −ν; 1; tanh²(t/2)), summed
/// directly. Independent of the library's hypergeometric code.
fn legendre_by_half_angle(nu: Complex64, t: Complex64) -> Complex64 {
    let w = (t / 2.0).tanh().powu(2);
    assert!(w.norm() < 0.97, "half-angle series too slow at t = {t}");
    let (mut term, mut sum) = (c(1.0, 0.0), c(1.0, 0.0));
    for k in 0..20_000 {
        let kf = k as f64;
        term *= (-nu + kf) * (-nu + kf) / ((kf + 1.0) * (kf + 1.0)) * w;
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    (t / 2.0).cosh().powc(2.0 * nu) * sum
}

/// Analytic zeros of the path coefficients 1 + 2s ± n, |n| ≤ n_max − 2.
fn analytic_zeros(lo: f64, hi: f64, n_max: i32) -> Vec<f64> {
    let mut zeros: Vec<f64> = (0..=n_max - 2)
        .step_by(2)
        .map(|k| -(1.0 + k as f64) / 2.0)
        .filter(|s| (lo..=hi).contains(s))
        .collect();
    zeros.sort_by(f64::total_cmp);
    zeros
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn spherical_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..50 {
        let x = i as f64;
        let s = c(1.5 * (0.37 * x + 0.1).sin(), 2.0 * (0.53 * x + 0.7).cos());
        let t = 2.0 * i as f64 / 49.0;
        let quad = PrincipalSeries::with_default_grid(s, Parity::Even)
            .spherical(&GroupElement::boost(t))
            .unwrap();
        let oracle = legendre_by_half_angle(s - 0.5, c(t, 0.0));
        worst = worst.max((quad - oracle).norm() / oracle.norm());
    }
    outcome(worst < 1e-10, format!("max_rel_err = {worst:.3e} (< 1e-10)"))
}

fn group_law() -> Outcome {
    let a = group_law_defect(c(0.3, 0.6), Parity::Odd, 50, DEFAULT_SEED).unwrap();
    let b = group_law_defect(c(-0.7, 1.4), Parity::Even, 50, DEFAULT_SEED + 1).unwrap();
    let worst = a.max(b);
    outcome(worst < 1e-9, format!("max_defect = {worst:.3e} over 100 pairs (< 1e-9)"))
}

fn spherical_sector() -> Outcome {
    let s_values: Vec<Complex64> = (0..20)
        .map(|i| {
            let x = i as f64;
            c(1.4 * (0.71 * x + 0.2).sin(), 0.3 + 1.5 * (0.29 * x).cos().abs())
        })
        .collect();
    let samples = sample_points(DEFAULT_SEED, 10);
    let mut worst = 0.0f64;
    for &s in &s_values {
        for m in (-4..=4).step_by(2) {
            for n in (-4..=4).step_by(2) {
                let report = verify_spherical_identity(s, m, n, &samples, DEFAULT_GRID).unwrap();
                worst = worst.max(report.max_rel_err);
            }
        }
    }
    outcome(worst < 1e-5, format!("max_rel_err = {worst:.3e} over 500 cells (< 1e-5)"))
}

const N_MAX: usize = 6;

fn flagged_points() -> Vec<f64> {
    scan_exceptional(-3.0, 3.0, N_MAX, 256, 0.01)
        .unwrap()
        .into_iter()
        .map(|p| p.s)
        .filter(|s| s.abs() <= 3.0)
        .collect()
}

fn raises_exceptional(s: f64) -> bool {
    let series = PrincipalSeries::new(c(s, 0.0), Parity::Even, 256).unwrap();
    (-(N_MAX as i32)..=N_MAX as i32).step_by(2).any(|n| match express_ktype(&series, n) {
        Ok(_) => false,
        Err(Error::ExceptionalParameter { .. }) => true,
        Err(e) => panic!("unexpected error at s = {s}: {e}"),
    })
}

fn exceptional_set() -> Outcome {
    let flagged = flagged_points();
    let expected = analytic_zeros(-3.0, 3.0, N_MAX as i32);
    let located = flagged.len() == expected.len()
        && flagged.iter().zip(&expected).all(|(a, b)| (a - b).abs() < 1e-6);
    let mut probes: Vec<f64> = flagged.clone();
    for &s in &flagged {
        probes.extend([s - 1e-6, s + 1e-6]);
    }
    let remaining = 200 - probes.len();
    probes.extend((0..remaining).map(|k| -3.0 + 6.0 * (k as f64 + 0.5) / remaining as f64));
    let mismatches: Vec<f64> = probes
        .iter()
        .copied()
        .filter(|&s| raises_exceptional(s) != flagged.iter().any(|f| (f - s).abs() < 1e-9))
        .collect();
    outcome(
        located && mismatches.is_empty() && probes.len() == 200,
        format!("flagged = {flagged:?}, analytic = {expected:?}, probe_mismatches = {}", mismatches.len()),
    )
}

fn exceptional_limits() -> Outcome {
    let flagged = flagged_points();
    let samples = sample_points(DEFAULT_SEED, 3);
    let (mut worst, mut change) = (0.0f64, 0.0f64);
    for &s0 in &flagged {
        for (m, n) in [(0, 2), (2, 2), (0, 4)] {
            for g in &samples {
                let est = limit_matrix_element(c(s0, 0.0), Parity::Even, m, n, g, 1e-2, 32).unwrap();
                worst = worst.max(est.rel_err);
                change = change.max(est.change);
            }
        }
    }
    outcome(
        !flagged.is_empty() && worst < 1e-5 && change < 1e-6,
        format!("points = {}, max_rel_err = {worst:.3e} (< 1e-5), max_radius_change = {change:.3e} (< 1e-6)", flagged.len()),
    )
}

fn decomposition() -> Outcome {
    let mut worst = 0.0f64;
    let mut shapes_constant = true;
    let mut shapes = Vec::new();
    for (m, n) in [(1, 1), (1, 3), (3, 3)] {
        let mut shape = None;
        for &s in &GENERIC_S {
            let cert = fit_decomposition(&FitSpec::new(s, Parity::Odd, m, n)).unwrap();
            worst = worst.max(cert.holdout_residual);
            let this = (cert.term_count(), cert.degrees());
            shapes_constant &= *shape.get_or_insert(this) == this;
        }
        shapes.push(format!("({m},{n})->{:?}", shape.unwrap()));
    }

    let mut synthetic = 0.0f64;
    for (m, n) in [(1, 1), (1, 3), (3, 3)] {
        let mut spec = FitSpec::new(c(-0.2, 1.1), Parity::Odd, m, n);
        spec.n_fit = 200;
        spec.n_holdout = 50;
        let dictionary = Dictionary::new(spec.s0, spec.ell, spec.word_degree, &spec.shifts, spec.grid)
            .unwrap()
            .screened((m, n));
        let size = dictionary.atoms().len();
        let picks = [(0, c(0.8, -0.3)), (size / 2, c(-1.2, 0.4)), (size - 1, c(0.1, 0.9))];
        let target = |g: &GroupElement| -> hcme_core::Result<Complex64> {
            let values = dictionary.evaluate(g)?;
            Ok(picks.iter().map(|&(j, w)| values[j] * w).sum())
        };
        synthetic = synthetic.max(fit_to_target(&spec, &target).unwrap().holdout_residual);
    }
    outcome(
        worst < 1e-6 && synthetic < 1e-9 && shapes_constant,
        format!(
            "max_holdout = {worst:.3e} (< 1e-6), synthetic = {synthetic:.3e} (< 1e-9), shapes {} [{}]",
            if shapes_constant { "constant" } else { "vary" },
            shapes.join(" ")
        ),
    )
}

fn crown() -> Outcome {
    let s = c(0.2, 0.9);
    let cells = crown_scan(s, &linspace(0.1, 1.0, 10), &linspace(-WINDOW, WINDOW, 10)).unwrap();
    let mut oracle = 0.0f64;
    for cell in &cells {
        let independent = legendre_by_half_angle(s - 0.5, cell.t);
        oracle = oracle
            .max(cell.rel_err)
            .max((cell.quadrature - independent).norm() / independent.norm());
    }
    let mut holo = 0.0f64;
    for center in crown_centers() {
        let p = ComplexCartanPoint::new(center).unwrap();
        for word in crown_words() {
            assert!(word.degree() <= 2);
            let f = |t: Complex64| derivative_word_continuation(s, &word, &ComplexCartanPoint::new(t)?);
            holo = holo.max(holomorphy_test(&f, &p, 0.1, 32).unwrap());
        }
    }
    let control = ComplexCartanPoint::new(c(0.6, 0.5)).unwrap();
    let anti_t = holomorphy_test(&|t: Complex64| Ok(t.conj()), &control, 0.1, 32).unwrap();
    let anti_psi = holomorphy_test(
        &|t: Complex64| Ok(complexified_spherical(s, &ComplexCartanPoint::new(t)?)?.conj()),
        &control,
        0.1,
        32,
    )
    .unwrap();
    let anti = anti_t.min(anti_psi);
    outcome(
        cells.len() == 100 && oracle < 1e-9 && holo < 1e-7 && anti > 1e-2,
        format!("oracle = {oracle:.3e} (< 1e-9), holomorphy = {holo:.3e} (< 1e-7), anti_control = {anti:.3e} (> 1e-2)"),
    )
}

const COMMANDS: [&str; 7] = ["spherical", "matel", "verify-a", "fit", "limit", "crown", "selftest"];

fn run_suite(threads: &str, dir: &std::path::Path) -> Vec<Vec<u8>> {
    COMMANDS
        .iter()
        .map(|command| {
            let path = dir.join(format!("{command}-{threads}.txt"));
            let status = Command::new(env!("CARGO_BIN_EXE_hcme"))
                .arg(command)
                .arg(format!("seed={DEFAULT_SEED}"))
                .arg(format!("output={}", path.display()))
                .env("HCME_THREADS", threads)
                .output()
                .unwrap();
            assert!(status.status.success(), "{command}: {}", String::from_utf8_lossy(&status.stderr));
            std::fs::read(&path).unwrap()
        })
        .collect()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let first = run_suite("1", dir.path());
    let second = run_suite("2", dir.path());
    let differing: Vec<&str> = COMMANDS
        .iter()
        .zip(first.iter().zip(&second))
        .filter(|(_, (a, b))| a != b)
        .map(|(name, _)| *name)
        .collect();
    let bytes: usize = first.iter().map(Vec::len).sum();
    outcome(
        differing.is_empty(),
        format!("{} reports, {bytes} bytes, differing = {differing:?}", COMMANDS.len()),
    )
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 8] = [
        ("spherical oracle equivalence", Duration::from_secs(5), spherical_oracle),
        ("representation group law", Duration::from_secs(10), group_law),
        ("spherical-sector two-path identity", Duration::from_secs(180), spherical_sector),
        ("exceptional-set detection", Duration::from_secs(60), exceptional_set),
        ("limits at exceptional parameters", Duration::from_secs(120), exceptional_limits),
        ("non-spherical decomposition", Duration::from_secs(300), decomposition),
        ("crown-domain holomorphy", Duration::from_secs(60), crown),
        ("determinism", Duration::from_secs(300), determinism),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let passed = result.passed && elapsed < *budget;
        failures += usize::from(!passed);
        println!(
            "{} criterion {} {name}: {} [{:.2}s, budget {}s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        eprintln!("{failures} criteria failed");
        std::process::exit(1);
    }
}
