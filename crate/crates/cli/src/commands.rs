//! The hcme subcommands. Each produces a [`Report`]: a body (table or
//! certificate text) and the checks that decide the exit status.

use std::fmt::Write as _;

use hcme_core::continuation::{
    crown_scan, derivative_word_continuation, holomorphy_test, ComplexCartanPoint, WINDOW,
};
use hcme_core::decomposition::{fit_decomposition, limit_matrix_element, verify_spherical_identity, FitSpec};
use hcme_core::enveloping::{scan_exceptional, EnvelopingWord, Letter};
use hcme_core::group::{cartan_decompose, GroupElement, LieAlgebraElement};
use hcme_core::jet::GroupFunction;
use hcme_core::principal_series::{KTypeVector, Parity, PrincipalSeries, DEFAULT_GRID};
use hcme_core::sampling::{sample_points, SampleStream};
use hcme_core::special::legendre_p;
use hcme_core::{format_complex, Complex64};

use crate::config::RunConfig;
use crate::{CliError, Command};

pub const DEFAULT_SEED: u64 = 20240601;

/// One pass/fail criterion of a report.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// Pass when value < tolerance; otherwise pass when value > tolerance.
    pub below: bool,
    pub module: &'static str,
}

impl Check {
    pub fn below(name: &str, value: f64, tolerance: f64, module: &'static str) -> Self {
        Check {
            name: name.to_string(),
            value,
            tolerance,
            below: true,
            module,
        }
    }

    pub fn above(name: &str, value: f64, tolerance: f64, module: &'static str) -> Self {
        Check {
            below: false,
            ..Check::below(name, value, tolerance, module)
        }
    }

    pub fn passed(&self) -> bool {
        if self.below {
            self.value < self.tolerance
        } else {
            self.value > self.tolerance
        }
    }

    fn relation(&self) -> String {
        match (self.below, self.passed()) {
            (true, true) => format!("{}<{:e}", self.name, self.tolerance),
            (true, false) => format!("{}>={:e}", self.name, self.tolerance),
            (false, true) => format!("{}>{:e}", self.name, self.tolerance),
            (false, false) => format!("{}<={:e}", self.name, self.tolerance),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: Command,
    pub body: String,
    pub checks: Vec<Check>,
    pub notes: Vec<(String, String)>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed())
    }

    /// Tables are written without the summary block; it goes to stderr.
    pub fn is_table(&self) -> bool {
        matches!(self.command, Command::Spherical | Command::Matel)
    }

    pub fn summary(&self) -> String {
        let mut out = String::from("[summary]\n");
        let _ = writeln!(out, "command = {}", self.command.name());
        for (k, v) in &self.notes {
            let _ = writeln!(out, "{k} = {v}");
        }
        for (i, c) in self.checks.iter().enumerate() {
            if i == 0 {
                let _ = writeln!(out, "{} = {:.6e}", c.name, c.value);
                let _ = writeln!(out, "tolerance = {:e}", c.tolerance);
            } else {
                let _ = writeln!(out, "{} = {:.6e}", c.name, c.value);
                let _ = writeln!(out, "{}.tolerance = {:e}", c.name, c.tolerance);
            }
        }
        let result = match self.first_failure() {
            None => format!("PASS {}", self.checks.first().map(Check::relation).unwrap_or_default()),
            Some(c) => format!("FAIL [{}] {}", c.module, c.relation()),
        };
        let _ = writeln!(out, "result = {result}");
        out
    }

    /// Body followed by the summary block.
    pub fn render(&self) -> String {
        let mut out = self.body.clone();
        if !out.is_empty() && !out.ends_with('\n') {
            out.push('\n');
        }
        out.push_str(&self.summary());
        out
    }
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

pub fn execute(command: Command, config: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Spherical => spherical(config),
        Command::Matel => matel(config),
        Command::VerifyA => verify_a(config),
        Command::Fit => fit(config),
        Command::Limit => limit(config),
        Command::Crown => crown(config),
        Command::Selftest => selftest(config),
    }
}

fn spherical(config: &RunConfig) -> Result<Report, CliError> {
    let s_values = config.complex_list("s", &[Complex64::new(0.0, 0.9)])?;
    let t_values = config.float_list("t", &[0.0, 0.25, 0.5, 0.7, 1.0, 1.5, 2.0])?;
    let grid = config.usize("grid", DEFAULT_GRID)?;
    let tol = config.f64("tol", 1e-10)?;
    let mut body = String::from("s,t,psi_quadrature,psi_oracle,abs_diff\n");
    let mut worst = 0.0f64;
    let mut violations = Vec::new();
    let mut row = 0;
    for &s in &s_values {
        let series = PrincipalSeries::new(s, Parity::Even, grid)?;
        for &t in &t_values {
            let quad = series.spherical(&GroupElement::boost(t))?;
            let oracle = legendre_p(s - 0.5, Complex64::new(t.cosh(), 0.0))?;
            let diff = (quad - oracle).norm();
            worst = worst.max(diff);
            if diff >= tol {
                violations.push(row.to_string());
            }
            let _ = writeln!(
                body,
                "{},{},{},{},{}",
                format_complex(s),
                real(t),
                format_complex(quad),
                format_complex(oracle),
                real(diff)
            );
            row += 1;
        }
    }
    Ok(Report {
        command: Command::Spherical,
        body,
        checks: vec![Check::below("max_abs_diff", worst, tol, "principal_series")],
        notes: vec![
            ("rows".into(), row.to_string()),
            ("violating_rows".into(), violations.join(",")),
        ],
    })
}

fn matel(config: &RunConfig) -> Result<Report, CliError> {
    let s = first(config.complex_list("s", &[Complex64::new(0.0, 0.9)])?, "s")?;
    let parity = config.parity(Parity::Even)?;
    let default_modes: &[i32] = if parity == Parity::Even { &[0, 2] } else { &[1, -1] };
    let ms = config.int_list("m", default_modes)?;
    let ns = config.int_list("n", default_modes)?;
    let grid = config.usize("grid", DEFAULT_GRID)?;
    let samples = sample_points(config.u64("seed", DEFAULT_SEED)?, config.usize("samples", 5)?);
    let tol = config.f64("tol", 1e-10)?;
    let series = PrincipalSeries::new(s, parity, grid)?;
    let mut body = String::from("sample,theta1,t,theta2,m,n,circle_path,jet_path,abs_diff\n");
    let mut worst = 0.0f64;
    for (i, g) in samples.iter().enumerate() {
        let coords = cartan_decompose(g)?.canonical();
        for &m in ms.iter().filter(|&&m| parity.admits(m)) {
            for &n in ns.iter().filter(|&&n| parity.admits(n)) {
                let circle = series.matrix_element(m, n, g)?;
                let jet = series.coefficient(m, n)?.eval(g);
                let diff = (circle - jet).norm();
                worst = worst.max(diff);
                let _ = writeln!(
                    body,
                    "{i},{},{},{},{m},{n},{},{},{}",
                    real(coords.theta1),
                    real(coords.t),
                    real(coords.theta2),
                    format_complex(circle),
                    format_complex(jet),
                    real(diff)
                );
            }
        }
    }
    Ok(Report {
        command: Command::Matel,
        body,
        checks: vec![Check::below("max_abs_diff", worst, tol, "principal_series")],
        notes: vec![("s".into(), format_complex(s)), ("parity".into(), parity.to_string())],
    })
}

fn first<T: Copy>(values: Vec<T>, key: &str) -> Result<T, CliError> {
    values
        .first()
        .copied()
        .ok_or_else(|| CliError::Config(format!("{key} must not be empty")))
}

/// Generic spectral parameters: off the real axis, so no ladder
/// coefficient can vanish.
pub const GENERIC_S: [Complex64; 5] = [
    Complex64::new(0.3, 0.7),
    Complex64::new(-0.6, 1.1),
    Complex64::new(0.9, -0.4),
    Complex64::new(0.0, 1.5),
    Complex64::new(1.2, 0.2),
];

fn verify_a(config: &RunConfig) -> Result<Report, CliError> {
    let s_values = config.complex_list("s", &GENERIC_S)?;
    let ms: Vec<i32> = config.int_list("m", &[-4, -2, 0, 2, 4])?.into_iter().filter(|m| m % 2 == 0).collect();
    let ns: Vec<i32> = config.int_list("n", &[-4, -2, 0, 2, 4])?.into_iter().filter(|n| n % 2 == 0).collect();
    let grid = config.usize("grid", DEFAULT_GRID)?;
    let samples = sample_points(config.u64("seed", DEFAULT_SEED)?, config.usize("samples", 10)?);
    let tol = config.f64("tol", 1e-5)?;
    let mut body = String::from("s,m,n,samples,max_rel_err\n");
    let mut worst = 0.0f64;
    let mut cells = 0;
    for &s in &s_values {
        for &m in &ms {
            for &n in &ns {
                let report = verify_spherical_identity(s, m, n, &samples, grid)?;
                worst = worst.max(report.max_rel_err);
                cells += 1;
                let _ = writeln!(
                    body,
                    "{},{m},{n},{},{}",
                    format_complex(s),
                    samples.len(),
                    real(report.max_rel_err)
                );
            }
        }
    }
    Ok(Report {
        command: Command::VerifyA,
        body,
        checks: vec![Check::below("max_rel_err", worst, tol, "decomposition")],
        notes: vec![("cells".into(), cells.to_string())],
    })
}

/// m and n lists paired elementwise.
fn mode_pairs(config: &RunConfig, m: &[i32], n: &[i32]) -> Result<Vec<(i32, i32)>, CliError> {
    let ms = config.int_list("m", m)?;
    let ns = config.int_list("n", n)?;
    if ms.len() != ns.len() {
        return Err(CliError::Config(format!(
            "m and n are paired elementwise but have {} and {} entries",
            ms.len(),
            ns.len()
        )));
    }
    Ok(ms.into_iter().zip(ns).collect())
}

fn fit(config: &RunConfig) -> Result<Report, CliError> {
    let s_values = config.complex_list("s", &[Complex64::new(0.3, 0.45)])?;
    let parity = config.parity(Parity::Odd)?;
    let pairs = mode_pairs(config, &[1], &[1])?;
    let defaults = FitSpec::new(Complex64::new(0.0, 0.0), parity, 0, 0);
    let ell = config.usize("ell", defaults.ell)?;
    let word_degree = config.usize("word_degree", defaults.word_degree)?;
    let shifts = config.complex_list("shifts", &defaults.shifts)?;
    let n_fit = config.usize("n_fit", defaults.n_fit)?;
    let n_holdout = config.usize("n_holdout", defaults.n_holdout)?;
    let seed = config.u64("seed", DEFAULT_SEED)?;
    let grid = config.usize("grid", defaults.grid)?;
    let tol = config.f64("tol", 1e-6)?;
    let mut body = String::new();
    let mut sweep = String::from("m,n,s,term_count,left_degree,right_degree,fit_residual,holdout_residual\n");
    let mut worst = 0.0f64;
    let mut spread = 0usize;
    for &(m, n) in &pairs {
        let mut shapes = Vec::new();
        for &s0 in &s_values {
            let spec = FitSpec {
                s0,
                parity,
                m,
                n,
                ell,
                word_degree,
                shifts: shifts.clone(),
                n_fit,
                n_holdout,
                seed,
                grid,
                screen: true,
            };
            let cert = fit_decomposition(&spec)?;
            body.push_str(&cert.to_string());
            body.push('\n');
            worst = worst.max(cert.holdout_residual);
            let (l, r) = cert.degrees();
            let shape = (cert.term_count(), l, r);
            if !shapes.contains(&shape) {
                shapes.push(shape);
            }
            let _ = writeln!(
                sweep,
                "{m},{n},{},{},{l},{r},{},{}",
                format_complex(s0),
                cert.term_count(),
                real(cert.fit_residual),
                real(cert.holdout_residual)
            );
        }
        spread = spread.max(shapes.len().saturating_sub(1));
    }
    body.push_str("[sweep]\n");
    body.push_str(&sweep);
    Ok(Report {
        command: Command::Fit,
        body,
        checks: vec![
            Check::below("max_holdout_residual", worst, tol, "decomposition"),
            Check::below("term_shape_spread", spread as f64, 0.5, "decomposition"),
        ],
        notes: vec![("fits".into(), (pairs.len() * s_values.len()).to_string())],
    })
}

fn limit(config: &RunConfig) -> Result<Report, CliError> {
    let pairs = mode_pairs(config, &[0, 2, 0], &[2, 2, 4])?;
    let parity = config.parity(Parity::Even)?;
    let radius = config.f64("radius", 1e-2)?;
    let points = config.usize("points", 32)?;
    let samples = sample_points(config.u64("seed", DEFAULT_SEED)?, config.usize("samples", 3)?);
    let tol = config.f64("tol", 1e-5)?;
    let mut notes = Vec::new();
    let s_values = match config.raw("s") {
        Some(_) => config.complex_list("s", &[])?,
        None => {
            let lo = config.f64("scan_lo", -3.0)?;
            let hi = config.f64("scan_hi", 3.0)?;
            let widest = pairs.iter().map(|&(m, n)| m.unsigned_abs().max(n.unsigned_abs())).max().unwrap_or(2);
            let n_max = config.usize("n_max", widest as usize)?;
            let found = scan_exceptional(lo, hi, n_max, 256, 0.01)?;
            let flagged: Vec<Complex64> = found
                .iter()
                .filter(|p| p.s.abs() <= 3.0)
                .map(|p| Complex64::new(p.s, 0.0))
                .collect();
            notes.push((
                "scan".into(),
                found.iter().map(|p| format!("{:.12}", p.s)).collect::<Vec<_>>().join(","),
            ));
            flagged
        }
    };
    let mut body = String::from("s0,m,n,sample,value,half_radius_value,direct,rel_err,radius_change\n");
    let (mut worst, mut worst_change) = (0.0f64, 0.0f64);
    for &s0 in &s_values {
        for &(m, n) in &pairs {
            for (i, g) in samples.iter().enumerate() {
                let est = limit_matrix_element(s0, parity, m, n, g, radius, points)?;
                worst = worst.max(est.rel_err);
                worst_change = worst_change.max(est.change);
                let _ = writeln!(
                    body,
                    "{},{m},{n},{i},{},{},{},{},{}",
                    format_complex(s0),
                    format_complex(est.value),
                    format_complex(est.half_radius_value),
                    format_complex(est.direct),
                    real(est.rel_err),
                    real(est.change)
                );
            }
        }
    }
    notes.push(("points".into(), s_values.len().to_string()));
    Ok(Report {
        command: Command::Limit,
        body,
        checks: vec![
            Check::below("max_rel_err", worst, tol, "decomposition"),
            Check::below("max_radius_change", worst_change, 1e-6, "decomposition"),
        ],
        notes,
    })
}

/// Derivative words of degree ≤ 2 used by the crown holomorphy checks.
pub fn crown_words() -> Vec<EnvelopingWord> {
    let (h, up, down) = (LieAlgebraElement::H, LieAlgebraElement::raising(), LieAlgebraElement::lowering());
    vec![
        EnvelopingWord::one(),
        EnvelopingWord::monomial(vec![Letter::right(h)]),
        EnvelopingWord::monomial(vec![Letter::left(up), Letter::right(down)]),
        EnvelopingWord::monomial(vec![Letter::right(up), Letter::right(up)]),
    ]
}

/// Ten interior centers for the holomorphy checks.
pub fn crown_centers() -> Vec<Complex64> {
    [0.3, 0.7]
        .iter()
        .flat_map(|&re| [-1.0, -0.5, 0.0, 0.5, 1.0].into_iter().map(move |im| Complex64::new(re, im)))
        .collect()
}

fn crown(config: &RunConfig) -> Result<Report, CliError> {
    let s = first(config.complex_list("s", &[Complex64::new(0.2, 0.9)])?, "s")?;
    let t_re = config.float_list("t_re", &linspace(0.1, 1.0, 10))?;
    let t_im = config.float_list("t_im", &linspace(-WINDOW, WINDOW, 10))?;
    let radius = config.f64("radius", 0.1)?;
    let points = config.usize("points", 32)?;
    let tol = config.f64("tol", 1e-9)?;
    let cells = crown_scan(s, &t_re, &t_im)?;
    let mut body = String::from("t,quadrature,oracle,rel_err,refinement,min_base\n");
    for c in &cells {
        let _ = writeln!(
            body,
            "{},{},{},{},{},{}",
            format_complex(c.t),
            format_complex(c.quadrature),
            format_complex(c.oracle),
            real(c.rel_err),
            real(c.refinement),
            real(c.min_base)
        );
    }
    body.push_str("[holomorphy]\ncenter,word,residual\n");
    let mut worst_holo = 0.0f64;
    for center in crown_centers() {
        let p = ComplexCartanPoint::new(center)?;
        for word in crown_words() {
            let f = |t: Complex64| derivative_word_continuation(s, &word, &ComplexCartanPoint::new(t)?);
            let residual = holomorphy_test(&f, &p, radius, points)?;
            worst_holo = worst_holo.max(residual);
            let _ = writeln!(body, "{},{word},{}", format_complex(center), real(residual));
        }
    }
    let control_center = ComplexCartanPoint::new(Complex64::new(0.6, 0.5))?;
    let anti = holomorphy_test(&|t: Complex64| Ok(t.conj()), &control_center, radius, points)?;
    let _ = writeln!(body, "{},conj(t),{}", format_complex(control_center.t()), real(anti));
    Ok(Report {
        command: Command::Crown,
        body,
        checks: vec![
            Check::below("max_rel_err", max_of(cells.iter().map(|c| c.rel_err)), tol, "continuation"),
            Check::below("max_refinement", max_of(cells.iter().map(|c| c.refinement)), 1e-11, "continuation"),
            Check::below("max_holomorphy_residual", worst_holo, 1e-7, "continuation"),
            Check::above("anti_holomorphic_residual", anti, 1e-2, "continuation"),
        ],
        notes: vec![("cells".into(), cells.len().to_string())],
    })
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

/// ‖act(g₁)act(g₂)f − act(g₁g₂)f‖∞ / ‖f‖∞ for band-limited random f.
pub fn group_law_defect(s: Complex64, parity: Parity, pairs: usize, seed: u64) -> Result<f64, CliError> {
    let series = PrincipalSeries::new(s, parity, DEFAULT_GRID)?;
    let mut stream = SampleStream::new(seed, 0.0, 1.0);
    let mut worst = 0.0f64;
    for k in 0..pairs {
        let (g1, g2) = (stream.next_coordinates().reconstruct(), stream.next_coordinates().reconstruct());
        let modes = (-12..=12).filter(|&n| parity.admits(n)).map(|n| {
            let phase = 0.37 * (n * n) as f64 + 0.11 * k as f64;
            (n, Complex64::from_polar(1.0 / (1.0 + n.abs() as f64), phase))
        });
        let v = KTypeVector::from_coefficients(parity, modes)?;
        let f = v.samples(DEFAULT_GRID);
        let scale = max_of(f.iter().map(|z| z.norm()));
        let lhs = series.act(&g1, &series.act(&g2, &f)?)?;
        let rhs = series.act(&g1.compose(&g2), &f)?;
        let diff = max_of(lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()));
        worst = worst.max(diff / scale);
    }
    Ok(worst)
}

fn selftest(config: &RunConfig) -> Result<Report, CliError> {
    let seed = config.u64("seed", DEFAULT_SEED)?;
    let mut checks = Vec::new();

    let mut oracle = 0.0f64;
    for (s, t) in [(Complex64::new(0.0, 0.9), 0.7), (Complex64::new(0.4, -1.2), 1.6), (Complex64::new(-1.1, 0.3), 0.2)] {
        let quad = PrincipalSeries::with_default_grid(s, Parity::Even).spherical(&GroupElement::boost(t))?;
        let exact = legendre_p(s - 0.5, Complex64::new(t.cosh(), 0.0))?;
        oracle = oracle.max((quad - exact).norm() / exact.norm());
    }
    checks.push(Check::below("spherical_oracle", oracle, 1e-10, "principal_series"));

    let law = group_law_defect(Complex64::new(0.3, 0.6), Parity::Odd, 5, seed)?;
    checks.push(Check::below("group_law", law, 1e-9, "principal_series"));

    let samples = sample_points(seed, 3);
    let mut identity = 0.0f64;
    for (m, n) in [(0, 2), (-2, 4)] {
        identity = identity.max(verify_spherical_identity(GENERIC_S[0], m, n, &samples, DEFAULT_GRID)?.max_rel_err);
    }
    checks.push(Check::below("spherical_identity", identity, 1e-5, "decomposition"));

    let scan = scan_exceptional(-1.0, 0.0, 2, 256, 0.01)?;
    let located = scan.first().map(|p| (p.s + 0.5).abs()).unwrap_or(f64::INFINITY);
    checks.push(Check::below("exceptional_scan", located, 1e-6, "enveloping"));

    let est = limit_matrix_element(Complex64::new(-0.5, 0.0), Parity::Even, 0, 2, &samples[0], 1e-2, 32)?;
    checks.push(Check::below("limit", est.rel_err, 1e-5, "decomposition"));

    let mut spec = FitSpec::new(Complex64::new(0.3, 0.45), Parity::Odd, 1, 1);
    spec.n_fit = 120;
    spec.n_holdout = 40;
    spec.seed = seed;
    checks.push(Check::below("fit_holdout", fit_decomposition(&spec)?.holdout_residual, 1e-6, "decomposition"));

    let cells = crown_scan(Complex64::new(0.2, 0.9), &[0.1, 0.5, 1.0], &[-WINDOW, 0.0, WINDOW])?;
    checks.push(Check::below("crown_oracle", max_of(cells.iter().map(|c| c.rel_err)), 1e-9, "continuation"));

    let mut body = String::from("check,value,tolerance,result\n");
    for c in &checks {
        let _ = writeln!(
            body,
            "{},{:.6e},{:e},{}",
            c.name,
            c.value,
            c.tolerance,
            if c.passed() { "PASS" } else { "FAIL" }
        );
    }
    Ok(Report {
        command: Command::Selftest,
        body,
        checks,
        notes: Vec::new(),
    })
}
