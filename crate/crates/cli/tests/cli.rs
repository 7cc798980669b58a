use std::process::{Command, Output};

fn hcme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcme"))
        .args(args)
        .env_remove("HCME_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Real part of a "{:e}{:+e}i" field.
fn real_part(field: &str) -> f64 {
    let split = field
        .char_indices()
        .skip(1)
        .find(|&(i, ch)| (ch == '+' || ch == '-') && !field[..i].ends_with('e'))
        .map_or(field.len(), |(i, _)| i);
    field[..split].parse().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn spherical_row_at_point_seven() {
    let o = hcme(&["spherical", "s=0.9i", "t=0.7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,t,psi_quadrature,psi_oracle,abs_diff"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 5);
    let re = real_part(row[2]);
    // P_{-1/2+0.9i}(cosh 0.7), 30-digit reference value.
    assert!((re - 0.876_763_291_142_348_5).abs() < 1e-10, "{re}");
    let diff: f64 = row[4].parse().unwrap();
    assert!(diff < 1e-10);
    assert!(stderr(&o).contains("result = PASS"));
}

#[test]
fn empty_t_list_prints_only_the_header() {
    let o = hcme(&["spherical", "t="]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "s,t,psi_quadrature,psi_oracle,abs_diff\n");
}

#[test]
fn unknown_key_is_a_config_error() {
    let o = hcme(&["spherical", "colour=red"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown key 'colour'"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = hcme(&["matel", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_command_exits_one_and_help_exits_zero() {
    assert_eq!(hcme(&["frobnicate"]).status.code(), Some(1));
    let help = hcme(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("verify-a"));
}

#[test]
fn tolerance_violation_exits_two_and_names_the_module() {
    let o = hcme(&["spherical", "t=0.5", "tol=1e-30"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[principal_series] tolerance violated"));
}

#[test]
fn exceptional_parameter_exits_three() {
    let o = hcme(&["verify-a", "s=-0.5", "m=0", "n=2", "samples=2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("[enveloping] exceptional parameter"));
}

#[test]
fn even_dictionary_for_odd_target_exits_four() {
    let o = hcme(&["fit", "ell=0", "n_fit=20", "n_holdout=5"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn verify_a_summary_passes() {
    let o = hcme(&["verify-a", "s=0.3+0.7i", "samples=3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("[summary]\ncommand = verify-a\n"));
    assert!(text.contains("cells = 25\n"));
    assert!(text.contains("result = PASS"));
}

#[test]
fn limit_at_a_generic_parameter_is_the_value() {
    let o = hcme(&["limit", "s=0.3+0.7i", "samples=2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("result = PASS"));
}

#[test]
fn config_file_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("report.txt");
    std::fs::write(&cfg, format!("# coarse run\nt = 0.1, 0.2\noutput = {}\n", out.display())).unwrap();
    let o = hcme(&["spherical", "--config", cfg.to_str().unwrap(), "t=0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let report = std::fs::read_to_string(&out).unwrap();
    assert_eq!(report.lines().count(), 2);
    let t: f64 = report.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((t - 0.3).abs() < 1e-15);
    assert!(stdout(&o).starts_with("[summary]\n"));
}

#[test]
fn thread_count_does_not_change_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let path = dir.path().join(format!("crown-{threads}.txt"));
        let o = Command::new(env!("CARGO_BIN_EXE_hcme"))
            .args(["crown", &format!("output={}", path.display())])
            .env("HCME_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn bad_thread_variable_is_a_config_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_hcme"))
        .arg("spherical")
        .env("HCME_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn in_process_run_matches_the_binary() {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = hcme::run(["hcme", "spherical", "t=0.25"], &mut out, &mut err);
    assert_eq!(code, 0);
    assert_eq!(out, hcme(&["spherical", "t=0.25"]).stdout);
}
