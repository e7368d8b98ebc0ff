use std::path::PathBuf;
use std::process::{Command, Output};

fn carnot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carnot")).args(args).output().expect("run carnot")
}

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Value of a `key = value` report line.
fn field(report: &str, key: &str) -> Option<String> {
    report.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(" = ").map(str::to_string))
}

fn num(report: &str, key: &str) -> f64 {
    field(report, key).unwrap_or_else(|| panic!("no `{key}` in\n{report}")).parse().expect("number")
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(carnot(&["--help"]).status.code(), Some(0));
    assert_eq!(carnot(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(carnot(&[]).status.code(), Some(64));
    assert_eq!(carnot(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(carnot(&["counterexample", "--seed", "x"]).status.code(), Some(64));
    assert_eq!(carnot(&["counterexample", "--ladder", "2^-1..3^-4"]).status.code(), Some(64));
    assert_eq!(carnot(&["validate"]).status.code(), Some(64));
}

#[test]
fn catalog_lists_every_group() {
    let o = carnot(&["catalog"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "groups").as_deref(), Some("6"));
    assert!(out.contains("heisenberg2 5 2 6 4,1"));
    assert!(out.contains("free23 6 2 9 3,3"));
    let o = carnot(&["catalog", "--group", "engel"]);
    assert_eq!(field(&stdout(&o), "homogeneous_dimension").as_deref(), Some("7"));
    assert_eq!(carnot(&["catalog", "--group", "nope"]).status.code(), Some(2));
}

#[test]
fn validate_exit_codes() {
    for ok in ["heisenberg1_linear.scn", "heisenberg1_curve.scn", "euclidean2_line.scn", "euclidean3_plane.scn"] {
        let o = carnot(&["validate", "--scenario", &scenario(ok)]);
        assert_eq!(o.status.code(), Some(0), "{ok}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(field(&stdout(&o), "status").as_deref(), Some("pass"));
    }
    let o = carnot(&["validate", "--scenario", &scenario("heisenberg2_non_normal.scn")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not an ideal"));
    assert_eq!(carnot(&["validate", "--group", &scenario("bad_layers.group")]).status.code(), Some(2));
    assert_eq!(carnot(&["validate", "--group", &scenario("malformed_bracket.group")]).status.code(), Some(64));
    assert_eq!(carnot(&["validate", "--scenario", "/nonexistent/x.scn"]).status.code(), Some(2));
}

#[test]
fn validate_rejects_base_point_outside_domain() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.scn");
    let text = std::fs::read_to_string(scenario("heisenberg1_linear.scn")).unwrap().replace("base_point = 1/2", "base_point = 3");
    std::fs::write(&path, text).unwrap();
    assert_eq!(carnot(&["validate", "--scenario", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn counterexample_report() {
    let o = carnot(&["counterexample"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(num(&out, "max_error"), 0.0);
    assert!((num(&out, "graph_slope") - 0.5).abs() < 0.05);
    assert!((num(&out, "w_slope") - 1.0).abs() < 0.01);
    assert_eq!(field(&out, "l_normal").as_deref(), Some("false"));
    assert!(out.contains("0.500000000 1.000000000 0 0.500000000 0 -0.250000000"));
    // A one-point ladder has no slope.
    assert_eq!(carnot(&["counterexample", "--ladder", "0.5"]).status.code(), Some(64));
}

#[test]
fn reports_are_deterministic_and_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for p in [&a, &b] {
        let o = carnot(&["counterexample", "--seed", "4", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(ta, tb);
    assert_eq!(field(&ta, "seed").as_deref(), Some("4"));
}

#[test]
fn differentiate_linear_map() {
    let o = carnot(&["differentiate", "--scenario", &scenario("heisenberg1_linear.scn")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(field(&out, "arithmetic").as_deref(), Some("exact"));
    assert_eq!(num(&out, "final_residual"), 0.0);
    // ℓ(w) = (2w, −w²) is its own intrinsic differential.
    assert!(out.contains("w1 2.000000000 -1.000000000"), "{out}");
}

#[test]
fn differentiate_curve_at_override_point() {
    let o = carnot(&["differentiate", "--scenario", &scenario("heisenberg1_curve.scn"), "--base-point", "1/4"]);
    assert_eq!(o.status.code(), Some(0));
    // dΦ = (1, 2x, 0) and the intrinsic differential is (2x, −x²) at w = 1.
    assert!(stdout(&o).contains("w1 0.500000000 -0.250000000"));
    let o = carnot(&["differentiate", "--scenario", &scenario("heisenberg1_curve.scn"), "--base-point", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = carnot(&["differentiate", "--scenario", &scenario("heisenberg1_curve.scn"), "--ladder", "2^-3..2^-4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn differentiate_non_horizontal_graph_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.scn");
    let text = std::fs::read_to_string(scenario("heisenberg1_curve.scn"))
        .unwrap()
        .replace("phi poly: l2 = -w1^3/3", "phi poly: l2 = w1");
    std::fs::write(&path, text).unwrap();
    let o = carnot(&["differentiate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn jacobian_of_linear_map() {
    let o = carnot(&["jacobian", "--scenario", &scenario("heisenberg1_linear.scn")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    // dΦ sends w to the horizontal segment of slope 2: length factor √5.
    let (j, e) = (num(&out, "jacobian"), num(&out, "jacobian_err"));
    assert!((j - 5f64.sqrt()).abs() <= e.max(0.05 * j), "{j} ± {e}");
}

#[test]
fn area_check_passes_on_a_line_and_fails_at_zero_tolerance() {
    let line = scenario("euclidean2_line.scn");
    let o = carnot(&["area-check", "--scenario", &line]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!((num(&out, "classical_oracle") - 1.25f64.sqrt()).abs() < 1e-9);
    assert!(num(&out, "rel_discrepancy") <= 0.05);
    let o = carnot(&["area-check", "--scenario", &line, "--max-discrepancy", "0", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(field(&stdout(&o), "status").as_deref(), Some("fail"));
}

#[test]
fn area_check_needs_an_area_box() {
    let o = carnot(&["area-check", "--scenario", &scenario("heisenberg1_linear.scn")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn group_names_resolve_through_the_catalog_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("mine.group"), "name = mine\nlayer_dims = 2 1\nbrackets = 1 2 3 1\n").unwrap();
    let scn = dir.path().join("s.scn");
    std::fs::write(&scn, "group = mine\nsubgroup W = 1 0 0\nsubgroup L = 0 1 0; 0 0 1\n").unwrap();
    let run = |env: Option<&std::path::Path>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_carnot"));
        c.args(["validate", "--scenario", scn.to_str().unwrap()]).current_dir("/");
        match env {
            Some(d) => c.env("CARNOT_CATALOG", d),
            None => c.env_remove("CARNOT_CATALOG"),
        };
        c.output().unwrap()
    };
    // Without the variable the bare name is neither a catalog entry nor a file.
    assert_eq!(run(None).status.code(), Some(2));
    let o = run(Some(dir.path()));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(field(&stdout(&o), "l_normal").as_deref(), Some("true"));
}
