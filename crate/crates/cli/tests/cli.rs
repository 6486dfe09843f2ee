use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name)
}

fn jetvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetvar")).args(args).output().expect("binary runs")
}

fn run_file(cmd: &str, path: &Path, extra: &[&str]) -> (i32, String, String) {
    let mut args = vec![cmd, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = jetvar(&args);
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn run_text(cmd: &str, text: &str, extra: &[&str]) -> (i32, String, String) {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    run_file(cmd, f.path(), extra)
}

#[test]
fn euler_lagrange_in_three_formats() {
    let path = problem("harmonic.jv");
    assert_eq!(run_file("el", &path, &[]).1, "E1: -u1_xx = 0\n");
    assert_eq!(run_file("el", &path, &["--format", "latex"]).1, "E_{1}: -u^{1}_{xx} = 0\n");
    assert_eq!(run_file("el", &path, &["--format", "machine"]).1, "E1=-u1_xx\n");
}

#[test]
fn minimal_surface_equation_is_printed() {
    let (code, out, _) = run_file("el", &problem("minimal_surface.jv"), &[]);
    assert_eq!(code, 0);
    assert!(out.contains("u1_xx") && out.contains("u1_xy") && out.contains("u1_yy"));
}

#[test]
fn linear_lagrangian_is_null() {
    let (code, out, _) = run_text("el", "[context]\nbase = x\n[lagrangian]\nu_x\n", &[]);
    assert_eq!((code, out.as_str()), (0, "E1: 0 = 0\n"));
    let (code, out, _) = run_file("null-check", &problem("divergence.jv"), &[]);
    assert_eq!((code, out.as_str()), (0, "null Lagrangian\n"));
}

#[test]
fn helmholtz_verdicts() {
    let (code, out, _) = run_file("helmholtz", &problem("burgers_source.jv"), &[]);
    assert_eq!(code, 0);
    assert_eq!(out, "not variational\nresidual:\n[1,1] = 2*u1*D_x + u1_x*id\n");
    let (_, out, _) = run_text("helmholtz", "[context]\nbase = x\norder = 2\n[source]\n-u_xx - u\n", &[]);
    assert_eq!(out, "variational\n");
}

#[test]
fn minimal_command_reports_the_theorem() {
    for name in ["euclidean_surfaces.jv", "conformal_surfaces.jv"] {
        let (code, out, err) = run_file("minimal", &problem(name), &[]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("Hessian identity: holds"));
        assert!(out.contains("E(A) = -Hess(A)·T: holds"));
        assert!(out.contains("E(A) / H: "));
    }
}

#[test]
fn flat_geodesics_of_a_line() {
    let text = "[context]\nbase = x\n[metric]\n1, 0\n0, 1\n";
    let (code, out, _) = run_text("minimal", text, &[]);
    assert_eq!(code, 0);
    assert!(out.contains("T1[x,x]: u1_xx = 0"));
}

#[test]
fn relativistic_reports() {
    let (code, out, _) = run_file("relativistic", &problem("minkowski_free.jv"), &[]);
    assert_eq!(code, 0);
    assert!(out.contains("a1: 0\na2: 0\na3: 0\n"));
    assert!(out.contains("E / display: -1"));
    assert!(out.contains("kernel of Omega: agrees"));

    let (code, out, _) = run_file("relativistic", &problem("minkowski_field.jv"), &[]);
    assert_eq!(code, 0);
    assert!(out.contains("accelerations match display: no"));
    assert!(out.contains("electromagnetic ratio: (1/2*sqrt(-u1_t^2 - u2_t^2 - u3_t^2 + 1))/(c)"));

    let (code, out, _) = run_file("relativistic", &problem("curved_geodesics.jv"), &[]);
    assert_eq!(code, 0);
    assert!(out.contains("Omega display with K = -Christoffel: matches dtau"));
}

#[test]
fn finite_difference_check() {
    for name in ["harmonic.jv", "minimal_surface.jv"] {
        let (code, out, _) = run_file("verify", &problem(name), &[]);
        assert_eq!(code, 0);
        assert!(out.ends_with("passed\n"));
    }
    let (code, out, _) = run_file("verify", &problem("harmonic.jv"), &["--fd-tol", "1e-16"]);
    assert_eq!(code, 4);
    assert!(out.ends_with("failed\n"));
}

#[test]
fn seed_flag_is_accepted() {
    let (code, _, _) = run_file("el", &problem("minimal_surface.jv"), &["--seed", "7"]);
    assert_eq!(code, 0);
}

#[test]
fn input_errors_exit_with_two() {
    let cases = [
        "[context]\nbase = x\n[lagrangian]\nu_x +\n",
        "[context]\nbase = x\n[lagrangian]\nu_xx\n",
        "[context]\nbase = x\n[lagrangian]\nzeta\n",
        "[context]\nbase = x\n",
        "[bogus]\n",
        "u_x\n",
        "[context]\nbase = x\n[metric]\n1, 0\n",
    ];
    for text in cases {
        let cmd = if text.contains("metric") { "minimal" } else { "el" };
        let (code, _, err) = run_text(cmd, text, &[]);
        assert_eq!(code, 2, "{text:?}: {err}");
        assert!(err.starts_with("jetvar: "));
    }
    let out = jetvar(&["el", "/nonexistent/problem.jv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn singular_metric_exits_with_three() {
    let (code, _, err) = run_text("minimal", "[context]\nbase = x\n[metric]\n1, 1\n1, 1\n", &[]);
    assert_eq!(code, 3, "{err}");
    let text = "[metric]\n0, 0, 0, 0\n0, -1, 0, 0\n0, 0, -1, 0\n0, 0, 0, -1\n[particle]\ncharge = 0\n";
    let (code, _, err) = run_text("relativistic", text, &[]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn inconsistent_field_is_rejected() {
    let text = "[metric]\n1, 0, 0, 0\n0, -1, 0, 0\n0, 0, -1, 0\n0, 0, 0, -1\n[potential]\n0, 0, 0, 0\n[field]\n0, 1, 0, 0\n-1, 0, 0, 0\n0, 0, 0, 0\n0, 0, 0, 0\n";
    let (code, _, err) = run_text("relativistic", text, &[]);
    assert_eq!(code, 2, "{err}");
}
