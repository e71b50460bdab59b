//! End-to-end runs of the `horoconv` binary.

use std::path::Path;
use std::process::{Command, Output};

fn horoconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_horoconv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn note<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    let prefix = format!("note.{key} = ");
    report.lines().find_map(|l| l.strip_prefix(prefix.as_str()))
}

fn num(s: &str) -> f64 {
    s.split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn verify_catalog_totally_geodesic() {
    let o = horoconv(&["verify-catalog", "--entry", "totally-geodesic", "--n", "3", "--samples", "200", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = stdout(&o);
    assert!(r.starts_with("horoconv-report/1\n"));
    assert_eq!(r.matches("[report totally-geodesic:").count(), 3);
    assert!(!r.contains("result = fail"));
}

#[test]
fn verify_catalog_product_eigenvalues() {
    let o = horoconv(&["verify-catalog", "--entry", "product", "--k", "1", "--r", "1.0", "--n", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = stdout(&o);
    // -1/2 - r^2 + r sqrt(1 + r^2) and its negative at r = 1
    let lo = -0.5 - 1.0 + 2f64.sqrt();
    let values = note(&r, "lambda_values").unwrap();
    let parsed: Vec<f64> = values
        .trim_matches(|c| c == '[' || c == ']')
        .split(", ")
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(parsed.len(), 2);
    assert!((parsed[0] - lo).abs() < 1e-6 && (parsed[1] + lo).abs() < 1e-6);
    assert_eq!(note(&r, "lambda_multiplicities"), Some("(1,2)"));
}

#[test]
fn verify_catalog_unknown_entry() {
    let o = horoconv(&["verify-catalog", "--entry", "nosuch"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unknown catalog entry 'nosuch'"));
    assert!(o.stdout.is_empty());
}

#[test]
fn analyze_round_suggests_dilation() {
    let o = horoconv(&["analyze", "--spec", "round", "--n", "4"]);
    assert_eq!(code(&o), 0);
    let r = stdout(&o);
    assert!((num(note(&r, "lambda_min").unwrap()) - 0.5).abs() < 1e-12);
    assert!((num(note(&r, "lambda_max").unwrap()) - 0.5).abs() < 1e-12);
    assert_eq!(note(&r, "bound_lambda_below_half"), Some("false"));
    assert!(note(&r, "dilation_needed").unwrap().starts_with("t = "));
    assert_eq!(note(&r, "structure.two_eigenvalues"), Some("false"));
}

#[test]
fn analyze_geodesic_sphere() {
    let o = horoconv(&["analyze", "--spec", "geodesic-sphere:t=1"]);
    assert_eq!(code(&o), 0);
    let r = stdout(&o);
    let want = (-2f64).exp() / 2.0;
    assert!((num(note(&r, "lambda_min").unwrap()) - want).abs() < 1e-9);
    assert!((num(note(&r, "lambda_max").unwrap()) - want).abs() < 1e-9);
    assert_eq!(note(&r, "dilation_needed"), Some("none"));
    // sigma_k of n equal eigenvalues is C(n,k) lambda^k
    let s2 = note(&r, "sigma_2").unwrap();
    assert!(s2.starts_with(&format!("[{}", horoconv::report::fmt_f64(3.0 * want * want))));
}

#[test]
fn analyze_product_structure() {
    let o = horoconv(&["analyze", "--spec", "product:k=3,r=0.5", "--n", "4"]);
    assert_eq!(code(&o), 0);
    let r = stdout(&o);
    assert_eq!(note(&r, "structure.two_eigenvalues"), Some("true"));
    assert!(note(&r, "structure.multiplicities").unwrap().starts_with("(3,1)"));
}

#[test]
fn analyze_errors() {
    let o = horoconv(&["analyze", "--spec", "expr:exp(x1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("parse error at position"));
    // log of a negative quantity everywhere: no point in the domain
    let o = horoconv(&["analyze", "--spec", "expr:log(-2-x1^2)"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn correspond_geodesic_sphere_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("s.obj");
    let jets = dir.path().join("s.csv");
    let o = horoconv(&[
        "correspond",
        "--spec",
        "geodesic-sphere:t=1",
        "--grid",
        "12x20",
        "--mesh-out",
        mesh.to_str().unwrap(),
        "--jets-out",
        jets.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (models, _) = tobj::load_obj(&mesh, &tobj::LoadOptions::default()).unwrap();
    let pos = &models[0].mesh.positions;
    assert_eq!(pos.len(), 3 * 12 * 20);
    let radius = 0.5f64.tanh();
    for v in pos.chunks(3) {
        let norm = ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) as f64).sqrt();
        assert!((norm - radius).abs() < 1e-6);
    }
    let mut rd = csv::Reader::from_path(&jets).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[0], "x1");
    assert_eq!(header[4], "rho");
    assert_eq!(header.last().unwrap(), "lambda3");
    assert_eq!(rd.records().count(), 240);
}

#[test]
fn correspond_round_needs_dilation() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("r.ply");
    let o = horoconv(&["correspond", "--spec", "round", "--mesh-out", mesh.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(!mesh.exists());
    let o = horoconv(&["correspond", "--spec", "round", "--dilate", "--mesh-out", mesh.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("warning:"));
    assert!(note(&stdout(&o), "degenerate_points_before_dilation").is_some());
    let ply = std::fs::read_to_string(&mesh).unwrap();
    assert!(ply.starts_with("ply\nformat ascii 1.0\nelement vertex 512\n"));
}

#[test]
fn correspond_totally_geodesic_inside_ball() {
    let o = horoconv(&["correspond", "--spec", "totally-geodesic:r=1", "--n", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("[check mesh.inside_unit_ball]"));
}

#[test]
fn invariance_examples() {
    // radial metric about the x4 axis: rotations fixing the axis and boosts
    let o = horoconv(&[
        "invariance",
        "--spec",
        "expr:0.3*x4^2",
        "--generator",
        "rotation:1,2",
        "--generator",
        "boost:4,0.3;boost:1,0.3",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = stdout(&o);
    assert!(r.contains("adjudication.rotation:1,2,1.000000000e0 = invariant"));
    assert!(r.contains("adjudication.boost:4,3.000000000e-1 = not invariant"));
    assert!(r.contains("adjudication.boost:1,3.000000000e-1 = not invariant"));
    assert_eq!(note(&r, "disagreements"), Some("0"));

    let o = horoconv(&["invariance", "--spec", "product:k=2,r=1", "--generator", "rotation:1,2;rotation:3,4,0.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = stdout(&o);
    let invariant = r
        .lines()
        .filter(|l| l.starts_with("adjudication.") && l.ends_with("= invariant"))
        .count();
    assert_eq!(invariant, 7);

    let o = horoconv(&["invariance", "--spec", "round", "--generator", "twist:1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn radial_constant_branch() {
    let o = horoconv(&["radial", "--n", "4", "--k", "2", "--branch", "constant"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = stdout(&o);
    assert!(note(&r, "period").unwrap().starts_with("degenerate"));
    assert!(r.contains("[check closed_form_deviation]"));
}

#[test]
fn radial_delaunay_n4_reports_no_period() {
    let o = horoconv(&["radial", "--n", "4", "--k", "2", "--branch", "delaunay", "--perturb", "0.05"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = stdout(&o);
    assert!(note(&r, "period").unwrap().starts_with("none"));
    assert!(num(note(&r, "orbit.max_u_plus_s").unwrap()) <= -0.05 + 1e-9);
}

#[test]
fn radial_delaunay_n5_period_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("p.csv");
    let mesh = dir.path().join("d.obj");
    let o = horoconv(&[
        "radial",
        "--n",
        "5",
        "--k",
        "2",
        "--branch",
        "delaunay",
        "--dilate",
        "--samples",
        "60",
        "--segments",
        "8",
        "--profile-out",
        prof.to_str().unwrap(),
        "--mesh-out",
        mesh.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = stdout(&o);
    let p = num(note(&r, "period").unwrap());
    assert!((p - 9.2266).abs() < 1e-3, "{p}");
    assert!(r.contains("[check period_stability]"));
    let text = std::fs::read_to_string(&prof).unwrap();
    assert!(text.starts_with("s,r,u,du_dr,lambda_tan,lambda_rad,sigma_k_residual\n"));
    let (models, _) = tobj::load_obj(&mesh, &tobj::LoadOptions::default()).unwrap();
    assert_eq!(models[0].mesh.positions.len(), 3 * 60 * 8);

    // the written profile loads back as a metric spec
    let spec = format!("profile:{}", prof.display());
    let o = horoconv(&["analyze", "--spec", &spec, "--n", "5", "--points", "10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn radial_flat_and_singular() {
    let o = horoconv(&["radial", "--n", "3", "--k", "1", "--c", "0", "--branch", "flat"]);
    assert_eq!(code(&o), 0);
    let r = stdout(&o);
    let block = r.split("[check sigma_k_residual]").nth(1).unwrap();
    assert!(block.contains("max_residual = 0.000000000e0"));
    let o = horoconv(&["radial", "--n", "4", "--k", "2", "--branch", "flat"]);
    assert_eq!(code(&o), 5);
    let o = horoconv(&["radial", "--n", "3", "--k", "4"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn export_mesh_formats() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("m.obj");
    let o = horoconv(&["export-mesh", "--spec", "geodesic-sphere:t=0.5", "--grid", "4x6", obj.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 24);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 2 * 3 * 6);
    let bad = dir.path().join("m.stl");
    let o = horoconv(&["export-mesh", "--spec", "round", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let forced = dir.path().join("m.txt");
    let o = horoconv(&[
        "export-mesh",
        "--spec",
        "geodesic-sphere:t=0.5",
        "--format",
        "ply",
        forced.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(&forced).unwrap().starts_with("ply\n"));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &Path| {
        let o = horoconv(&[
            "analyze",
            "--spec",
            "expr:0.2*x1-0.1*x3^2",
            "--points",
            "30",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        assert!(o.stdout.is_empty());
        assert!(stderr(&o).contains("elapsed"));
        std::fs::read(out).unwrap()
    };
    let a = run(&dir.path().join("a.txt"));
    let b = run(&dir.path().join("b.txt"));
    assert_eq!(a, b);
    assert!(!String::from_utf8(a).unwrap().contains("elapsed"));
    let x = stdout(&horoconv(&["verify-catalog", "--entry", "equidistant", "--samples", "40"]));
    let y = stdout(&horoconv(&["verify-catalog", "--entry", "equidistant", "--samples", "40"]));
    assert_eq!(x, y);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&horoconv(&["frobnicate"])), 2);
    assert_eq!(code(&horoconv(&["analyze"])), 2);
    assert_eq!(code(&horoconv(&["--help"])), 0);
}
