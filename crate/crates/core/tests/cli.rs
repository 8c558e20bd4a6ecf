use std::path::Path;
use std::process::{Command, Output};

use mesovoid::io::{load_cloud, CoefficientsFile, SolveDiagnosticsFile};
use mesovoid::solver::{assemble_system, background_strain};
use mesovoid::{uniform_field, BackgroundField, ForcePair, Point};
use nalgebra::{Vector3, Vector6};

fn mesovoid(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mesovoid")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = mesovoid(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

const BACKGROUND: &str = r#"{"pairs":[{"y0":[3,0,0],"axis":[2,0,0],"gap":0.5,"magnitude":1}]}"#;

fn setup(n: usize) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bg.json"), BACKGROUND).unwrap();
    let n = n.to_string();
    ok(dir.path(), &["generate", "--n", &n, "--d", "0.1", "--eps", "0.01", "--seed", "5", "--out", "cloud.json"]);
    dir
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_is_deterministic_and_valid() {
    let dir = setup(12);
    let p = dir.path();
    ok(p, &["generate", "--n", "12", "--d", "0.1", "--eps", "0.01", "--seed", "5", "--out", "again.json"]);
    assert_eq!(std::fs::read(p.join("cloud.json")).unwrap(), std::fs::read(p.join("again.json")).unwrap());
    assert_eq!(load_cloud(&p.join("cloud.json")).unwrap().len(), 12);

    ok(p, &["generate", "--n", "1", "--d", "0.1", "--eps", "0.01", "--out", "one.json"]);
    assert_eq!(load_cloud(&p.join("one.json")).unwrap().len(), 1);
}

#[test]
fn generate_reports_gate_and_capacity_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = mesovoid(dir.path(), &["generate", "--n", "3", "--d", "0.1", "--eps", "0.1", "--out", "c.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gate"));
    assert!(!dir.path().join("c.json").exists());

    let out = mesovoid(dir.path(), &["generate", "--n", "5000", "--d", "0.1", "--eps", "0.01", "--out", "c.json"]);
    assert_eq!(out.status.code(), Some(3));

    let out = mesovoid(dir.path(), &["generate", "--n", "3", "--d", "-1", "--eps", "0.01", "--out", "c.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn one_void_solution_is_negated_background_strain() {
    let dir = setup(1);
    let p = dir.path();
    ok(p, &["solve", "--cloud", "cloud.json", "--background", "bg.json", "--out", "c.json", "--diagnostics", "d.json"]);
    let cloud = load_cloud(&p.join("cloud.json")).unwrap();
    let bg = BackgroundField::new(vec![ForcePair::new(Point::new(3.0, 0.0, 0.0), Vector3::x(), 0.5, 1.0).unwrap()]);
    let v = background_strain(&bg, &cloud.voids[0].center, &cloud.params).unwrap().0;
    let coeffs: CoefficientsFile = read(&p.join("c.json"));
    assert_eq!(coeffs.vectors()[0], -v);
    let diag: SolveDiagnosticsFile = read(&p.join("d.json"));
    assert_eq!(diag.system.pm_norm_inf, 0.0);
}

#[test]
fn dense_and_neumann_outputs_agree() {
    let dir = setup(25);
    let p = dir.path();
    let out = ok(p, &["solve", "--cloud", "cloud.json", "--background", "bg.json", "--out", "dense.json"]);
    let diag: SolveDiagnosticsFile = serde_json::from_slice(&out.stdout).unwrap();
    assert!(diag.system.residual_inf.unwrap() <= 1e-10 * diag.system.v_norm_inf);
    assert!(diag.system.dipole_spectrum.unwrap().min > 0.0);
    ok(
        p,
        &["solve", "--cloud", "cloud.json", "--background", "bg.json", "--method", "neumann", "--out", "neumann.json"],
    );
    let a: CoefficientsFile = read(&p.join("dense.json"));
    let b: CoefficientsFile = read(&p.join("neumann.json"));
    let (a, b) = (a.vectors(), b.vectors());
    let scale = a.iter().map(|c| c.amax()).fold(0.0, f64::max);
    let diff = a.iter().zip(&b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max);
    assert!(diff <= 1e-9 * scale);
}

#[test]
fn solve_rejects_bad_inputs() {
    let dir = setup(3);
    let p = dir.path();
    std::fs::write(p.join("near.json"), r#"{"pairs":[{"y0":[1.2,0,0],"axis":[1,0,0],"gap":0.1,"magnitude":1}]}"#)
        .unwrap();
    let out = mesovoid(p, &["solve", "--cloud", "cloud.json", "--background", "near.json", "--out", "c.json"]);
    assert_eq!(out.status.code(), Some(3));

    std::fs::write(p.join("broken.json"), "{\"lame\": {\"lambda\": 1").unwrap();
    let out = mesovoid(p, &["solve", "--cloud", "broken.json", "--background", "bg.json", "--out", "c.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json"));

    let out = mesovoid(
        p,
        &["solve", "--cloud", "cloud.json", "--background", "bg.json", "--method", "cg", "--out", "c.json"],
    );
    assert!(!out.status.success());
}

#[test]
fn eval_single_point_matches_library_and_masks_voids() {
    let dir = setup(4);
    let p = dir.path();
    ok(p, &["solve", "--cloud", "cloud.json", "--background", "bg.json", "--out", "c.json", "--diagnostics", "d.json"]);
    let cloud = load_cloud(&p.join("cloud.json")).unwrap();
    let o = cloud.voids[2].center;
    let grid = format!(r#"{{"points":[[0.5,0.25,-0.125],[{},{},{}]]}}"#, o[0], o[1], o[2]);
    std::fs::write(p.join("grid.json"), grid).unwrap();
    ok(
        p,
        &[
            "eval",
            "--cloud",
            "cloud.json",
            "--coeffs",
            "c.json",
            "--background",
            "bg.json",
            "--grid",
            "grid.json",
            "--out",
            "f.csv",
        ],
    );
    let csv = std::fs::read_to_string(p.join("f.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "x,y,z,ux,uy,uz,status");
    let row: Vec<f64> = lines[1].split(',').map(|t| t.parse().unwrap()).collect();

    let coeffs: CoefficientsFile = read(&p.join("c.json"));
    let bg = mesovoid::io::load_background(&p.join("bg.json")).unwrap();
    let u = uniform_field(&Point::new(0.5, 0.25, -0.125), &cloud, &bg, &coeffs.vectors()).unwrap();
    assert_eq!(&row[3..6], u.as_slice());
    assert_eq!(row[6], 0.0);
    assert!(lines[2].ends_with(",,,,3"), "{}", lines[2]);
}

#[test]
fn eval_rejects_mismatched_coefficients() {
    let dir = setup(4);
    let p = dir.path();
    std::fs::write(p.join("c.json"), r#"{"method":"dense","coefficients":[[0,0,0,0,0,0]]}"#).unwrap();
    std::fs::write(p.join("grid.json"), r#"{"points":[[5,0,0]]}"#).unwrap();
    let out = mesovoid(
        p,
        &[
            "eval",
            "--cloud",
            "cloud.json",
            "--coeffs",
            "c.json",
            "--background",
            "bg.json",
            "--grid",
            "grid.json",
            "--out",
            "f.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("coefficient"));
}

#[test]
fn eval_vtk_and_far_field_warning() {
    let dir = setup(4);
    let p = dir.path();
    ok(p, &["solve", "--cloud", "cloud.json", "--background", "bg.json", "--out", "c.json", "--diagnostics", "d.json"]);
    std::fs::write(p.join("grid.json"), r#"{"lattice":{"origin":[-1,0,0],"spacing":[1,1,1],"counts":[4,1,1]}}"#)
        .unwrap();
    let out = ok(
        p,
        &[
            "eval",
            "--cloud",
            "cloud.json",
            "--coeffs",
            "c.json",
            "--background",
            "bg.json",
            "--grid",
            "grid.json",
            "--kind",
            "far",
            "--format",
            "vtk",
            "--out",
            "f.vtk",
        ],
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let vtk = std::fs::read_to_string(p.join("f.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0\n"));
    assert!(vtk.contains("DATASET POLYDATA\nPOINTS 4 double\n-1.0 0.0 0.0\n0.0 0.0 0.0\n1.0 0.0 0.0\n2.0 0.0 0.0\n"));
    assert_eq!(vtk.matches("VECTORS displacement double").count(), 1);
}

#[test]
fn validate_default_cloud_passes() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["validate", "--report", "r.json"]);
    let report: serde_json::Value = read(&dir.path().join("r.json"));
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() > 10);
    for check in report["checks"].as_array().unwrap() {
        assert!(check["threshold"].is_number());
    }
}

#[test]
fn validate_corrupted_cloud() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "not json").unwrap();
    let out = mesovoid(dir.path(), &["validate", "--cloud", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed JSON"));
}

#[test]
fn study_skips_gate_failures() {
    let dir = setup(6);
    let p = dir.path();
    ok(
        p,
        &[
            "study",
            "--cloud",
            "cloud.json",
            "--background",
            "bg.json",
            "--eps-list",
            "0.016,0.008,0.004,0.03,0.002",
            "--report",
            "s.json",
        ],
    );
    let report: serde_json::Value = read(&p.join("s.json"));
    let skipped = report["study"]["skipped"].as_array().unwrap();
    assert_eq!(skipped.len(), 1);
    assert_eq!(skipped[0]["eps"], 0.03);
    assert!(report["study"]["fit"]["slope"].as_f64().unwrap() >= 0.9);
    assert_eq!(report["checks"][0]["passed"], true);
}

#[test]
fn library_and_cli_share_system() {
    // V assembled by the library matches the one implied by the CLI output
    let dir = setup(3);
    let p = dir.path();
    ok(p, &["solve", "--cloud", "cloud.json", "--background", "bg.json", "--out", "c.json", "--diagnostics", "d.json"]);
    let cloud = load_cloud(&p.join("cloud.json")).unwrap();
    let bg = mesovoid::io::load_background(&p.join("bg.json")).unwrap();
    let sys = assemble_system(&cloud, &bg).unwrap();
    let coeffs: CoefficientsFile = read(&p.join("c.json"));
    let c = nalgebra::DVector::from_iterator(
        18,
        coeffs.vectors().iter().flat_map(|v: &Vector6<f64>| v.iter().copied().collect::<Vec<_>>()),
    );
    assert!(sys.residual(&c).amax() <= 1e-10 * sys.v.amax());
}
