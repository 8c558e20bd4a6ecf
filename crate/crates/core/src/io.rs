//! File formats and the command implementations behind the `mesovoid`
//! binary.
//!
//! Structured inputs and reports are JSON; bulk field output is CSV or
//! legacy ASCII VTK. All floating-point output uses shortest round-trip
//! formatting so reruns produce identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{Vector3, Vector6};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cloud::{generate_cloud, validate_cloud, Cloud, CloudSpec, Region, DEFAULT_GATE};
use crate::elastic::{LameParams, Point};
use crate::error::{Error, Result};
use crate::field::{evaluate_grid, far_warnings, EvaluationGrid, FieldKind, FieldSample};
use crate::solver::{
    assemble_system, solve_coefficients, system_diagnostics, BackgroundField, ForcePair, SolveMethod, SystemDiagnostics,
};
use crate::sphere::Void;
use crate::validation::quadrature::SphereRule;
use crate::validation::{
    residual_convergence_study, run_check_suite, CheckReport, ConvergenceStudy, SuiteReport, STUDY_SLOPE_THRESHOLD,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LameFile {
    pub lambda: f64,
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionFile {
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoidFile {
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudFile {
    pub lame: LameFile,
    pub d: f64,
    pub region: RegionFile,
    pub voids: Vec<VoidFile>,
}

impl CloudFile {
    pub fn from_cloud(cloud: &Cloud) -> Self {
        Self {
            lame: LameFile { lambda: cloud.params.lambda(), mu: cloud.params.mu() },
            d: cloud.d,
            region: RegionFile { center: cloud.region.center.into(), radius: cloud.region.radius },
            voids: cloud.voids.iter().map(|v| VoidFile { center: v.center.into(), radius: v.radius }).collect(),
        }
    }

    /// Builds the cloud and checks its invariants against `gate_c`.
    pub fn into_cloud(self, gate_c: f64) -> Result<Cloud> {
        let params = LameParams::new(self.lame.lambda, self.lame.mu)?;
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::Geometry(format!("d must be positive, got {}", self.d)));
        }
        if !(self.region.radius > 0.0 && self.region.radius.is_finite()) {
            return Err(Error::Geometry(format!("region radius must be positive, got {}", self.region.radius)));
        }
        let voids =
            self.voids.iter().map(|v| Void::new(Point::from(v.center), v.radius)).collect::<Result<Vec<_>>>()?;
        let cloud = Cloud {
            voids,
            d: self.d,
            region: Region { center: Point::from(self.region.center), radius: self.region.radius },
            params,
        };
        let report = validate_cloud(&cloud, gate_c);
        if !report.separation_ok || !report.clearance_ok {
            return Err(Error::Geometry(report.failures().join("; ")));
        }
        if !report.gate_ok {
            return Err(Error::Gate(report.failures().join("; ")));
        }
        Ok(cloud)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub y0: [f64; 3],
    pub axis: [f64; 3],
    pub gap: f64,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundFile {
    pub pairs: Vec<PairFile>,
}

impl BackgroundFile {
    pub fn from_field(bg: &BackgroundField) -> Self {
        Self {
            pairs: bg
                .pairs
                .iter()
                .map(|p| PairFile { y0: p.y0.into(), axis: p.axis.into(), gap: p.gap, magnitude: p.magnitude })
                .collect(),
        }
    }

    /// Normalizes the axes.
    pub fn into_field(self) -> Result<BackgroundField> {
        let pairs = self
            .pairs
            .iter()
            .map(|p| ForcePair::new(Point::from(p.y0), Vector3::from(p.axis), p.gap, p.magnitude))
            .collect::<Result<_>>()?;
        Ok(BackgroundField::new(pairs))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsFile {
    pub method: SolveMethod,
    /// One packed 6-vector per void.
    pub coefficients: Vec<[f64; 6]>,
}

impl CoefficientsFile {
    pub fn vectors(&self) -> Vec<Vector6<f64>> {
        self.coefficients.iter().map(|c| Vector6::from_row_slice(c)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnosticsFile {
    pub method: SolveMethod,
    pub terms: usize,
    #[serde(flatten)]
    pub system: SystemDiagnostics,
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: display(path), source })?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: display(path), source })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: display(path), source })
}

pub fn load_cloud(path: &Path) -> Result<Cloud> {
    read_json::<CloudFile>(path)?.into_cloud(DEFAULT_GATE)
}

pub fn save_cloud(path: &Path, cloud: &Cloud) -> Result<()> {
    write_text(path, &to_json(&CloudFile::from_cloud(cloud)))
}

pub fn load_background(path: &Path) -> Result<BackgroundField> {
    read_json::<BackgroundFile>(path)?.into_field()
}

pub fn save_background(path: &Path, bg: &BackgroundField) -> Result<()> {
    write_text(path, &to_json(&BackgroundFile::from_field(bg)))
}

pub fn load_grid(path: &Path) -> Result<EvaluationGrid> {
    let grid: EvaluationGrid = read_json(path)?;
    grid.validate()?;
    Ok(grid)
}

/// CSV rows `x,y,z,ux,uy,uz,status`; masked rows leave the `u` columns empty.
pub fn field_csv(samples: &[FieldSample]) -> String {
    let mut out = String::from("x,y,z,ux,uy,uz,status\n");
    for s in samples {
        let p = s.point;
        let _ = write!(out, "{:?},{:?},{:?},", p[0], p[1], p[2]);
        match s.u {
            Some(u) => {
                let _ = write!(out, "{:?},{:?},{:?},", u[0], u[1], u[2]);
            }
            None => out.push_str(",,,"),
        }
        let _ = writeln!(out, "{}", s.status.code());
    }
    out
}

/// Legacy ASCII VTK polydata with a `displacement` vector array and a
/// `status` scalar array. Masked points carry zero displacement.
pub fn field_vtk(samples: &[FieldSample]) -> String {
    let n = samples.len();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\nmesovoid displacement field\nASCII\nDATASET POLYDATA\n");
    let _ = writeln!(out, "POINTS {n} double");
    for s in samples {
        let _ = writeln!(out, "{:?} {:?} {:?}", s.point[0], s.point[1], s.point[2]);
    }
    let _ = writeln!(out, "VERTICES {n} {}", 2 * n);
    for i in 0..n {
        let _ = writeln!(out, "1 {i}");
    }
    let _ = writeln!(out, "POINT_DATA {n}");
    out.push_str("VECTORS displacement double\n");
    for s in samples {
        let u = s.u.unwrap_or_else(Vector3::zeros);
        let _ = writeln!(out, "{:?} {:?} {:?}", u[0], u[1], u[2]);
    }
    out.push_str("SCALARS status int 1\nLOOKUP_TABLE default\n");
    for s in samples {
        let _ = writeln!(out, "{}", s.status.code());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Vtk,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "vtk" => Ok(OutputFormat::Vtk),
            other => Err(Error::Input(format!("unknown output format {other:?} (expected csv|vtk)"))),
        }
    }
}

/// Cloud used when a command is run without `--cloud`.
pub fn default_cloud(n: usize) -> Result<Cloud> {
    generate_cloud(&CloudSpec {
        region: Region { center: Point::zeros(), radius: 1.0 },
        n,
        d: 0.1,
        eps: 0.01,
        seed: 0,
        gate_c: DEFAULT_GATE,
        params: LameParams::new(1.0, 1.0)?,
    })
}

/// Background used when a command is run without `--background`.
pub fn default_background() -> BackgroundField {
    BackgroundField::new(vec![
        ForcePair::new(Point::new(3.0, 0.0, 0.0), Vector3::x(), 0.5, 1.0).expect("valid pair"),
        ForcePair::new(Point::new(0.0, 0.0, -3.0), Vector3::y(), 0.5, 1.0).expect("valid pair"),
    ])
}

#[derive(Clone, Debug)]
pub struct GenerateOptions {
    pub n: usize,
    pub d: f64,
    pub eps: f64,
    pub region_radius: f64,
    pub seed: u64,
    pub lambda: f64,
    pub mu: f64,
    pub gate_c: f64,
    pub out: PathBuf,
}

pub fn cmd_generate(opts: &GenerateOptions) -> Result<Cloud> {
    if !(opts.region_radius > 0.0 && opts.region_radius.is_finite()) {
        return Err(Error::Input(format!("region radius must be positive, got {}", opts.region_radius)));
    }
    let cloud = generate_cloud(&CloudSpec {
        region: Region { center: Point::zeros(), radius: opts.region_radius },
        n: opts.n,
        d: opts.d,
        eps: opts.eps,
        seed: opts.seed,
        gate_c: opts.gate_c,
        params: LameParams::new(opts.lambda, opts.mu)?,
    })?;
    save_cloud(&opts.out, &cloud)?;
    Ok(cloud)
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub cloud: PathBuf,
    pub background: PathBuf,
    pub method: SolveMethod,
    pub out: PathBuf,
    /// Diagnostics destination; `None` returns them for printing.
    pub diagnostics: Option<PathBuf>,
}

pub fn cmd_solve(opts: &SolveOptions) -> Result<SolveDiagnosticsFile> {
    let cloud = load_cloud(&opts.cloud)?;
    let bg = load_background(&opts.background)?;
    let sys = assemble_system(&cloud, &bg)?;
    let solution = solve_coefficients(&sys, opts.method)?;
    let coeffs = CoefficientsFile {
        method: opts.method,
        coefficients: solution.coefficients().iter().map(|c| (*c).into()).collect(),
    };
    write_text(&opts.out, &to_json(&coeffs))?;
    let diagnostics = SolveDiagnosticsFile {
        method: opts.method,
        terms: solution.terms,
        system: system_diagnostics(&sys, Some(&solution)),
    };
    if let Some(path) = &opts.diagnostics {
        write_text(path, &to_json(&diagnostics))?;
    }
    Ok(diagnostics)
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub cloud: PathBuf,
    pub coeffs: PathBuf,
    pub background: PathBuf,
    pub grid: PathBuf,
    pub kind: FieldKind,
    pub format: OutputFormat,
    pub out: PathBuf,
}

/// Summary of a field evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalSummary {
    pub points: usize,
    pub masked: usize,
    pub far_warnings: usize,
}

pub fn cmd_eval(opts: &EvalOptions) -> Result<EvalSummary> {
    let cloud = load_cloud(&opts.cloud)?;
    let bg = load_background(&opts.background)?;
    let coeffs: CoefficientsFile = read_json(&opts.coeffs)?;
    let grid = load_grid(&opts.grid)?;
    let samples = evaluate_grid(&grid, opts.kind, &cloud, &bg, &coeffs.vectors(), true)?;
    let text = match opts.format {
        OutputFormat::Csv => field_csv(&samples),
        OutputFormat::Vtk => field_vtk(&samples),
    };
    write_text(&opts.out, &text)?;
    Ok(EvalSummary {
        points: samples.len(),
        masked: samples.iter().filter(|s| s.u.is_none()).count(),
        far_warnings: far_warnings(&samples),
    })
}

/// Number of voids in the cloud used by `validate` without `--cloud`.
pub const DEFAULT_VALIDATE_VOIDS: usize = 5;
/// Number of voids in the cloud used by `study` without `--cloud`.
pub const DEFAULT_STUDY_VOIDS: usize = 20;
/// Default study radii as multiples of `d`.
pub const DEFAULT_EPS_OVER_D: [f64; 4] = [0.16, 0.08, 0.04, 0.02];

#[derive(Clone, Debug, Default)]
pub struct ValidateOptions {
    pub cloud: Option<PathBuf>,
    pub background: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

fn inputs(
    cloud: &Option<PathBuf>,
    background: &Option<PathBuf>,
    default_voids: usize,
) -> Result<(Cloud, BackgroundField)> {
    let cloud = match cloud {
        Some(path) => load_cloud(path)?,
        None => default_cloud(default_voids)?,
    };
    let bg = match background {
        Some(path) => load_background(path)?,
        None => default_background(),
    };
    Ok((cloud, bg))
}

fn finish<T: Serialize>(report: &T, path: &Option<PathBuf>, checks: &[CheckReport]) -> Result<String> {
    let text = to_json(report);
    if let Some(path) = path {
        write_text(path, &text)?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(Error::ChecksFailed { failed, total: checks.len() });
    }
    Ok(text)
}

/// Runs the check suite. The report is written before a failing suite
/// returns [`Error::ChecksFailed`]. Returns the report text.
pub fn cmd_validate(opts: &ValidateOptions) -> Result<String> {
    let (cloud, bg) = inputs(&opts.cloud, &opts.background, DEFAULT_VALIDATE_VOIDS)?;
    let report: SuiteReport = run_check_suite(&cloud, &bg)?;
    finish(&report, &opts.report, &report.checks)
}

#[derive(Clone, Debug, Default)]
pub struct StudyOptions {
    pub cloud: Option<PathBuf>,
    pub background: Option<PathBuf>,
    /// Defaults to [`DEFAULT_EPS_OVER_D`] times the cloud's `d`.
    pub eps_list: Option<Vec<f64>>,
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study: ConvergenceStudy,
    pub checks: Vec<CheckReport>,
}

pub fn cmd_study(opts: &StudyOptions) -> Result<String> {
    let (cloud, bg) = inputs(&opts.cloud, &opts.background, DEFAULT_STUDY_VOIDS)?;
    let eps_list = opts.eps_list.clone().unwrap_or_else(|| DEFAULT_EPS_OVER_D.iter().map(|r| r * cloud.d).collect());
    let study = residual_convergence_study(&cloud, &bg, &eps_list, DEFAULT_GATE, &SphereRule::default())?;
    let slope = study.fit.as_ref().map_or(f64::NAN, |f| f.slope);
    let checks = vec![CheckReport::at_least("residual_slope", slope, STUDY_SLOPE_THRESHOLD)];
    let report = StudyReport { study, checks };
    finish(&report, &opts.report, &report.checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SampleStatus;

    #[test]
    fn cloud_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.json");
        let mut cloud = default_cloud(7).unwrap();
        cloud.params = LameParams::new(0.1 + 0.2, 1.0 / 3.0).unwrap();
        save_cloud(&path, &cloud).unwrap();
        let back = load_cloud(&path).unwrap();
        assert_eq!(back, cloud);
    }

    #[test]
    fn background_round_trip_and_normalization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bg.json");
        write_text(&path, r#"{"pairs":[{"y0":[3,0,0],"axis":[0,3,4],"gap":0.5,"magnitude":2}]}"#).unwrap();
        let bg = load_background(&path).unwrap();
        assert!((bg.pairs[0].axis - Vector3::new(0.0, 0.6, 0.8)).norm() < 1e-15);
        save_background(&path, &bg).unwrap();
        assert_eq!(load_background(&path).unwrap(), bg);
    }

    #[test]
    fn invalid_cloud_files_name_the_invariant() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.json");
        let close = r#"{"lame":{"lambda":1,"mu":1},"d":0.1,"region":{"center":[0,0,0],"radius":1},
            "voids":[{"center":[0,0,0],"radius":0.01},{"center":[0.1,0,0],"radius":0.01}]}"#;
        write_text(&path, close).unwrap();
        let err = load_cloud(&path).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)) && err.to_string().contains("separation"), "{err}");

        let fat = r#"{"lame":{"lambda":1,"mu":1},"d":0.1,"region":{"center":[0,0,0],"radius":1},
            "voids":[{"center":[0,0,0],"radius":0.05}]}"#;
        write_text(&path, fat).unwrap();
        assert!(matches!(load_cloud(&path), Err(Error::Gate(_))));

        write_text(&path, "{\"lame\":").unwrap();
        let err = load_cloud(&path).unwrap_err();
        assert!(matches!(err, Error::Json { .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn csv_and_vtk_layout() {
        let samples = vec![
            FieldSample {
                point: Point::new(0.0, 1.5, -2.0),
                u: Some(Vector3::new(1e-7, 0.25, -3.0)),
                status: SampleStatus::Exterior,
                far_warning: false,
            },
            FieldSample {
                point: Point::new(0.1, 0.0, 0.0),
                u: None,
                status: SampleStatus::InsideVoid(3),
                far_warning: false,
            },
        ];
        let csv = field_csv(&samples);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,z,ux,uy,uz,status");
        assert_eq!(lines[1], "0.0,1.5,-2.0,1e-7,0.25,-3.0,0");
        assert_eq!(lines[2], "0.1,0.0,0.0,,,,3");
        let parsed: Vec<f64> = lines[1].split(',').map(|t| t.parse().unwrap()).collect();
        assert_eq!(parsed[3], 1e-7);

        let vtk = field_vtk(&samples);
        assert!(vtk.contains("DATASET POLYDATA\nPOINTS 2 double\n"));
        assert!(vtk.contains("VECTORS displacement double\n1e-7 0.25 -3.0\n0.0 0.0 0.0\n"));
        assert!(vtk.ends_with("LOOKUP_TABLE default\n0\n3\n"));
    }

    #[test]
    fn parsers() {
        assert_eq!("vtk".parse::<OutputFormat>().unwrap(), OutputFormat::Vtk);
        assert!("json".parse::<OutputFormat>().is_err());
    }
}
