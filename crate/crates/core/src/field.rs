//! Approximate displacement fields of a solved cloud.
//!
//! * far field: `u(x) + Σ_k D(x, O⁽ᵏ⁾) M⁽ᵏ⁾ C⁽ᵏ⁾`, valid at unit distance
//!   from the cloud region,
//! * uniform field: `u(x) + Σ_k Q⁽ᵏ⁾(x) C⁽ᵏ⁾`, valid everywhere outside the
//!   cavities.

use nalgebra::{Vector3, Vector6};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::Cloud;
use crate::elastic::{Displacement, Point};
use crate::error::{Error, Result};
use crate::kernels::{FreeSpace, GreenKernel};
use crate::solver::{background_eval, BackgroundField};
use crate::sphere::{dipole_field, dipole_field_unchecked, dipole_matrix};

/// Guard radius around each point force, relative to the pair gap.
pub const NEAR_SOURCE_GUARD: f64 = 1e-3;

/// Minimum distance from the cloud region for the far-field formula.
pub const FAR_FIELD_DISTANCE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Far,
    Uniform,
}

impl std::str::FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "far" => Ok(FieldKind::Far),
            "uniform" => Ok(FieldKind::Uniform),
            other => Err(Error::Input(format!("unknown field kind {other:?} (expected far|uniform)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleStatus {
    Exterior,
    /// 1-based void index.
    InsideVoid(usize),
    NearSource,
}

impl SampleStatus {
    /// `0` exterior, `k` inside void `k`, `−1` near a source.
    pub fn code(&self) -> i64 {
        match *self {
            SampleStatus::Exterior => 0,
            SampleStatus::InsideVoid(k) => k as i64,
            SampleStatus::NearSource => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    pub point: Point,
    /// `None` unless the status is exterior.
    pub u: Option<Displacement>,
    pub status: SampleStatus,
    /// Far field evaluated closer than [`FAR_FIELD_DISTANCE`] to the region.
    pub far_warning: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluationGrid {
    Points(Vec<[f64; 3]>),
    /// Axis-aligned lattice traversed with `x` fastest, then `y`, then `z`.
    Lattice {
        origin: [f64; 3],
        spacing: [f64; 3],
        counts: [usize; 3],
    },
}

impl EvaluationGrid {
    pub fn validate(&self) -> Result<()> {
        match self {
            EvaluationGrid::Points(pts) => {
                if pts.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::Input("grid points must be finite".into()));
                }
            }
            EvaluationGrid::Lattice { origin, spacing, counts } => {
                if origin.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Input("lattice origin must be finite".into()));
                }
                if spacing.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
                    return Err(Error::Input(format!("lattice spacing must be positive, got {spacing:?}")));
                }
                if counts.contains(&0) {
                    return Err(Error::Input(format!("lattice counts must be at least 1, got {counts:?}")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match self {
            EvaluationGrid::Points(pts) => pts.len(),
            EvaluationGrid::Lattice { counts, .. } => counts.iter().product(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in traversal order.
    pub fn points(&self) -> Vec<Point> {
        match self {
            EvaluationGrid::Points(pts) => pts.iter().map(|p| Point::from(*p)).collect(),
            EvaluationGrid::Lattice { origin, spacing, counts } => {
                let mut out = Vec::with_capacity(self.len());
                for k in 0..counts[2] {
                    for j in 0..counts[1] {
                        for i in 0..counts[0] {
                            out.push(Point::new(
                                origin[0] + i as f64 * spacing[0],
                                origin[1] + j as f64 * spacing[1],
                                origin[2] + k as f64 * spacing[2],
                            ));
                        }
                    }
                }
                out
            }
        }
    }
}

/// Solved cloud ready for field evaluation. Caches `M⁽ᵏ⁾C⁽ᵏ⁾`.
pub struct FieldEvaluator<'a> {
    cloud: &'a Cloud,
    bg: &'a BackgroundField,
    coeffs: &'a [Vector6<f64>],
    kernel: FreeSpace,
    mc: Vec<Vector6<f64>>,
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(cloud: &'a Cloud, bg: &'a BackgroundField, coeffs: &'a [Vector6<f64>]) -> Result<Self> {
        if coeffs.len() != cloud.len() {
            return Err(Error::Input(format!(
                "{} coefficient vectors supplied for a cloud of {} voids",
                coeffs.len(),
                cloud.len()
            )));
        }
        let mc = cloud
            .voids
            .iter()
            .zip(coeffs)
            .map(|(v, c)| Ok(dipole_matrix(v.radius, &cloud.params)?.0 * c))
            .collect::<Result<_>>()?;
        Ok(Self { cloud, bg, coeffs, kernel: FreeSpace::new(cloud.params), mc })
    }

    pub fn far(&self, x: &Point) -> Result<Displacement> {
        let p = &self.cloud.params;
        let mut u = background_eval(self.bg, x, p)?;
        for (v, mc) in self.cloud.voids.iter().zip(&self.mc) {
            let mut kernel = self.kernel.dipole_kernel(x, &v.center)?;
            if let Some(h) = self.kernel.regular_dipole_kernel(x, &v.center) {
                kernel -= h;
            }
            u += kernel * mc;
        }
        Ok(u)
    }

    pub fn uniform(&self, x: &Point) -> Result<Displacement> {
        let p = &self.cloud.params;
        let mut u = background_eval(self.bg, x, p)?;
        for (v, c) in self.cloud.voids.iter().zip(self.coeffs) {
            u += dipole_field(x, v, p)? * c;
        }
        Ok(u)
    }

    /// Uniform field continued analytically into the cavities, for finite
    /// difference stencils that straddle a cavity surface.
    pub(crate) fn uniform_unchecked(&self, x: &Point) -> Result<Displacement> {
        let p = &self.cloud.params;
        let mut u = background_eval(self.bg, x, p)?;
        for (v, c) in self.cloud.voids.iter().zip(self.coeffs) {
            u += dipole_field_unchecked(x, v, p)? * c;
        }
        Ok(u)
    }

    pub fn cloud(&self) -> &Cloud {
        self.cloud
    }

    pub fn status(&self, x: &Point) -> SampleStatus {
        if let Some(k) = self.cloud.voids.iter().position(|v| (x - v.center).norm() <= v.radius) {
            return SampleStatus::InsideVoid(k + 1);
        }
        let near = self.bg.pairs.iter().any(|pair| {
            let guard = NEAR_SOURCE_GUARD * pair.gap;
            (x - pair.positive()).norm() < guard || (x - pair.negative()).norm() < guard
        });
        if near {
            SampleStatus::NearSource
        } else {
            SampleStatus::Exterior
        }
    }

    pub fn far_field_applicable(&self, x: &Point) -> bool {
        self.cloud.region.distance_to(x) > FAR_FIELD_DISTANCE
    }

    pub fn sample(&self, x: &Point, kind: FieldKind) -> Result<FieldSample> {
        let status = self.status(x);
        let far_warning = kind == FieldKind::Far && status == SampleStatus::Exterior && !self.far_field_applicable(x);
        let u = match status {
            SampleStatus::Exterior => Some(match kind {
                FieldKind::Far => self.far(x)?,
                FieldKind::Uniform => self.uniform(x)?,
            }),
            _ => None,
        };
        Ok(FieldSample { point: *x, u, status, far_warning })
    }
}

pub fn far_field(x: &Point, cloud: &Cloud, bg: &BackgroundField, coeffs: &[Vector6<f64>]) -> Result<Displacement> {
    FieldEvaluator::new(cloud, bg, coeffs)?.far(x)
}

/// Errors with [`Error::Domain`] inside a cavity.
pub fn uniform_field(x: &Point, cloud: &Cloud, bg: &BackgroundField, coeffs: &[Vector6<f64>]) -> Result<Displacement> {
    FieldEvaluator::new(cloud, bg, coeffs)?.uniform(x)
}

/// Evaluates a grid in traversal order. Per-point conditions are reported
/// through [`SampleStatus`].
pub fn evaluate_grid(
    grid: &EvaluationGrid,
    kind: FieldKind,
    cloud: &Cloud,
    bg: &BackgroundField,
    coeffs: &[Vector6<f64>],
    parallel: bool,
) -> Result<Vec<FieldSample>> {
    grid.validate()?;
    let eval = FieldEvaluator::new(cloud, bg, coeffs)?;
    let points = grid.points();
    if parallel {
        points.par_iter().map(|x| eval.sample(x, kind)).collect()
    } else {
        points.iter().map(|x| eval.sample(x, kind)).collect()
    }
}

/// Number of samples carrying a far-field warning.
pub fn far_warnings(samples: &[FieldSample]) -> usize {
    samples.iter().filter(|s| s.far_warning).count()
}

/// `Σ_k Q⁽ᵏ⁾ C⁽ᵏ⁾ − Σ_k D M⁽ᵏ⁾ C⁽ᵏ⁾`, the part of the uniform field that the
/// far-field formula drops.
pub fn near_field_correction(
    x: &Point,
    cloud: &Cloud,
    bg: &BackgroundField,
    coeffs: &[Vector6<f64>],
) -> Result<Vector3<f64>> {
    let eval = FieldEvaluator::new(cloud, bg, coeffs)?;
    Ok(eval.uniform(x)? - eval.far(x)?)
}
