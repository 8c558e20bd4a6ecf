//! Background loading and the block interaction system `(I + P M) C = −V`.
//!
//! For voids centred at `O⁽¹⁾ … O⁽ᴺ⁾`:
//!
//! * `V` stacks the packed background strains `E(u)(O⁽ʲ⁾)`,
//! * `M = diag(M⁽¹⁾, …, M⁽ᴺ⁾)` holds the cavity dipole matrices,
//! * `P` has blocks `P_jk = K(O⁽ʲ⁾, O⁽ᵏ⁾)` for `j ≠ k` (the strain at `O⁽ʲ⁾`
//!   of a unit dipole at `O⁽ᵏ⁾`) and zero diagonal blocks.
//!
//! The solved `C⁽ʲ⁾` are the dipole intensities used by the field
//! evaluators.

use nalgebra::{DMatrix, DVector, Matrix6, Vector3, Vector6};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{Cloud, Region};
use crate::elastic::{Displacement, LameParams, Point, StrainVector};
use crate::error::{Error, Result};
use crate::kernels::{gamma, gamma_dipole_kernel, FreeSpace, GreenKernel};
use crate::sphere::{dipole_matrix, DipoleMatrix, Spectrum};

/// Self-equilibrated pair of opposite point forces `±b e` applied at
/// `y₀ ± (δ/2) e`. Net force and net moment vanish.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForcePair {
    pub y0: Point,
    /// Unit axis.
    pub axis: Vector3<f64>,
    pub gap: f64,
    pub magnitude: f64,
}

impl ForcePair {
    /// Normalizes `axis`.
    pub fn new(y0: Point, axis: Vector3<f64>, gap: f64, magnitude: f64) -> Result<Self> {
        let len = axis.norm();
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::Input(format!("force-pair axis must be non-zero, got {axis:?}")));
        }
        if !(gap > 0.0 && gap.is_finite()) {
            return Err(Error::Input(format!("force-pair gap must be positive, got {gap}")));
        }
        if !magnitude.is_finite() || !y0.iter().all(|c| c.is_finite()) {
            return Err(Error::Input("force-pair location and magnitude must be finite".into()));
        }
        Ok(Self { y0, axis: axis / len, gap, magnitude })
    }

    /// Point of application of `+b e`.
    pub fn positive(&self) -> Point {
        self.y0 + self.axis * (0.5 * self.gap)
    }

    /// Point of application of `−b e`.
    pub fn negative(&self) -> Point {
        self.y0 - self.axis * (0.5 * self.gap)
    }

    pub fn force(&self) -> Vector3<f64> {
        self.axis * self.magnitude
    }
}

/// Superposition of force pairs in the unbounded medium.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BackgroundField {
    pub pairs: Vec<ForcePair>,
}

impl BackgroundField {
    pub fn new(pairs: Vec<ForcePair>) -> Self {
        Self { pairs }
    }

    /// Same pairs with every magnitude multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self { pairs: self.pairs.iter().map(|p| ForcePair { magnitude: p.magnitude * s, ..*p }).collect() }
    }

    /// Same pairs shifted by `t`.
    pub fn translated(&self, t: &Vector3<f64>) -> Self {
        Self { pairs: self.pairs.iter().map(|p| ForcePair { y0: p.y0 + t, ..*p }).collect() }
    }

    pub fn sources(&self) -> impl Iterator<Item = Point> + '_ {
        self.pairs.iter().flat_map(|p| [p.positive(), p.negative()])
    }
}

/// Displacement of the background field at `x`, a sum of Kelvin solutions.
pub fn background_eval(bg: &BackgroundField, x: &Point, p: &LameParams) -> Result<Displacement> {
    bg.pairs.iter().try_fold(Displacement::zeros(), |acc, pair| {
        let diff = gamma(x, &pair.positive(), p)? - gamma(x, &pair.negative(), p)?;
        Ok(acc + diff * pair.force())
    })
}

/// Packed strain of the background field at `x`.
///
/// `Ξ(∇_x)ᵀ Γ(x, y) = −(Ξ(∇_y)ᵀ Γ(y, x))` so each source contributes the
/// negated transpose of the dipole kernel.
pub fn background_strain(bg: &BackgroundField, x: &Point, p: &LameParams) -> Result<StrainVector> {
    let e = bg.pairs.iter().try_fold(Vector6::zeros(), |acc, pair| {
        let plus = gamma_dipole_kernel(x, &pair.positive(), p)?;
        let minus = gamma_dipole_kernel(x, &pair.negative(), p)?;
        Ok::<_, Error>(acc - (plus - minus).transpose() * pair.force())
    })?;
    Ok(StrainVector(e))
}

/// Default minimum distance between force points and the cloud region.
pub const DEFAULT_SOURCE_CLEARANCE: f64 = 1.0;

/// Checks that every force point lies at least `clearance` outside `region`.
pub fn check_sources(bg: &BackgroundField, region: &Region, clearance: f64) -> Result<()> {
    for (i, pair) in bg.pairs.iter().enumerate() {
        for y in [pair.positive(), pair.negative()] {
            let dist = (y - region.center).norm() - region.radius;
            if dist < clearance {
                return Err(Error::Gate(format!(
                    "force pair {i} has a source at distance {dist} from the cloud region (need >= {clearance})"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct InteractionSystem {
    pub centers: Vec<Point>,
    pub dipoles: Vec<DipoleMatrix>,
    /// Dense `6N × 6N` interaction matrix with zero diagonal blocks.
    pub p: DMatrix<f64>,
    /// Stacked background strains.
    pub v: DVector<f64>,
}

impl InteractionSystem {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn p_block(&self, j: usize, k: usize) -> Matrix6<f64> {
        self.p.fixed_view::<6, 6>(6 * j, 6 * k).into_owned()
    }

    /// `M C` for a stacked coefficient vector.
    pub fn apply_m(&self, c: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(c.len());
        for (k, m) in self.dipoles.iter().enumerate() {
            let block = m.0 * c.fixed_rows::<6>(6 * k);
            out.fixed_rows_mut::<6>(6 * k).copy_from(&block);
        }
        out
    }

    /// `P M` as a dense matrix.
    pub fn pm(&self) -> DMatrix<f64> {
        let mut out = self.p.clone();
        for (k, m) in self.dipoles.iter().enumerate() {
            let cols = self.p.columns(6 * k, 6) * m.0;
            out.columns_mut(6 * k, 6).copy_from(&cols);
        }
        out
    }

    /// `(I + P M) c + V`.
    pub fn residual(&self, c: &DVector<f64>) -> DVector<f64> {
        c + &self.p * self.apply_m(c) + &self.v
    }
}

pub fn assemble_system(cloud: &Cloud, bg: &BackgroundField) -> Result<InteractionSystem> {
    assemble_system_with(&FreeSpace::new(cloud.params), cloud, bg)
}

/// Assembles the interaction system with an arbitrary Green's kernel.
///
/// Source clearance is checked with [`DEFAULT_SOURCE_CLEARANCE`].
pub fn assemble_system_with(
    kernel: &dyn GreenKernel,
    cloud: &Cloud,
    bg: &BackgroundField,
) -> Result<InteractionSystem> {
    let params = *kernel.params();
    check_sources(bg, &cloud.region, DEFAULT_SOURCE_CLEARANCE)?;
    let centers: Vec<Point> = cloud.voids.iter().map(|v| v.center).collect();
    let n = centers.len();
    for j in 0..n {
        for k in (j + 1)..n {
            if centers[j] == centers[k] {
                return Err(Error::Geometry(format!("voids {j} and {k} share the centre {:?}", centers[j])));
            }
        }
    }
    let dipoles = cloud.voids.iter().map(|v| dipole_matrix(v.radius, &params)).collect::<Result<Vec<_>>>()?;

    let rows: Vec<Vec<Matrix6<f64>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            (0..n)
                .map(|k| if j == k { Ok(Matrix6::zeros()) } else { kernel.hessian_kernel(&centers[j], &centers[k]) })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut p = DMatrix::zeros(6 * n, 6 * n);
    for (j, row) in rows.iter().enumerate() {
        for (k, block) in row.iter().enumerate() {
            p.fixed_view_mut::<6, 6>(6 * j, 6 * k).copy_from(block);
        }
    }

    let mut v = DVector::zeros(6 * n);
    for (j, c) in centers.iter().enumerate() {
        v.fixed_rows_mut::<6>(6 * j).copy_from(&background_strain(bg, c, &params)?.0);
    }
    Ok(InteractionSystem { centers, dipoles, p, v })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Dense,
    Neumann,
}

impl std::str::FromStr for SolveMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(SolveMethod::Dense),
            "neumann" => Ok(SolveMethod::Neumann),
            other => Err(Error::Input(format!("unknown solve method {other:?} (expected dense|neumann)"))),
        }
    }
}

pub const NEUMANN_TOLERANCE: f64 = 1e-12;
pub const NEUMANN_MAX_TERMS: usize = 100;
/// Required `‖(I + PM)C + V‖∞ / ‖V‖∞`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub c: DVector<f64>,
    pub method: SolveMethod,
    /// Number of series terms (1 for the dense solve).
    pub terms: usize,
    pub residual_inf: f64,
}

impl Solution {
    pub fn coefficient(&self, k: usize) -> Vector6<f64> {
        self.c.fixed_rows::<6>(6 * k).into_owned()
    }

    pub fn coefficients(&self) -> Vec<Vector6<f64>> {
        (0..self.c.len() / 6).map(|k| self.coefficient(k)).collect()
    }
}

/// Row-sum norm.
pub fn norm_inf(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn solve_coefficients(sys: &InteractionSystem, method: SolveMethod) -> Result<Solution> {
    let rhs = -&sys.v;
    let v_norm = sys.v.amax();
    let (c, terms) = match method {
        SolveMethod::Dense => {
            let a = DMatrix::identity(sys.v.len(), sys.v.len()) + sys.pm();
            let c =
                a.lu().solve(&rhs).ok_or_else(|| Error::Numerical("interaction matrix I + PM is singular".into()))?;
            (c, 1)
        }
        SolveMethod::Neumann => {
            let pm = sys.pm();
            let norm = norm_inf(&pm);
            if norm >= 1.0 || norm.is_nan() {
                return Err(Error::Gate(format!("Neumann series requires ||PM||_inf < 1, got {norm}")));
            }
            let mut c = rhs.clone();
            let mut term = rhs;
            let mut terms = 1;
            loop {
                term = -(&pm * &term);
                c += &term;
                terms += 1;
                let increment = term.amax();
                if increment <= NEUMANN_TOLERANCE * c.amax() || increment == 0.0 {
                    break;
                }
                if terms >= NEUMANN_MAX_TERMS {
                    return Err(Error::Convergence { iterations: terms, increment });
                }
            }
            (c, terms)
        }
    };
    let residual_inf = sys.residual(&c).amax();
    let bound = RESIDUAL_TOLERANCE * v_norm;
    if residual_inf > bound || !residual_inf.is_finite() {
        return Err(Error::Numerical(format!(
            "solution residual {residual_inf:e} exceeds {RESIDUAL_TOLERANCE:e} * ||V||_inf = {bound:e}"
        )));
    }
    Ok(Solution { c, method, terms, residual_inf })
}

/// Runtime quantities mirroring the solvability argument.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDiagnostics {
    pub voids: usize,
    pub pm_norm_inf: f64,
    /// Extreme eigenvalues of `−M⁽ᵏ⁾` over all voids.
    pub dipole_spectrum: Option<Spectrum>,
    pub v_norm_inf: f64,
    /// `‖PM‖∞ < 1`: the Neumann series converges and `I + PM` is invertible.
    pub gate_passed: bool,
    pub residual_inf: Option<f64>,
    /// `⟨MC, PMC⟩ / ⟨MC, MC⟩`.
    pub interaction_ratio: Option<f64>,
    /// `Σ|C⁽ʲ⁾|² / Σ|V⁽ʲ⁾|²`, the measured constant of the a-priori bound.
    pub stability_constant: Option<f64>,
}

pub fn system_diagnostics(sys: &InteractionSystem, solution: Option<&Solution>) -> SystemDiagnostics {
    let pm_norm_inf = norm_inf(&sys.pm());
    let dipole_spectrum = sys
        .dipoles
        .iter()
        .map(DipoleMatrix::spectrum)
        .reduce(|a, b| Spectrum { min: a.min.min(b.min), max: a.max.max(b.max) });
    let (residual_inf, interaction_ratio, stability_constant) = match solution {
        Some(s) => {
            let mc = sys.apply_m(&s.c);
            let mc_sq = mc.norm_squared();
            let ratio = (mc_sq > 0.0).then(|| mc.dot(&(&sys.p * &mc)) / mc_sq);
            let v_sq = sys.v.norm_squared();
            let k = (v_sq > 0.0).then(|| s.c.norm_squared() / v_sq);
            (Some(s.residual_inf), ratio, k)
        }
        None => (None, None, None),
    };
    SystemDiagnostics {
        voids: sys.len(),
        pm_norm_inf,
        dipole_spectrum,
        v_norm_inf: sys.v.amax(),
        gate_passed: pm_norm_inf < 1.0,
        residual_inf,
        interaction_ratio,
        stability_constant,
    }
}
