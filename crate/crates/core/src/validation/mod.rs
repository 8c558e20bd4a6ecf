//! Independent numerical oracles: finite differences, sphere quadrature,
//! the elastic mean-value identities, and convergence studies.

pub mod fd;
pub mod quadrature;

use nalgebra::{Matrix3x6, Matrix6, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{validate_cloud, Cloud, DEFAULT_GATE};
use crate::elastic::{
    big_xi_component, rigid_motion_matrix, small_xi_slope, xi_grad_transpose_affine, LameParams, Point,
};
use crate::error::{Error, Result};
use crate::field::FieldEvaluator;
use crate::kernels::{gamma, gamma_dipole_kernel, gamma_hessian_kernel};
use crate::solver::{
    assemble_system, norm_inf, solve_coefficients, system_diagnostics, BackgroundField, SolveMethod, RESIDUAL_TOLERANCE,
};
use crate::sphere::{check_orthogonality, dipole_field, dipole_field_traction_fd, Void};
use fd::{fd_gradient_richardson, fd_traction, lame_residual, richardson_partial};
use quadrature::{BallRule, SphereRule};

/// `amax(a − b) / amax(b)`.
pub fn relative_error<const R: usize, const C: usize>(
    a: &nalgebra::SMatrix<f64, R, C>,
    b: &nalgebra::SMatrix<f64, R, C>,
) -> f64 {
    (a - b).amax() / b.amax()
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub log_x: Vec<f64>,
    pub log_y: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of `ln y` from the fitted line.
    pub residual: f64,
}

impl SlopeFit {
    pub const MIN_POINTS: usize = 4;

    pub fn fit(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Input(format!("slope fit needs paired samples, got {} and {}", x.len(), y.len())));
        }
        if x.len() < Self::MIN_POINTS {
            return Err(Error::Input(format!(
                "slope fit needs at least {} samples, got {}",
                Self::MIN_POINTS,
                x.len()
            )));
        }
        if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Numerical("slope fit needs positive finite samples".into()));
        }
        let log_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let log_y: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        let n = x.len() as f64;
        let mx = log_x.iter().sum::<f64>() / n;
        let my = log_y.iter().sum::<f64>() / n;
        let sxx: f64 = log_x.iter().map(|a| (a - mx).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::Numerical("slope fit needs distinct abscissae".into()));
        }
        let sxy: f64 = log_x.iter().zip(&log_y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let residual =
            (log_x.iter().zip(&log_y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / n).sqrt();
        Ok(Self { log_x, log_y, slope, intercept, residual })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl CheckReport {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), measured, threshold, comparison: Comparison::AtMost, passed: measured <= threshold }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), measured, threshold, comparison: Comparison::AtLeast, passed: measured >= threshold }
    }
}

/// Deviation of both mean-value identities for one ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanValueDeviation {
    pub surface: f64,
    pub volume: f64,
}

impl MeanValueDeviation {
    pub fn max(&self) -> f64 {
        self.surface.max(self.volume)
    }
}

/// Quadrature rules for the mean-value identities.
#[derive(Clone, Debug)]
pub struct MeanValueRules {
    pub surface: SphereRule,
    pub volume: BallRule,
}

impl Default for MeanValueRules {
    fn default() -> Self {
        Self { surface: SphereRule::product(32, 64), volume: BallRule::new(16, SphereRule::product(32, 64)) }
    }
}

/// Compares `w(O)` with the surface and volume averages reproducing it for
/// solutions of the homogeneous Lamé system. Deviations are relative to
/// the sampled sup of `|w|` over the quadrature nodes.
pub fn mean_value_deviation<F>(
    field: &F,
    center: &Point,
    radius: f64,
    p: &LameParams,
    rules: &MeanValueRules,
) -> MeanValueDeviation
where
    F: Fn(&Point) -> Vector3<f64> + Sync,
{
    use std::f64::consts::PI;
    let (l, m) = (p.lambda(), p.mu());
    let denom = 8.0 * PI * (l + 4.0 * m);
    let w0 = field(center);

    let surface_nodes: Vec<_> = rules.surface.surface_nodes(center, radius).collect();
    let (s_quad, s_plain, s_sup) = surface_nodes
        .par_iter()
        .map(|(x, _, w)| {
            let r = x - center;
            let u = field(x);
            (r * r.dot(&u) * *w, u * *w, u.amax())
        })
        .reduce(|| (Vector3::zeros(), Vector3::zeros(), 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2.max(b.2)));
    let surface =
        s_quad * (15.0 * (l + m) / (denom * radius.powi(4))) - s_plain * (3.0 * (l - m) / (denom * radius.powi(2)));

    let ball_nodes = rules.volume.nodes(center, radius);
    let (v_quad, v_plain, v_sup) = ball_nodes
        .par_iter()
        .map(|(x, w)| {
            let r = x - center;
            let u = field(x);
            (r * r.dot(&u) * *w, u * (r.norm_squared() * w), u.amax())
        })
        .reduce(|| (Vector3::zeros(), Vector3::zeros(), 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2.max(b.2)));
    let r5 = radius.powi(5);
    let volume = v_quad * (75.0 * (l + m) / (denom * r5)) - v_plain * (15.0 * (l - m) / (denom * r5));

    let scale = s_sup.max(v_sup).max(w0.amax()).max(f64::MIN_POSITIVE);
    MeanValueDeviation { surface: (surface - w0).amax() / scale, volume: (volume - w0).amax() / scale }
}

pub const MEAN_VALUE_THRESHOLD: f64 = 1e-7;

pub fn mean_value_check<F>(name: &str, field: &F, center: &Point, radius: f64, p: &LameParams) -> CheckReport
where
    F: Fn(&Point) -> Vector3<f64> + Sync,
{
    let dev = mean_value_deviation(field, center, radius, p, &MeanValueRules::default());
    CheckReport::at_most(name, dev.max(), MEAN_VALUE_THRESHOLD)
}

/// `max_{i,k} |∂w_i/∂x_k(O)| · R / sup_{B_R} |w|`, with the sup sampled on
/// the default ball and surface rules.
pub fn local_regularity_ratio<F>(field: &F, center: &Point, radius: f64) -> f64
where
    F: Fn(&Point) -> Vector3<f64> + Sync,
{
    let grad = fd_gradient_richardson(field, center, 1e-3 * radius);
    let ball = BallRule::default().nodes(center, radius);
    let sphere: Vec<_> = SphereRule::default().surface_nodes(center, radius).map(|(x, _, _)| x).collect();
    let sup = ball
        .par_iter()
        .map(|(x, _)| *x)
        .chain(sphere.into_par_iter())
        .map(|x| field(&x).norm())
        .reduce(|| 0.0, f64::max);
    grad.amax() * radius / sup
}

pub const LOCAL_REGULARITY_THRESHOLD: f64 = 10.0;

/// Largest regularity ratio over a sweep of radii.
pub fn local_regularity_probe<F>(name: &str, field: &F, center: &Point, radii: &[f64]) -> CheckReport
where
    F: Fn(&Point) -> Vector3<f64> + Sync,
{
    let worst = radii.iter().map(|r| local_regularity_ratio(field, center, *r)).fold(0.0, f64::max);
    CheckReport::at_most(name, worst, LOCAL_REGULARITY_THRESHOLD)
}

/// `D = Σ_k (∂Γ(z, x)/∂z_k)ᵀ Ξ(e_k)` from Richardson differences in `z`.
pub fn fd_dipole_kernel(x: &Point, z: &Point, p: &LameParams, h: f64) -> Matrix3x6<f64> {
    let g = |y: &Point| gamma(y, x, p).expect("source kept away from the stencil");
    (0..3).map(|k| richardson_partial(&g, z, k, h).transpose() * big_xi_component(k)).sum()
}

/// `K = Σ_l Ξ(e_l)ᵀ ∂D(x, y)/∂x_l` with `D` itself from finite differences.
pub fn fd_hessian_kernel(x: &Point, y: &Point, p: &LameParams, h: f64) -> Matrix6<f64> {
    let d = |s: &Point| fd_dipole_kernel(s, y, p, h);
    (0..3).map(|l| big_xi_component(l).transpose() * richardson_partial(&d, x, l, h)).sum()
}

/// Random pair `(x, y)` with `|x − y| ∈ [0.5, 4]`.
fn random_pair(rng: &mut ChaCha8Rng) -> (Point, Point) {
    loop {
        let x = Point::from_fn(|_, _| rng.gen_range(-2.0..2.0));
        let y = Point::from_fn(|_, _| rng.gen_range(-2.0..2.0));
        let r = (x - y).norm();
        if (0.5..=4.0).contains(&r) {
            return (x, y);
        }
    }
}

/// Worst relative errors `(dipole, hessian)` against finite differences over
/// `n` random configurations.
pub fn kernel_fd_errors(p: &LameParams, n: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<_> = (0..n).map(|_| random_pair(&mut rng)).collect();
    pairs
        .par_iter()
        .map(|(x, y)| {
            let h = 1e-3 * (x - y).norm();
            let dip = relative_error(&fd_dipole_kernel(x, y, p, h), &gamma_dipole_kernel(x, y, p)?);
            let hes = relative_error(&fd_hessian_kernel(x, y, p, h), &gamma_hessian_kernel(x, y, p)?);
            Ok((dip, hes))
        })
        .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0.max(b.0), a.1.max(b.1))))
}

/// Worst `‖L(∇)Γ(·, y)b‖ |x − y|³` over random configurations.
pub fn gamma_lame_residual(p: &LameParams, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let configs: Vec<_> = (0..n)
        .map(|_| {
            let (x, y) = random_pair(&mut rng);
            let b = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            (x, y, b)
        })
        .collect();
    configs
        .par_iter()
        .map(|(x, y, b)| {
            let r = (x - y).norm();
            let field = |s: &Point| gamma(s, y, p).expect("away from source") * b;
            lame_residual(&field, x, p, 1e-4 * r).norm() * r.powi(3)
        })
        .reduce(|| 0.0, f64::max)
}

/// Packed operator identities applied to the affine matrices `Ξ(x)` and
/// `ξ(x)`; returns the larger deviation from `I₆` and `0`.
pub fn operator_identity_deviation() -> f64 {
    let big: [Matrix3x6<f64>; 3] = std::array::from_fn(big_xi_component);
    let small: [Matrix3x6<f64>; 3] = std::array::from_fn(small_xi_slope);
    let d1 = (xi_grad_transpose_affine(&big) - Matrix6::identity()).amax();
    let d2 = xi_grad_transpose_affine(&small).amax();
    d1.max(d2)
}

/// Sup over the unit sphere of `|T_n Q − Ξ(n) A|` relative to `|Ξ(n) A|`.
pub fn sphere_traction_error(p: &LameParams, rule: &SphereRule) -> Result<f64> {
    let v = Void::new(Point::zeros(), 1.0)?;
    let a = crate::elastic::stiffness_matrix(p);
    let nodes: Vec<_> = rule.surface_nodes(&v.center, v.radius).collect();
    nodes
        .par_iter()
        .map(|(x, n, _)| {
            let t = dipole_field_traction_fd(x, n, &v, p, 1e-4)?;
            let target = crate::elastic::big_xi(n) * a;
            Ok((t - target).amax() / target.amax())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Outcome of [`residual_convergence_study`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub eps: Vec<f64>,
    /// Sup boundary traction of the uniform field for each accepted `eps`.
    pub residuals: Vec<f64>,
    pub skipped: Vec<SkippedEntry>,
    /// `None` when fewer than [`SlopeFit::MIN_POINTS`] entries were accepted.
    pub fit: Option<SlopeFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedEntry {
    pub eps: f64,
    pub reason: String,
}

/// Sup over all cavity surfaces of the traction of the uniform field.
pub fn boundary_traction_residual(
    cloud: &Cloud,
    bg: &BackgroundField,
    coeffs: &[Vector6<f64>],
    rule: &SphereRule,
) -> Result<f64> {
    let eval = FieldEvaluator::new(cloud, bg, coeffs)?;
    let p = cloud.params;
    cloud
        .voids
        .par_iter()
        .map(|v| {
            let field = |y: &Point| eval.uniform_unchecked(y).expect("sources clear of the cloud");
            rule.surface_nodes(&v.center, v.radius).try_fold(0.0f64, |acc, (x, n, _)| {
                Ok(acc.max(fd_traction(&field, &x, &n, &p, 1e-4 * v.radius)?.norm()))
            })
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Solves the cloud with every radius set to each `eps` and fits the log-log
/// slope of the sup boundary traction residual against `eps`. Entries failing
/// the gate `eps < c d` are skipped and recorded.
pub fn residual_convergence_study(
    base: &Cloud,
    bg: &BackgroundField,
    eps_list: &[f64],
    gate_c: f64,
    rule: &SphereRule,
) -> Result<ConvergenceStudy> {
    let mut study = ConvergenceStudy { eps: vec![], residuals: vec![], skipped: vec![], fit: None };
    for &eps in eps_list {
        if !(eps > 0.0 && eps < gate_c * base.d) {
            study.skipped.push(SkippedEntry {
                eps,
                reason: format!("eps = {eps} is not in (0, c d) with c d = {}", gate_c * base.d),
            });
            continue;
        }
        let cloud = base.with_radius(eps)?;
        let sys = assemble_system(&cloud, bg)?;
        let solution = solve_coefficients(&sys, SolveMethod::Dense)?;
        let residual = boundary_traction_residual(&cloud, bg, &solution.coefficients(), rule)?;
        study.eps.push(eps);
        study.residuals.push(residual);
    }
    if study.eps.len() >= SlopeFit::MIN_POINTS {
        study.fit = Some(SlopeFit::fit(&study.eps, &study.residuals)?);
    }
    Ok(study)
}

pub const STUDY_SLOPE_THRESHOLD: f64 = 0.9;

/// Random ball inside `[-1, 1]³` with radius in `[0.5, 2]`.
fn random_ball(rng: &mut ChaCha8Rng) -> (Point, f64) {
    (Point::from_fn(|_, _| rng.gen_range(-1.0..1.0)), rng.gen_range(0.5..2.0))
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Mean-value checks for constant, rigid and Kelvin-column fields at `n`
/// random balls each. Returns one report per family with the worst deviation.
pub fn mean_value_suite(p: &LameParams, n: usize, seed: u64) -> Vec<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rules = MeanValueRules::default();
    let mut worst = [0.0f64; 3];
    for _ in 0..n {
        let (c, r) = random_ball(&mut rng);
        let w0 = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let constant = |_: &Point| w0;
        worst[0] = worst[0].max(mean_value_deviation(&constant, &c, r, p, &rules).max());

        let (c, r) = random_ball(&mut rng);
        let a = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let b = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let rigid = |x: &Point| a + rigid_motion_matrix(x).transpose() * b;
        worst[1] = worst[1].max(mean_value_deviation(&rigid, &c, r, p, &rules).max());

        let (c, r) = random_ball(&mut rng);
        let y0 = c + random_unit(&mut rng) * (r * rng.gen_range(2.0..4.0));
        let f = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let kelvin = |x: &Point| gamma(x, &y0, p).expect("source outside the ball") * f;
        worst[2] = worst[2].max(mean_value_deviation(&kelvin, &c, r, p, &rules).max());
    }
    ["mean_value_constant", "mean_value_rigid", "mean_value_kelvin"]
        .iter()
        .zip(worst)
        .map(|(name, w)| CheckReport::at_most(*name, w, MEAN_VALUE_THRESHOLD))
        .collect()
}

/// Regularity ratio of a Kelvin column over one decade of radii.
pub fn local_regularity_suite(p: &LameParams) -> CheckReport {
    let y0 = Point::new(5.0, 1.0, -2.0);
    let f = Vector3::new(0.3, -1.0, 0.5);
    let kelvin = |x: &Point| gamma(x, &y0, p).expect("source outside the ball") * f;
    let radii: Vec<f64> = (0..5).map(|k| 0.2 * 10f64.powf(k as f64 / 4.0)).collect();
    local_regularity_probe("local_regularity_kelvin", &kelvin, &Point::zeros(), &radii)
}

/// Sup of the scaled Lamé residual of the uniform field over random points
/// at least three radii away from every cavity.
pub fn uniform_field_lame_residual(
    cloud: &Cloud,
    bg: &BackgroundField,
    coeffs: &[Vector6<f64>],
    n: usize,
    seed: u64,
) -> Result<f64> {
    let eval = FieldEvaluator::new(cloud, bg, coeffs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = cloud.region;
    let mut points = Vec::with_capacity(n);
    let mut attempts = 0;
    while points.len() < n && attempts < 10_000 * n.max(1) {
        attempts += 1;
        let x = region.center + Point::from_fn(|_, _| rng.gen_range(-1.0..1.0)) * region.radius;
        if cloud.voids.iter().all(|v| (x - v.center).norm() > 3.0 * v.radius) {
            points.push(x);
        }
    }
    points
        .par_iter()
        .map(|x| {
            let field = |y: &Point| eval.uniform(y).expect("stencil clear of cavities and sources");
            let scale = eval.uniform(x)?.norm().max(f64::MIN_POSITIVE);
            Ok(lame_residual(&field, x, &cloud.params, 1e-4 * region.radius).norm() / scale)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Result of [`run_check_suite`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckReport>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn new(checks: Vec<CheckReport>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { checks, passed }
    }
}

/// Runs every oracle against the elastic constants of `cloud` and the
/// solved interaction system for `bg`.
pub fn run_check_suite(cloud: &Cloud, bg: &BackgroundField) -> Result<SuiteReport> {
    let p = cloud.params;
    let mut checks = Vec::new();

    let report = validate_cloud(cloud, DEFAULT_GATE);
    checks.push(CheckReport::at_most("cloud_invariant_violations", report.failures().len() as f64, 0.0));
    checks.push(CheckReport::at_most("operator_identities", operator_identity_deviation(), 4.0 * f64::EPSILON));

    let (dip, hes) = kernel_fd_errors(&p, 50, 1)?;
    checks.push(CheckReport::at_most("dipole_kernel_fd", dip, 1e-7));
    checks.push(CheckReport::at_most("hessian_kernel_fd", hes, 1e-7));
    checks.push(CheckReport::at_most("kelvin_lame_residual", gamma_lame_residual(&p, 50, 2), 1e-4));

    checks.push(CheckReport::at_most(
        "sphere_boundary_traction",
        sphere_traction_error(&p, &SphereRule::default())?,
        1e-6,
    ));
    let orth = check_orthogonality(&Void::new(Point::zeros(), 1.0)?, &p)?;
    checks.push(CheckReport::at_most("sphere_net_force", orth.force_max, 1e-8));
    checks.push(CheckReport::at_most("sphere_net_moment", orth.moment_max, 1e-8));
    let q_res = sphere_field_lame_residual(&p)?;
    checks.push(CheckReport::at_most("sphere_field_lame_residual", q_res, 1e-4));

    checks.extend(mean_value_suite(&p, 10, 3));
    checks.push(local_regularity_suite(&p));

    let sys = assemble_system(cloud, bg)?;
    let dense = solve_coefficients(&sys, SolveMethod::Dense)?;
    let diag = system_diagnostics(&sys, Some(&dense));
    let v_norm = sys.v.amax().max(f64::MIN_POSITIVE);
    checks.push(CheckReport::at_most("system_residual", dense.residual_inf / v_norm, RESIDUAL_TOLERANCE));
    checks.push(CheckReport::at_most("pm_norm_inf", norm_inf(&sys.pm()), 1.0));
    if diag.gate_passed {
        let neumann = solve_coefficients(&sys, SolveMethod::Neumann)?;
        let scale = dense.c.amax().max(f64::MIN_POSITIVE);
        checks.push(CheckReport::at_most("dense_vs_neumann", (&dense.c - &neumann.c).amax() / scale, 1e-9));
    }
    let coeffs = dense.coefficients();
    checks.push(CheckReport::at_most(
        "uniform_field_lame_residual",
        uniform_field_lame_residual(cloud, bg, &coeffs, 30, 4)?,
        1e-3,
    ));
    Ok(SuiteReport::new(checks))
}

/// Worst Lamé residual of the columns of `Q` for a unit cavity, scaled by
/// `|x − O|⁴ / a` at random exterior points.
pub fn sphere_field_lame_residual(p: &LameParams) -> Result<f64> {
    let v = Void::new(Point::zeros(), 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let points: Vec<Point> = (0..20).map(|_| random_unit(&mut rng) * rng.gen_range(1.5..4.0)).collect();
    points
        .par_iter()
        .map(|x| {
            let r = x.norm();
            (0..6).try_fold(0.0f64, |acc, col| {
                let field = |y: &Point| -> Vector3<f64> {
                    dipole_field(y, &v, p).expect("stencil stays exterior").column(col).into_owned()
                };
                let res = lame_residual(&field, x, p, 1e-4 * r);
                Ok(acc.max(res.norm() * r.powi(4)))
            })
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::{generate_cloud, CloudSpec, Region};
    use crate::solver::ForcePair;
    use nalgebra::Matrix3;

    #[test]
    fn slope_fit_recovers_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(3)).collect();
        let fit = SlopeFit::fit(&x, &y).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!(SlopeFit::fit(&x[..3], &y[..3]).is_err());
        assert!(SlopeFit::fit(&[1.0, 1.0, 1.0, 1.0], &[1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(SlopeFit::fit(&x, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn check_report_comparisons() {
        assert!(CheckReport::at_most("a", 1.0, 1.0).passed);
        assert!(!CheckReport::at_most("a", 1.1, 1.0).passed);
        assert!(CheckReport::at_least("b", 1.0, 0.9).passed);
        assert!(!CheckReport::at_least("b", f64::NAN, 0.9).passed);
    }

    #[test]
    fn mean_value_constant_and_rigid() {
        let p = LameParams::new(2.0, 0.7).unwrap();
        let rules = MeanValueRules::default();
        let c = Point::new(0.3, -0.2, 1.0);
        let w0 = Vector3::new(1.0, -2.0, 0.5);
        let dev = mean_value_deviation(&|_: &Point| w0, &c, 1.3, &p, &rules);
        assert!(dev.max() < 1e-10, "{dev:?}");
        let b = Vector3::new(0.2, 0.4, -1.0);
        let rigid = |x: &Point| x.cross(&b);
        let dev = mean_value_deviation(&rigid, &c, 0.8, &p, &rules);
        assert!(dev.max() < 1e-10, "{dev:?}");
    }

    #[test]
    fn mean_value_kelvin_column() {
        for (l, m) in [(1.0, 1.0), (0.0, 1.0), (5.0, 0.3)] {
            let p = LameParams::new(l, m).unwrap();
            let y0 = Point::new(2.5, 0.0, 0.0);
            let f = Vector3::new(1.0, 0.5, -0.2);
            let kelvin = |x: &Point| gamma(x, &y0, &p).unwrap() * f;
            let report = mean_value_check("kelvin", &kelvin, &Point::zeros(), 1.0, &p);
            assert!(report.passed, "{report:?}");
        }
    }

    #[test]
    fn mean_value_detects_non_solutions() {
        let p = LameParams::new(1.0, 1.0).unwrap();
        let quadratic = |x: &Point| Vector3::new(x[0] * x[0], 0.0, 0.0);
        let report = mean_value_check("x1^2", &quadratic, &Point::zeros(), 1.0, &p);
        assert!(!report.passed);
    }

    #[test]
    fn local_regularity_linear_and_scaling() {
        let b = Matrix3::new(1.0, 2.0, 0.0, -1.0, 0.5, 0.3, 0.0, 0.0, 2.0);
        let linear = |x: &Point| b * x;
        let r1 = local_regularity_ratio(&linear, &Point::zeros(), 1.0);
        let r2 = local_regularity_ratio(&linear, &Point::zeros(), 7.0);
        assert!((r1 - r2).abs() < 1e-9 * r1);
        assert!(r1 > 0.1 && r1 < 2.0);
        let p = LameParams::new(1.0, 1.0).unwrap();
        let report = local_regularity_suite(&p);
        assert!(report.passed, "{report:?}");

        // w(x) and w(s x) on balls of radius R and R / s give the same ratio
        let y0 = Point::new(3.0, 0.0, 0.0);
        let f = Vector3::new(0.0, 1.0, 0.0);
        let w = |x: &Point| gamma(x, &y0, &p).unwrap() * f;
        let s = 2.5;
        let ws = |x: &Point| w(&(x * s));
        let a = local_regularity_ratio(&w, &Point::new(0.5, 0.0, 0.0), 1.0);
        let b = local_regularity_ratio(&ws, &Point::new(0.5 / s, 0.0, 0.0), 1.0 / s);
        assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
    }

    #[test]
    fn kernel_and_identity_oracles() {
        let p = LameParams::new(1.2, 0.8).unwrap();
        let (dip, hes) = kernel_fd_errors(&p, 10, 0).unwrap();
        assert!(dip < 1e-7 && hes < 1e-7, "{dip} {hes}");
        assert!(gamma_lame_residual(&p, 10, 0) < 1e-4);
        assert!(operator_identity_deviation() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn fd_gradient_matches_kelvin_dipole_kernel() {
        // the symmetric part of the gradient of Γ(·, y) b is −D(x, y)ᵀ b
        let p = LameParams::new(1.0, 2.0).unwrap();
        let (x, y) = (Point::new(0.2, 0.1, -0.3), Point::new(1.0, -0.5, 0.4));
        let b = Vector3::new(0.3, 1.0, -0.7);
        let g = |s: &Point| gamma(s, &y, &p).unwrap() * b;
        let grad = fd::fd_gradient(&g, &x, 1e-5);
        let e = crate::elastic::strain_vector(&grad).0;
        let expect = -gamma_dipole_kernel(&x, &y, &p).unwrap().transpose() * b;
        assert!(relative_error(&e, &expect) < 1e-8);
    }

    #[test]
    fn convergence_study_skips_gate_failures() {
        let p = LameParams::new(1.0, 1.0).unwrap();
        let base = generate_cloud(&CloudSpec {
            region: Region { center: Point::zeros(), radius: 1.0 },
            n: 4,
            d: 0.1,
            eps: 0.01,
            seed: 3,
            gate_c: DEFAULT_GATE,
            params: p,
        })
        .unwrap();
        let bg = BackgroundField::new(vec![ForcePair::new(Point::new(3.0, 0.0, 0.0), Vector3::x(), 0.5, 1.0).unwrap()]);
        let rule = SphereRule::product(6, 12);
        let study =
            residual_convergence_study(&base, &bg, &[0.016, 0.008, 0.004, 0.002, 0.05], DEFAULT_GATE, &rule).unwrap();
        assert_eq!(study.skipped.len(), 1);
        assert_eq!(study.skipped[0].eps, 0.05);
        let fit = study.fit.unwrap();
        assert!(fit.slope >= STUDY_SLOPE_THRESHOLD, "{fit:?}");
    }

    #[test]
    fn sphere_oracles() {
        let p = LameParams::new(0.5, 1.0).unwrap();
        assert!(sphere_traction_error(&p, &SphereRule::product(6, 12)).unwrap() < 1e-6);
        assert!(sphere_field_lame_residual(&p).unwrap() < 1e-4);
    }
}
