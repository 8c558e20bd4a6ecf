//! Dipole characteristics of a traction-free spherical cavity in an
//! unbounded isotropic solid.
//!
//! The dipole field `Q` of a cavity of radius `a` centred at `O` is the
//! exterior solution of the Lamé system whose traction on the sphere equals
//! `Ξ(n) A` and which vanishes at infinity. Its leading far-field term is
//! `(Ξ(∇_z)ᵀ Γ(z, x))ᵀ M` at `z = O`, with `M` the 6×6 dipole matrix;
//! for the sphere the remaining terms are explicit and decay like
//! `a⁵ / |x − O|⁴`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix3x6, Matrix6, Vector3};
use serde::{Deserialize, Serialize};

use crate::elastic::{big_xi, rigid_motion_matrix, stiffness_matrix, strain_vector, LameParams, Point};
use crate::error::{Error, Result};
use crate::kernels::gamma_dipole_kernel;
use crate::validation::fd::fd_partials;
use crate::validation::quadrature::SphereRule;

/// Spherical cavity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Void {
    pub center: Point,
    pub radius: f64,
}

impl Void {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("void radius must be positive, got {radius}")));
        }
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain("void center must be finite".into()));
        }
        Ok(Self { center, radius })
    }
}

/// Symmetric negative-definite 6×6 dipole matrix of one cavity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipoleMatrix(pub Matrix6<f64>);

/// Extreme eigenvalues of `−M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub min: f64,
    pub max: f64,
}

impl DipoleMatrix {
    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }

    /// Extreme eigenvalues of `−M` from a dense symmetric eigensolve.
    pub fn spectrum(&self) -> Spectrum {
        let eig = (-self.0).symmetric_eigen().eigenvalues;
        Spectrum { min: eig.min(), max: eig.max() }
    }
}

fn sphere_factor(p: &LameParams) -> f64 {
    let (l, m) = (p.lambda(), p.mu());
    (l + m) / (9.0 * l + 14.0 * m)
}

/// Dipole matrix of a spherical cavity of the given radius.
pub fn dipole_matrix(radius: f64, p: &LameParams) -> Result<DipoleMatrix> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!("void radius must be positive, got {radius}")));
    }
    let (l, mu) = (p.lambda(), p.mu());
    let prefactor = -(l + 2.0 * mu) * PI * radius.powi(3) / (mu * (9.0 * l + 14.0 * mu));
    let diag = 9.0 * l * l + 20.0 * l * mu + 36.0 * mu * mu;
    let off = diag - 40.0 * mu * mu;
    let mut m = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = if i == j { diag } else { off };
        }
        m[(i + 3, i + 3)] = 40.0 * mu * mu;
    }
    Ok(DipoleMatrix(m * prefactor))
}

/// Analytic eigenvalues of `−M` for the sphere: the dilatational mode
/// `(1,1,1,0,0,0)` and the five-fold deviatoric mode.
pub fn sphere_spectrum(radius: f64, p: &LameParams) -> (f64, f64) {
    let (l, mu) = (p.lambda(), p.mu());
    let k = (l + 2.0 * mu) * PI * radius.powi(3) / (mu * (9.0 * l + 14.0 * mu));
    let diag = 9.0 * l * l + 20.0 * l * mu + 36.0 * mu * mu;
    let dilatational = k * (3.0 * diag - 80.0 * mu * mu);
    let deviatoric = k * 40.0 * mu * mu;
    (dilatational, deviatoric)
}

/// The explicit correction terms of the sphere's dipole field, i.e.
/// `Q − (Ξ(∇_z)ᵀΓ(z, x))ᵀ M`, at offset `rho = x − O`.
fn near_field_terms(rho: &Vector3<f64>, radius: f64, p: &LameParams) -> Matrix3x6<f64> {
    let r2 = rho.norm_squared();
    let r = r2.sqrt();
    let inv5 = 1.0 / (r2 * r2 * r);
    let inv7 = inv5 / r2;
    let scale = sphere_factor(p) * radius.powi(5);
    let xi = big_xi(rho);

    // Ξ(ρ) 𝔄₁ with 𝔄₁ = −3 scale · diag([[3,1,1],[1,3,1],[1,1,3]], 2 I)
    let mut a1 = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            a1[(i, j)] = if i == j { 3.0 } else { 1.0 };
        }
        a1[(i + 3, i + 3)] = 2.0;
    }
    let term1 = xi * a1 * (-3.0 * scale);

    // Ξ(ρ) 𝔜(ρ): 𝔜 = 15 scale · diag(ones · diag(ρ²), 0)
    let squares = Vector3::new(rho[0] * rho[0], rho[1] * rho[1], rho[2] * rho[2]);
    let mut y = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            y[(i, j)] = squares[j];
        }
    }
    let term_y = xi * y * (15.0 * scale);

    // ρ₁ρ₂ρ₃ 𝔄₂ with 𝔄₂ = 15√2 scale · [0₃ | antidiag(1,1,1)]
    let mut a2 = Matrix3x6::zeros();
    a2[(0, 5)] = 1.0;
    a2[(1, 4)] = 1.0;
    a2[(2, 3)] = 1.0;
    let term2 = a2 * (15.0 * std::f64::consts::SQRT_2 * scale * rho[0] * rho[1] * rho[2]);

    // 𝔐(ρ) Ξ(ρ) 𝔄₃ with 𝔄₃ = 30 scale · diag(0₃, I₃)
    let mut shear = Matrix3x6::zeros();
    shear.fixed_view_mut::<3, 3>(0, 3).copy_from(&xi.fixed_view::<3, 3>(0, 3));
    let term3 = Matrix3::from_diagonal(&squares) * shear * (30.0 * scale);

    term1 * inv5 + (term_y + term2 + term3) * inv7
}

/// Closed-form dipole field evaluated without the exterior check; finite
/// difference stencils straddling the cavity surface need the analytic
/// continuation.
pub(crate) fn dipole_field_unchecked(x: &Point, v: &Void, p: &LameParams) -> Result<Matrix3x6<f64>> {
    let m = dipole_matrix(v.radius, p)?;
    let leading = gamma_dipole_kernel(x, &v.center, p)? * m.0;
    Ok(leading + near_field_terms(&(x - v.center), v.radius, p))
}

/// Dipole field `Q(x)` of a spherical cavity, 3×6. Columns are indexed by
/// packed strain components.
pub fn dipole_field(x: &Point, v: &Void, p: &LameParams) -> Result<Matrix3x6<f64>> {
    let dist = (x - v.center).norm();
    if dist <= v.radius || dist.is_nan() {
        return Err(Error::Domain(format!(
            "point at distance {dist} from the centre is not exterior to a cavity of radius {}",
            v.radius
        )));
    }
    dipole_field_unchecked(x, v, p)
}

/// Far-field remainder `Q(x) − (Ξ(∇_z)ᵀΓ(z, x))ᵀ M`.
pub fn dipole_field_remainder(x: &Point, v: &Void, p: &LameParams) -> Result<Matrix3x6<f64>> {
    Ok(dipole_field(x, v, p)? - gamma_dipole_kernel(x, &v.center, p)? * dipole_matrix(v.radius, p)?.0)
}

/// Traction `T_n Q` at a point, from Richardson finite differences of the
/// closed-form field with step `step`.
pub fn dipole_field_traction_fd(
    x: &Point,
    n: &Vector3<f64>,
    v: &Void,
    p: &LameParams,
    step: f64,
) -> Result<Matrix3x6<f64>> {
    // validate before differencing so errors surface with their own category
    dipole_field_unchecked(x, v, p)?;
    let field = |y: &Point| dipole_field_unchecked(y, v, p).expect("validated above");
    let partials = fd_partials(&field, x, step, true);
    let a = stiffness_matrix(p);
    let xn = big_xi(n);
    let mut out = Matrix3x6::zeros();
    for col in 0..6 {
        let grad = Matrix3::from_fn(|i, k| partials[k][(i, col)]);
        out.set_column(col, &(xn * a * strain_vector(&grad).0));
    }
    Ok(out)
}

/// Net force and moment of the dipole-field tractions over the cavity
/// surface. Both vanish for an exact dipole field.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalityReport {
    pub force: Matrix3x6<f64>,
    pub moment: Matrix3x6<f64>,
    pub force_max: f64,
    pub moment_max: f64,
}

pub fn check_orthogonality(v: &Void, p: &LameParams) -> Result<OrthogonalityReport> {
    check_orthogonality_with(v, p, &SphereRule::default())
}

pub fn check_orthogonality_with(v: &Void, p: &LameParams, rule: &SphereRule) -> Result<OrthogonalityReport> {
    let step = 1e-4 * v.radius;
    let mut force = Matrix3x6::zeros();
    let mut moment = Matrix3x6::zeros();
    for (x, n, w) in rule.surface_nodes(&v.center, v.radius) {
        let t = dipole_field_traction_fd(&x, &n, v, p, step)?;
        force += t * w;
        moment += rigid_motion_matrix(&(x - v.center)) * t * w;
    }
    Ok(OrthogonalityReport { force_max: force.amax(), moment_max: moment.amax(), force, moment })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> LameParams {
        LameParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn dipole_matrix_hand_values() {
        let p = LameParams::new(0.0, 1.0).unwrap();
        let m = dipole_matrix(1.0, &p).unwrap().0;
        let k = -PI / 7.0;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 36.0 * k } else { -4.0 * k };
                assert!((m[(i, j)] - expect).abs() < 1e-14);
                assert_eq!(m[(i, j + 3)], 0.0);
                assert_eq!(m[(i + 3, j)], 0.0);
            }
            assert!((m[(i + 3, i + 3)] - 40.0 * k).abs() < 1e-14);
        }
        assert!((m[(0, 0)] + 16.156_8).abs() < 1e-4);
        assert!((m[(0, 1)] - 1.795_2).abs() < 1e-4);
    }

    #[test]
    fn dipole_matrix_spectrum() {
        let p = LameParams::new(0.0, 1.0).unwrap();
        let s = dipole_matrix(1.0, &p).unwrap().spectrum();
        assert!((s.max - 40.0 * PI / 7.0).abs() < 1e-12);
        assert!((s.min - 4.0 * PI).abs() < 1e-12);
        let (dil, dev) = sphere_spectrum(1.0, &p);
        assert!((dil - 4.0 * PI).abs() < 1e-12);
        assert!((dev - 40.0 * PI / 7.0).abs() < 1e-12);
    }

    #[test]
    fn dipole_matrix_radius_scaling() {
        let p = LameParams::new(1.3, 0.6).unwrap();
        let m1 = dipole_matrix(0.7, &p).unwrap().0;
        let m2 = dipole_matrix(1.4, &p).unwrap().0;
        assert!((m2 - m1 * 8.0).amax() < 1e-13 * m2.amax());
        assert!(dipole_matrix(0.0, &p).is_err());
    }

    #[test]
    fn negative_definite_over_poisson_sweep() {
        for step in 0..=139 {
            let nu = -0.9 + step as f64 * 0.01;
            let p = LameParams::from_poisson(1.0, nu).unwrap();
            let m = dipole_matrix(1.0, &p).unwrap();
            assert_eq!(m.0, m.0.transpose());
            let s = m.spectrum();
            assert!(s.min > 0.0, "nu={nu}");
            let (dil, dev) = sphere_spectrum(1.0, &p);
            assert!((s.min - dil.min(dev)).abs() < 1e-10 * s.max);
            assert!((s.max - dil.max(dev)).abs() < 1e-10 * s.max);
        }
    }

    #[test]
    fn field_rejects_interior_points() {
        let v = Void::new(Point::new(1.0, 2.0, 3.0), 0.5).unwrap();
        assert!(matches!(dipole_field(&v.center, &v, &unit()), Err(Error::Domain(_))));
        let on_surface = v.center + Vector3::new(0.5, 0.0, 0.0);
        assert!(dipole_field(&on_surface, &v, &unit()).is_err());
        assert!(Void::new(Point::zeros(), -1.0).is_err());
    }

    #[test]
    fn field_scaling_law() {
        let p = LameParams::new(0.7, 1.2).unwrap();
        let a = 0.3;
        let o = Point::new(0.5, -1.0, 2.0);
        let v = Void::new(o, a).unwrap();
        let unit_void = Void::new(Point::zeros(), 1.0).unwrap();
        for x in [Point::new(0.9, -1.2, 2.1), Point::new(2.0, 1.0, 0.0), Point::new(0.5, -1.0, 2.31)] {
            let q = dipole_field(&x, &v, &p).unwrap();
            let q_unit = dipole_field(&((x - o) / a), &unit_void, &p).unwrap();
            assert!((q - q_unit * a).amax() < 1e-13 * q.amax());
        }
    }

    #[test]
    fn surface_traction_matches_prescribed_load() {
        let p = LameParams::new(2.5, 0.7).unwrap();
        let v = Void::new(Point::new(0.3, 0.1, -0.2), 1.5).unwrap();
        let a = stiffness_matrix(&p);
        let rule = SphereRule::product(4, 6);
        for (x, n, _) in rule.surface_nodes(&v.center, v.radius) {
            let t = dipole_field_traction_fd(&x, &n, &v, &p, 1e-4 * v.radius).unwrap();
            let target = big_xi(&n) * a;
            assert!((t - target).amax() < 1e-6 * target.amax());
        }
    }

    #[test]
    fn orthogonality_and_translation() {
        let p = unit();
        let r0 = check_orthogonality(&Void::new(Point::zeros(), 1.0).unwrap(), &p).unwrap();
        assert!(r0.force_max < 1e-8 && r0.moment_max < 1e-8, "{r0:?}");
        let r1 = check_orthogonality(&Void::new(Point::new(5.0, -3.0, 1.0), 1.0).unwrap(), &p).unwrap();
        assert!(r1.force_max < 1e-8 && r1.moment_max < 1e-8, "{r1:?}");
    }

    #[test]
    fn orthogonality_refinement() {
        let p = unit();
        let v = Void::new(Point::zeros(), 1.0).unwrap();
        let mut last = f64::INFINITY;
        for (np, na) in [(1, 1), (1, 2), (2, 3), (4, 8), (8, 16), (16, 32)] {
            let r = check_orthogonality_with(&v, &p, &SphereRule::product(np, na)).unwrap();
            let err = r.force_max.max(r.moment_max);
            assert!(err <= last.max(1e-10), "({np},{na}): {err} > {last}");
            last = err;
        }
        assert!(last < 1e-8);
    }
}
