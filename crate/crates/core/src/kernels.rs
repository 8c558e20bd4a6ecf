//! Kelvin–Somigliana fundamental solution and its strain-contracted
//! derivatives.
//!
//! With `r = z - x` and `ρ = |r|`,
//!
//! ```text
//! Γ_ij = c₁ δ_ij / ρ + c₂ r_i r_j / ρ³,
//! c₁ = (λ + 3μ) / (8πμ(λ + 2μ)),   c₂ = (λ + μ) / (8πμ(λ + 2μ)).
//! ```
//!
//! * [`gamma_dipole_kernel`] is `(Ξ(∇_z)ᵀ Γ(z, x))ᵀ`, 3×6, degree −2.
//! * [`gamma_hessian_kernel`] is `Ξ(∇_x)ᵀ (Ξ(∇_y)ᵀ Γ(y, x))ᵀ`, 6×6, degree −3.
//!
//! Both are evaluated from the closed-form first and second derivatives of
//! `Γ`; finite differences only appear in tests.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix3x6, Matrix6, Vector3};

use crate::elastic::{LameParams, Point, STRAIN_TERMS};
use crate::error::{Error, Result};

/// Green's tensor of the Lamé operator for some domain, together with the
/// derivative kernels the interaction system needs.
///
/// Only the free-space case is implemented. A bounded-domain kernel
/// `G = Γ − H` would also report the dipole kernel of its regular part `H`
/// through [`GreenKernel::regular_dipole_kernel`].
pub trait GreenKernel: Sync {
    fn params(&self) -> &LameParams;

    fn evaluate(&self, x: &Point, y: &Point) -> Result<Matrix3<f64>>;

    /// `(Ξ(∇_z)ᵀ G(z, x))ᵀ`: displacement at `x` due to a unit strain dipole at `z`.
    fn dipole_kernel(&self, x: &Point, z: &Point) -> Result<Matrix3x6<f64>>;

    /// `Ξ(∇_x)ᵀ (Ξ(∇_y)ᵀ G(y, x))ᵀ`: strain at `x` due to a unit strain dipole at `y`.
    fn hessian_kernel(&self, x: &Point, y: &Point) -> Result<Matrix6<f64>>;

    /// `(Ξ(∇_z)ᵀ H(z, x))ᵀ` for the regular part `H = Γ − G`; `None` when `H ≡ 0`.
    fn regular_dipole_kernel(&self, _x: &Point, _z: &Point) -> Option<Matrix3x6<f64>> {
        None
    }
}

/// Unbounded isotropic medium, `G ≡ Γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeSpace {
    params: LameParams,
}

impl FreeSpace {
    pub fn new(params: LameParams) -> Self {
        Self { params }
    }
}

impl GreenKernel for FreeSpace {
    fn params(&self) -> &LameParams {
        &self.params
    }

    fn evaluate(&self, x: &Point, y: &Point) -> Result<Matrix3<f64>> {
        gamma(x, y, &self.params)
    }

    fn dipole_kernel(&self, x: &Point, z: &Point) -> Result<Matrix3x6<f64>> {
        gamma_dipole_kernel(x, z, &self.params)
    }

    fn hessian_kernel(&self, x: &Point, y: &Point) -> Result<Matrix6<f64>> {
        gamma_hessian_kernel(x, y, &self.params)
    }
}

fn coefficients(p: &LameParams) -> (f64, f64) {
    let (l, m) = (p.lambda(), p.mu());
    let denom = 8.0 * PI * m * (l + 2.0 * m);
    ((l + 3.0 * m) / denom, (l + m) / denom)
}

fn separation(from: &Point, to: &Point) -> Result<(Vector3<f64>, f64)> {
    let r = to - from;
    let rho = r.norm();
    if rho == 0.0 || !rho.is_finite() {
        return Err(Error::Singular(format!("kernel evaluated at coincident or non-finite points {from:?}, {to:?}")));
    }
    Ok((r, rho))
}

#[inline]
fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Kelvin–Somigliana tensor `Γ(x, y)`.
pub fn gamma(x: &Point, y: &Point, p: &LameParams) -> Result<Matrix3<f64>> {
    let (r, rho) = separation(y, x)?;
    let (c1, c2) = coefficients(p);
    let rho3 = rho * rho * rho;
    Ok(Matrix3::identity() * (c1 / rho) + r * r.transpose() * (c2 / rho3))
}

/// `∂Γ_ij/∂r_k` at separation `r`, indexed `[k][(i, j)]`.
fn gamma_first(r: &Vector3<f64>, rho: f64, c1: f64, c2: f64) -> [Matrix3<f64>; 3] {
    let inv3 = 1.0 / (rho * rho * rho);
    let inv5 = inv3 / (rho * rho);
    std::array::from_fn(|k| {
        Matrix3::from_fn(|i, j| {
            -c1 * delta(i, j) * r[k] * inv3 + c2 * (delta(i, k) * r[j] + delta(j, k) * r[i]) * inv3
                - 3.0 * c2 * r[i] * r[j] * r[k] * inv5
        })
    })
}

/// `∂²Γ_ij/∂r_k∂r_l` at separation `r`, indexed `[k][l][(i, j)]`.
fn gamma_second(r: &Vector3<f64>, rho: f64, c1: f64, c2: f64) -> [[Matrix3<f64>; 3]; 3] {
    let rho2 = rho * rho;
    let inv3 = 1.0 / (rho2 * rho);
    let inv5 = inv3 / rho2;
    let inv7 = inv5 / rho2;
    std::array::from_fn(|k| {
        std::array::from_fn(|l| {
            Matrix3::from_fn(|i, j| {
                let d = delta;
                -c1 * d(i, j) * (d(k, l) * inv3 - 3.0 * r[k] * r[l] * inv5)
                    + c2 * (d(i, k) * d(j, l) + d(j, k) * d(i, l)) * inv3
                    - 3.0 * c2 * (d(i, k) * r[j] + d(j, k) * r[i]) * r[l] * inv5
                    - 3.0 * c2 * (d(i, l) * r[j] * r[k] + d(j, l) * r[i] * r[k] + d(k, l) * r[i] * r[j]) * inv5
                    + 15.0 * c2 * r[i] * r[j] * r[k] * r[l] * inv7
            })
        })
    })
}

/// `(Ξ(∇_z)ᵀ Γ(z, x))ᵀ` evaluated at field point `x` and source `z`.
///
/// Column `a` is the displacement at `x` generated by a unit packed-strain
/// dipole of type `a` placed at `z`.
pub fn gamma_dipole_kernel(x: &Point, z: &Point, p: &LameParams) -> Result<Matrix3x6<f64>> {
    let (r, rho) = separation(x, z)?;
    let (c1, c2) = coefficients(p);
    let d1 = gamma_first(&r, rho, c1, c2);
    let mut out = Matrix3x6::zeros();
    for (a, terms) in STRAIN_TERMS.iter().enumerate() {
        for j in 0..3 {
            out[(j, a)] = terms.iter().map(|&(i, k, w)| w * d1[k][(i, j)]).sum();
        }
    }
    Ok(out)
}

/// `Ξ(∇_x)ᵀ (Ξ(∇_y)ᵀ Γ(y, x))ᵀ`: the packed strain at `x` of the dipole
/// kernel sourced at `y`. Satisfies `K(x, y) = K(y, x)ᵀ`.
pub fn gamma_hessian_kernel(x: &Point, y: &Point, p: &LameParams) -> Result<Matrix6<f64>> {
    let (r, rho) = separation(x, y)?;
    let (c1, c2) = coefficients(p);
    let d2 = gamma_second(&r, rho, c1, c2);
    let mut out = Matrix6::zeros();
    for (b, rows) in STRAIN_TERMS.iter().enumerate() {
        for (a, cols) in STRAIN_TERMS.iter().enumerate() {
            let mut acc = 0.0;
            for &(j, l, wb) in rows.iter() {
                for &(i, k, wa) in cols.iter() {
                    acc += wa * wb * d2[k][l][(i, j)];
                }
            }
            // ∂/∂x = −∂/∂r since r = y − x
            out[(b, a)] = -acc;
        }
    }
    Ok(out)
}
