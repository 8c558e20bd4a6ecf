//! Isotropic elasticity in six-component strain/stress vector notation.
//!
//! Symmetric tensors are packed as
//! `(t11, t22, t33, √2 t12, √2 t13, √2 t23)`; with this weighting the
//! Euclidean inner product of two packed vectors equals the double
//! contraction of the tensors. Every kernel and dipole matrix in the crate
//! uses this single ordering.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix3, Matrix3x6, Matrix6, Vector3, Vector6};

use crate::error::{Error, Result};

pub type Point = Vector3<f64>;
pub type Displacement = Vector3<f64>;

/// `(displacement component i, derivative direction k, weight)` triples:
/// strain component `a` of a field `v` is `Σ weight · ∂v_i/∂x_k`.
pub(crate) const STRAIN_TERMS: [&[(usize, usize, f64)]; 6] = [
    &[(0, 0, 1.0)],
    &[(1, 1, 1.0)],
    &[(2, 2, 1.0)],
    &[(0, 1, FRAC_1_SQRT_2), (1, 0, FRAC_1_SQRT_2)],
    &[(0, 2, FRAC_1_SQRT_2), (2, 0, FRAC_1_SQRT_2)],
    &[(1, 2, FRAC_1_SQRT_2), (2, 1, FRAC_1_SQRT_2)],
];

/// Lamé constants of an isotropic solid (nondimensional).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LameParams {
    lambda: f64,
    mu: f64,
}

impl LameParams {
    /// Accepts `mu > 0` and a Poisson ratio strictly inside `(-1, 1/2)`,
    /// which is equivalent to `3 lambda + 2 mu > 0`.
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !lambda.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidParameters(format!("non-finite constants lambda={lambda}, mu={mu}")));
        }
        if mu <= 0.0 {
            return Err(Error::InvalidParameters(format!("shear modulus must be positive, got mu={mu}")));
        }
        if 3.0 * lambda + 2.0 * mu <= 0.0 {
            return Err(Error::InvalidParameters(format!(
                "Poisson ratio {} outside (-1, 1/2)",
                lambda / (2.0 * (lambda + mu))
            )));
        }
        Ok(Self { lambda, mu })
    }

    /// Parameters from shear modulus and Poisson ratio.
    pub fn from_poisson(mu: f64, nu: f64) -> Result<Self> {
        if !(nu > -1.0 && nu < 0.5) {
            return Err(Error::InvalidParameters(format!("Poisson ratio {nu} outside (-1, 1/2)")));
        }
        Self::new(2.0 * mu * nu / (1.0 - 2.0 * nu), mu)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn poisson_ratio(&self) -> f64 {
        self.lambda / (2.0 * (self.lambda + self.mu))
    }
}

/// Packed strain `(e11, e22, e33, √2 e12, √2 e13, √2 e23)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrainVector(pub Vector6<f64>);

/// Packed stress `(σ11, σ22, σ33, √2 σ12, √2 σ13, √2 σ23)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressVector(pub Vector6<f64>);

impl StrainVector {
    pub fn zeros() -> Self {
        Self(Vector6::zeros())
    }

    /// Symmetric 3×3 strain tensor.
    pub fn tensor(&self) -> Matrix3<f64> {
        let e = &self.0;
        let s = FRAC_1_SQRT_2;
        Matrix3::new(
            e[0],
            s * e[3],
            s * e[4], //
            s * e[3],
            e[1],
            s * e[5], //
            s * e[4],
            s * e[5],
            e[2],
        )
    }

    pub fn stress(&self, p: &LameParams) -> StressVector {
        StressVector(stiffness_matrix(p) * self.0)
    }
}

impl StressVector {
    pub fn tensor(&self) -> Matrix3<f64> {
        StrainVector(self.0).tensor()
    }
}

/// `Ξ(x)`: the 3×6 matrix whose columns are the linear displacement fields
/// with unit packed strains.
pub fn big_xi(x: &Point) -> Matrix3x6<f64> {
    let mut m = Matrix3x6::zeros();
    for (a, terms) in STRAIN_TERMS.iter().enumerate() {
        for &(i, k, w) in terms.iter() {
            m[(i, a)] += w * x[k];
        }
    }
    m
}

/// `ξ(x)`: rigid-motion companion of `Ξ`; columns 1–3 are translations and
/// columns 4–6 are infinitesimal rotations.
pub fn small_xi(x: &Point) -> Matrix3x6<f64> {
    let s = FRAC_1_SQRT_2;
    Matrix3x6::new(
        1.0,
        0.0,
        0.0,
        s * x[1],
        s * x[2],
        0.0, //
        0.0,
        1.0,
        0.0,
        -s * x[0],
        0.0,
        s * x[2], //
        0.0,
        0.0,
        1.0,
        0.0,
        -s * x[0],
        -s * x[1],
    )
}

/// Coefficient matrix of `x_k` in `Ξ(x)`, i.e. `Ξ(e_k)`.
pub fn big_xi_component(k: usize) -> Matrix3x6<f64> {
    let mut e = Point::zeros();
    e[k] = 1.0;
    big_xi(&e)
}

/// Applies `Ξ(∇)ᵀ` exactly to the affine matrix field
/// `F(x) = F₀ + x₁F₁ + x₂F₂ + x₃F₃`, given the slopes `[F₁, F₂, F₃]`.
///
/// Column `a` of the result is the (constant) packed strain of column `a`
/// of `F`.
pub fn xi_grad_transpose_affine(slopes: &[Matrix3x6<f64>; 3]) -> Matrix6<f64> {
    (0..3).fold(Matrix6::zeros(), |acc, k| acc + big_xi_component(k).transpose() * slopes[k])
}

/// Linear (slope) part of `ξ(x)` along `x_k`.
pub fn small_xi_slope(k: usize) -> Matrix3x6<f64> {
    let mut e = Point::zeros();
    e[k] = 1.0;
    small_xi(&e) - small_xi(&Point::zeros())
}

/// Block-diagonal stiffness `A = diag(B, 2μ I₃)` mapping packed strain to
/// packed stress.
pub fn stiffness_matrix(p: &LameParams) -> Matrix6<f64> {
    let (l, m) = (p.lambda, p.mu);
    let mut a = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            a[(i, j)] = if i == j { l + 2.0 * m } else { l };
        }
        a[(i + 3, i + 3)] = 2.0 * m;
    }
    a
}

/// Packed strain from a displacement gradient `grad[(i, k)] = ∂u_i/∂x_k`.
pub fn strain_vector(grad: &Matrix3<f64>) -> StrainVector {
    let mut e = Vector6::zeros();
    for (a, terms) in STRAIN_TERMS.iter().enumerate() {
        e[a] = terms.iter().map(|&(i, k, w)| w * grad[(i, k)]).sum();
    }
    StrainVector(e)
}

/// Traction `Ξ(n) A E(u)` on a surface with unit normal `n`.
pub fn traction(grad: &Matrix3<f64>, n: &Vector3<f64>, p: &LameParams) -> Result<Vector3<f64>> {
    let len = n.norm();
    if (len - 1.0).abs() > 1e-10 || len.is_nan() {
        return Err(Error::Domain(format!("normal must be a unit vector, |n| = {len}")));
    }
    Ok(big_xi(n) * stiffness_matrix(p) * strain_vector(grad).0)
}

/// `J(x)`, the matrix with `J(x) v = x × v`.
pub fn rigid_motion_matrix(x: &Point) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -x[2], x[1], //
        x[2], 0.0, -x[0], //
        -x[1], x[0], 0.0,
    )
}

/// `tr(e e)` of the strain tensor. With the √2-weighted packing this is the
/// plain squared norm of the strain vector.
pub fn energy_density(e: &StrainVector) -> f64 {
    e.0.norm_squared()
}
