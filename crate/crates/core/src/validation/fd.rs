//! Central finite-difference engines used as independent oracles.

use nalgebra::{Matrix3, SMatrix, Vector3};

use crate::elastic::{traction, LameParams, Point};
use crate::error::Result;

fn shifted(x: &Point, axis: usize, h: f64) -> Point {
    let mut y = *x;
    y[axis] += h;
    y
}

/// Central difference `∂f/∂x_axis`, error `O(h²)`.
pub fn central_partial<F, const R: usize, const C: usize>(f: &F, x: &Point, axis: usize, h: f64) -> SMatrix<f64, R, C>
where
    F: Fn(&Point) -> SMatrix<f64, R, C>,
{
    (f(&shifted(x, axis, h)) - f(&shifted(x, axis, -h))) / (2.0 * h)
}

/// One Richardson step on the central difference, error `O(h⁴)`.
pub fn richardson_partial<F, const R: usize, const C: usize>(
    f: &F,
    x: &Point,
    axis: usize,
    h: f64,
) -> SMatrix<f64, R, C>
where
    F: Fn(&Point) -> SMatrix<f64, R, C>,
{
    let coarse = central_partial(f, x, axis, h);
    let fine = central_partial(f, x, axis, 0.5 * h);
    (fine * 4.0 - coarse) / 3.0
}

/// Central-difference displacement gradient, `grad[(i, k)] = ∂u_i/∂x_k`.
pub fn fd_gradient<F>(field: &F, x: &Point, h: f64) -> Matrix3<f64>
where
    F: Fn(&Point) -> Vector3<f64>,
{
    Matrix3::from_columns(&std::array::from_fn::<_, 3, _>(|k| central_partial(field, x, k, h)))
}

/// Richardson-extrapolated gradient.
pub fn fd_gradient_richardson<F>(field: &F, x: &Point, h: f64) -> Matrix3<f64>
where
    F: Fn(&Point) -> Vector3<f64>,
{
    Matrix3::from_columns(&std::array::from_fn::<_, 3, _>(|k| richardson_partial(field, x, k, h)))
}

/// Partial derivatives `[∂F/∂x₁, ∂F/∂x₂, ∂F/∂x₃]` of a matrix-valued field.
pub fn fd_partials<F, const R: usize, const C: usize>(
    field: &F,
    x: &Point,
    h: f64,
    richardson: bool,
) -> [SMatrix<f64, R, C>; 3]
where
    F: Fn(&Point) -> SMatrix<f64, R, C>,
{
    std::array::from_fn(
        |k| {
            if richardson {
                richardson_partial(field, x, k, h)
            } else {
                central_partial(field, x, k, h)
            }
        },
    )
}

/// Second-order finite-difference Hessians `H[i][(k, l)] = ∂²u_i/∂x_k∂x_l`.
pub fn fd_hessians<F>(field: &F, x: &Point, h: f64) -> [Matrix3<f64>; 3]
where
    F: Fn(&Point) -> Vector3<f64>,
{
    let u0 = field(x);
    let pure: [Vector3<f64>; 3] =
        std::array::from_fn(|k| (field(&shifted(x, k, h)) - u0 * 2.0 + field(&shifted(x, k, -h))) / (h * h));
    let mixed = |k: usize, l: usize| {
        let at = |sk: f64, sl: f64| field(&shifted(&shifted(x, k, sk), l, sl));
        (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h)
    };
    let (m01, m02, m12) = (mixed(0, 1), mixed(0, 2), mixed(1, 2));
    let second = [[pure[0], m01, m02], [m01, pure[1], m12], [m02, m12, pure[2]]];
    std::array::from_fn(|i| Matrix3::from_fn(|k, l| second[k][l][i]))
}

/// Finite-difference Lamé residual `μΔu + (λ + μ)∇(∇·u)`.
///
/// Uses the Navier form rather than `Ξ(∇) A Ξ(∇)ᵀ` so the check stays
/// independent of the packed-vector machinery.
pub fn lame_residual<F>(field: &F, x: &Point, p: &LameParams, h: f64) -> Vector3<f64>
where
    F: Fn(&Point) -> Vector3<f64>,
{
    let hess = fd_hessians(field, x, h);
    let (lambda, mu) = (p.lambda(), p.mu());
    Vector3::from_fn(|i, _| {
        let laplacian = hess[i].trace();
        let grad_div: f64 = (0..3).map(|k| hess[k][(i, k)]).sum();
        mu * laplacian + (lambda + mu) * grad_div
    })
}

/// Traction `σ(u) n` from a Richardson finite-difference gradient.
pub fn fd_traction<F>(field: &F, x: &Point, n: &Vector3<f64>, p: &LameParams, h: f64) -> Result<Vector3<f64>>
where
    F: Fn(&Point) -> Vector3<f64>,
{
    traction(&fd_gradient_richardson(field, x, h), n, p)
}
