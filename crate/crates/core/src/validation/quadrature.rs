//! Gauss–Legendre rules and product rules on spheres and balls.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::elastic::Point;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product rule on the unit sphere: Gauss–Legendre in `cos θ` times the
/// trapezoid rule in `φ`. Weights sum to `4π`.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub directions: Vec<Vector3<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn product(n_polar: usize, n_azimuth: usize) -> Self {
        assert!(n_azimuth > 0);
        let (t, w) = gauss_legendre(n_polar);
        let dphi = 2.0 * PI / n_azimuth as f64;
        let mut directions = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (ct, wt) in t.iter().zip(&w) {
            let st = (1.0 - ct * ct).sqrt();
            for j in 0..n_azimuth {
                let phi = (j as f64 + 0.5) * dphi;
                directions.push(Vector3::new(st * phi.cos(), st * phi.sin(), *ct));
                weights.push(wt * dphi);
            }
        }
        Self { directions, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(point, unit outward normal, area weight)` on the sphere `|x − c| = radius`.
    pub fn surface_nodes(&self, center: &Point, radius: f64) -> impl Iterator<Item = (Point, Vector3<f64>, f64)> + '_ {
        let center = *center;
        let area = radius * radius;
        self.directions.iter().zip(&self.weights).map(move |(n, w)| (center + n * radius, *n, w * area))
    }
}

impl Default for SphereRule {
    /// 16 Gauss nodes in `cos θ` × 32 trapezoid nodes in `φ`.
    fn default() -> Self {
        Self::product(16, 32)
    }
}

/// Volume rule on a ball: Gauss–Legendre in the radius times a sphere rule.
#[derive(Clone, Debug)]
pub struct BallRule {
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
    sphere: SphereRule,
}

impl BallRule {
    pub fn new(n_radial: usize, sphere: SphereRule) -> Self {
        let (t, w) = gauss_legendre(n_radial);
        // map [-1, 1] -> [0, 1]
        let radial_nodes = t.iter().map(|t| 0.5 * (t + 1.0)).collect();
        let radial_weights = w.iter().map(|w| 0.5 * w).collect();
        Self { radial_nodes, radial_weights, sphere }
    }

    /// `(point, volume weight)` on the ball `|x − c| < radius`.
    pub fn nodes(&self, center: &Point, radius: f64) -> Vec<(Point, f64)> {
        let mut out = Vec::with_capacity(self.radial_nodes.len() * self.sphere.len());
        for (s, ws) in self.radial_nodes.iter().zip(&self.radial_weights) {
            let r = s * radius;
            let jac = ws * radius * r * r;
            for (n, wn) in self.sphere.directions.iter().zip(&self.sphere.weights) {
                out.push((center + n * r, jac * wn));
            }
        }
        out
    }
}

impl Default for BallRule {
    fn default() -> Self {
        Self::new(12, SphereRule::default())
    }
}
