//! Clouds of spherical cavities and their admissibility constraints.
//!
//! A cloud with separation parameter `d` has pairwise centre distances of
//! at least `2d`, keeps every cavity at least `2d` away from the boundary of
//! the enclosing ball, and uses radii below `c·d` for a small gate constant
//! `c`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elastic::{LameParams, Point};
use crate::error::{Error, Result};
use crate::sphere::Void;

pub const DEFAULT_GATE: f64 = 0.2;

/// Maximum `n (2d)³ / V` accepted by [`generate_cloud`], where `V` is the
/// volume of the admissible centre region.
pub const FILL_FACTOR: f64 = 0.5;

/// Relative slack applied to the `≥ 2d` comparisons so that configurations
/// built to sit exactly on the bound are not rejected by rounding.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub center: Point,
    pub radius: f64,
}

impl Region {
    /// Distance from `x` to the region (zero inside).
    pub fn distance_to(&self, x: &Point) -> f64 {
        ((x - self.center).norm() - self.radius).max(0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cloud {
    pub voids: Vec<Void>,
    pub d: f64,
    pub region: Region,
    pub params: LameParams,
}

impl Cloud {
    pub fn len(&self) -> usize {
        self.voids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voids.is_empty()
    }

    pub fn max_radius(&self) -> f64 {
        self.voids.iter().map(|v| v.radius).fold(0.0, f64::max)
    }

    /// Copy with every radius set to `eps`.
    pub fn with_radius(&self, eps: f64) -> Result<Cloud> {
        let voids = self.voids.iter().map(|v| Void::new(v.center, eps)).collect::<Result<_>>()?;
        Ok(Cloud { voids, ..self.clone() })
    }

    /// Copy with all lengths multiplied by `s` about the region centre.
    pub fn scaled(&self, s: f64) -> Result<Cloud> {
        let c = self.region.center;
        let voids =
            self.voids.iter().map(|v| Void::new(c + (v.center - c) * s, v.radius * s)).collect::<Result<_>>()?;
        Ok(Cloud {
            voids,
            d: self.d * s,
            region: Region { center: c, radius: self.region.radius * s },
            params: self.params,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudReport {
    pub voids: usize,
    /// `+inf` for fewer than two voids.
    pub min_separation: f64,
    /// `+inf` for an empty cloud.
    pub min_boundary_clearance: f64,
    pub max_eps_over_d: f64,
    pub gate_c: f64,
    pub separation_ok: bool,
    pub clearance_ok: bool,
    pub gate_ok: bool,
    pub passed: bool,
}

impl CloudReport {
    /// Human-readable list of violated invariants.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.separation_ok {
            out.push(format!("minimum centre separation {} is below 2d", self.min_separation));
        }
        if !self.clearance_ok {
            out.push(format!("minimum clearance {} to the region boundary is below 2d", self.min_boundary_clearance));
        }
        if !self.gate_ok {
            out.push(format!("max eps/d = {} is not below the gate c = {}", self.max_eps_over_d, self.gate_c));
        }
        out
    }
}

pub fn validate_cloud(cloud: &Cloud, gate_c: f64) -> CloudReport {
    let voids = &cloud.voids;
    let min_separation = (0..voids.len())
        .into_par_iter()
        .map(|i| voids[i + 1..].iter().map(|w| (voids[i].center - w.center).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min);
    let min_boundary_clearance = voids
        .iter()
        .map(|v| cloud.region.radius - (v.center - cloud.region.center).norm() - v.radius)
        .fold(f64::INFINITY, f64::min);
    let max_eps_over_d = cloud.max_radius() / cloud.d;
    let bound = 2.0 * cloud.d * (1.0 - BOUND_SLACK);
    let separation_ok = min_separation >= bound;
    let clearance_ok = min_boundary_clearance >= bound;
    let gate_ok = voids.is_empty() || max_eps_over_d < gate_c;
    CloudReport {
        voids: voids.len(),
        min_separation,
        min_boundary_clearance,
        max_eps_over_d,
        gate_c,
        separation_ok,
        clearance_ok,
        gate_ok,
        passed: separation_ok && clearance_ok && gate_ok,
    }
}

/// Parameters for [`generate_cloud`].
#[derive(Clone, Copy, Debug)]
pub struct CloudSpec {
    pub region: Region,
    pub n: usize,
    pub d: f64,
    pub eps: f64,
    pub seed: u64,
    pub gate_c: f64,
    pub params: LameParams,
}

/// Seeded random sequential placement of `n` equal cavities of radius `eps`.
///
/// Candidates are drawn uniformly in the ball of admissible centres and
/// rejected when closer than `2d` to an accepted centre; at most `10⁴ n`
/// candidates are drawn.
pub fn generate_cloud(config: &CloudSpec) -> Result<Cloud> {
    let CloudSpec { region, n, d, eps, seed, gate_c, params } = *config;
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Input(format!("separation parameter d must be positive, got {d}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Input(format!("cavity radius must be positive, got {eps}")));
    }
    if eps.partial_cmp(&(gate_c * d)) != Some(std::cmp::Ordering::Less) {
        return Err(Error::Gate(format!("eps = {eps} is not below c d = {} (c = {gate_c})", gate_c * d)));
    }
    let admissible = region.radius - eps - 2.0 * d;
    if n > 0 && admissible < 0.0 {
        return Err(Error::Capacity(format!(
            "region radius {} leaves no room for a cavity with clearance 2d",
            region.radius
        )));
    }
    let volume = 4.0 / 3.0 * std::f64::consts::PI * admissible.powi(3);
    if n as f64 * (2.0 * d).powi(3) > FILL_FACTOR * volume && n > 1 {
        return Err(Error::Capacity(format!(
            "{n} cavities with separation 2d = {} exceed the fill factor {FILL_FACTOR} of the admissible region",
            2.0 * d
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_sq = (2.0 * d) * (2.0 * d);
    let max_attempts = 10_000usize.saturating_mul(n.max(1));
    let mut centers: Vec<Point> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while centers.len() < n {
        if attempts == max_attempts {
            return Err(Error::Capacity(format!(
                "placed only {} of {n} cavities after {max_attempts} attempts",
                centers.len()
            )));
        }
        attempts += 1;
        let offset = Point::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        if offset.norm_squared() > 1.0 {
            continue;
        }
        let candidate = region.center + offset * admissible;
        if centers.iter().all(|c| (c - candidate).norm_squared() >= min_sq) {
            centers.push(candidate);
        }
    }
    let voids = centers.into_iter().map(|c| Void::new(c, eps)).collect::<Result<_>>()?;
    Ok(Cloud { voids, d, region, params })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, seed: u64) -> CloudSpec {
        CloudSpec {
            region: Region { center: Point::zeros(), radius: 1.0 },
            n,
            d: 0.1,
            eps: 0.01,
            seed,
            gate_c: DEFAULT_GATE,
            params: LameParams::new(1.0, 1.0).unwrap(),
        }
    }

    #[test]
    fn single_void() {
        let c = generate_cloud(&config(1, 0)).unwrap();
        assert_eq!(c.len(), 1);
        assert!(validate_cloud(&c, DEFAULT_GATE).passed);
    }

    #[test]
    fn pair_in_large_region() {
        let mut s = config(2, 9);
        s.region.radius = 10.0 * s.d;
        let c = generate_cloud(&s).unwrap();
        assert!((c.voids[0].center - c.voids[1].center).norm() >= 2.0 * s.d);
    }

    #[test]
    fn deterministic_under_seed() {
        let a = generate_cloud(&config(25, 42)).unwrap();
        let b = generate_cloud(&config(25, 42)).unwrap();
        assert_eq!(a, b);
        for (u, v) in a.voids.iter().zip(&b.voids) {
            for k in 0..3 {
                assert_eq!(u.center[k].to_bits(), v.center[k].to_bits());
            }
        }
        let c = generate_cloud(&config(25, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_clouds_validate() {
        for seed in 0..20 {
            let c = generate_cloud(&config(30, seed)).unwrap();
            let r = validate_cloud(&c, DEFAULT_GATE);
            assert!(r.passed, "seed {seed}: {:?}", r.failures());
        }
    }

    #[test]
    fn gate_and_capacity_errors() {
        let mut s = config(5, 0);
        s.eps = s.d;
        assert!(matches!(generate_cloud(&s), Err(Error::Gate(_))));
        let mut s = config(5000, 0);
        s.region.radius = 1.0;
        assert!(matches!(generate_cloud(&s), Err(Error::Capacity(_))));
    }

    #[test]
    fn boundary_cases_of_validation() {
        let p = LameParams::new(1.0, 1.0).unwrap();
        let d = 0.1;
        let region = Region { center: Point::zeros(), radius: 1.0 };
        let voids = vec![
            Void::new(Point::new(0.0, 0.0, 0.0), 0.01).unwrap(),
            Void::new(Point::new(2.0 * d, 0.0, 0.0), 0.01).unwrap(),
        ];
        let c = Cloud { voids, d, region, params: p };
        let r = validate_cloud(&c, 0.2);
        assert!(r.passed, "{r:?}");
        assert_eq!(r.min_separation, 2.0 * d);

        let fat = c.with_radius(d).unwrap();
        let r = validate_cloud(&fat, 0.2);
        assert!(!r.gate_ok && !r.passed);
        assert_eq!(r.failures().len(), 1);

        let empty = Cloud { voids: vec![], d, region, params: p };
        assert!(validate_cloud(&empty, 0.2).passed);
    }

    #[test]
    fn scaling_preserves_validity() {
        let c = generate_cloud(&config(10, 5)).unwrap();
        let s = c.scaled(2.0).unwrap();
        assert_eq!(s.d, 0.2);
        let r = validate_cloud(&s, DEFAULT_GATE);
        assert!(r.passed);
    }
}
