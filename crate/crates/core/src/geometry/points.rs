use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `| |x| - 1 |` for a vector to count as a unit point.
pub const UNIT_TOL: f64 = 1e-12;

/// A point on the unit sphere in R^3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitPoint([f64; 3]);

impl UnitPoint {
    /// Accepts `(x, y, z)` only if its Euclidean norm is 1 within [`UNIT_TOL`].
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let r = (x * x + y * y + z * z).sqrt();
        if !((r - 1.0).abs() <= UNIT_TOL) {
            return Err(Error::Domain(format!(
                "point ({x}, {y}, {z}) is not on the unit sphere (norm {r})"
            )));
        }
        Ok(Self([x, y, z]))
    }

    /// Radial projection of a non-zero vector.
    pub fn normalize(v: [f64; 3]) -> Result<Self> {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self([v[0] / r, v[1] / r, v[2] / r]))
    }

    pub(crate) fn from_normalized(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        Self([v[0] / r, v[1] / r, v[2] / r])
    }

    pub fn coords(&self) -> &[f64; 3] {
        &self.0
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }
    pub fn y(&self) -> f64 {
        self.0[1]
    }
    pub fn z(&self) -> f64 {
        self.0[2]
    }

    #[inline]
    pub fn dot(&self, other: &UnitPoint) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn antipode(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }

    /// Apply a 3x3 matrix given row-major; the matrix must be orthogonal.
    pub fn rotate(&self, m: &[[f64; 3]; 3]) -> Self {
        let v = self.0;
        Self::from_normalized([
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ])
    }
}

/// Geodesic (great-circle) distance, `arccos` of the clamped dot product.
pub fn geodesic_dist(x: &UnitPoint, y: &UnitPoint) -> f64 {
    x.dot(y).clamp(-1.0, 1.0).acos()
}

/// Origin of a node set, which determines how its measure was formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointKind {
    /// Equal mass `1/M` per node.
    MonteCarlo,
    /// Mass equal to the normalized area of the dyadic triangle holding the node.
    Triangulated,
    /// Read from a file.
    External,
}

/// Nodes on the sphere with a strictly positive probability measure.
#[derive(Debug, Clone)]
pub struct PointSet {
    points: Vec<UnitPoint>,
    measure: Vec<f64>,
    kind: PointKind,
}

impl PointSet {
    /// Validates that the measure is positive, matches the node count, and
    /// sums to 1 within `1e-10`.
    pub fn new(points: Vec<UnitPoint>, measure: Vec<f64>, kind: PointKind) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("point set is empty".into()));
        }
        if points.len() != measure.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: measure.len(),
            });
        }
        if let Some(i) = measure.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "measure must be positive, node {i} has {}",
                measure[i]
            )));
        }
        let total: f64 = measure.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("measure must sum to 1, got {total}")));
        }
        Ok(Self { points, measure, kind })
    }

    /// Equal mass `1/M` on every node.
    pub fn monte_carlo(points: Vec<UnitPoint>) -> Result<Self> {
        let m = points.len();
        Self::new(points, vec![1.0 / m.max(1) as f64; m], PointKind::MonteCarlo)
    }

    pub fn points(&self) -> &[UnitPoint] {
        &self.points
    }
    pub fn measure(&self) -> &[f64] {
        &self.measure
    }
    pub fn kind(&self) -> PointKind {
        self.kind
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_parts(self) -> (Vec<UnitPoint>, Vec<f64>, PointKind) {
        (self.points, self.measure, self.kind)
    }
}

/// Deterministic generator for `(seed, stream)`.
///
/// All randomness in the crate comes from ChaCha8 (`rand_chacha`), seeded
/// with `seed_from_u64(seed)`; independent consumers of one master seed use
/// distinct `stream` numbers. Seed 0 is valid.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_direction<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-300 {
            let r = r2.sqrt();
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// `count` i.i.d. uniform points on the 2-sphere with the Monte-Carlo
/// measure, drawn as normalized Gaussian vectors.
pub fn random_points(seed: u64, count: usize) -> Result<PointSet> {
    if count == 0 {
        return Err(Error::InvalidParameter("point count must be >= 1".into()));
    }
    let mut rng = rng_stream(seed, 0);
    let pts = (0..count)
        .map(|_| {
            let v = gaussian_direction(&mut rng, 3);
            UnitPoint([v[0], v[1], v[2]])
        })
        .collect();
    PointSet::monte_carlo(pts)
}

/// Uniform random unit vectors in R^{q+1}, for checks in general dimension.
pub fn random_sphere_vectors(seed: u64, count: usize, q: usize) -> Result<Vec<Vec<f64>>> {
    if count == 0 || q == 0 {
        return Err(Error::InvalidParameter("count and q must be >= 1".into()));
    }
    let mut rng = rng_stream(seed, 0);
    Ok((0..count).map(|_| gaussian_direction(&mut rng, q + 1)).collect())
}

/// Closed geodesic ball `{x : arccos(x . center) <= radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalCap {
    center: UnitPoint,
    radius: f64,
}

impl SphericalCap {
    pub fn new(center: UnitPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!(
                "cap radius must be in (0, pi], got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &UnitPoint {
        &self.center
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, x: &UnitPoint) -> bool {
        geodesic_dist(x, &self.center) <= self.radius
    }

    /// Uniform random points in the cap.
    pub fn random_points(&self, seed: u64, count: usize) -> Vec<UnitPoint> {
        let mut rng = rng_stream(seed, 0);
        let (e1, e2) = tangent_frame(&self.center);
        let c = self.center.0;
        let cos_r = self.radius.cos();
        (0..count)
            .map(|_| {
                let u: f64 = rng.random();
                let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                let t = 1.0 - u * (1.0 - cos_r);
                let s = (1.0 - t * t).max(0.0).sqrt();
                let (sp, cp) = phi.sin_cos();
                UnitPoint::from_normalized([
                    t * c[0] + s * (cp * e1[0] + sp * e2[0]),
                    t * c[1] + s * (cp * e1[1] + sp * e2[1]),
                    t * c[2] + s * (cp * e1[2] + sp * e2[2]),
                ])
            })
            .collect()
    }
}

fn tangent_frame(c: &UnitPoint) -> ([f64; 3], [f64; 3]) {
    let c = c.0;
    let helper = if c[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let e1 = normalize3(cross(helper, c));
    let e2 = cross(c, e1);
    (e1, e2)
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / r, v[1] / r, v[2] / r]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_point_validation() {
        assert!(UnitPoint::new(1.0, 0.0, 0.0).is_ok());
        assert!(UnitPoint::new(1.0, 1e-5, 0.0).is_err());
        assert!(UnitPoint::normalize([0.0, 0.0, 0.0]).is_err());
        let p = UnitPoint::normalize([3.0, 4.0, 0.0]).unwrap();
        assert!((p.x() - 0.6).abs() < 1e-16);
    }

    #[test]
    fn distances() {
        let e1 = UnitPoint::new(1.0, 0.0, 0.0).unwrap();
        let e2 = UnitPoint::new(0.0, 1.0, 0.0).unwrap();
        assert_eq!(geodesic_dist(&e1, &e1), 0.0);
        assert!((geodesic_dist(&e1, &e1.antipode()) - PI).abs() < 1e-15);
        assert!((geodesic_dist(&e1, &e2) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn random_points_contract() {
        let one = random_points(99, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.measure(), &[1.0]);
        assert!(random_points(0, 0).is_err());

        let a = random_points(5, 500).unwrap();
        let b = random_points(5, 500).unwrap();
        assert_eq!(a.points(), b.points());
        assert_ne!(a.points(), random_points(6, 500).unwrap().points());
        for p in a.points() {
            let r: f64 = p.coords().iter().map(|c| c * c).sum();
            assert!((r - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn random_points_first_moment() {
        let m = 100_000;
        let set = random_points(2024, m).unwrap();
        let bound = 3.0 / (m as f64).sqrt();
        for axis in 0..3 {
            let mean: f64 = set.points().iter().map(|p| p.coords()[axis]).sum::<f64>() / m as f64;
            assert!(mean.abs() < 0.02 && mean.abs() < bound, "axis {axis}: {mean}");
        }
        let total: f64 = set.measure().iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn point_set_validation() {
        let p = UnitPoint::new(0.0, 0.0, 1.0).unwrap();
        assert!(PointSet::new(vec![p, p], vec![0.5, 0.4], PointKind::External).is_err());
        assert!(PointSet::new(vec![p, p], vec![1.0, 0.0], PointKind::External).is_err());
        assert!(PointSet::new(vec![p], vec![0.5, 0.5], PointKind::External).is_err());
        assert!(PointSet::new(vec![], vec![], PointKind::External).is_err());
    }

    #[test]
    fn cap_sampling_stays_inside() {
        let c = UnitPoint::normalize([-1.0, 0.0, -1.0]).unwrap();
        let cap = SphericalCap::new(c, 0.451).unwrap();
        let pts = cap.random_points(3, 2000);
        assert!(pts.iter().all(|p| cap.contains(p)));
        // area fraction check: roughly half of the points beyond the median radius
        let r_half = ((1.0 + 0.451f64.cos()) / 2.0).acos();
        let inner = pts.iter().filter(|p| geodesic_dist(p, &c) <= r_half).count();
        assert!((inner as f64 / 2000.0 - 0.5).abs() < 0.05);
        assert!(SphericalCap::new(c, 0.0).is_err());
        assert!(SphericalCap::new(c, 4.0).is_err());
    }
}
