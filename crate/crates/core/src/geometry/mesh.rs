use super::points::{geodesic_dist, PointSet, UnitPoint};
use super::triangulation::{dyadic_triangulation, Triangulation};
use crate::error::Result;

/// Largest distance from a dyadic triangle center to any of its vertices.
/// Every point of the sphere lies within this distance of some center.
pub fn probe_mesh_bound(tri: &Triangulation) -> f64 {
    tri.triangles()
        .iter()
        .zip(tri.centers())
        .map(|(t, c)| t.iter().map(|v| geodesic_dist(v, c)).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

/// Certified upper bound on the mesh norm `sup_x dist(x, C)`.
///
/// The supremum is estimated over the centers of the level-`resolution`
/// dyadic triangulation; the probe-set mesh bound is added so the returned
/// value never underestimates the true mesh norm. Capped at pi.
pub fn mesh_norm(set: &PointSet, resolution: u32) -> Result<f64> {
    let tri = dyadic_triangulation(resolution)?;
    let nodes = set.points();
    let nearest = |x: &UnitPoint| {
        nodes
            .iter()
            .map(|p| p.dot(x))
            .fold(f64::NEG_INFINITY, f64::max)
            .clamp(-1.0, 1.0)
            .acos()
    };
    let probe_max = crate::exec::map_chunks(tri.centers(), 256, |_, c| c.iter().map(nearest).fold(0.0, f64::max))
        .into_iter()
        .fold(0.0, f64::max);
    Ok((probe_max + probe_mesh_bound(&tri)).min(std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointSet;
    use std::f64::consts::PI;

    #[test]
    fn two_poles() {
        let n = UnitPoint::new(0.0, 0.0, 1.0).unwrap();
        let set = PointSet::monte_carlo(vec![n, n.antipode()]).unwrap();
        let tri = dyadic_triangulation(5).unwrap();
        let slack = probe_mesh_bound(&tri);
        let h = mesh_norm(&set, 5).unwrap();
        assert!(h >= PI / 2.0 - 1e-12 && h <= PI / 2.0 + slack + 1e-12, "{h}");
    }

    #[test]
    fn single_point() {
        let set = PointSet::monte_carlo(vec![UnitPoint::new(1.0, 0.0, 0.0).unwrap()]).unwrap();
        assert!((mesh_norm(&set, 4).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn halves_under_refinement() {
        let probe = 6;
        let h3 = mesh_norm(&dyadic_triangulation(3).unwrap().to_point_set(), probe).unwrap();
        let h4 = mesh_norm(&dyadic_triangulation(4).unwrap().to_point_set(), probe).unwrap();
        let ratio = h4 / h3;
        assert!(ratio > 0.4 && ratio < 0.65, "ratio {ratio}");
    }
}
