//! Point sets on the 2-sphere: unit vectors, node measures, random sampling,
//! spherical caps and the dyadic octahedral triangulation.

mod mesh;
mod points;
mod triangulation;

pub use mesh::{mesh_norm, probe_mesh_bound};
pub use points::{
    geodesic_dist, random_points, random_sphere_vectors, rng_stream, PointKind, PointSet, SphericalCap, UnitPoint,
    UNIT_TOL,
};
pub use triangulation::{dyadic_triangulation, locate, tr_measure, TrSelection, Triangulation, MAX_LEVEL};
