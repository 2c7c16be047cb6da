//! Dyadic triangulation of the sphere obtained by repeated 4-way midpoint
//! subdivision of the regular octahedron.
//!
//! Triangles are indexed hierarchically: the octahedral faces are `0..8`
//! (ordered by the sign pattern of their octant) and the children of
//! triangle `i` are `4i..4i+4`, in the order corner-a, corner-b, corner-c,
//! middle. Every triangle is stored counter-clockwise seen from outside.

use super::points::{cross, PointKind, PointSet, UnitPoint};
use crate::error::{Error, Result};

/// Deepest supported subdivision level (`8 * 4^9` triangles).
pub const MAX_LEVEL: u32 = 9;

#[derive(Debug, Clone)]
pub struct Triangulation {
    level: u32,
    triangles: Vec<[UnitPoint; 3]>,
    centers: Vec<UnitPoint>,
    areas: Vec<f64>,
    raw_area_sum: f64,
}

impl Triangulation {
    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn triangles(&self) -> &[[UnitPoint; 3]] {
        &self.triangles
    }
    pub fn centers(&self) -> &[UnitPoint] {
        &self.centers
    }
    /// Spherical areas normalized to sum to 1.
    pub fn areas(&self) -> &[f64] {
        &self.areas
    }
    /// Sum of the unnormalized spherical areas (4 pi up to rounding).
    pub fn raw_area_sum(&self) -> f64 {
        self.raw_area_sum
    }
    pub fn len(&self) -> usize {
        self.triangles.len()
    }
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Triangle centers carrying the area measure.
    pub fn to_point_set(&self) -> PointSet {
        PointSet::new(self.centers.clone(), self.areas.clone(), PointKind::Triangulated)
            .expect("triangulation areas form a probability measure")
    }
}

fn det(a: &UnitPoint, b: &UnitPoint, c: &UnitPoint) -> f64 {
    let bc = cross(*b.coords(), *c.coords());
    let a = a.coords();
    a[0] * bc[0] + a[1] * bc[1] + a[2] * bc[2]
}

fn midpoint(a: &UnitPoint, b: &UnitPoint) -> UnitPoint {
    let (a, b) = (a.coords(), b.coords());
    UnitPoint::from_normalized([a[0] + b[0], a[1] + b[1], a[2] + b[2]])
}

fn chord_angle(a: &UnitPoint, b: &UnitPoint) -> f64 {
    let (a, b) = (a.coords(), b.coords());
    let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    2.0 * (0.5 * d).min(1.0).asin()
}

/// Spherical excess of a geodesic triangle by L'Huilier's theorem.
pub(crate) fn spherical_area(t: &[UnitPoint; 3]) -> f64 {
    let a = chord_angle(&t[1], &t[2]);
    let b = chord_angle(&t[2], &t[0]);
    let c = chord_angle(&t[0], &t[1]);
    let s = 0.5 * (a + b + c);
    let prod = (0.5 * s).tan() * (0.5 * (s - a)).tan() * (0.5 * (s - b)).tan() * (0.5 * (s - c)).tan();
    4.0 * prod.max(0.0).sqrt().atan()
}

fn octahedron_faces() -> [[UnitPoint; 3]; 8] {
    let mut faces = [[UnitPoint::from_normalized([1.0, 0.0, 0.0]); 3]; 8];
    for (i, face) in faces.iter_mut().enumerate() {
        let sx = if i & 4 != 0 { -1.0 } else { 1.0 };
        let sy = if i & 2 != 0 { -1.0 } else { 1.0 };
        let sz = if i & 1 != 0 { -1.0 } else { 1.0 };
        let a = UnitPoint::from_normalized([sx, 0.0, 0.0]);
        let b = UnitPoint::from_normalized([0.0, sy, 0.0]);
        let c = UnitPoint::from_normalized([0.0, 0.0, sz]);
        *face = if sx * sy * sz > 0.0 { [a, b, c] } else { [a, c, b] };
    }
    faces
}

fn face_of(p: &UnitPoint) -> usize {
    let c = p.coords();
    ((c[0] < 0.0) as usize) << 2 | ((c[1] < 0.0) as usize) << 1 | (c[2] < 0.0) as usize
}

fn children(t: &[UnitPoint; 3]) -> [[UnitPoint; 3]; 4] {
    let [a, b, c] = *t;
    let (ab, bc, ca) = (midpoint(&a, &b), midpoint(&b, &c), midpoint(&c, &a));
    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
}

fn child_containing(t: &[UnitPoint; 3], p: &UnitPoint) -> (usize, [UnitPoint; 3]) {
    let kids = children(t);
    let [ab, bc, ca] = kids[3];
    let k = if det(&ca, &ab, p) < 0.0 {
        0
    } else if det(&ab, &bc, p) < 0.0 {
        1
    } else if det(&bc, &ca, p) < 0.0 {
        2
    } else {
        3
    };
    (k, kids[k])
}

/// Index of the level-`level` dyadic triangle containing `p`.
pub fn locate(p: &UnitPoint, level: u32) -> usize {
    let faces = octahedron_faces();
    let mut idx = face_of(p);
    let mut tri = faces[idx];
    for _ in 0..level {
        let (k, t) = child_containing(&tri, p);
        idx = 4 * idx + k;
        tri = t;
    }
    idx
}

/// Build the level-`level` triangulation (`8 * 4^level` triangles).
pub fn dyadic_triangulation(level: u32) -> Result<Triangulation> {
    if level > MAX_LEVEL {
        return Err(Error::ResourceLimit(format!(
            "triangulation level {level} exceeds the maximum of {MAX_LEVEL}"
        )));
    }
    let mut triangles: Vec<[UnitPoint; 3]> = octahedron_faces().to_vec();
    for _ in 0..level {
        triangles = triangles.iter().flat_map(children).collect();
    }
    let raw: Vec<f64> = crate::exec::map_chunks(&triangles, 4096, |_, c| {
        c.iter().map(spherical_area).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let raw_area_sum: f64 = raw.iter().sum();
    let areas = raw.iter().map(|a| a / raw_area_sum).collect();
    let centers = triangles
        .iter()
        .map(|t| {
            let (a, b, c) = (t[0].coords(), t[1].coords(), t[2].coords());
            UnitPoint::from_normalized([a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]])
        })
        .collect();
    Ok(Triangulation {
        level,
        triangles,
        centers,
        areas,
        raw_area_sum,
    })
}

/// Result of attaching the triangle-area measure to scattered nodes.
#[derive(Debug, Clone)]
pub struct TrSelection {
    /// Kept nodes with the area of their triangle as measure.
    pub set: PointSet,
    /// Triangulation level used.
    pub level: u32,
    /// Input indices of the kept nodes, in triangle order.
    pub kept: Vec<usize>,
    /// Input indices of nodes that shared a triangle with a node closer to
    /// its center.
    pub discarded: Vec<usize>,
}

/// Assign the area measure to scattered nodes.
///
/// Uses the deepest level at which every dyadic triangle holds at least one
/// node; in each triangle the node nearest the triangle center is kept and
/// the others are reported as discarded.
pub fn tr_measure(points: &[UnitPoint]) -> Result<TrSelection> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("point set is empty".into()));
    }
    let deepest: Vec<usize> = crate::exec::map_chunks(points, 1024, |_, c| {
        c.iter().map(|p| locate(p, MAX_LEVEL)).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let mut level = None;
    for l in 0..=MAX_LEVEL {
        let cells = 8usize << (2 * l);
        let shift = 2 * (MAX_LEVEL - l);
        let mut seen = vec![false; cells];
        for &d in &deepest {
            seen[d >> shift] = true;
        }
        if seen.iter().all(|&s| s) {
            level = Some(l);
        } else {
            break;
        }
    }
    let level = level.ok_or_else(|| Error::InvalidParameter("some octant of the sphere contains no node".into()))?;
    let tri = dyadic_triangulation(level)?;
    let shift = 2 * (MAX_LEVEL - level);
    let mut best: Vec<Option<(usize, f64)>> = vec![None; tri.len()];
    for (i, (&d, p)) in deepest.iter().zip(points).enumerate() {
        let cell = d >> shift;
        let closeness = p.dot(&tri.centers()[cell]);
        match best[cell] {
            Some((_, c)) if c >= closeness => {}
            _ => best[cell] = Some((i, closeness)),
        }
    }
    let kept: Vec<usize> = best.iter().map(|b| b.expect("all cells occupied").0).collect();
    let mut is_kept = vec![false; points.len()];
    for &k in &kept {
        is_kept[k] = true;
    }
    let discarded = (0..points.len()).filter(|&i| !is_kept[i]).collect();
    let set = PointSet::new(
        kept.iter().map(|&i| points[i]).collect(),
        tri.areas().to_vec(),
        PointKind::Triangulated,
    )?;
    Ok(TrSelection {
        set,
        level,
        kept,
        discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_points;

    /// Van Oosterom-Strackee formula, an independent route to the excess.
    fn oosterom_area(t: &[UnitPoint; 3]) -> f64 {
        let num = det(&t[0], &t[1], &t[2]);
        let den = 1.0 + t[0].dot(&t[1]) + t[1].dot(&t[2]) + t[2].dot(&t[0]);
        2.0 * num.atan2(den)
    }

    #[test]
    fn octahedron_level() {
        let t = dyadic_triangulation(0).unwrap();
        assert_eq!(t.len(), 8);
        for a in t.areas() {
            assert!((a - 0.125).abs() < 1e-15);
        }
        for tri in t.triangles() {
            assert!(det(&tri[0], &tri[1], &tri[2]) > 0.0);
        }
    }

    #[test]
    fn counts_and_area_sums() {
        for level in 0..=5 {
            let t = dyadic_triangulation(level).unwrap();
            assert_eq!(t.len(), 8 * 4usize.pow(level));
            let s: f64 = t.areas().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        let t = dyadic_triangulation(3).unwrap();
        assert_eq!(t.len(), 512);
        let four_pi = 4.0 * std::f64::consts::PI;
        assert!((t.raw_area_sum() - four_pi).abs() < 1e-12 * four_pi);
        let alt: f64 = t.triangles().iter().map(oosterom_area).sum();
        assert!((alt - four_pi).abs() < 1e-12 * four_pi);
        for tri in t.triangles() {
            assert!((spherical_area(tri) - oosterom_area(tri)).abs() < 1e-12);
            assert!(det(&tri[0], &tri[1], &tri[2]) > 0.0);
        }
        assert!(matches!(dyadic_triangulation(10), Err(Error::ResourceLimit(_))));
    }

    #[test]
    #[ignore = "allocates 131072 triangles; run with --ignored"]
    fn level_seven_count() {
        assert_eq!(dyadic_triangulation(7).unwrap().len(), 131_072);
    }

    #[test]
    fn centers_locate_to_their_own_triangle() {
        let t = dyadic_triangulation(4).unwrap();
        for (i, c) in t.centers().iter().enumerate() {
            assert_eq!(locate(c, 4), i);
        }
    }

    #[test]
    fn refinement_nesting() {
        let coarse = dyadic_triangulation(2).unwrap();
        let fine = dyadic_triangulation(3).unwrap();
        for (i, c) in fine.centers().iter().enumerate() {
            let parent = &coarse.triangles()[i / 4];
            // inside the closed parent triangle by sign tests
            assert!(det(&parent[0], &parent[1], c) >= 0.0);
            assert!(det(&parent[1], &parent[2], c) >= 0.0);
            assert!(det(&parent[2], &parent[0], c) >= 0.0);
        }
    }

    #[test]
    fn tr_measure_on_centers_is_identity() {
        let t = dyadic_triangulation(3).unwrap();
        let sel = tr_measure(t.centers()).unwrap();
        assert_eq!(sel.level, 3);
        assert!(sel.discarded.is_empty());
        assert_eq!(sel.set.points(), t.centers());
        assert_eq!(sel.set.measure(), t.areas());
    }

    #[test]
    fn tr_measure_on_random_points() {
        let pts = random_points(11, 3000).unwrap();
        let sel = tr_measure(pts.points()).unwrap();
        let cells = 8 * 4usize.pow(sel.level);
        assert_eq!(sel.set.len(), cells);
        assert_eq!(sel.kept.len() + sel.discarded.len(), 3000);
        // one level deeper must leave a cell empty
        let mut seen = vec![false; cells * 4];
        for p in pts.points() {
            seen[locate(p, sel.level + 1)] = true;
        }
        assert!(seen.iter().any(|s| !s));
        let total: f64 = sel.set.measure().iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tr_measure_rejects_empty_octant() {
        let p = UnitPoint::new(0.0, 0.0, 1.0).unwrap();
        assert!(tr_measure(&[p]).is_err());
    }
}
