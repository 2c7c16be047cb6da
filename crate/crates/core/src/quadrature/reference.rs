use super::QuadratureRule;
use crate::error::{Error, Result};
use crate::geometry::UnitPoint;
use crate::linalg::gauss_legendre;

/// Largest degree accepted by [`reference_rule`].
pub const MAX_REFERENCE_DEGREE: usize = 2000;

/// Product rule exact for all spherical polynomials of degree `<= degree`:
/// Gauss-Legendre in `z = cos(theta)` with `ceil((degree+1)/2)` nodes times
/// `degree + 1` equispaced azimuths. All weights are positive.
pub fn reference_rule(degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_REFERENCE_DEGREE {
        return Err(Error::ResourceLimit(format!(
            "reference rule degree {degree} exceeds {MAX_REFERENCE_DEGREE}"
        )));
    }
    let n_polar = (degree + 2) / 2;
    let n_az = degree + 1;
    let (zs, ws) = gauss_legendre(n_polar);
    let mut nodes = Vec::with_capacity(n_polar * n_az);
    let mut weights = Vec::with_capacity(n_polar * n_az);
    let azimuths: Vec<(f64, f64)> = (0..n_az)
        .map(|j| (std::f64::consts::TAU * j as f64 / n_az as f64).sin_cos())
        .collect();
    for (z, w) in zs.iter().zip(&ws) {
        let s = (1.0 - z * z).max(0.0).sqrt();
        for &(sp, cp) in &azimuths {
            nodes.push(UnitPoint::from_normalized([s * cp, s * sp, *z]));
            weights.push(0.5 * w / n_az as f64);
        }
    }
    QuadratureRule::new(nodes, weights, degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::HarmonicBasis;

    #[test]
    fn degree_zero() {
        let r = reference_rule(0).unwrap();
        assert!((r.weight_sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_on_full_basis() {
        let r = reference_rule(40).unwrap();
        assert!(r.weights().iter().all(|&w| w > 0.0));
        let basis = HarmonicBasis::new(40);
        let ints = basis.analyze(r.nodes(), r.weights());
        assert!((ints[0] - 1.0).abs() < 1e-12);
        assert!(ints[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn not_exact_one_degree_beyond() {
        // Y_{l,0} with l = degree + 2 even is not integrated to zero
        let r = reference_rule(10).unwrap();
        let basis = HarmonicBasis::new(12);
        let ints = basis.analyze(r.nodes(), r.weights());
        assert!(ints[144].abs() > 1e-6);
    }

    #[test]
    fn resource_cap() {
        assert!(matches!(reference_rule(2001), Err(Error::ResourceLimit(_))));
    }
}
