//! Ultraspherical polynomials attached to the `q`-sphere.
//!
//! With `lambda = (q - 1) / 2`, the normalized Gegenbauer polynomial
//! `P_l(t) = C_l^lambda(t) / C_l^lambda(1)` obeys
//!
//! ```text
//! (l + q - 1) P_{l+1}(t) = (2l + q - 1) t P_l(t) - l P_{l-1}(t),   P_0 = 1, P_1 = t
//! ```
//!
//! which stays well defined for `q = 1` (Chebyshev) and never touches the
//! Gamma function, so it is safe at high degree.

use crate::error::{Error, Result};

fn check_domain(t: f64) -> Result<()> {
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain(format!("argument must lie in [-1, 1], got {t}")));
    }
    Ok(())
}

/// Recurrence coefficients `P_{l+1} = alpha_l(t) P_l + beta_l P_{l-1}` with
/// `alpha_l(t) = a_l t`.
#[derive(Debug, Clone, Copy)]
pub struct GegenbauerRecurrence {
    q: u32,
}

impl GegenbauerRecurrence {
    pub fn new(q: u32) -> Self {
        assert!(q >= 1);
        Self { q }
    }

    /// `a_l` such that `alpha_l(t) = a_l * t`, valid for `l >= 1`.
    #[inline]
    pub fn a(&self, l: usize) -> f64 {
        let q = self.q as f64;
        let l = l as f64;
        (2.0 * l + q - 1.0) / (l + q - 1.0)
    }

    /// `beta_l`, valid for `l >= 1`.
    #[inline]
    pub fn beta(&self, l: usize) -> f64 {
        let q = self.q as f64;
        let l = l as f64;
        -l / (l + q - 1.0)
    }
}

/// `[P_0(t), ..., P_lmax(t)]` normalized so that `P_l(1) = 1`.
pub fn gegenbauer_normalized_seq(q: u32, lmax: usize, t: f64) -> Result<Vec<f64>> {
    if q == 0 {
        return Err(Error::InvalidParameter("q must be >= 1".into()));
    }
    check_domain(t)?;
    let rec = GegenbauerRecurrence::new(q);
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(1.0);
    if lmax >= 1 {
        out.push(t);
    }
    for l in 1..lmax {
        let next = rec.a(l) * t * out[l] + rec.beta(l) * out[l - 1];
        out.push(next);
    }
    Ok(out)
}

/// Total mass `c_q` of the weight `(1 - t^2)^{q/2 - 1}` on `[-1, 1]`,
/// i.e. `2^{q-1} Gamma(q/2)^2 / Gamma(q) = sqrt(pi) Gamma(q/2) / Gamma((q+1)/2)`.
pub fn jacobi_weight_mass(q: u32) -> f64 {
    assert!(q >= 1);
    let pi = std::f64::consts::PI;
    // r_q = Gamma(q/2) / Gamma((q+1)/2), r_{q+2} = q/(q+1) r_q
    let mut r = if q % 2 == 1 { pi.sqrt() } else { 2.0 / pi.sqrt() };
    let mut k = if q % 2 == 1 { 1 } else { 2 };
    while k < q {
        r *= k as f64 / (k as f64 + 1.0);
        k += 2;
    }
    pi.sqrt() * r
}

/// Orthonormal Jacobi polynomials `p_l = p_l^{(q/2-1, q/2-1)}` with positive
/// leading coefficient, computed by their own symmetric three-term recurrence
/// (Jacobi-matrix form), independent of the normalized Gegenbauer path.
pub fn jacobi_orthonormal_seq(q: u32, lmax: usize, t: f64) -> Result<Vec<f64>> {
    if q == 0 {
        return Err(Error::InvalidParameter("q must be >= 1".into()));
    }
    check_domain(t)?;
    let lambda = (q as f64 - 1.0) / 2.0;
    // off-diagonal of the Jacobi matrix: t p_l = b_{l+1} p_{l+1} + b_l p_{l-1}
    let b = |l: usize| -> f64 {
        let lf = l as f64;
        if l == 1 {
            (1.0 / (2.0 * (1.0 + lambda))).sqrt()
        } else {
            (lf * (lf + 2.0 * lambda - 1.0) / (4.0 * (lf + lambda) * (lf + lambda - 1.0))).sqrt()
        }
    };
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(1.0 / jacobi_weight_mass(q).sqrt());
    if lmax >= 1 {
        out.push(t * out[0] / b(1));
    }
    for l in 1..lmax {
        let next = (t * out[l] - b(l) * out[l - 1]) / b(l + 1);
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::dim_harmonic;

    #[test]
    fn normalized_values() {
        assert_eq!(gegenbauer_normalized_seq(2, 2, 1.0).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(gegenbauer_normalized_seq(2, 1, 0.5).unwrap(), vec![1.0, 0.5]);
        let v = gegenbauer_normalized_seq(2, 2, 0.0).unwrap();
        assert_eq!(v[..2], [1.0, 0.0]);
        assert!((v[2] + 0.5).abs() < 1e-16);
        assert!(gegenbauer_normalized_seq(2, 3, 1.0 + 1e-9).is_err());
        assert!(jacobi_orthonormal_seq(2, 3, -1.5).is_err());
    }

    #[test]
    fn normalized_at_one_for_all_q() {
        for q in 1..7 {
            let v = gegenbauer_normalized_seq(q, 300, 1.0).unwrap();
            assert!(v.iter().all(|x| (x - 1.0).abs() < 1e-12), "q={q}");
        }
    }

    #[test]
    fn chebyshev_and_legendre_special_cases() {
        for i in 0..=20 {
            let t = -1.0 + i as f64 * 0.1;
            let cheb = gegenbauer_normalized_seq(1, 30, t).unwrap();
            let th = t.clamp(-1.0, 1.0).acos();
            for (l, v) in cheb.iter().enumerate() {
                assert!((v - (l as f64 * th).cos()).abs() < 1e-12);
            }
            let leg = gegenbauer_normalized_seq(2, 3, t).unwrap();
            assert!((leg[3] - 0.5 * (5.0 * t * t * t - 3.0 * t)).abs() < 1e-14);
        }
    }

    #[test]
    fn recurrence_residual_is_small() {
        for q in [2u32, 3, 4] {
            let rec = GegenbauerRecurrence::new(q);
            for i in 0..50 {
                let t = (i as f64 * 0.7).cos();
                let p = gegenbauer_normalized_seq(q, 200, t).unwrap();
                for l in 1..200 {
                    let resid = p[l + 1] - rec.a(l) * t * p[l] - rec.beta(l) * p[l - 1];
                    assert!(resid.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn weight_mass_values() {
        let pi = std::f64::consts::PI;
        assert!((jacobi_weight_mass(1) - pi).abs() < 1e-14);
        assert!((jacobi_weight_mass(2) - 2.0).abs() < 1e-14);
        assert!((jacobi_weight_mass(3) - pi / 2.0).abs() < 1e-14);
        assert!((jacobi_weight_mass(4) - 4.0 / 3.0).abs() < 1e-14);
    }

    /// Orthonormality against (1 - t^2)^{q/2 - 1}, integrated with
    /// Gauss-Legendre in the angle variable t = cos(theta) so that the weight
    /// becomes a smooth trigonometric factor sin^{q-1}(theta).
    #[test]
    fn orthonormality_by_gauss_legendre() {
        let (gx, gw) = crate::linalg::gauss_legendre(64);
        for q in [2u32, 3] {
            let lmax = 20;
            let mut gram = vec![vec![0.0; lmax + 1]; lmax + 1];
            for (x, w) in gx.iter().zip(&gw) {
                let theta = 0.5 * std::f64::consts::PI * (x + 1.0);
                let wt = 0.5 * std::f64::consts::PI * w * theta.sin().powi(q as i32 - 1);
                let p = jacobi_orthonormal_seq(q, lmax, theta.cos()).unwrap();
                for i in 0..=lmax {
                    for j in 0..=lmax {
                        gram[i][j] += wt * p[i] * p[j];
                    }
                }
            }
            for i in 0..=lmax {
                for j in 0..=lmax {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[i][j] - e).abs() < 1e-12, "q={q} ({i},{j}) {}", gram[i][j]);
                }
            }
        }
    }

    #[test]
    fn jacobi_consistency_with_dimensions() {
        let p0 = jacobi_orthonormal_seq(2, 0, 0.3).unwrap();
        assert!((p0[0] - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        for q in 1..6u32 {
            let cq = jacobi_weight_mass(q);
            let ones = jacobi_orthonormal_seq(q, 60, 1.0).unwrap();
            for (l, p1) in ones.iter().enumerate() {
                let d = dim_harmonic(q, l as u32) as f64;
                assert!((cq * p1 * p1 - d).abs() < 1e-10 * d, "q={q} l={l}");
            }
            // p_l = p_l(1) * P_l
            for i in 0..10 {
                let t = -0.95 + 0.19 * i as f64;
                let p = jacobi_orthonormal_seq(q, 60, t).unwrap();
                let g = gegenbauer_normalized_seq(q, 60, t).unwrap();
                for l in 0..=60 {
                    assert!((p[l] - ones[l] * g[l]).abs() < 1e-11 * ones[l].abs().max(1.0));
                }
            }
        }
    }
}
