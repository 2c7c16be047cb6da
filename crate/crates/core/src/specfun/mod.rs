//! Special functions: B-spline filters, normalized Gegenbauer and orthonormal
//! Jacobi sequences, real spherical harmonics on the 2-sphere, and the
//! dimension formulas for harmonic and polynomial spaces.

mod filter;
mod gegenbauer;
pub(crate) mod harmonics;

pub use filter::{bspline_eval, Filter};
pub use gegenbauer::{gegenbauer_normalized_seq, jacobi_orthonormal_seq, jacobi_weight_mass, GegenbauerRecurrence};
pub use harmonics::{basis_index, sph_harm_basis, HarmonicBasis, HarmonicIndex};

/// Dimension of the space of spherical harmonics of exact degree `l` on the
/// `q`-sphere.
pub fn dim_harmonic(q: u32, l: u32) -> u64 {
    assert!(q >= 1, "sphere dimension must be at least 1");
    if l == 0 {
        return 1;
    }
    let (q, l) = (q as u128, l as u128);
    // binom(l + q - 1, l) * (2l + q - 1) / (l + q - 1); the division is exact.
    let mut binom: u128 = 1;
    for i in 1..=l {
        binom = binom * (q - 1 + i) / i;
    }
    (binom * (2 * l + q - 1) / (l + q - 1)) as u64
}

/// Dimension of the space of spherical polynomials of degree at most `n` on
/// the `q`-sphere.
pub fn dim_polyspace(q: u32, n: u32) -> u64 {
    (0..=n).map(|l| dim_harmonic(q, l)).sum()
}

/// Number of real spherical harmonics of degree at most `n` on the 2-sphere.
pub fn basis_len(n: usize) -> usize {
    (n + 1) * (n + 1)
}
