//! Real spherical harmonics on the 2-sphere, orthonormal with respect to the
//! normalized surface measure (so `Y_{0,1} = 1`).
//!
//! Basis order: degree `l` occupies indices `l^2 .. (l+1)^2`; inside a degree
//! the zonal function comes first, followed by the `(cos m phi, sin m phi)`
//! pair for `m = 1..=l`. Lower degrees therefore always precede higher ones.
//!
//! Evaluation uses the fully normalized associated Legendre recurrence in
//! degree for fixed order. The sectoral seed `P_mm sin^m(theta) e^{i m phi}`
//! is built as a complex power of `x + i y`, so no trigonometric calls are
//! needed and the poles are handled without special cases.

use crate::error::{Error, Result};
use crate::geometry::UnitPoint;

/// (degree, order) label of a basis function. `k` runs over `1..=2l+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarmonicIndex {
    pub degree: usize,
    pub k: usize,
}

/// Position of `Y_{l,k}` in the flat basis vector.
pub fn basis_index(idx: HarmonicIndex) -> Result<usize> {
    if idx.k == 0 || idx.k > 2 * idx.degree + 1 {
        return Err(Error::InvalidParameter(format!(
            "order index {} out of range for degree {}",
            idx.k, idx.degree
        )));
    }
    Ok(idx.degree * idx.degree + idx.k - 1)
}

// Values below this are flushed to zero in the sectoral recursion.
const SECTORAL_FLOOR: f64 = 1e-280;

/// Precomputed recurrence tables for all harmonics up to a fixed degree.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    degree: usize,
    // per order m: offset into `a`/`b` of degree l = m
    offsets: Vec<usize>,
    a: Vec<f64>,
    b: Vec<f64>,
    // sectoral ratio sqrt((2m+1)/(2m)), with the m = 1 entry absorbing sqrt(2)
    sect: Vec<f64>,
}

impl HarmonicBasis {
    pub fn new(degree: usize) -> Self {
        let n = degree;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for m in 0..=n {
            offsets.push(a.len());
            for l in m..=n {
                if l <= m {
                    a.push(0.0);
                    b.push(0.0);
                    continue;
                }
                let (lf, mf) = (l as f64, m as f64);
                let den = (lf - mf) * (lf + mf);
                a.push(((2.0 * lf - 1.0) * (2.0 * lf + 1.0) / den).sqrt());
                let bb = if l >= m + 2 {
                    ((2.0 * lf + 1.0) * (lf + mf - 1.0) * (lf - mf - 1.0) / (den * (2.0 * lf - 3.0))).sqrt()
                } else {
                    0.0
                };
                b.push(bb);
            }
        }
        let mut sect = vec![0.0; n + 1];
        for (m, s) in sect.iter_mut().enumerate().skip(1) {
            *s = if m == 1 {
                3f64.sqrt()
            } else {
                ((2 * m + 1) as f64 / (2 * m) as f64).sqrt()
            };
        }
        Self {
            degree,
            offsets,
            a,
            b,
            sect,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions, `(degree + 1)^2`.
    pub fn len(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Write all basis values at `x` into `out[..self.len()]`.
    pub fn eval_into(&self, x: &UnitPoint, out: &mut [f64]) {
        let n = self.degree;
        let out = &mut out[..self.len()];
        let [x0, x1, z] = *x.coords();

        // m = 0
        let (a, b) = (&self.a[self.offsets[0]..], &self.b[self.offsets[0]..]);
        let mut pm2 = 0.0;
        let mut pm1 = 1.0;
        out[0] = 1.0;
        for l in 1..=n {
            let p = a[l] * z * pm1 - b[l] * pm2;
            out[l * l] = p;
            pm2 = pm1;
            pm1 = p;
        }

        // m >= 1, carried as complex pairs (cos part, sin part)
        let (mut sr, mut si) = (1.0f64, 0.0f64);
        let mut flushed = false;
        for m in 1..=n {
            if !flushed {
                let nr = sr * x0 - si * x1;
                let ni = sr * x1 + si * x0;
                sr = self.sect[m] * nr;
                si = self.sect[m] * ni;
                if sr.abs() < SECTORAL_FLOOR && si.abs() < SECTORAL_FLOOR {
                    flushed = true;
                }
            }
            if flushed {
                for l in m..=n {
                    out[l * l + 2 * m - 1] = 0.0;
                    out[l * l + 2 * m] = 0.0;
                }
                continue;
            }
            let off = self.offsets[m];
            let (a, b) = (&self.a[off..], &self.b[off..]);
            out[m * m + 2 * m - 1] = sr;
            out[m * m + 2 * m] = si;
            let (mut cr2, mut ci2) = (0.0, 0.0);
            let (mut cr1, mut ci1) = (sr, si);
            for l in (m + 1)..=n {
                let i = l - m;
                let az = a[i] * z;
                let cr = az * cr1 - b[i] * cr2;
                let ci = az * ci1 - b[i] * ci2;
                out[l * l + 2 * m - 1] = cr;
                out[l * l + 2 * m] = ci;
                cr2 = cr1;
                ci2 = ci1;
                cr1 = cr;
                ci1 = ci;
            }
        }
    }

    /// All basis values at `x` as a fresh vector.
    pub fn eval(&self, x: &UnitPoint) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        out
    }

    /// Values of `sum_j coeffs[j] Y_j` at each point.
    pub fn synthesize(&self, coeffs: &[f64], points: &[UnitPoint]) -> Vec<f64> {
        let len = self.len();
        assert_eq!(coeffs.len(), len);
        let mut out = vec![0.0; points.len()];
        crate::exec::fill_chunks(&mut out, 64, |off, chunk| {
            let mut buf = vec![0.0; len];
            for (i, o) in chunk.iter_mut().enumerate() {
                self.eval_into(&points[off + i], &mut buf);
                *o = dot(&buf, coeffs);
            }
        });
        out
    }

    /// `sum_xi weights[xi] Y_j(xi)` for every basis index `j`.
    pub fn analyze(&self, points: &[UnitPoint], weights: &[f64]) -> Vec<f64> {
        let len = self.len();
        assert_eq!(points.len(), weights.len());
        let parts = crate::exec::map_chunks(points, ANALYSIS_CHUNK, |off, chunk| {
            let mut acc = vec![0.0; len];
            let mut buf = vec![0.0; len];
            for (i, p) in chunk.iter().enumerate() {
                self.eval_into(p, &mut buf);
                axpy(weights[off + i], &buf, &mut acc);
            }
            acc
        });
        crate::exec::sum_vectors(parts, len)
    }
}

pub(crate) const ANALYSIS_CHUNK: usize = 256;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// All real spherical harmonics of degree `<= n` at `x`, `(n+1)^2` values.
pub fn sph_harm_basis(n: usize, x: &UnitPoint) -> Vec<f64> {
    HarmonicBasis::new(n).eval(x)
}
