use nalgebra::{DMatrix, DMatrixViewMut};

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::UnitPoint;
use crate::specfun::harmonics::{axpy, dot, ANALYSIS_CHUNK};
use crate::specfun::HarmonicBasis;

/// Largest number of cached basis values (`M * N`) kept by [`GramOperator`].
pub const CACHE_LIMIT: usize = 1 << 26;

const DENSE_BLOCK: usize = 512;

/// The weighted Gram operator `G = Y diag(w) Y^T` of the harmonic basis of
/// degree `<= n` on a node set, applied without forming `G`.
///
/// Basis rows are cached when `M * N <= CACHE_LIMIT` and recomputed on every
/// application otherwise.
pub struct GramOperator<'a> {
    basis: HarmonicBasis,
    nodes: &'a [UnitPoint],
    weights: &'a [f64],
    rows: Option<Vec<f64>>,
}

impl<'a> GramOperator<'a> {
    pub fn new(nodes: &'a [UnitPoint], weights: &'a [f64], n: usize) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                found: weights.len(),
            });
        }
        let basis = HarmonicBasis::new(n);
        let cache = nodes.len().saturating_mul(basis.len()) <= CACHE_LIMIT;
        let mut op = Self {
            basis,
            nodes,
            weights,
            rows: None,
        };
        if cache {
            op.rows = Some(op.build_rows());
        }
        Ok(op)
    }

    /// Drop the row cache so every application re-evaluates the basis.
    pub fn without_cache(mut self) -> Self {
        self.rows = None;
        self
    }

    pub fn is_cached(&self) -> bool {
        self.rows.is_some()
    }

    /// Dimension `N = (n+1)^2`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &HarmonicBasis {
        &self.basis
    }

    fn build_rows(&self) -> Vec<f64> {
        let len = self.basis.len();
        let mut rows = vec![0.0; self.nodes.len() * len];
        exec::fill_chunks(&mut rows, len * 64, |off, chunk| {
            let first = off / len;
            for (i, row) in chunk.chunks_mut(len).enumerate() {
                self.basis.eval_into(&self.nodes[first + i], row);
            }
        });
        rows
    }

    fn with_rows<R>(&self, off: usize, count: usize, mut f: impl FnMut(usize, &[f64]) -> R) -> Vec<R> {
        let len = self.basis.len();
        let mut out = Vec::with_capacity(count);
        match &self.rows {
            Some(rows) => {
                for i in off..off + count {
                    out.push(f(i, &rows[i * len..(i + 1) * len]));
                }
            }
            None => {
                let mut buf = vec![0.0; len];
                for i in off..off + count {
                    self.basis.eval_into(&self.nodes[i], &mut buf);
                    out.push(f(i, &buf));
                }
            }
        }
        out
    }

    /// `G r`.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let len = self.dim();
        assert_eq!(r.len(), len);
        let parts = exec::map_chunks(self.nodes, ANALYSIS_CHUNK, |off, chunk| {
            let mut acc = vec![0.0; len];
            self.with_rows(off, chunk.len(), |i, row| {
                let s = self.weights[i] * dot(row, r);
                axpy(s, row, &mut acc);
            });
            acc
        });
        exec::sum_vectors(parts, len)
    }

    /// `Y^T c`: the polynomial with coefficients `c` evaluated at the nodes.
    pub fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        assert_eq!(c.len(), self.dim());
        let parts = exec::map_chunks(self.nodes, ANALYSIS_CHUNK, |off, chunk| {
            self.with_rows(off, chunk.len(), |_, row| dot(row, c))
        });
        parts.into_iter().flatten().collect()
    }

    /// The dense `N x N` Gram matrix.
    pub fn dense(&self) -> DMatrix<f64> {
        weighted_gram(self.nodes, self.weights, self.basis.degree())
    }
}

/// Basis values as an `M x N` matrix.
pub fn basis_matrix(basis: &HarmonicBasis, points: &[UnitPoint]) -> DMatrix<f64> {
    let len = basis.len();
    let mut rows = vec![0.0; points.len() * len];
    exec::fill_chunks(&mut rows, len * 64, |off, chunk| {
        let first = off / len;
        for (i, row) in chunk.chunks_mut(len).enumerate() {
            basis.eval_into(&points[first + i], row);
        }
    });
    DMatrix::from_row_slice(points.len(), len, &rows)
}

/// Dense weighted Gram matrix `sum_xi w_xi Y(xi) Y(xi)^T` of the harmonic
/// basis of degree `<= n`, accumulated over node blocks with GEMM.
pub fn weighted_gram(nodes: &[UnitPoint], weights: &[f64], n: usize) -> DMatrix<f64> {
    assert_eq!(nodes.len(), weights.len());
    let basis = HarmonicBasis::new(n);
    let len = basis.len();
    let mut g = DMatrix::<f64>::zeros(len, len);
    let col_block = (len / 8).clamp(16, 256);
    for start in (0..nodes.len()).step_by(DENSE_BLOCK) {
        let end = (start + DENSE_BLOCK).min(nodes.len());
        let y = basis_matrix(&basis, &nodes[start..end]);
        let mut wy = y.clone();
        for (i, mut row) in wy.row_iter_mut().enumerate() {
            row *= weights[start + i];
        }
        exec::fill_chunks(g.as_mut_slice(), len * col_block, |off, chunk| {
            let j0 = off / len;
            let cols = chunk.len() / len;
            let mut out = DMatrixViewMut::from_slice(chunk, len, cols);
            out.gemm_tr(1.0, &y, &wy.columns(j0, cols), 1.0);
        });
    }
    g
}
