//! The discrete summability operator
//!
//! ```text
//! sigma_n(C, W; h; Z, x) = sum_xi w_xi z_xi Phi_n(h; x . xi)
//! ```
//!
//! evaluated either as the double sum over nodes (any sphere dimension in
//! principle, used here as the oracle) or through harmonic coefficients
//! `a(l,k) = sum_xi w_xi z_xi Y_{l,k}(xi)` followed by filtered synthesis.

use nalgebra::{DMatrix, DMatrixViewMut};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::UnitPoint;
use crate::kernel::{Kernel, KernelSpec};
use crate::quadrature::{basis_matrix, reference_rule, QuadratureRule};
use crate::specfun::{Filter, HarmonicBasis};

/// Harmonic coefficients of degree `<= n` in basis order `l^2 + k - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCoeffs {
    degree: usize,
    values: Vec<f64>,
}

impl HarmonicCoeffs {
    pub fn new(degree: usize, values: Vec<f64>) -> Result<Self> {
        let len = (degree + 1) * (degree + 1);
        if values.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: values.len(),
            });
        }
        Ok(Self { degree, values })
    }

    pub fn zeros(degree: usize) -> Self {
        Self {
            degree,
            values: vec![0.0; (degree + 1) * (degree + 1)],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Coefficient of `Y_{l,k}`, `1 <= k <= 2l + 1`.
    pub fn get(&self, l: usize, k: usize) -> f64 {
        assert!(l <= self.degree && k >= 1 && k <= 2 * l + 1);
        self.values[l * l + k - 1]
    }

    /// Coefficients multiplied by `h(l / n)`.
    pub fn filtered(&self, filter: &Filter, n: usize) -> Self {
        let mut values = self.values.clone();
        for l in 0..=self.degree {
            let h = filter.value(l as f64 / n as f64);
            for v in &mut values[l * l..(l + 1) * (l + 1)] {
                *v *= h;
            }
        }
        Self {
            degree: self.degree,
            values,
        }
    }

    /// Values of `sum a(l,k) Y_{l,k}` at `points`.
    pub fn synthesize(&self, points: &[UnitPoint]) -> Vec<f64> {
        HarmonicBasis::new(self.degree).synthesize(&self.values, points)
    }

    /// Largest absolute coefficient difference over the common degrees.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let len = self.values.len().min(other.values.len());
        let common = self.values[..len]
            .iter()
            .zip(&other.values[..len])
            .map(|(a, b)| (a - b).abs());
        let tail = self.values[len..].iter().chain(&other.values[len..]).map(|v| v.abs());
        common.chain(tail).fold(0.0, f64::max)
    }
}

/// Quadrature rule, filter and degree of a summability operator.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub rule: QuadratureRule,
    pub filter: Filter,
    pub degree: usize,
}

impl OperatorSpec {
    pub fn new(rule: QuadratureRule, filter: Filter, degree: usize) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidParameter("operator degree must be >= 1".into()));
        }
        Ok(Self { rule, filter, degree })
    }

    /// Largest degree with a nonzero filter value, i.e. the degree of the
    /// output polynomial.
    pub fn support_degree(&self) -> usize {
        let n = self.degree as f64;
        (0..=self.degree)
            .rev()
            .find(|&l| self.filter.value(l as f64 / n) != 0.0)
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EvalPath {
    /// Direct sum over the nodes with the kernel; `O(|X| M n)`.
    KernelSum,
    /// Coefficients then synthesis; `O((M + |X|) n^2)`.
    Coefficient,
    /// Whichever of the two has the smaller operation count.
    #[default]
    Auto,
}

impl std::str::FromStr for EvalPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" | "kernel-sum" => Ok(EvalPath::KernelSum),
            "coeff" | "coefficient" => Ok(EvalPath::Coefficient),
            "auto" => Ok(EvalPath::Auto),
            _ => Err(Error::Parse(format!(
                "unknown evaluation path '{s}', expected auto, kernel or coeff"
            ))),
        }
    }
}

impl EvalPath {
    /// The concrete path for `targets` evaluation points.
    pub fn resolve(self, nodes: usize, targets: usize, degree: usize) -> EvalPath {
        match self {
            EvalPath::Auto => {
                let kernel = targets as f64 * nodes as f64 * degree as f64;
                let coeff = (nodes + targets) as f64 * ((degree + 1) * (degree + 1)) as f64;
                if coeff < kernel {
                    EvalPath::Coefficient
                } else {
                    EvalPath::KernelSum
                }
            }
            p => p,
        }
    }
}

fn check_data(rule: &QuadratureRule, z: &[f64]) -> Result<()> {
    if z.len() != rule.len() {
        return Err(Error::DimensionMismatch {
            expected: rule.len(),
            found: z.len(),
        });
    }
    Ok(())
}

/// `a(l,k) = sum_xi w_xi z_xi Y_{l,k}(xi)` for `l <= n`.
pub fn fourier_coeffs(rule: &QuadratureRule, z: &[f64], n: usize) -> Result<HarmonicCoeffs> {
    check_data(rule, z)?;
    let wz: Vec<f64> = rule.weights().iter().zip(z).map(|(w, v)| w * v).collect();
    let values = HarmonicBasis::new(n).analyze(rule.nodes(), &wz);
    HarmonicCoeffs::new(n, values)
}

/// `sigma_n(C, W; h; Z, x)` at each point of `x`.
pub fn sigma_eval(spec: &OperatorSpec, z: &[f64], x: &[UnitPoint], path: EvalPath) -> Result<Vec<f64>> {
    check_data(&spec.rule, z)?;
    match path.resolve(spec.rule.len(), x.len(), spec.degree) {
        EvalPath::KernelSum => {
            let kernel = Kernel::new(&KernelSpec::new(2, spec.degree, spec.filter)?);
            let wz: Vec<f64> = spec.rule.weights().iter().zip(z).map(|(w, v)| w * v).collect();
            let nodes = spec.rule.nodes();
            let mut out = vec![0.0; x.len()];
            exec::fill_chunks(&mut out, 16, |off, chunk| {
                for (i, o) in chunk.iter_mut().enumerate() {
                    let p = &x[off + i];
                    *o = nodes
                        .iter()
                        .zip(&wz)
                        .map(|(xi, c)| c * kernel.value(p.dot(xi).clamp(-1.0, 1.0)))
                        .sum();
                }
            });
            Ok(out)
        }
        _ => {
            let top = spec.support_degree();
            let coeffs = fourier_coeffs(&spec.rule, z, top)?.filtered(&spec.filter, spec.degree);
            Ok(coeffs.synthesize(x))
        }
    }
}

/// `sigma*_n(h; f)` at `x`, the integrals replaced by the product rule of
/// degree `quad_degree >= 2n`.
pub fn sigma_star(
    filter: Filter,
    n: usize,
    f: impl Fn(&UnitPoint) -> f64 + Sync,
    x: &[UnitPoint],
    quad_degree: usize,
) -> Result<Vec<f64>> {
    if quad_degree < 2 * n {
        return Err(Error::InvalidParameter(format!(
            "quadrature degree {quad_degree} is below 2n = {}",
            2 * n
        )));
    }
    let rule = reference_rule(quad_degree)?;
    let z = sample(&f, rule.nodes());
    let spec = OperatorSpec::new(rule, filter, n)?;
    sigma_eval(&spec, &z, x, EvalPath::Coefficient)
}

/// `f` at each point, in parallel.
pub fn sample(f: &(impl Fn(&UnitPoint) -> f64 + Sync), points: &[UnitPoint]) -> Vec<f64> {
    let mut out = vec![0.0; points.len()];
    exec::fill_chunks(&mut out, 1024, |off, chunk| {
        for (i, o) in chunk.iter_mut().enumerate() {
            *o = f(&points[off + i]);
        }
    });
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxError {
    pub sup_err: f64,
    pub errors: Vec<f64>,
}

/// Pointwise `|f(x) - sigma_n(f)(x)|` with `Z` the samples of `f` at the
/// rule's nodes.
pub fn approx_error(
    spec: &OperatorSpec,
    f: impl Fn(&UnitPoint) -> f64 + Sync,
    x: &[UnitPoint],
    path: EvalPath,
) -> Result<ApproxError> {
    let z = sample(&f, spec.rule.nodes());
    let approx = sigma_eval(spec, &z, x, path)?;
    let exact = sample(&f, x);
    let errors: Vec<f64> = approx.iter().zip(&exact).map(|(a, e)| (a - e).abs()).collect();
    let sup_err = errors.iter().copied().fold(0.0, f64::max);
    Ok(ApproxError { sup_err, errors })
}

const BATCH_BLOCK: usize = 1024;

/// Coefficients for several data vectors at once: column `b` of the result
/// is `sum_xi weights[xi] z[(xi, b)] Y(xi)` for the harmonics of degree
/// `<= n`. Accumulated over node blocks with GEMM.
pub fn analyze_batch(nodes: &[UnitPoint], weights: &[f64], z: &DMatrix<f64>, n: usize) -> Result<DMatrix<f64>> {
    if z.nrows() != nodes.len() || weights.len() != nodes.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            found: if z.nrows() != nodes.len() {
                z.nrows()
            } else {
                weights.len()
            },
        });
    }
    let basis = HarmonicBasis::new(n);
    let len = basis.len();
    let cols = z.ncols();
    let mut acc = DMatrix::<f64>::zeros(len, cols);
    for start in (0..nodes.len()).step_by(BATCH_BLOCK) {
        let end = (start + BATCH_BLOCK).min(nodes.len());
        let y = basis_matrix(&basis, &nodes[start..end]);
        let mut wz = z.rows(start, end - start).into_owned();
        for (i, mut row) in wz.row_iter_mut().enumerate() {
            row *= weights[start + i];
        }
        let col_block = cols.div_ceil(8).max(1);
        exec::fill_chunks(acc.as_mut_slice(), len * col_block, |off, chunk| {
            let c0 = off / len;
            let c = chunk.len() / len;
            let mut out = DMatrixViewMut::from_slice(chunk, len, c);
            out.gemm_tr(1.0, &y, &wz.columns(c0, c), 1.0);
        });
    }
    Ok(acc)
}

/// Values at `points` of the polynomials whose harmonic coefficients are
/// the columns of `coeffs` (`(n+1)^2` rows).
pub fn synthesize_batch(points: &[UnitPoint], coeffs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let len = coeffs.nrows();
    let n = len.isqrt().saturating_sub(1);
    if (n + 1) * (n + 1) != len {
        return Err(Error::InvalidParameter(format!(
            "{len} coefficients do not fill a full degree range"
        )));
    }
    let basis = HarmonicBasis::new(n);
    let blocks = exec::map_chunks(points, 256, |_, chunk| basis_matrix(&basis, chunk) * coeffs);
    let mut out = DMatrix::<f64>::zeros(points.len(), coeffs.ncols());
    let mut row = 0;
    for b in blocks {
        out.rows_mut(row, b.nrows()).copy_from(&b);
        row += b.nrows();
    }
    Ok(out)
}

/// Multiply row block `l^2 .. (l+1)^2` of `coeffs` by `h(l / n)`.
pub fn apply_filter(coeffs: &mut DMatrix<f64>, filter: &Filter, n: usize) {
    let degree = coeffs.nrows().isqrt() - 1;
    for l in 0..=degree {
        let h = filter.value(l as f64 / n as f64);
        coeffs.rows_mut(l * l, 2 * l + 1).scale_mut(h);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_points;

    fn h5() -> Filter {
        Filter::new(5).unwrap()
    }

    #[test]
    fn constant_data() {
        let rule = reference_rule(20).unwrap();
        let c = fourier_coeffs(&rule, &vec![1.0; rule.len()], 10).unwrap();
        assert!((c.get(0, 1) - 1.0).abs() < 1e-12);
        assert!(c.values()[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn single_harmonic_coefficients() {
        let rule = reference_rule(24).unwrap();
        let basis = HarmonicBasis::new(12);
        let idx = 7 * 7 + 3;
        let z: Vec<f64> = rule.nodes().iter().map(|p| basis.eval(p)[idx]).collect();
        let c = fourier_coeffs(&rule, &z, 12).unwrap();
        for (j, v) in c.values().iter().enumerate() {
            let want = if j == idx { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_data() {
        let spec = OperatorSpec::new(reference_rule(16).unwrap(), h5(), 8).unwrap();
        let x = random_points(1, 20).unwrap().into_parts().0;
        for path in [EvalPath::KernelSum, EvalPath::Coefficient] {
            let out = sigma_eval(&spec, &vec![0.0; spec.rule.len()], &x, path).unwrap();
            assert!(out.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn paths_agree() {
        let spec = OperatorSpec::new(reference_rule(30).unwrap(), h5(), 15).unwrap();
        let x = random_points(2, 50).unwrap().into_parts().0;
        let z: Vec<f64> = spec
            .rule
            .nodes()
            .iter()
            .map(|p| (p.x() + 2.0 * p.y() * p.z()).exp())
            .collect();
        let a = sigma_eval(&spec, &z, &x, EvalPath::KernelSum).unwrap();
        let b = sigma_eval(&spec, &z, &x, EvalPath::Coefficient).unwrap();
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-11 * scale);
        }
    }

    #[test]
    fn reproduces_low_degree() {
        let n = 12;
        let spec = OperatorSpec::new(reference_rule(3 * n / 2).unwrap(), h5(), n).unwrap();
        let basis = HarmonicBasis::new(n / 2);
        let coeffs: Vec<f64> = (0..basis.len()).map(|i| ((i * 13 % 7) as f64 - 3.0) / 5.0).collect();
        let z = basis.synthesize(&coeffs, spec.rule.nodes());
        let x = random_points(3, 40).unwrap().into_parts().0;
        let want = basis.synthesize(&coeffs, &x);
        for path in [EvalPath::KernelSum, EvalPath::Coefficient] {
            let got = sigma_eval(&spec, &z, &x, path).unwrap();
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cutoff_filter_is_projection() {
        // with h_1 the output is the degree-n truncation of the data's expansion
        let n = 6;
        let rule = reference_rule(2 * n + 4).unwrap();
        let basis = HarmonicBasis::new(n + 2);
        let coeffs: Vec<f64> = (0..basis.len()).map(|i| (i as f64 * 0.37).cos()).collect();
        let z = basis.synthesize(&coeffs, rule.nodes());
        let spec = OperatorSpec::new(rule, Filter::cutoff(), n).unwrap();
        let x = random_points(4, 30).unwrap().into_parts().0;
        let mut truncated = coeffs.clone();
        for v in &mut truncated[(n + 1) * (n + 1)..] {
            *v = 0.0;
        }
        let want = basis.synthesize(&truncated, &x);
        let got = sigma_eval(&spec, &z, &x, EvalPath::KernelSum).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10);
        }
    }

    #[test]
    fn sigma_star_cases() {
        let x = random_points(5, 25).unwrap().into_parts().0;
        let ones = sigma_star(h5(), 10, |_| 1.0, &x, 20).unwrap();
        assert!(ones.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let basis = HarmonicBasis::new(14);
        let low = sigma_star(h5(), 10, |p| basis.eval(p)[4 * 4 + 2], &x, 20).unwrap();
        for (v, p) in low.iter().zip(&x) {
            assert!((v - basis.eval(p)[18]).abs() < 1e-10);
        }
        let high = sigma_star(h5(), 10, |p| basis.eval(p)[13 * 13 + 5], &x, 24).unwrap();
        assert!(high.iter().all(|v| v.abs() < 1e-10));
        assert!(sigma_star(h5(), 10, |_| 1.0, &x, 19).is_err());
    }

    #[test]
    fn approx_error_reproduction() {
        let spec = OperatorSpec::new(reference_rule(24).unwrap(), h5(), 16).unwrap();
        let x = random_points(6, 30).unwrap().into_parts().0;
        let e = approx_error(&spec, |p| p.x() * p.y() - p.z(), &x, EvalPath::Auto).unwrap();
        assert!(e.sup_err < 1e-9);
        assert_eq!(e.errors.len(), 30);
    }

    #[test]
    fn smooth_function_convergence() {
        let x = random_points(7, 200).unwrap().into_parts().0;
        let f = |p: &UnitPoint| (p.x() + p.y() + p.z()).exp();
        let mut prev = f64::INFINITY;
        for n in [4usize, 8, 16] {
            let spec = OperatorSpec::new(reference_rule(4 * n).unwrap(), h5(), n).unwrap();
            let e = approx_error(&spec, f, &x, EvalPath::Coefficient).unwrap().sup_err;
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn batch_matches_single() {
        let rule = reference_rule(16).unwrap();
        let z = DMatrix::from_fn(rule.len(), 3, |i, j| ((i * (j + 2)) as f64 * 0.01).sin());
        let a = analyze_batch(rule.nodes(), rule.weights(), &z, 8).unwrap();
        for j in 0..3 {
            let col: Vec<f64> = z.column(j).iter().copied().collect();
            let c = fourier_coeffs(&rule, &col, 8).unwrap();
            for (u, v) in a.column(j).iter().zip(c.values()) {
                assert!((u - v).abs() < 1e-13);
            }
        }
        let x = random_points(8, 300).unwrap().into_parts().0;
        let vals = synthesize_batch(&x, &a).unwrap();
        let c0 = HarmonicCoeffs::new(8, a.column(1).iter().copied().collect()).unwrap();
        for (u, v) in vals.column(1).iter().zip(c0.synthesize(&x)) {
            assert!((u - v).abs() < 1e-12);
        }
        let mut f = a.clone();
        apply_filter(&mut f, &h5(), 8);
        let g = c0.filtered(&h5(), 8);
        for (u, v) in f.column(1).iter().zip(g.values()) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn length_mismatch() {
        let spec = OperatorSpec::new(reference_rule(4).unwrap(), h5(), 2).unwrap();
        assert!(sigma_eval(&spec, &[1.0], &[], EvalPath::Auto).is_err());
    }
}
