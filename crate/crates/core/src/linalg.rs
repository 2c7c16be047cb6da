//! Small numerical kernels: Gauss-Legendre nodes, conjugate gradients and a
//! Lanczos extremal-eigenvalue estimator for symmetric operators.

use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let dx = p / d;
            t -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `|b - A x| / |b|` from the recursively updated residual.
    pub rel_residual: f64,
    pub converged: bool,
    /// Set when `p^T A p <= 0` was met, i.e. the operator is not positive
    /// definite on the Krylov space.
    pub breakdown: bool,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradients for a symmetric positive definite operator, starting
/// from zero. Stops once the relative residual drops to `rel_tol`.
pub fn conjugate_gradient<F>(apply: F, b: &[f64], rel_tol: f64, max_iter: usize) -> CgOutcome
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return CgOutcome {
            x,
            iterations: 0,
            rel_residual: 0.0,
            converged: true,
            breakdown: false,
        };
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut rel = 1.0;
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return CgOutcome {
                x,
                iterations: it,
                rel_residual: rel,
                converged: false,
                breakdown: true,
            };
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        rel = rr_new.sqrt() / bnorm;
        if rel <= rel_tol {
            return CgOutcome {
                x,
                iterations: it,
                rel_residual: rel,
                converged: true,
                breakdown: false,
            };
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    CgOutcome {
        x,
        iterations: max_iter,
        rel_residual: rel,
        converged: false,
        breakdown: false,
    }
}

/// Extremal eigenvalue estimates from Lanczos.
#[derive(Debug, Clone)]
pub struct LanczosOutcome {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub iterations: usize,
    pub converged: bool,
    /// (min, max) Ritz values after each step.
    pub history: Vec<(f64, f64)>,
}

/// Lanczos with full reorthogonalization for the extreme eigenvalues of a
/// symmetric `n x n` operator.
///
/// Converged when the residual bound `|beta_k s_k|` of both extreme Ritz
/// pairs is at most `rel_tol * |theta|`. Reaching an invariant subspace
/// (including `k = n`) gives exact Ritz values.
pub fn lanczos_extremes<F>(apply: F, start: &[f64], rel_tol: f64, max_iter: usize) -> LanczosOutcome
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = start.len();
    let max_iter = max_iter.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_iter);
    let s = norm(start);
    basis.push(start.iter().map(|v| v / s).collect());
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut history = Vec::new();
    let mut result = (f64::NAN, f64::NAN);
    for k in 0..max_iter {
        let mut w = apply(&basis[k]);
        let a = dot(&w, &basis[k]);
        alpha.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = norm(&w);
        let m = alpha.len();
        let scale = alpha.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let invariant = b <= 1e-14 * scale.max(1e-300);
        let last = invariant || m == n || k + 1 == max_iter;
        // the tridiagonal eigenproblem is re-solved every few steps once it grows
        if !(last || m <= 20 || m.is_multiple_of(5)) {
            beta.push(b);
            basis.push(w.into_iter().map(|v| v / b).collect());
            continue;
        }
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (mut imin, mut imax) = (0, 0);
        for i in 0..m {
            if eig.eigenvalues[i] < eig.eigenvalues[imin] {
                imin = i;
            }
            if eig.eigenvalues[i] > eig.eigenvalues[imax] {
                imax = i;
            }
        }
        let (lmin, lmax) = (eig.eigenvalues[imin], eig.eigenvalues[imax]);
        result = (lmin, lmax);
        history.push(result);
        let res_min = (b * eig.eigenvectors[(m - 1, imin)]).abs();
        let res_max = (b * eig.eigenvectors[(m - 1, imax)]).abs();
        let done = res_min <= rel_tol * lmin.abs() && res_max <= rel_tol * lmax.abs();
        if invariant || done || m == n {
            return LanczosOutcome {
                lambda_min: lmin,
                lambda_max: lmax,
                iterations: m,
                converged: true,
                history,
            };
        }
        if k + 1 < max_iter {
            beta.push(b);
            basis.push(w.into_iter().map(|v| v / b).collect());
        }
    }
    LanczosOutcome {
        lambda_min: result.0,
        lambda_max: result.1,
        iterations: max_iter,
        converged: false,
        history,
    }
}
