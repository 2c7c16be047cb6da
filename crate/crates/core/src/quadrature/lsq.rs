use serde::{Deserialize, Serialize};

use super::gram::{weighted_gram, GramOperator};
use super::QuadratureRule;
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::linalg::conjugate_gradient;

/// Largest degree accepted by [`lsq_weights`].
pub const MAX_LSQ_DEGREE: usize = 400;

/// How the Gram system is applied inside CG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GramMode {
    #[default]
    MatrixFree,
    ExplicitGram,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub rel_tol: f64,
    /// Defaults to `10 N`.
    pub max_iter: Option<usize>,
    pub mode: GramMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            max_iter: None,
            mode: GramMode::MatrixFree,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub rel_residual: f64,
    pub mode: GramMode,
}

#[derive(Debug, Clone)]
pub struct LsqResult {
    pub rule: QuadratureRule,
    /// Coefficients `b` of the solved Gram system.
    pub coefficients: Vec<f64>,
    pub stats: SolverStats,
}

/// Weights `w_xi = v_xi sum_k b_k Y_k(xi)` where `G b = e_1` and
/// `G = Y diag(v) Y^T` is the Gram matrix of the harmonics of degree `<= n`
/// against the node measure `v`.
///
/// Fails with `ConstructionFailure` when CG breaks down or does not reach
/// `rel_tol`, which happens when some polynomial of degree `<= n` vanishes on
/// every node.
pub fn lsq_weights(set: &PointSet, n: usize, opts: &SolverOptions) -> Result<LsqResult> {
    if !(opts.rel_tol > 0.0) {
        return Err(Error::InvalidParameter("rel_tol must be positive".into()));
    }
    if n > MAX_LSQ_DEGREE {
        return Err(Error::ResourceLimit(format!("degree {n} exceeds {MAX_LSQ_DEGREE}")));
    }
    let dim = (n + 1) * (n + 1);
    if set.len() < dim {
        return Err(Error::ConstructionFailure {
            message: format!(
                "{} nodes cannot carry a rule exact for the {dim}-dimensional space of degree {n}",
                set.len()
            ),
            residual: f64::NAN,
        });
    }
    let op = GramOperator::new(set.points(), set.measure(), n)?;
    let mut rhs = vec![0.0; dim];
    rhs[0] = 1.0;
    let max_iter = opts.max_iter.unwrap_or(10 * dim);
    let outcome = match opts.mode {
        GramMode::MatrixFree => conjugate_gradient(|r| op.apply(r), &rhs, opts.rel_tol, max_iter),
        GramMode::ExplicitGram => {
            let g = weighted_gram(set.points(), set.measure(), n);
            conjugate_gradient(
                |r| {
                    let v = &g * nalgebra::DVector::from_column_slice(r);
                    v.as_slice().to_vec()
                },
                &rhs,
                opts.rel_tol,
                max_iter,
            )
        }
    };
    if !outcome.converged {
        let why = if outcome.breakdown {
            "Gram matrix is not positive definite on the nodes"
        } else {
            "conjugate gradients stagnated"
        };
        return Err(Error::ConstructionFailure {
            message: format!("{why} after {} iterations", outcome.iterations),
            residual: outcome.rel_residual,
        });
    }
    let values = op.synthesize(&outcome.x);
    let weights = values.iter().zip(set.measure()).map(|(p, v)| p * v).collect();
    let rule = QuadratureRule::new(set.points().to_vec(), weights, n)?;
    Ok(LsqResult {
        rule,
        coefficients: outcome.x,
        stats: SolverStats {
            iterations: outcome.iterations,
            rel_residual: outcome.rel_residual,
            mode: opts.mode,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{random_points, PointKind};
    use crate::quadrature::{reference_rule, verify_exactness};
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn reference_nodes_reproduce_measure() {
        let r = reference_rule(12).unwrap();
        let set = PointSet::new(r.nodes().to_vec(), r.weights().to_vec(), PointKind::External).unwrap();
        let out = lsq_weights(&set, 6, &SolverOptions::default()).unwrap();
        for (a, b) in out.rule.weights().iter().zip(r.weights()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn random_nodes_exact() {
        let set = random_points(11, 1500).unwrap();
        let out = lsq_weights(&set, 12, &SolverOptions::default()).unwrap();
        let rep = verify_exactness(&out.rule, 12);
        assert!(rep.gcom_max_err < 1e-12, "{}", rep.gcom_max_err);
        assert!((out.rule.weight_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modes_agree() {
        let set = random_points(12, 600).unwrap();
        let a = lsq_weights(&set, 8, &SolverOptions::default()).unwrap();
        let opts = SolverOptions {
            mode: GramMode::ExplicitGram,
            ..SolverOptions::default()
        };
        let b = lsq_weights(&set, 8, &opts).unwrap();
        for (x, y) in a.rule.weights().iter().zip(b.rule.weights()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn minimal_weighted_norm() {
        // least-norm solution of Y w = e1 in the metric diag(1/v), by dense
        // normal equations: w = V Y^T (Y V Y^T)^{-1} e1
        let set = random_points(13, 150).unwrap();
        let n = 5;
        let out = lsq_weights(&set, n, &SolverOptions::default()).unwrap();
        let basis = crate::specfun::HarmonicBasis::new(n);
        let y = super::super::basis_matrix(&basis, set.points()).transpose();
        let v = DMatrix::from_diagonal(&DVector::from_column_slice(set.measure()));
        let g = &y * &v * y.transpose();
        let mut e1 = DVector::zeros(basis.len());
        e1[0] = 1.0;
        let b = g.lu().solve(&e1).unwrap();
        let w = &v * y.transpose() * b;
        for (a, b) in out.rule.weights().iter().zip(w.iter()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn too_few_nodes() {
        let set = random_points(14, 20).unwrap();
        assert!(matches!(
            lsq_weights(&set, 6, &SolverOptions::default()),
            Err(Error::ConstructionFailure { .. })
        ));
    }

    #[test]
    fn degenerate_nodes_fail() {
        // all nodes on the equator: z vanishes on every node
        let pts: Vec<_> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.0314159;
                crate::geometry::UnitPoint::new(t.cos(), t.sin(), 0.0).unwrap()
            })
            .collect();
        let set = PointSet::monte_carlo(pts).unwrap();
        assert!(matches!(
            lsq_weights(&set, 3, &SolverOptions::default()),
            Err(Error::ConstructionFailure { .. })
        ));
    }
}
