//! Quadrature rules on the 2-sphere: construction from scattered nodes and
//! verification.
//!
//! Rules integrate against the normalized surface measure, so an exact rule
//! has weights summing to 1.

mod gram;
mod lsq;
mod mz;
mod rec;
mod reference;
mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::UnitPoint;

pub use gram::{basis_matrix, weighted_gram, GramOperator, CACHE_LIMIT};
pub use lsq::{lsq_weights, GramMode, LsqResult, SolverOptions, SolverStats};
pub use mz::{mz_check, mz_ratio, MzNorm, MzStats};
pub use rec::{
    monomial_index, monomial_ladder, monomials, rec_weights, Axis, LadderRule, LadderStep, RecOptions, RecResult,
};
pub use reference::{reference_rule, MAX_REFERENCE_DEGREE};
pub use verify::{exactness_profile, gram_spectrum, verify_exactness, GramSpectrum, VerificationReport};

/// Nodes with (possibly negative) weights and the degree up to which the rule
/// is claimed to be exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<UnitPoint>,
    weights: Vec<f64>,
    exactness_degree: usize,
}

impl QuadratureRule {
    pub fn new(nodes: Vec<UnitPoint>, weights: Vec<f64>, exactness_degree: usize) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                found: weights.len(),
            });
        }
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("quadrature rule has no nodes".into()));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("weight {i} is not finite")));
        }
        Ok(Self {
            nodes,
            weights,
            exactness_degree,
        })
    }

    pub fn nodes(&self) -> &[UnitPoint] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `sum_xi w_xi f(xi)`.
    pub fn integrate(&self, f: impl Fn(&UnitPoint) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    /// Reinterpret a rule with positive weights as a node set with measure.
    pub fn to_point_set(&self) -> Result<crate::geometry::PointSet> {
        crate::geometry::PointSet::new(
            self.nodes.clone(),
            self.weights.clone(),
            crate::geometry::PointKind::External,
        )
    }
}
