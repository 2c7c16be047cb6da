use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::gram::{weighted_gram, GramOperator};
use super::QuadratureRule;
use crate::error::{Error, Result};
use crate::geometry::{rng_stream, PointSet};
use crate::linalg::lanczos_extremes;

/// Exactness and weight statistics of a rule, optionally with the extreme
/// eigenvalues of the Gram matrix of its node measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Degree checked.
    pub degree: usize,
    /// `max |G - I|` over the harmonics of degree `<= degree / 2`.
    pub gcom_max_err: f64,
    pub weight_sum: f64,
    pub weight_abs_sum: f64,
    pub min_w: f64,
    pub max_w: f64,
    pub positive_count: usize,
    pub node_count: usize,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub condition: Option<f64>,
}

impl VerificationReport {
    pub fn with_spectrum(mut self, s: &GramSpectrum) -> Self {
        self.lambda_min = Some(s.lambda_min);
        self.lambda_max = Some(s.lambda_max);
        self.condition = s.condition;
        self
    }
}

/// Cumulative Gram errors: entry `j` is `max |G - I|` over the harmonics of
/// degree `<= j`, for `j = 0..=n/2`, with `G` formed from the rule's weights.
pub fn exactness_profile(rule: &QuadratureRule, n: usize) -> Vec<f64> {
    let half = n / 2;
    let g = weighted_gram(rule.nodes(), rule.weights(), half);
    let mut out = Vec::with_capacity(half + 1);
    let mut worst = 0.0f64;
    for j in 0..=half {
        let (lo, hi) = (j * j, (j + 1) * (j + 1));
        for r in 0..hi {
            let cols = if r < lo { lo..hi } else { 0..hi };
            for c in cols {
                let target = if r == c { 1.0 } else { 0.0 };
                let e = (g[(r, c)] - target).abs();
                if e.is_nan() || e > worst {
                    worst = if e.is_nan() { f64::INFINITY } else { e };
                }
            }
        }
        out.push(worst);
    }
    out
}

/// Check exactness of `rule` for degree `n_check` through the Gram matrix of
/// the harmonics of degree `<= n_check / 2`.
pub fn verify_exactness(rule: &QuadratureRule, n_check: usize) -> VerificationReport {
    let profile = exactness_profile(rule, n_check);
    let w = rule.weights();
    VerificationReport {
        degree: n_check,
        gcom_max_err: *profile.last().expect("profile is non-empty"),
        weight_sum: w.iter().sum(),
        weight_abs_sum: w.iter().map(|v| v.abs()).sum(),
        min_w: w.iter().copied().fold(f64::INFINITY, f64::min),
        max_w: w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        positive_count: w.iter().filter(|v| **v > 0.0).count(),
        node_count: w.len(),
        lambda_min: None,
        lambda_max: None,
        condition: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramSpectrum {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `lambda_max / lambda_min` when both are positive.
    pub condition: Option<f64>,
    pub iterations: usize,
}

const SPECTRUM_TOL: f64 = 1e-6;

/// Extreme eigenvalues of `G = Y diag(v) Y^T` for the harmonics of degree
/// `<= n`, by Lanczos with full reorthogonalization from a fixed random start.
pub fn gram_spectrum(set: &PointSet, n: usize) -> Result<GramSpectrum> {
    let op = GramOperator::new(set.points(), set.measure(), n)?;
    let mut rng = rng_stream(0x5eed, 0);
    let start: Vec<f64> = (0..op.dim()).map(|_| rng.sample(StandardNormal)).collect();
    let out = lanczos_extremes(|r| op.apply(r), &start, SPECTRUM_TOL, op.dim());
    if !out.converged {
        return Err(Error::NonConvergence {
            iterations: out.iterations,
            history: out.history,
        });
    }
    let condition = (out.lambda_min > 0.0 && out.lambda_max > 0.0).then(|| out.lambda_max / out.lambda_min);
    Ok(GramSpectrum {
        lambda_min: out.lambda_min,
        lambda_max: out.lambda_max,
        condition,
        iterations: out.iterations,
    })
}
