use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::gram::basis_matrix;
use super::reference::reference_rule;
use crate::error::{Error, Result};
use crate::geometry::{dyadic_triangulation, rng_stream, UnitPoint};
use crate::specfun::HarmonicBasis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MzNorm {
    L1,
    L2,
    Sup,
}

impl std::str::FromStr for MzNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "l1" => Ok(MzNorm::L1),
            "2" | "l2" => Ok(MzNorm::L2),
            "inf" | "sup" | "linf" => Ok(MzNorm::Sup),
            _ => Err(Error::Parse(format!("unknown norm '{s}', expected 1, 2 or inf"))),
        }
    }
}

/// Discrete-to-continuous norm ratios over random polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MzStats {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub ratios: Vec<f64>,
}

const TRIAL_BATCH: usize = 64;

fn discrete_norm(values: &[f64], weights: &[f64], norm: MzNorm) -> f64 {
    match norm {
        MzNorm::L1 => values.iter().zip(weights).map(|(p, w)| w.abs() * p.abs()).sum(),
        MzNorm::L2 => values
            .iter()
            .zip(weights)
            .map(|(p, w)| w.abs() * p * p)
            .sum::<f64>()
            .sqrt(),
        MzNorm::Sup => values.iter().fold(0.0, |m, p| m.max(p.abs())),
    }
}

/// Points and weights used for the continuous norm. For the sup norm the
/// probe is a dyadic center grid with roughly 16 points per basis function,
/// joined with the nodes themselves.
fn continuous_probe(nodes: &[UnitPoint], n: usize, norm: MzNorm) -> Result<(Vec<UnitPoint>, Vec<f64>)> {
    match norm {
        MzNorm::L1 | MzNorm::L2 => {
            let r = reference_rule(2 * n)?;
            Ok((r.nodes().to_vec(), r.weights().to_vec()))
        }
        MzNorm::Sup => {
            let want = 16 * (n + 1) * (n + 1);
            let mut level = 0;
            while level < 7 && 8usize << (2 * level) < want {
                level += 1;
            }
            let mut pts = dyadic_triangulation(level)?.centers().to_vec();
            pts.extend_from_slice(nodes);
            let w = vec![1.0; pts.len()];
            Ok((pts, w))
        }
    }
}

/// Ratio of discrete to continuous norm of the polynomial with harmonic
/// coefficients `coeffs`.
pub fn mz_ratio(nodes: &[UnitPoint], weights: &[f64], n: usize, coeffs: &[f64], norm: MzNorm) -> Result<f64> {
    let basis = HarmonicBasis::new(n);
    if coeffs.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: coeffs.len(),
        });
    }
    let (probe, pw) = continuous_probe(nodes, n, norm)?;
    let disc = discrete_norm(&basis.synthesize(coeffs, nodes), weights, norm);
    let cont = discrete_norm(&basis.synthesize(coeffs, &probe), &pw, norm);
    Ok(disc / cont)
}

/// Norm ratios for `trials` polynomials of degree `<= n` with standard
/// normal harmonic coefficients drawn from `seed`.
pub fn mz_check(
    nodes: &[UnitPoint],
    weights: &[f64],
    n: usize,
    norm: MzNorm,
    trials: usize,
    seed: u64,
) -> Result<MzStats> {
    if nodes.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            found: weights.len(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let basis = HarmonicBasis::new(n);
    let (probe, pw) = continuous_probe(nodes, n, norm)?;
    let y_nodes = basis_matrix(&basis, nodes);
    let y_probe = basis_matrix(&basis, &probe);
    let mut rng = rng_stream(seed, 0);
    let mut ratios = Vec::with_capacity(trials);
    let mut done = 0;
    while done < trials {
        let batch = TRIAL_BATCH.min(trials - done);
        let c = DMatrix::<f64>::from_fn(basis.len(), batch, |_, _| rng.sample(StandardNormal));
        let on_nodes = &y_nodes * &c;
        let on_probe = &y_probe * &c;
        for t in 0..batch {
            let disc = discrete_norm(on_nodes.column(t).as_slice(), weights, norm);
            let cont = discrete_norm(on_probe.column(t).as_slice(), &pw, norm);
            ratios.push(disc / cont);
        }
        done += batch;
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(MzStats {
        min_ratio,
        max_ratio,
        mean_ratio,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_points;

    #[test]
    fn exact_rule_gives_unit_ratio() {
        let r = reference_rule(20).unwrap();
        let s = mz_check(r.nodes(), r.weights(), 10, MzNorm::L2, 30, 1).unwrap();
        assert!((s.min_ratio - 1.0).abs() < 1e-10);
        assert!((s.max_ratio - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_point_fails() {
        let p = vec![UnitPoint::new(0.0, 0.0, 1.0).unwrap()];
        let s = mz_check(&p, &[1.0], 4, MzNorm::L2, 200, 2).unwrap();
        assert!(s.max_ratio / s.min_ratio > 20.0);
        assert!(s.min_ratio < 0.1);
    }

    #[test]
    fn random_nodes_equivalent_norms() {
        let n = 8;
        let set = random_points(5, 4 * (n + 1) * (n + 1) * 3).unwrap();
        let s = mz_check(set.points(), set.measure(), n, MzNorm::L2, 50, 3).unwrap();
        assert!(s.min_ratio > 0.5 && s.max_ratio < 1.5, "{s:?}");
    }

    #[test]
    fn sup_ratio_at_most_one() {
        let set = random_points(6, 300).unwrap();
        let s = mz_check(set.points(), set.measure(), 6, MzNorm::Sup, 20, 4).unwrap();
        assert!(s.max_ratio <= 1.0 && s.min_ratio > 0.3);
    }

    #[test]
    fn single_ratio_matches_batch() {
        let set = random_points(7, 200).unwrap();
        let basis_len = 25;
        let c: Vec<f64> = (0..basis_len).map(|i| (i as f64 * 0.7).sin()).collect();
        let r = mz_ratio(set.points(), set.measure(), 4, &c, MzNorm::L1).unwrap();
        assert!(r > 0.5 && r < 1.5);
    }
}
