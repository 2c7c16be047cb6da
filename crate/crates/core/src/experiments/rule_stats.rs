use serde::{Deserialize, Serialize};

use super::{derive_seed, num, ExperimentConfig, ResultTable};
use crate::error::Result;
use crate::geometry::random_points;
use crate::quadrature::{
    gram_spectrum, lsq_weights, rec_weights, reference_rule, verify_exactness, RecOptions, SolverOptions,
    VerificationReport,
};

/// Averages over the repetitions of one `(points, degree)` configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LsqStatsRow {
    pub points: usize,
    pub degree: usize,
    /// Repetitions whose construction succeeded.
    pub succeeded: usize,
    pub failures: Vec<String>,
    pub error: f64,
    pub weight_abs_sum: f64,
    pub min_w: f64,
    pub max_w: f64,
    /// Mean number of positive weights.
    pub positive: f64,
    /// Repetitions in which every weight is positive.
    pub all_positive: usize,
    pub condition: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub reports: Vec<VerificationReport>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// LSQ rules on `repetitions` independent random point sets per configured
/// size, with their exactness, weight and Gram-spectrum statistics.
pub fn exp_lsq_stats(cfg: &ExperimentConfig) -> Result<Vec<LsqStatsRow>> {
    let mut rows = Vec::with_capacity(cfg.sizes.len());
    for (r, size) in cfg.sizes.iter().enumerate() {
        let mut reports = Vec::new();
        let mut failures = Vec::new();
        for rep in 0..cfg.repetitions {
            let seed = derive_seed(cfg.seed, "lsq-stats", ((r as u64) << 32) | rep as u64);
            let set = random_points(seed, size.points)?;
            match lsq_weights(&set, size.degree, &SolverOptions::default()) {
                Ok(res) => {
                    let mut report = verify_exactness(&res.rule, size.degree);
                    match gram_spectrum(&set, size.degree) {
                        Ok(s) => report = report.with_spectrum(&s),
                        Err(e) => failures.push(format!("seed {seed}: spectrum: {e}")),
                    }
                    reports.push(report);
                }
                Err(e) => failures.push(format!("seed {seed}: {e}")),
            }
        }
        rows.push(LsqStatsRow {
            points: size.points,
            degree: size.degree,
            succeeded: reports.len(),
            failures,
            error: mean(reports.iter().map(|r| r.gcom_max_err)),
            weight_abs_sum: mean(reports.iter().map(|r| r.weight_abs_sum)),
            min_w: mean(reports.iter().map(|r| r.min_w)),
            max_w: mean(reports.iter().map(|r| r.max_w)),
            positive: mean(reports.iter().map(|r| r.positive_count as f64)),
            all_positive: reports.iter().filter(|r| r.positive_count == r.node_count).count(),
            condition: mean(reports.iter().filter_map(|r| r.condition)),
            lambda_min: mean(reports.iter().filter_map(|r| r.lambda_min)),
            lambda_max: mean(reports.iter().filter_map(|r| r.lambda_max)),
            reports,
        });
    }
    Ok(rows)
}

pub(super) fn lsq_table(rows: &[LsqStatsRow]) -> ResultTable {
    let mut t = ResultTable::new(&[
        "M",
        "degree",
        "succeeded",
        "failed",
        "error",
        "sum_abs_w",
        "min_w",
        "max_w",
        "pos",
        "all_positive",
        "kappa",
        "lambda_min",
        "lambda_max",
    ]);
    for r in rows {
        t.push(vec![
            r.points.to_string(),
            r.degree.to_string(),
            r.succeeded.to_string(),
            r.failures.len().to_string(),
            num(r.error),
            num(r.weight_abs_sum),
            num(r.min_w),
            num(r.max_w),
            num(r.positive),
            r.all_positive.to_string(),
            num(r.condition),
            num(r.lambda_min),
            num(r.lambda_max),
        ]);
    }
    t
}

/// One REC construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecStatsRow {
    pub degree: usize,
    /// `max |G - I|` of the harmonics of degree `<= degree / 2`.
    pub error: f64,
    pub min_w: f64,
    pub max_w: f64,
    pub weight_sum: f64,
    pub positive: usize,
    pub nodes: usize,
    pub certified_degree: usize,
    pub breakdown: bool,
    pub failure: Option<String>,
}

/// REC rules on the configured nodes for every target degree.
pub fn exp_rec_stats(cfg: &ExperimentConfig) -> Result<Vec<RecStatsRow>> {
    let set = cfg.source.load(derive_seed(cfg.seed, "points", 0))?;
    let mut rows = Vec::with_capacity(cfg.degrees.len());
    for &degree in &cfg.degrees {
        let seed = reference_rule(degree)?;
        let row = match rec_weights(&set, degree, &seed, &RecOptions::default()) {
            Ok(res) => {
                let rep = verify_exactness(&res.rule, degree);
                RecStatsRow {
                    degree,
                    error: rep.gcom_max_err,
                    min_w: rep.min_w,
                    max_w: rep.max_w,
                    weight_sum: rep.weight_sum,
                    positive: rep.positive_count,
                    nodes: rep.node_count,
                    certified_degree: res.rule.exactness_degree(),
                    breakdown: res.breakdown,
                    failure: None,
                }
            }
            Err(e) => RecStatsRow {
                degree,
                error: f64::NAN,
                min_w: f64::NAN,
                max_w: f64::NAN,
                weight_sum: f64::NAN,
                positive: 0,
                nodes: set.len(),
                certified_degree: 0,
                breakdown: true,
                failure: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

pub(super) fn rec_table(rows: &[RecStatsRow]) -> ResultTable {
    let mut t = ResultTable::new(&[
        "degree",
        "error",
        "min_w",
        "max_w",
        "sum_w",
        "pos",
        "nodes",
        "certified_degree",
        "breakdown",
    ]);
    for r in rows {
        t.push(vec![
            r.degree.to_string(),
            num(r.error),
            num(r.min_w),
            num(r.max_w),
            num(r.weight_sum),
            r.positive.to_string(),
            r.nodes.to_string(),
            r.certified_degree.to_string(),
            r.breakdown.to_string(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{Experiment, PointSource, RuleSize};

    #[test]
    fn small_lsq_stats() {
        let mut cfg = ExperimentConfig::preset(Experiment::LsqStats, false);
        cfg.sizes = vec![RuleSize { points: 400, degree: 6 }, RuleSize { points: 30, degree: 6 }];
        cfg.repetitions = 3;
        let rows = exp_lsq_stats(&cfg).unwrap();
        assert_eq!(rows[0].succeeded, 3);
        assert!(rows[0].error < 1e-12);
        assert!(rows[0].condition >= 1.0);
        assert!(rows[0].lambda_min <= 1.0 && rows[0].lambda_max >= 1.0);
        // 30 nodes cannot carry 49 conditions: every repetition fails.
        assert_eq!(rows[1].succeeded, 0);
        assert_eq!(rows[1].failures.len(), 3);
        let again = exp_lsq_stats(&cfg).unwrap();
        assert_eq!(lsq_table(&rows).to_csv().unwrap(), lsq_table(&again).to_csv().unwrap());
    }

    #[test]
    fn small_rec_stats() {
        let mut cfg = ExperimentConfig::preset(Experiment::RecStats, false);
        cfg.source = PointSource::Dyadic { level: 3 };
        cfg.degrees = vec![6, 40];
        let rows = exp_rec_stats(&cfg).unwrap();
        assert!(rows[0].error < 1e-10);
        assert!((rows[0].weight_sum - 1.0).abs() < 1e-12);
        assert_eq!(rows[0].nodes, 512);
        // Degree 40 needs more nodes than level 3 has.
        assert!(rows[1].breakdown);
        assert!(rows[1].certified_degree < 40);
    }
}
