use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{build_rule, derive_seed, least_squares_coeffs, method_name, num, percent_below, BenchmarkFn};
use super::{ExperimentConfig, ResultTable};
use crate::error::Result;
use crate::geometry::{random_points, UnitPoint};
use crate::operators::{analyze_batch, apply_filter, sample, synthesize_batch};
use crate::specfun::Filter;

/// Thresholds `10^-x` in table order.
pub const PERCENTILE_EXPONENTS: [f64; 9] = [10.0, 9.0, 8.0, 7.0, 6.0, 5.0, 4.0, 3.0, 2.0];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PercentileRow {
    pub function: BenchmarkFn,
    /// `LS` or `S<m>`.
    pub method: String,
    /// Percentage of test points with error below `10^-x`, one entry per
    /// [`PERCENTILE_EXPONENTS`].
    pub percent: Vec<f64>,
}

impl PercentileRow {
    pub fn at(&self, x: f64) -> Option<f64> {
        PERCENTILE_EXPONENTS
            .iter()
            .position(|e| *e == x)
            .map(|i| self.percent[i])
    }
}

/// Error distribution of the least-squares fit and of `sigma_n(h_m)` for
/// every benchmark function, from one LSQ rule on the configured nodes.
pub fn exp_error_percentiles(cfg: &ExperimentConfig) -> Result<Vec<PercentileRow>> {
    let n = cfg.operator_degree()?;
    let (set, rule) = build_rule(cfg)?;
    let test = random_points(derive_seed(cfg.seed, "test", 0), cfg.test_points.max(1))?
        .into_parts()
        .0;
    let funcs = BenchmarkFn::ALL;
    let columns = |pts: &[UnitPoint]| {
        let cols: Vec<Vec<f64>> = funcs.iter().map(|g| sample(&|x: &UnitPoint| g.eval(x), pts)).collect();
        DMatrix::from_fn(pts.len(), funcs.len(), |i, j| cols[j][i])
    };
    let z = columns(rule.nodes());
    let exact = columns(&test);

    let analysis = analyze_batch(rule.nodes(), rule.weights(), &z, n)?;
    let mut methods: Vec<(String, DMatrix<f64>)> = vec![(method_name(None), least_squares_coeffs(&set, &z, n)?)];
    for &m in &cfg.filters {
        let mut c = analysis.clone();
        apply_filter(&mut c, &Filter::new(m)?, n);
        methods.push((method_name(Some(m)), c));
    }
    let k = funcs.len();
    let mut all = DMatrix::<f64>::zeros(analysis.nrows(), k * methods.len());
    for (i, (_, c)) in methods.iter().enumerate() {
        all.columns_mut(i * k, k).copy_from(c);
    }
    let approx = synthesize_batch(&test, &all)?;

    let mut rows = Vec::new();
    for (j, g) in funcs.iter().enumerate() {
        for (i, (name, _)) in methods.iter().enumerate() {
            let err: Vec<f64> = approx
                .column(i * k + j)
                .iter()
                .zip(exact.column(j).iter())
                .map(|(a, e)| (a - e).abs())
                .collect();
            rows.push(PercentileRow {
                function: *g,
                method: name.clone(),
                percent: percent_below(&err, &PERCENTILE_EXPONENTS),
            });
        }
    }
    Ok(rows)
}

pub(super) fn table(rows: &[PercentileRow]) -> ResultTable {
    let mut header = vec!["function".to_string(), "method".to_string()];
    header.extend(PERCENTILE_EXPONENTS.iter().map(|x| format!("{x}")));
    let mut t = ResultTable {
        header,
        rows: Vec::new(),
    };
    for r in rows {
        let mut row = vec![r.function.to_string(), r.method.clone()];
        row.extend(r.percent.iter().map(|v| num(*v)));
        t.push(row);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{Experiment, PointSource};

    #[test]
    fn small_run_is_monotone_and_deterministic() {
        let mut cfg = ExperimentConfig::preset(Experiment::Percentiles, false);
        cfg.source = PointSource::Random { count: 1200 };
        cfg.quad_degree = 14;
        cfg.degrees = vec![7];
        cfg.test_points = 400;
        let rows = exp_error_percentiles(&cfg).unwrap();
        assert_eq!(rows.len(), 15);
        for r in &rows {
            assert!(r.percent.windows(2).all(|w| w[0] <= w[1]), "{r:?}");
        }
        // g2 is smooth apart from a bump of height 0.01.
        for r in rows.iter().filter(|r| r.function == BenchmarkFn::G2) {
            assert!(r.at(2.0).unwrap() > 90.0);
        }
        let again = exp_error_percentiles(&cfg).unwrap();
        assert_eq!(table(&rows).to_csv().unwrap(), table(&again).to_csv().unwrap());
    }
}
