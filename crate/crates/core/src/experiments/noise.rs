use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{build_rule, derive_seed, method_name, num, percent_below, ExperimentConfig, LeastSquaresFit};
use super::{NoiseKind, NoiseModel, ResultTable};
use crate::error::Result;
use crate::exec;
use crate::geometry::random_points;
use crate::operators::{analyze_batch, apply_filter, synthesize_batch};
use crate::specfun::Filter;

/// Thresholds `10^-x` reported for the averaged outputs.
pub const NOISE_EXPONENTS: [f64; 7] = [5.0, 4.0, 3.0, 2.75, 2.5, 2.25, 2.0];

/// Averaged output magnitude of one method for one noise model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseRow {
    pub kind: NoiseKind,
    pub scale: f64,
    pub method: String,
    /// Maximum over the test points of the repetition-averaged `|output|`.
    pub sup: f64,
    /// Mean over the test points of the repetition-averaged `|output|`.
    pub mean: f64,
    /// Percentages per [`NOISE_EXPONENTS`].
    pub percent: Vec<f64>,
}

impl NoiseRow {
    pub fn at(&self, x: f64) -> Option<f64> {
        NOISE_EXPONENTS.iter().position(|e| *e == x).map(|i| self.percent[i])
    }
}

/// Output size per unit noise level relative to the reference level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearityRow {
    pub kind: NoiseKind,
    pub method: String,
    pub scale: f64,
    pub reference_scale: f64,
    /// `(sup / scale) / (sup_ref / reference_scale)`.
    pub sup_ratio: f64,
    /// Same with the mean instead of the sup.
    pub mean_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseResult {
    pub rows: Vec<NoiseRow>,
    pub linearity: Vec<LinearityRow>,
}

/// The least-squares fit and `sigma_n(h_m)` applied to pure noise on the
/// nodes of an LSQ rule, with `|output|` averaged over the repetitions at
/// every test point.
pub fn exp_noise(cfg: &ExperimentConfig) -> Result<NoiseResult> {
    let n = cfg.operator_degree()?;
    let (set, rule) = build_rule(cfg)?;
    let test = random_points(derive_seed(cfg.seed, "test", 0), cfg.test_points.max(1))?
        .into_parts()
        .0;
    let ls = LeastSquaresFit::new(&set, n)?;
    let filters: Vec<Filter> = cfg.filters.iter().map(|&m| Filter::new(m)).collect::<Result<_>>()?;
    let mut names = vec![method_name(None)];
    names.extend(cfg.filters.iter().map(|&m| method_name(Some(m))));
    let reps = cfg.repetitions;
    let m = set.len();

    let mut rows = Vec::new();
    for kind in [NoiseKind::Uniform, NoiseKind::Gaussian] {
        let tag = match kind {
            NoiseKind::Uniform => "noise-uniform",
            NoiseKind::Gaussian => "noise-gaussian",
        };
        for (si, &scale) in cfg.noise_scales.iter().enumerate() {
            let model = NoiseModel::new(kind, scale, derive_seed(cfg.seed, tag, si as u64))?;
            let columns = exec::map_range(reps, |r| model.sample(r as u64, m));
            let z = DMatrix::from_fn(m, reps, |i, j| columns[j][i]);
            drop(columns);

            let analysis = analyze_batch(rule.nodes(), rule.weights(), &z, n)?;
            let mut all = DMatrix::<f64>::zeros(analysis.nrows(), reps * names.len());
            all.columns_mut(0, reps).copy_from(&ls.coeffs(&set, &z)?);
            for (i, h) in filters.iter().enumerate() {
                let mut c = analysis.clone();
                apply_filter(&mut c, h, n);
                all.columns_mut((i + 1) * reps, reps).copy_from(&c);
            }
            let out = synthesize_batch(&test, &all)?;
            for (i, name) in names.iter().enumerate() {
                let block = out.columns(i * reps, reps);
                let avg: Vec<f64> = block
                    .row_iter()
                    .map(|r| r.iter().map(|v| v.abs()).sum::<f64>() / reps as f64)
                    .collect();
                rows.push(NoiseRow {
                    kind,
                    scale,
                    method: name.clone(),
                    sup: avg.iter().copied().fold(0.0, f64::max),
                    mean: avg.iter().sum::<f64>() / avg.len() as f64,
                    percent: percent_below(&avg, &NOISE_EXPONENTS),
                });
            }
        }
    }
    let linearity = linearity(&rows, cfg.noise_scales.first().copied());
    Ok(NoiseResult { rows, linearity })
}

fn linearity(rows: &[NoiseRow], reference: Option<f64>) -> Vec<LinearityRow> {
    let Some(reference) = reference else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for base in rows.iter().filter(|r| r.scale == reference) {
        for r in rows
            .iter()
            .filter(|r| r.kind == base.kind && r.method == base.method && r.scale != reference)
        {
            out.push(LinearityRow {
                kind: r.kind,
                method: r.method.clone(),
                scale: r.scale,
                reference_scale: reference,
                sup_ratio: (r.sup / r.scale) / (base.sup / reference),
                mean_ratio: (r.mean / r.scale) / (base.mean / reference),
            });
        }
    }
    out
}

fn kind_name(k: NoiseKind) -> &'static str {
    match k {
        NoiseKind::Uniform => "uniform",
        NoiseKind::Gaussian => "gaussian",
    }
}

pub(super) fn table(rows: &[NoiseRow]) -> ResultTable {
    let mut header: Vec<String> = ["kind", "scale", "method", "sup", "mean"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(NOISE_EXPONENTS.iter().map(|x| format!("{x}")));
    let mut t = ResultTable {
        header,
        rows: Vec::new(),
    };
    for r in rows {
        let mut row = vec![
            kind_name(r.kind).to_string(),
            num(r.scale),
            r.method.clone(),
            num(r.sup),
            num(r.mean),
        ];
        row.extend(r.percent.iter().map(|v| num(*v)));
        t.push(row);
    }
    t
}

pub(super) fn linearity_table(rows: &[LinearityRow]) -> ResultTable {
    let mut t = ResultTable::new(&["kind", "method", "scale", "reference_scale", "sup_ratio", "mean_ratio"]);
    for r in rows {
        t.push(vec![
            kind_name(r.kind).to_string(),
            r.method.clone(),
            num(r.scale),
            num(r.reference_scale),
            num(r.sup_ratio),
            num(r.mean_ratio),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{Experiment, PointSource};

    #[test]
    fn small_noise_run() {
        let mut cfg = ExperimentConfig::preset(Experiment::Noise, false);
        cfg.source = PointSource::Random { count: 1024 };
        cfg.quad_degree = 14;
        cfg.degrees = vec![7];
        cfg.test_points = 300;
        cfg.repetitions = 6;
        let res = exp_noise(&cfg).unwrap();
        // 2 kinds x 2 scales x 3 methods.
        assert_eq!(res.rows.len(), 12);
        for r in &res.rows {
            assert!(r.percent.windows(2).all(|w| w[0] <= w[1]));
            assert!(r.sup <= r.scale * 3.0, "{r:?}");
        }
        assert_eq!(res.linearity.len(), 6);
        for l in &res.linearity {
            assert!((l.mean_ratio - 1.0).abs() < 0.3, "{l:?}");
        }
        let again = exp_noise(&cfg).unwrap();
        assert_eq!(table(&res.rows).to_csv().unwrap(), table(&again.rows).to_csv().unwrap());
    }
}
