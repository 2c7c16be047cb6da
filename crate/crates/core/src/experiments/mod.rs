//! Numerical experiments: statistics of constructed rules, localization of
//! the summability operator, error percentiles on benchmark functions and
//! behaviour under pure noise.
//!
//! Every experiment is a pure function of its [`ExperimentConfig`]; all
//! random streams are derived from the master seed with [`derive_seed`], so
//! the produced tables are identical across runs and thread counts.

mod benchmark;
mod localization;
mod noise;
mod percentiles;
mod rule_stats;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{dyadic_triangulation, random_points, rng_stream, PointSet};
use crate::io::read_points;
use crate::operators::analyze_batch;
use crate::quadrature::{lsq_weights, weighted_gram, QuadratureRule, SolverOptions};

pub use benchmark::{benchmark_eval, BenchmarkFn};
pub use localization::{exp_localization, LocalizationRow};
pub use noise::{exp_noise, LinearityRow, NoiseResult, NoiseRow, NOISE_EXPONENTS};
pub use percentiles::{exp_error_percentiles, PercentileRow, PERCENTILE_EXPONENTS};
pub use rule_stats::{exp_lsq_stats, exp_rec_stats, LsqStatsRow, RecStatsRow};

/// The experiments that can be run by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    LsqStats,
    RecStats,
    Localization,
    Percentiles,
    Noise,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Self::LsqStats,
        Self::RecStats,
        Self::Localization,
        Self::Percentiles,
        Self::Noise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::LsqStats => "lsq-stats",
            Self::RecStats => "rec-stats",
            Self::Localization => "localization",
            Self::Percentiles => "percentiles",
            Self::Noise => "noise",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|e| e.name()).collect();
            Error::InvalidParameter(format!(
                "unknown experiment '{s}' (expected one of {})",
                names.join(", ")
            ))
        })
    }
}

/// Where the nodes of an experiment come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PointSource {
    /// Uniform random points with the equal-mass measure.
    Random { count: usize },
    /// Centers of the dyadic triangles of a level with their areas as
    /// measure.
    Dyadic { level: u32 },
    /// A point file as written by [`crate::io::write_points`].
    File { path: PathBuf },
}

impl PointSource {
    /// The node set; `seed` is used only by random sources.
    pub fn load(&self, seed: u64) -> Result<PointSet> {
        match self {
            Self::Random { count } => random_points(seed, *count),
            Self::Dyadic { level } => Ok(dyadic_triangulation(*level)?.to_point_set()),
            Self::File { path } => read_points(path),
        }
    }
}

/// Number of nodes and exactness degree of one row of the rule statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSize {
    pub points: usize,
    pub degree: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Uniform,
    Gaussian,
}

/// Additive noise: uniform on `[-scale, scale]` or centered normal with
/// standard deviation `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub scale: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, scale: f64, seed: u64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise scale must be positive, got {scale}"
            )));
        }
        Ok(Self { kind, scale, seed })
    }

    /// Realization number `rep`: `count` independent samples.
    pub fn sample(&self, rep: u64, count: usize) -> Vec<f64> {
        let mut rng = rng_stream(self.seed, rep);
        match self.kind {
            NoiseKind::Uniform => (0..count).map(|_| rng.random_range(-self.scale..=self.scale)).collect(),
            NoiseKind::Gaussian => (0..count)
                .map(|_| self.scale * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        }
    }
}

/// Parameters shared by all experiments; each experiment reads the fields it
/// needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed.
    pub seed: u64,
    /// Nodes for rec-stats, percentiles and noise.
    pub source: PointSource,
    /// Rows of lsq-stats (always on random points).
    pub sizes: Vec<RuleSize>,
    /// Exactness degree of the rule built on `source` for percentiles and
    /// noise.
    pub quad_degree: usize,
    /// Operator degrees `n` (localization, percentiles, noise) or REC target
    /// degrees (rec-stats).
    pub degrees: Vec<usize>,
    /// Filter orders; order 1 is the sharp cutoff.
    pub filters: Vec<u32>,
    /// Random test points on the whole sphere.
    pub test_points: usize,
    /// Random test points in the cap (localization).
    pub cap_points: usize,
    pub repetitions: usize,
    /// Noise levels; the first one is the reference for the linearity check.
    pub noise_scales: Vec<f64>,
    /// Output directory; the caller's default applies when absent.
    pub output: Option<PathBuf>,
}

fn sizes(rows: &[(usize, usize)]) -> Vec<RuleSize> {
    rows.iter()
        .map(|&(points, degree)| RuleSize { points, degree })
        .collect()
}

impl ExperimentConfig {
    /// Defaults for `experiment`; `full` selects the original problem sizes
    /// instead of the ones that finish in minutes.
    pub fn preset(experiment: Experiment, full: bool) -> Self {
        let base = Self {
            seed: 20_070_101,
            source: PointSource::Random {
                count: if full { 65536 } else { 16384 },
            },
            sizes: Vec::new(),
            quad_degree: if full { 126 } else { 62 },
            degrees: vec![if full { 63 } else { 31 }],
            filters: vec![1, 5],
            test_points: 20000,
            cap_points: 1000,
            repetitions: 1,
            noise_scales: vec![0.01, 0.1],
            output: None,
        };
        match experiment {
            Experiment::LsqStats => Self {
                sizes: if full {
                    sizes(&[
                        (8192, 14),
                        (8192, 42),
                        (8192, 62),
                        (8192, 82),
                        (16384, 42),
                        (16384, 62),
                        (16384, 82),
                        (16384, 98),
                        (32768, 42),
                        (32768, 62),
                        (32768, 82),
                        (32768, 98),
                    ])
                } else {
                    sizes(&[(8192, 14), (8192, 42), (16384, 42), (32768, 42)])
                },
                repetitions: 30,
                ..base
            },
            Experiment::RecStats => Self {
                source: PointSource::Dyadic { level: 5 },
                degrees: if full {
                    vec![16, 22, 32, 42, 44]
                } else {
                    vec![16, 22, 32]
                },
                ..base
            },
            Experiment::Localization => Self {
                degrees: if full { vec![63, 127, 255] } else { vec![63, 127] },
                test_points: 10000,
                ..base
            },
            Experiment::Percentiles => base,
            Experiment::Noise => Self {
                repetitions: 50,
                noise_scales: if full {
                    vec![0.01, 0.1, 0.001, 0.0001]
                } else {
                    vec![0.01, 0.1]
                },
                ..base
            },
        }
    }

    /// Preset, then the keys of `file`, then the keys of `overrides`; later
    /// layers win key by key.
    pub fn layered(experiment: Experiment, full: bool, file: Option<Value>, overrides: Value) -> Result<Self> {
        let mut value = serde_json::to_value(Self::preset(experiment, full)).map_err(json_error)?;
        for layer in file.into_iter().chain(std::iter::once(overrides)) {
            merge(&mut value, layer)?;
        }
        let cfg: Self = serde_json::from_value(value).map_err(json_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1");
        }
        if self.filters.contains(&0) {
            return bad("filter orders must be >= 1");
        }
        if self.noise_scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return bad("noise scales must be positive");
        }
        Ok(())
    }

    /// The operator degree for single-degree experiments.
    pub fn operator_degree(&self) -> Result<usize> {
        match self.degrees.as_slice() {
            [n] => Ok(*n),
            _ => Err(Error::InvalidParameter(format!(
                "this experiment takes exactly one operator degree, got {:?}",
                self.degrees
            ))),
        }
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::InvalidParameter(format!("experiment configuration: {e}"))
}

fn merge(base: &mut Value, layer: Value) -> Result<()> {
    match layer {
        Value::Null => Ok(()),
        Value::Object(map) => {
            let Value::Object(target) = base else {
                return Err(Error::InvalidParameter("configuration must be a JSON object".into()));
            };
            for (k, v) in map {
                target.insert(k, v);
            }
            Ok(())
        }
        _ => Err(Error::InvalidParameter("configuration must be a JSON object".into())),
    }
}

/// Independent seed for the `index`-th use of stream `tag` under `master`
/// (SplitMix64 finalizer over the combined input).
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    mix(mix(mix(master) ^ h) ^ index)
}

/// Percentage of `values` strictly below `10^-x` for each `x`.
pub fn percent_below(values: &[f64], exponents: &[f64]) -> Vec<f64> {
    exponents
        .iter()
        .map(|x| {
            let t = 10f64.powf(-x);
            100.0 * values.iter().filter(|v| **v < t).count() as f64 / values.len().max(1) as f64
        })
        .collect()
}

/// LSQ rule of exactness `cfg.quad_degree` on the configured nodes, with the
/// node set it was built from.
pub fn build_rule(cfg: &ExperimentConfig) -> Result<(PointSet, QuadratureRule)> {
    let set = cfg.source.load(derive_seed(cfg.seed, "points", 0))?;
    let rule = lsq_weights(&set, cfg.quad_degree, &SolverOptions::default())?.rule;
    Ok((set, rule))
}

/// Discrete least-squares fit from degree `<= n` with the node measure of a
/// point set as inner product; the Gram matrix is factored once.
pub struct LeastSquaresFit {
    chol: Cholesky<f64, Dyn>,
    n: usize,
}

impl LeastSquaresFit {
    pub fn new(set: &PointSet, n: usize) -> Result<Self> {
        let gram = weighted_gram(set.points(), set.measure(), n);
        let chol = gram.cholesky().ok_or_else(|| Error::ConstructionFailure {
            message: format!("Gram matrix of degree {n} is not positive definite on these nodes"),
            residual: f64::NAN,
        })?;
        Ok(Self { chol, n })
    }

    /// Harmonic coefficients of the fit to each column of `z` (values on
    /// the nodes of `set`).
    pub fn coeffs(&self, set: &PointSet, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let rhs = analyze_batch(set.points(), set.measure(), z, self.n)?;
        Ok(self.chol.solve(&rhs))
    }
}

/// [`LeastSquaresFit`] for a single batch of data.
pub fn least_squares_coeffs(set: &PointSet, z: &DMatrix<f64>, n: usize) -> Result<DMatrix<f64>> {
    LeastSquaresFit::new(set, n)?.coeffs(set, z)
}

/// Method label: `LS` or `S<m>` for the filter of order `m`.
pub fn method_name(filter_order: Option<u32>) -> String {
    match filter_order {
        None => "LS".into(),
        Some(m) => format!("S{m}"),
    }
}

/// A CSV table with text cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ResultTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_error)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_error)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Shortest round-trip decimal.
pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}

/// Tables produced by one experiment run, keyed by file stem, and the seeds
/// that were derived.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub tables: Vec<(String, ResultTable)>,
    pub seeds: BTreeMap<String, u64>,
}

/// Record written next to the tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub experiment: Experiment,
    pub full: bool,
    pub config: ExperimentConfig,
    pub seeds: BTreeMap<String, u64>,
    pub wall_time_s: f64,
    pub threads: usize,
    pub version: String,
    pub tables: Vec<String>,
}

/// Run `experiment` and return its tables.
pub fn run(experiment: Experiment, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    match experiment {
        Experiment::LsqStats => {
            let rows = exp_lsq_stats(cfg)?;
            Ok(single("lsq_stats", rule_stats::lsq_table(&rows), cfg, &["lsq-stats"]))
        }
        Experiment::RecStats => {
            let rows = exp_rec_stats(cfg)?;
            Ok(single("rec_stats", rule_stats::rec_table(&rows), cfg, &["points"]))
        }
        Experiment::Localization => {
            let rows = exp_localization(cfg)?;
            Ok(single(
                "localization",
                localization::table(&rows),
                cfg,
                &["test", "cap"],
            ))
        }
        Experiment::Percentiles => {
            let rows = exp_error_percentiles(cfg)?;
            Ok(single(
                "percentiles",
                percentiles::table(&rows),
                cfg,
                &["points", "test"],
            ))
        }
        Experiment::Noise => {
            let res = exp_noise(cfg)?;
            let mut out = single("noise", noise::table(&res.rows), cfg, &["points", "test"]);
            out.tables
                .push(("noise_linearity".into(), noise::linearity_table(&res.linearity)));
            for (i, _) in cfg.noise_scales.iter().enumerate() {
                for kind in ["uniform", "gaussian"] {
                    let tag = format!("noise-{kind}");
                    out.seeds
                        .insert(format!("{tag}[{i}]"), derive_seed(cfg.seed, &tag, i as u64));
                }
            }
            Ok(out)
        }
    }
}

fn single(stem: &str, table: ResultTable, cfg: &ExperimentConfig, tags: &[&str]) -> ExperimentOutput {
    let mut seeds = BTreeMap::new();
    seeds.insert("master".to_string(), cfg.seed);
    for t in tags {
        seeds.insert(t.to_string(), derive_seed(cfg.seed, t, 0));
    }
    ExperimentOutput {
        tables: vec![(stem.to_string(), table)],
        seeds,
    }
}

/// Run `experiment`, write `<dir>/<stem>.csv` for every table and
/// `<dir>/<experiment>.provenance.json`. Returns the written paths.
pub fn run_to_dir(experiment: Experiment, cfg: &ExperimentConfig, full: bool, dir: &Path) -> Result<Vec<PathBuf>> {
    let start = Instant::now();
    let out = run(experiment, cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (stem, table) in &out.tables {
        let path = dir.join(format!("{stem}.csv"));
        std::fs::write(&path, table.to_csv()?)?;
        paths.push(path);
    }
    let prov = Provenance {
        experiment,
        full,
        config: cfg.clone(),
        seeds: out.seeds,
        wall_time_s: elapsed,
        threads: thread_count(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        tables: out.tables.iter().map(|(s, _)| format!("{s}.csv")).collect(),
    };
    let path = dir.join(format!("{}.provenance.json", experiment.name()));
    crate::io::write_json(&path, &prov)?;
    paths.push(path);
    Ok(paths)
}

fn thread_count() -> usize {
    #[cfg(feature = "parallel")]
    if crate::exec::is_parallel() {
        return rayon::current_num_threads();
    }
    1
}
