use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use super::{derive_seed, num, BenchmarkFn, ExperimentConfig, ResultTable};
use crate::error::Result;
use crate::geometry::{random_points, SphericalCap, UnitPoint};
use crate::operators::{fourier_coeffs, sample};
use crate::quadrature::reference_rule;
use crate::specfun::Filter;

/// Cap away from both singularities of `g1`.
pub const CAP_RADIUS: f64 = 0.4510;

pub fn localization_cap() -> SphericalCap {
    let c = UnitPoint::new(-FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2).expect("center lies on the sphere");
    SphericalCap::new(c, CAP_RADIUS).expect("radius is valid")
}

/// Sup errors of `sigma_n(h_m; g1)` for each configured filter order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationRow {
    pub n: usize,
    pub filters: Vec<u32>,
    /// Over random points of the whole sphere.
    pub sphere_err: Vec<f64>,
    /// Over random points of the cap.
    pub cap_err: Vec<f64>,
}

/// Global and cap-restricted errors for `g1` with the product rule of
/// degree `2n`.
pub fn exp_localization(cfg: &ExperimentConfig) -> Result<Vec<LocalizationRow>> {
    let f = |x: &UnitPoint| BenchmarkFn::G1.eval(x);
    let sphere = random_points(derive_seed(cfg.seed, "test", 0), cfg.test_points.max(1))?
        .into_parts()
        .0;
    let cap = localization_cap().random_points(derive_seed(cfg.seed, "cap", 0), cfg.cap_points.max(1));
    let exact_sphere = sample(&f, &sphere);
    let exact_cap = sample(&f, &cap);
    let filters: Vec<Filter> = cfg.filters.iter().map(|&m| Filter::new(m)).collect::<Result<_>>()?;
    let sup = |approx: &[f64], exact: &[f64]| approx.iter().zip(exact).map(|(a, e)| (a - e).abs()).fold(0.0, f64::max);
    let mut rows = Vec::new();
    for &n in &cfg.degrees {
        let rule = reference_rule(2 * n)?;
        let z = sample(&f, rule.nodes());
        let coeffs = fourier_coeffs(&rule, &z, n)?;
        let mut row = LocalizationRow {
            n,
            filters: cfg.filters.clone(),
            sphere_err: Vec::new(),
            cap_err: Vec::new(),
        };
        for h in &filters {
            let c = coeffs.filtered(h, n);
            row.sphere_err.push(sup(&c.synthesize(&sphere), &exact_sphere));
            row.cap_err.push(sup(&c.synthesize(&cap), &exact_cap));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub(super) fn table(rows: &[LocalizationRow]) -> ResultTable {
    let filters = rows.first().map(|r| r.filters.clone()).unwrap_or_default();
    let mut header = vec!["n".to_string()];
    header.extend(filters.iter().map(|m| format!("S2errh{m}")));
    header.extend(filters.iter().map(|m| format!("Kerrh{m}")));
    let mut t = ResultTable {
        header,
        rows: Vec::new(),
    };
    for r in rows {
        let mut row = vec![r.n.to_string()];
        row.extend(r.sphere_err.iter().map(|v| num(*v)));
        row.extend(r.cap_err.iter().map(|v| num(*v)));
        t.push(row);
    }
    t
}
