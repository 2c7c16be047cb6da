//! The localized kernel
//!
//! ```text
//! Phi_n(h; u) = sum_{l=0}^{n} h(l/n) d_l^q P_l(u)
//! ```
//!
//! with `P_l` the Gegenbauer polynomial normalized by `P_l(1) = 1`. This is
//! the filtered reproducing kernel written through the addition formula; it
//! equals `c_q sum_l h(l/n) p_l(1) p_l(u)` for the orthonormal Jacobi `p_l`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::UnitPoint;
use crate::linalg::gauss_legendre;
use crate::specfun::{dim_harmonic, jacobi_weight_mass, Filter, GegenbauerRecurrence};

/// Sphere dimension, degree and filter of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub q: u32,
    pub degree: usize,
    pub filter: Filter,
}

impl KernelSpec {
    pub fn new(q: u32, degree: usize, filter: Filter) -> Result<Self> {
        if q < 1 {
            return Err(Error::InvalidParameter("q must be >= 1".into()));
        }
        if degree < 1 {
            return Err(Error::InvalidParameter("kernel degree must be >= 1".into()));
        }
        Ok(Self { q, degree, filter })
    }
}

/// Kernel with its expansion coefficients `h(l/n) d_l^q` precomputed.
#[derive(Debug, Clone)]
pub struct Kernel {
    q: u32,
    coeffs: Vec<f64>,
    rec: GegenbauerRecurrence,
    a: Vec<f64>,
    beta: Vec<f64>,
}

impl Kernel {
    pub fn new(spec: &KernelSpec) -> Self {
        let n = spec.degree as f64;
        Self::with_filter_fn(spec.q, spec.degree, |x| spec.filter.value(x))
            .trimmed(|l| spec.filter.value(l as f64 / n) > 0.0)
    }

    /// Kernel with an arbitrary filter function evaluated at `l / n`.
    pub fn with_filter_fn(q: u32, n: usize, h: impl Fn(f64) -> f64) -> Self {
        let coeffs: Vec<f64> = (0..=n)
            .map(|l| h(l as f64 / n as f64) * dim_harmonic(q, l as u32) as f64)
            .collect();
        Self::from_coefficients(q, coeffs)
    }

    /// Kernel `sum_l coeffs[l] P_l(u)`.
    pub fn from_coefficients(q: u32, coeffs: Vec<f64>) -> Self {
        let rec = GegenbauerRecurrence::new(q);
        let len = coeffs.len();
        let a = (0..len + 1).map(|l| if l == 0 { 1.0 } else { rec.a(l) }).collect();
        let beta = (0..len + 2).map(|l| if l == 0 { 0.0 } else { rec.beta(l) }).collect();
        Self {
            q,
            coeffs,
            rec,
            a,
            beta,
        }
    }

    fn trimmed(mut self, keep: impl Fn(usize) -> bool) -> Self {
        while self.coeffs.len() > 1 && !keep(self.coeffs.len() - 1) {
            self.coeffs.pop();
        }
        self
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Expansion coefficients `h(l/n) d_l^q`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Clenshaw summation; `u` must lie in `[-1, 1]`.
    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        let c = &self.coeffs;
        let n = c.len() - 1;
        if n == 0 {
            return c[0];
        }
        let (mut b1, mut b2) = (0.0, 0.0);
        for k in (1..=n).rev() {
            let b = c[k] + self.a[k] * u * b1 + self.beta[k + 1] * b2;
            b2 = b1;
            b1 = b;
        }
        c[0] + u * b1 + self.beta[1] * b2
    }

    /// Forward summation with explicitly generated `P_l(u)`; reference path.
    pub fn value_forward(&self, u: f64) -> f64 {
        let n = self.coeffs.len() - 1;
        let (mut p0, mut p1) = (1.0, u);
        let mut s = self.coeffs[0];
        if n >= 1 {
            s += self.coeffs[1] * u;
        }
        for l in 1..n {
            let p2 = self.rec.a(l) * u * p1 + self.rec.beta(l) * p0;
            s += self.coeffs[l + 1] * p2;
            p0 = p1;
            p1 = p2;
        }
        s
    }

    /// Value at `u = 1`, the sum of the coefficients.
    pub fn peak(&self) -> f64 {
        self.coeffs.iter().sum()
    }
}

/// `Phi_n(h; u)` for `u` in `[-1, 1]`.
pub fn kernel_eval(spec: &KernelSpec, u: f64) -> Result<f64> {
    if !(u.abs() <= 1.0) {
        return Err(Error::Domain(format!("kernel argument must lie in [-1, 1], got {u}")));
    }
    Ok(Kernel::new(spec).value(u))
}

/// `[Phi_n(h; x . xi)]` over `nodes`.
pub fn kernel_row(spec: &KernelSpec, x: &UnitPoint, nodes: &[UnitPoint]) -> Vec<f64> {
    let k = Kernel::new(spec);
    let mut out = vec![0.0; nodes.len()];
    crate::exec::fill_chunks(&mut out, 1024, |off, chunk| {
        for (i, o) in chunk.iter_mut().enumerate() {
            *o = k.value(x.dot(&nodes[off + i]).clamp(-1.0, 1.0));
        }
    });
    out
}

/// Norm and decay summary of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelDiagnostics {
    /// `int |Phi_n(h; x . z)| dmu(z)`.
    pub l1_norm: f64,
    /// `int Phi_n(h; x . z)^2 dmu(z)`.
    pub l2_norm_sq: f64,
    /// `Phi_n(h; 1)`.
    pub peak: f64,
    /// Least-squares slope of `log |Phi_n(h; cos theta)|` against
    /// `log(n theta)` for `theta` in `[4/n, 1.5]`.
    pub decay_slope: f64,
}

/// Integrate a zonal function `g(x . z)` against the normalized surface
/// measure: `(1/c_q) int_0^pi g(cos t) sin^{q-1} t dt`, composite
/// Gauss-Legendre in the angle with `panels` panels of `order` nodes.
pub fn zonal_integral(q: u32, g: impl Fn(f64) -> f64, panels: usize, order: usize) -> f64 {
    let (gx, gw) = gauss_legendre(order);
    let h = std::f64::consts::PI / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, w) in gx.iter().zip(&gw) {
            let t = a + 0.5 * h * (x + 1.0);
            s += 0.5 * h * w * g(t.cos()) * t.sin().powi(q as i32 - 1);
        }
    }
    s / jacobi_weight_mass(q)
}

const DECAY_SAMPLES: usize = 4000;
const DECAY_ZERO_FLOOR: f64 = 1e-13;

/// Norms, peak and decay slope of `Phi_n(h; .)`.
pub fn kernel_diagnostics(spec: &KernelSpec) -> KernelDiagnostics {
    let k = Kernel::new(spec);
    let n = spec.degree;
    // the kernel oscillates with period ~ pi/n; 4 panels per oscillation
    let panels = 4 * (n + 2);
    let l1 = zonal_integral(spec.q, |u| k.value(u).abs(), panels, 16);
    let l2 = zonal_integral(spec.q, |u| k.value(u).powi(2), panels, 16);
    let peak = k.peak();

    let (t0, t1) = (4.0 / n as f64, 1.5f64);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    if t0 < t1 {
        for i in 0..DECAY_SAMPLES {
            let t = t0 + (t1 - t0) * i as f64 / (DECAY_SAMPLES - 1) as f64;
            let v = k.value(t.cos()).abs();
            if v >= DECAY_ZERO_FLOOR * peak.abs() {
                xs.push((n as f64 * t).ln());
                ys.push(v.ln());
            }
        }
    }
    KernelDiagnostics {
        l1_norm: l1,
        l2_norm_sq: l2,
        peak,
        decay_slope: ls_slope(&xs, &ys),
    }
}

pub(crate) fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
