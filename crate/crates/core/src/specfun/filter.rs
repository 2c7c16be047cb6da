use crate::error::{Error, Result};

/// Cardinal B-spline of order `m`, supported on `(0, m]`.
///
/// Evaluated bottom-up through the two-term recursion, O(m^2) per call.
/// The order-1 spline is the indicator of the half-open interval `(0, 1]`.
pub fn bspline_eval(m: u32, x: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("B-spline order must be >= 1".into()));
    }
    Ok(bspline(m as usize, x))
}

fn bspline(m: usize, x: f64) -> f64 {
    if !(x > 0.0 && x <= m as f64) {
        return 0.0;
    }
    // vals[i] holds B_j(x - i) for the current order j.
    let mut vals: Vec<f64> = (0..m)
        .map(|i| {
            let y = x - i as f64;
            if y > 0.0 && y <= 1.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for j in 2..=m {
        let inv = 1.0 / (j - 1) as f64;
        for i in 0..=(m - j) {
            let y = x - i as f64;
            vals[i] = (y * vals[i] + (j as f64 - y) * vals[i + 1]) * inv;
        }
    }
    vals[0]
}

/// Low-pass filter `h_m(x) = sum_{k=-m}^{m} B_m(2 m x - k)`.
///
/// `h_m` is 1 on `[0, 1/2]`, 0 beyond 1 and non-increasing in between. For
/// `m >= 3` its smoothness order is `S = m - 1`. `h_1` is the sharp cutoff,
/// i.e. the indicator of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Filter {
    order: u32,
}

impl Filter {
    pub fn new(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("filter order must be >= 1".into()));
        }
        Ok(Self { order })
    }

    /// The sharp cutoff `h_1`.
    pub fn cutoff() -> Self {
        Self { order: 1 }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn smoothness(&self) -> u32 {
        self.order - 1
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("filter argument must be >= 0, got {x}")));
        }
        Ok(self.value(x))
    }

    /// Evaluation for `x >= 0` without the domain check.
    pub(crate) fn value(&self, x: f64) -> f64 {
        let m = self.order as usize;
        if x <= 0.5 {
            return 1.0;
        }
        if x > 1.0 {
            return 0.0;
        }
        let y = 2.0 * m as f64 * x;
        let s: f64 = (-(m as i64)..=m as i64).map(|k| bspline(m, y - k as f64)).sum();
        s.clamp(0.0, 1.0)
    }
}
