//! Test functions with singularities of varying strength at known places.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{geodesic_dist, UnitPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkFn {
    /// `(x1 - 0.9)_+^{3/4} + (x3 - 0.9)_+^{3/4}`
    G1,
    /// `[0.01 - (x1^2 + x2^2 + (x3 - 1)^2)]_+ + exp(x1 + x2 + x3)`
    G2,
    /// `1 / (101 - 100 x3)`
    G3,
    /// `1 / (|x1| + |x2| + |x3|)`
    G4,
    /// `cos^2(3 pi / 2 * d)` for geodesic distance `d < 1/3` from
    /// `(-1/2, -1/2, 1/sqrt 2)`, zero elsewhere.
    G5,
}

fn plus(t: f64) -> f64 {
    t.max(0.0)
}

fn g5_center() -> UnitPoint {
    UnitPoint::new(-0.5, -0.5, FRAC_1_SQRT_2).expect("center lies on the sphere")
}

impl BenchmarkFn {
    pub const ALL: [BenchmarkFn; 5] = [Self::G1, Self::G2, Self::G3, Self::G4, Self::G5];

    pub fn eval(self, x: &UnitPoint) -> f64 {
        let [x1, x2, x3] = *x.coords();
        match self {
            Self::G1 => plus(x1 - 0.9).powf(0.75) + plus(x3 - 0.9).powf(0.75),
            Self::G2 => plus(0.01 - (x1 * x1 + x2 * x2 + (x3 - 1.0) * (x3 - 1.0))) + (x1 + x2 + x3).exp(),
            Self::G3 => 1.0 / (101.0 - 100.0 * x3),
            Self::G4 => 1.0 / (x1.abs() + x2.abs() + x3.abs()),
            Self::G5 => {
                let d = geodesic_dist(x, &g5_center());
                if d < 1.0 / 3.0 {
                    (1.5 * PI * d).cos().powi(2)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::G1 => "g1",
            Self::G2 => "g2",
            Self::G3 => "g3",
            Self::G4 => "g4",
            Self::G5 => "g5",
        }
    }
}

impl fmt::Display for BenchmarkFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown benchmark function '{s}'")))
    }
}

/// `id` at `x`.
pub fn benchmark_eval(id: BenchmarkFn, x: &UnitPoint) -> f64 {
    id.eval(x)
}
