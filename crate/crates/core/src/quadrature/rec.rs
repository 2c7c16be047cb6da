use serde::{Deserialize, Serialize};

use super::verify::exactness_profile;
use super::QuadratureRule;
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{PointSet, UnitPoint};

/// Coordinate multiplying a parent basis function in the recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// `u_{k+1} = axis * u_{parent}` with 1-based `parent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderStep {
    pub parent: usize,
    pub axis: Axis,
}

/// Monomials `x^a y^b z^c`, `c <= 1`, spanning the spherical polynomials of
/// degree `<= max_degree` (`z^2 = 1 - x^2 - y^2` on the sphere).
///
/// Ordered by total degree; within a degree the `z`-free monomials come
/// first with `a` descending, followed by the `z`-linear ones in the same
/// order. Every prefix is closed under both ladders of [`LadderRule`].
pub fn monomials(max_degree: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity((max_degree + 1) * (max_degree + 1));
    for d in 0..=max_degree as u32 {
        for b in 0..=d {
            out.push([d - b, b, 0]);
        }
        for b in 0..d {
            out.push([d - 1 - b, b, 1]);
        }
    }
    out
}

/// 0-based position of a monomial in [`monomials`].
pub fn monomial_index(m: [u32; 3]) -> usize {
    let [a, b, c] = m;
    assert!(c <= 1);
    let d = (a + b + c) as usize;
    d * d + if c == 0 { b as usize } else { d + 1 + b as usize }
}

fn degree_of(index: usize) -> usize {
    index.isqrt()
}

/// How the parent of each new basis function is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LadderRule {
    /// `x^a y^b` from `x^(a-1) y^b`, so the parent sits at the same position
    /// of the previous degree block; pure powers of `y` come from `y`.
    #[default]
    Aligned,
    /// The smallest admissible parent index, which grows `x^a y^b` through
    /// powers of `y`.
    MinimalIndex,
}

fn ladder_step(target: [u32; 3], rule: LadderRule) -> LadderStep {
    let [a, b, c] = target;
    let (parent, axis) = if c == 1 {
        ([a, b, 0], Axis::Z)
    } else if b == 0 || (rule == LadderRule::Aligned && a > 0) {
        ([a - 1, b, 0], Axis::X)
    } else {
        ([a, b - 1, 0], Axis::Y)
    };
    LadderStep {
        parent: monomial_index(parent) + 1,
        axis,
    }
}

/// For `k = 1..=count`, the smallest `p(k)` with `u_{k+1} = f_k u_{p(k)}` for a
/// coordinate `f_k`.
pub fn monomial_ladder(q: u32, count: usize) -> Result<Vec<LadderStep>> {
    if q != 2 {
        return Err(Error::InvalidParameter(format!(
            "monomial ladder is implemented for the 2-sphere, got q = {q}"
        )));
    }
    let mut d = 0;
    while (d + 1) * (d + 1) < count + 1 {
        d += 1;
    }
    let monos = monomials(d);
    Ok((1..=count)
        .map(|k| ladder_step(monos[k], LadderRule::MinimalIndex))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecOptions {
    /// Stop when the orthogonalized remainder has squared norm at most this
    /// fraction of the squared norm before orthogonalization.
    pub breakdown_tol: f64,
    /// Second Gram-Schmidt sweep over the window.
    pub reorthogonalize: bool,
    /// Threshold used when certifying the achieved degree.
    pub certify_tol: f64,
    /// Number of trailing degrees orthogonalized against (at least 3).
    pub window_degrees: usize,
    pub ladder: LadderRule,
}

impl Default for RecOptions {
    fn default() -> Self {
        Self {
            breakdown_tol: 1e-24,
            reorthogonalize: true,
            certify_tol: 1e-8,
            window_degrees: 3,
            ladder: LadderRule::Aligned,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecResult {
    /// Rule whose `exactness_degree` is the certified degree.
    pub rule: QuadratureRule,
    pub achieved_degree: usize,
    /// Number of orthonormal polynomials generated.
    pub terms: usize,
    /// Whether the recurrence stopped before reaching the target degree.
    pub breakdown: bool,
}

const DOT_CHUNK: usize = 4096;

fn weighted_dot(v: &[f64], a: &[f64], b: &[f64]) -> f64 {
    exec::map_chunks(v, DOT_CHUNK, |off, vc| {
        vc.iter()
            .enumerate()
            .map(|(i, w)| w * a[off + i] * b[off + i])
            .sum::<f64>()
    })
    .into_iter()
    .sum()
}

fn scaled_sub(s: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= s * xi;
    }
}

/// Values of one orthonormal polynomial on the nodes and on the seed nodes.
struct Term {
    on_nodes: Vec<f64>,
    on_seed: Vec<f64>,
}

fn coordinate(points: &[UnitPoint], axis: usize) -> Vec<f64> {
    points.iter().map(|p| p.coords()[axis]).collect()
}

/// Quadrature weights from the three-term-window recurrence for polynomials
/// orthonormal with respect to the node measure `v` of `set`.
///
/// Orthonormal `t_1, t_2, ...` are generated by multiplying a parent by a
/// coordinate and orthogonalizing against the preceding terms of the last
/// three degrees. The weight function `W = sum_k gamma_k t_k` with
/// `gamma_k` the `seed` rule's integral of `t_k` gives weights
/// `w_xi = v_xi W(xi)`. The certified degree is the largest degree passing
/// the Gram-matrix check at `opts.certify_tol`.
pub fn rec_weights(set: &PointSet, degree: usize, seed: &QuadratureRule, opts: &RecOptions) -> Result<RecResult> {
    if seed.exactness_degree() < degree {
        return Err(Error::InvalidParameter(format!(
            "seed rule is exact to degree {}, below the target {degree}",
            seed.exactness_degree()
        )));
    }
    if degree > super::lsq::MAX_LSQ_DEGREE {
        return Err(Error::ResourceLimit(format!("degree {degree} is too large")));
    }
    let window = opts.window_degrees.max(3);
    let nu = set.measure();
    let lambda = seed.weights();
    let node_xyz: Vec<Vec<f64>> = (0..3).map(|a| coordinate(set.points(), a)).collect();
    let seed_xyz: Vec<Vec<f64>> = (0..3).map(|a| coordinate(seed.nodes(), a)).collect();
    let target = (degree + 1) * (degree + 1);
    let monos = monomials(degree);

    let mut terms: Vec<Option<Term>> = Vec::with_capacity(target);
    let mut w_nodes = vec![0.0; set.len()];
    let mut breakdown = false;

    for k in 0..target {
        let (mut f, mut fs) = if k == 0 {
            (vec![1.0; set.len()], vec![1.0; seed.len()])
        } else {
            let step = ladder_step(monos[k], opts.ladder);
            let parent = terms[step.parent - 1].as_ref().expect("parent row retained");
            let ax = step.axis.index();
            (
                parent
                    .on_nodes
                    .iter()
                    .zip(&node_xyz[ax])
                    .map(|(t, c)| t * c)
                    .collect::<Vec<_>>(),
                parent
                    .on_seed
                    .iter()
                    .zip(&seed_xyz[ax])
                    .map(|(t, c)| t * c)
                    .collect::<Vec<_>>(),
            )
        };
        let scale = weighted_dot(nu, &f, &f);
        let d = degree_of(k);
        let lo = d.saturating_sub(window - 1).pow(2);
        let sweeps = if opts.reorthogonalize { 2 } else { 1 };
        for _ in 0..sweeps {
            for t in terms[lo..k].iter().flatten() {
                let s = weighted_dot(nu, &f, &t.on_nodes);
                scaled_sub(s, &t.on_nodes, &mut f);
                scaled_sub(s, &t.on_seed, &mut fs);
            }
        }
        let rem = weighted_dot(nu, &f, &f);
        if !(rem > opts.breakdown_tol * scale) {
            breakdown = true;
            break;
        }
        let inv = 1.0 / rem.sqrt();
        f.iter_mut().for_each(|v| *v *= inv);
        fs.iter_mut().for_each(|v| *v *= inv);
        let gamma: f64 = lambda.iter().zip(&fs).map(|(l, t)| l * t).sum();
        w_nodes.iter_mut().zip(&f).for_each(|(w, t)| *w += gamma * t);
        terms.push(Some(Term {
            on_nodes: f,
            on_seed: fs,
        }));
        // entering degree d + 1 next: rows of degree d + 1 - window leave every window
        if k + 1 == (d + 1) * (d + 1) && d + 1 >= window {
            let e = d + 1 - window;
            for t in &mut terms[e * e..(e + 1) * (e + 1)] {
                *t = None;
            }
        }
    }

    let count = terms.len();
    if count < 9 {
        return Err(Error::ConstructionFailure {
            message: format!("recurrence broke down after {count} terms, before degree 2"),
            residual: f64::NAN,
        });
    }
    let mut full_degree = 1;
    while (full_degree + 2) * (full_degree + 2) <= count {
        full_degree += 1;
    }
    let weights: Vec<f64> = w_nodes.iter().zip(nu).map(|(w, v)| w * v).collect();
    let mut rule = QuadratureRule::new(set.points().to_vec(), weights, full_degree)?;
    let profile = exactness_profile(&rule, full_degree);
    let passed = profile.iter().take_while(|e| **e <= opts.certify_tol).count();
    let achieved = if passed == 0 {
        0
    } else {
        (2 * (passed - 1) + 1).min(full_degree)
    };
    rule.exactness_degree = achieved;
    Ok(RecResult {
        rule,
        achieved_degree: achieved,
        terms: count,
        breakdown,
    })
}
