//! Gauss–Legendre rules with adaptive interval bisection.
//!
//! Used as the independent oracle for the analytic fractional integrals and
//! for cross-cell integrals when the basis has more than one translation.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Node count of the base rule applied on every panel.
pub const BASE_NODES: usize = 64;
pub const ABS_TOL: f64 = 1e-12;
pub const REL_TOL: f64 = 1e-12;
pub const MAX_DEPTH: u32 = 20;

/// Exponent of the polynomial sigmoid used to grade both interval ends.
const GRADING_POWER: i32 = 4;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1], found by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Vector-valued variant: `f(x, out)` fills `out` (length `acc.len()`).
    pub fn integrate_into<F: FnMut(f64, &mut [f64])>(&self, f: &mut F, a: f64, b: f64, acc: &mut [f64]) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut buf = vec![0.0; acc.len()];
        acc.iter_mut().for_each(|v| *v = 0.0);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            f(mid + half * x, &mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += w * b;
            }
        }
        acc.iter_mut().for_each(|v| *v *= half);
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn base_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(BASE_NODES))
}

/// Adaptive integration of a vector-valued integrand over [a, b].
///
/// Each panel is split in two until the halves agree with the parent estimate
/// to [`ABS_TOL`] or [`REL_TOL`] (max norm). Panels still unresolved at
/// [`MAX_DEPTH`] produce [`Error::Accuracy`].
pub fn adaptive_vec<F>(mut f: F, a: f64, b: f64, dim: usize) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    let rule = base_rule();
    let mut whole = vec![0.0; dim];
    rule.integrate_into(&mut f, a, b, &mut whole);
    let mut total = vec![0.0; dim];
    let mut worst = 0.0_f64;
    refine(rule, &mut f, a, b, &whole, 0, &mut total, &mut worst);
    if worst > 0.0 {
        let estimate = total.iter().fold(0.0_f64, |m, v| if v.abs() > m.abs() { *v } else { m });
        return Err(Error::Accuracy {
            estimate,
            difference: worst,
        });
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: FnMut(f64, &mut [f64])>(
    rule: &GaussLegendre,
    f: &mut F,
    a: f64,
    b: f64,
    whole: &[f64],
    depth: u32,
    total: &mut [f64],
    worst: &mut f64,
) {
    let mid = 0.5 * (a + b);
    let mut left = vec![0.0; whole.len()];
    let mut right = vec![0.0; whole.len()];
    rule.integrate_into(f, a, mid, &mut left);
    rule.integrate_into(f, mid, b, &mut right);
    let mut diff = 0.0_f64;
    let mut size = 0.0_f64;
    for i in 0..whole.len() {
        let s = left[i] + right[i];
        diff = diff.max((s - whole[i]).abs());
        size = size.max(s.abs());
    }
    if diff <= ABS_TOL || diff <= REL_TOL * size {
        for i in 0..whole.len() {
            total[i] += left[i] + right[i];
        }
        return;
    }
    if depth >= MAX_DEPTH {
        *worst = worst.max(diff);
        for i in 0..whole.len() {
            total[i] += left[i] + right[i];
        }
        return;
    }
    refine(rule, f, a, mid, &left, depth + 1, total, worst);
    refine(rule, f, mid, b, &right, depth + 1, total, worst);
}

pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> Result<f64> {
    adaptive_vec(|x, out| out[0] = f(x), a, b, 1).map(|v| v[0])
}

/// Maps y ∈ [0, 1] to v ∈ [0, 1] with both ends flattened to order
/// [`GRADING_POWER`]; returns `(v, dv/dy)`.
pub(crate) fn sigmoid_grade(y: f64) -> (f64, f64) {
    let p = GRADING_POWER;
    let a = y.powi(p);
    let b = (1.0 - y).powi(p);
    let s = a + b;
    let v = a / s;
    let dv = f64::from(p) * (y.powi(p - 1) * b + a * (1.0 - y).powi(p - 1)) / (s * s);
    (v, dv)
}

/// Adaptive integral over [0, 1] after sigmoidal grading of both ends, which
/// absorbs integrable power-type endpoint singularities.
pub fn adaptive_graded_unit<F: FnMut(f64) -> f64>(mut f: F) -> Result<f64> {
    adaptive(
        |y| {
            let (v, dv) = sigmoid_grade(y);
            if dv == 0.0 {
                0.0
            } else {
                f(v) * dv
            }
        },
        0.0,
        1.0,
    )
}

pub fn adaptive_graded_unit_vec<F: FnMut(f64, &mut [f64])>(mut f: F, dim: usize) -> Result<Vec<f64>> {
    adaptive_vec(
        |y, out| {
            let (v, dv) = sigmoid_grade(y);
            if dv == 0.0 {
                out.iter_mut().for_each(|o| *o = 0.0);
            } else {
                f(v, out);
                out.iter_mut().for_each(|o| *o *= dv);
            }
        },
        0.0,
        1.0,
        dim,
    )
}
