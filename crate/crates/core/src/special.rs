//! Scalar special functions and the Chebyshev collocation grid.

use std::f64::consts::PI;

use crate::error::{Error, Result};

// Lanczos coefficients for g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Lanczos sum on the reduced argument `z = x - 1`, valid for `x >= 0.5`.
fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * sum
}

/// Γ(x) for real, non-pole `x`.
///
/// Positive integers up to 171 come from an exact running product; other
/// arguments are shifted into [1, 2) with the recurrence and evaluated there
/// with a Lanczos sum, which keeps the relative error near a few ulps across
/// the range the basis needs. Negative non-integers use reflection.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("gamma of non-finite argument {x}")));
    }
    if is_pole(x) {
        return Err(Error::domain(format!("gamma has a pole at {x}")));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    if x == x.floor() && x <= 171.0 {
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }
    if x > 20.0 {
        return lanczos(x);
    }
    let mut y = x;
    let mut scale = 1.0;
    while y >= 2.0 {
        y -= 1.0;
        scale *= y;
    }
    while y < 1.0 {
        scale /= y;
        y += 1.0;
    }
    scale * lanczos(y)
}

/// Generalized binomial coefficient `a1! / (a2! (a1 - a2)!)`, factorials read
/// as Γ(1 + ·).
///
/// A pole in the denominator alone gives the limit value 0; negative integral
/// `a1` uses the limit of the pole ratio.
pub fn gen_binomial(a1: f64, a2: u32) -> Result<f64> {
    if !a1.is_finite() {
        return Err(Error::domain(format!("binomial of non-finite {a1}")));
    }
    let k = f64::from(a2);
    if a1 >= 0.0 && a1 == a1.floor() {
        if a1 < k {
            return Ok(0.0);
        }
        // Multiplicative form is exact for every integer case the basis uses.
        let n = a1;
        let k = k.min(n - k);
        let mut acc = 1.0;
        let mut i = 0.0;
        while i < k {
            acc = acc * (n - i) / (i + 1.0);
            i += 1.0;
        }
        return Ok(acc.round());
    }
    let num_arg = a1 + 1.0;
    let rest_arg = a1 - k + 1.0;
    if is_pole(num_arg) {
        // With integral a2 a numerator pole forces a denominator pole too; the
        // finite limit of the ratio is the falling product.
        let mut acc = 1.0;
        for i in 0..a2 {
            acc *= a1 - f64::from(i);
        }
        return Ok(acc / gamma_unchecked(k + 1.0));
    }
    if is_pole(rest_arg) {
        return Ok(0.0);
    }
    Ok(gamma_unchecked(num_arg) / (gamma_unchecked(k + 1.0) * gamma_unchecked(rest_arg)))
}

/// Collocation points strictly inside (0, 1), sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevGrid {
    points: Vec<f64>,
}

impl ChebyshevGrid {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Builds a grid from arbitrary interior points, e.g. a permuted copy.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::arg("collocation grid must not be empty"));
        }
        if points.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(Error::arg("collocation points must lie strictly inside (0, 1)"));
        }
        Ok(Self { points })
    }
}

/// `t_r = cos((r - 1/2) π / n) / 2 + 1/2` for `r = 1..=n`, returned ascending.
pub fn chebyshev_grid(sigma_tilde: usize) -> Result<ChebyshevGrid> {
    if sigma_tilde == 0 {
        return Err(Error::arg("chebyshev grid size must be at least 1"));
    }
    let n = sigma_tilde as f64;
    let mut points: Vec<f64> = (1..=sigma_tilde)
        .map(|r| 0.5 * ((r as f64 - 0.5) * PI / n).cos() + 0.5)
        .collect();
    points.reverse();
    Ok(ChebyshevGrid { points })
}
