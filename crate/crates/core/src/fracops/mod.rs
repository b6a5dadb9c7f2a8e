//! Riemann–Liouville integrals and Caputo derivatives of order in (1, 2].
//!
//! Integrals act termwise on [`FracMonomialSeries`] inside a basis function's
//! own cell. Beyond the cell, integer orders continue as an exact Taylor tail
//! and fractional orders fall back to adaptive quadrature.

pub mod quadrature;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::basis::{wavelet_family, BasisIndex, FracMonomialSeries, WaveletBasisSpec};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::special::gamma_unchecked;

/// Number of points in the validation probe of an [`OrderFunction`].
pub const PROBE_POINTS: usize = 1001;

/// Derivative order `α(t)`, required to lie in (1, 2] for `t > 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderFunction {
    Constant(f64),
    Expression(Expr),
}

impl OrderFunction {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 1.0 && c <= 2.0) {
            return Err(Error::domain(format!("order {c} outside (1, 2]")));
        }
        Ok(OrderFunction::Constant(c))
    }

    /// Validates `e` on `t = i / 1000`, `i = 0..=1000`. At `t = 0` the limit
    /// value 1 is tolerated, since every operator is evaluated for `t > 0`.
    pub fn expression(e: Expr) -> Result<Self> {
        if !e.depends_on_t() {
            return Self::constant(e.eval(0.0));
        }
        let last = (PROBE_POINTS - 1) as f64;
        for i in 0..PROBE_POINTS {
            let t = i as f64 / last;
            let a = e.eval(t);
            let ok = if i == 0 { (1.0..=2.0).contains(&a) } else { a > 1.0 && a <= 2.0 };
            if !ok {
                return Err(Error::domain(format!("order `{e}` evaluates to {a} at t = {t}, outside (1, 2]")));
            }
        }
        Ok(OrderFunction::Expression(e))
    }

    /// A plain number gives a constant order, anything else an expression.
    pub fn parse(src: &str) -> Result<Self> {
        match src.trim().parse::<f64>() {
            Ok(c) => Self::constant(c),
            Err(_) => Self::expression(Expr::parse(src)?),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            OrderFunction::Constant(c) => *c,
            OrderFunction::Expression(e) => e.eval(t),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            OrderFunction::Constant(c) => Some(*c),
            OrderFunction::Expression(_) => None,
        }
    }

    /// `α(t)`, or a domain error when it leaves (1, 2].
    pub fn checked(&self, t: f64) -> Result<f64> {
        let a = self.eval(t);
        if !(a > 1.0 && a <= 2.0) {
            return Err(Error::domain(format!("order {a} at t = {t} outside (1, 2]")));
        }
        Ok(a)
    }
}

impl fmt::Display for OrderFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderFunction::Constant(c) => write!(f, "{c}"),
            OrderFunction::Expression(e) => write!(f, "{e}"),
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::arg(format!("integral order {lambda} must be positive")));
    }
    Ok(())
}

/// `I^λ` of a series on its own cell, in the same local coordinate:
/// `c s^p ↦ w^λ c Γ(p+1)/Γ(p+1+λ) s^(p+λ)`.
fn rl_integral_local(f: &FracMonomialSeries, lambda: f64) -> FracMonomialSeries {
    let scale = f.width().powf(lambda);
    let terms = f
        .terms()
        .iter()
        .map(|&(c, p)| (scale * c * gamma_unchecked(p + 1.0) / gamma_unchecked(p + 1.0 + lambda), p + lambda))
        .collect();
    let (lo, hi) = f.support();
    FracMonomialSeries::from_sorted_unchecked(terms, lo, hi)
}

/// Termwise `I^λ` of a series supported on all of [0, 1].
pub fn rl_integral_series(f: &FracMonomialSeries, lambda: f64) -> Result<FracMonomialSeries> {
    check_lambda(lambda)?;
    if f.support() != (0.0, 1.0) {
        let (lo, hi) = f.support();
        return Err(Error::arg(format!(
            "analytic integral needs support [0, 1], got [{lo}, {hi}]; use rl_integral_quadrature"
        )));
    }
    Ok(rl_integral_local(f, lambda))
}

/// `I^λ f(t) = t^λ / Γ(λ+1) · ∫₀¹ f(t (1 - v^(1/λ))) dv`, by graded adaptive
/// Gauss–Legendre.
pub fn rl_integral_quadrature<F: Fn(f64) -> f64>(f: F, lambda: f64, t: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::arg(format!("t = {t} outside (0, 1]")));
    }
    let inv = 1.0 / lambda;
    let integral = quadrature::adaptive_graded_unit(|v| f(t * (1.0 - v.powf(inv))))?;
    Ok(t.powf(lambda) / gamma_unchecked(lambda + 1.0) * integral)
}

/// `∫₀¹ Ξ_i Ξ_j Ω dt`. After `x = s^γ` in the local coordinate the integrand
/// is a polynomial in `x`, so no singularity is left for the quadrature.
pub fn weighted_inner_product(spec: &WaveletBasisSpec, i: BasisIndex, j: BasisIndex) -> Result<f64> {
    spec.check_index(i)?;
    spec.check_index(j)?;
    if i.eta != j.eta {
        return Ok(0.0);
    }
    let a = crate::basis::wavelet_series(i, spec)?;
    let b = crate::basis::wavelet_series(j, spec)?;
    let g = spec.gamma();
    let inv = 1.0 / g;
    let integral = quadrature::adaptive(
        |x| {
            let s = x.powf(inv);
            a.eval_local(s) * b.eval_local(s)
        },
        0.0,
        1.0,
    )?;
    Ok(spec.cell_width() / g * integral)
}

/// Weighted projection coefficients `∫₀¹ f Ξ_i Ω dt` of `f` on every basis
/// function, in basis order.
pub fn project<F: Fn(f64) -> f64>(spec: &WaveletBasisSpec, f: F) -> Result<Vec<f64>> {
    let g = spec.gamma();
    let inv = 1.0 / g;
    let w = spec.cell_width();
    let mut out = Vec::with_capacity(spec.sigma_tilde());
    for idx in spec.indices() {
        let series = crate::basis::wavelet_series(idx, spec)?;
        let (lo, _) = series.support();
        let integral = quadrature::adaptive(
            |x| {
                let s = x.powf(inv);
                f(lo + w * s) * series.eval_local(s)
            },
            0.0,
            1.0,
        )?;
        out.push(w / g * integral);
    }
    Ok(out)
}

/// Integer-order image of one basis function: the termwise series on its own
/// cell, then a polynomial in `t - hi` to the right of it.
#[derive(Debug, Clone)]
struct IntegerImage {
    own: FracMonomialSeries,
    /// `tail[j]` is the coefficient of `(t - hi)^j`.
    tail: Vec<f64>,
}

impl IntegerImage {
    /// `I^n f(t) = Σ_{j<n} I^(n-j) f(hi) (t - hi)^j / j!` for `t > hi`.
    fn new(f: &FracMonomialSeries, n: u32) -> Self {
        let own = rl_integral_local(f, f64::from(n));
        let mut tail = Vec::with_capacity(n as usize);
        let mut fact = 1.0;
        for j in 0..n {
            if j > 0 {
                fact *= f64::from(j);
            }
            let at_hi = rl_integral_local(f, f64::from(n - j)).eval_local(1.0);
            tail.push(at_hi / fact);
        }
        Self { own, tail }
    }

    fn eval(&self, t: f64) -> f64 {
        let (_, hi) = self.own.support();
        if self.own.contains(t) {
            return self.own.eval_local(self.own.local(t));
        }
        if t <= hi {
            return 0.0;
        }
        let d = t - hi;
        self.tail.iter().rev().fold(0.0, |acc, c| acc * d + c)
    }
}

/// Basis functions of one spec with their cached first and second integrals.
#[derive(Debug)]
pub struct BasisOperators {
    spec: WaveletBasisSpec,
    family: Vec<FracMonomialSeries>,
    first: Vec<IntegerImage>,
    second: Vec<IntegerImage>,
}

type CacheKey = (u32, u32, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<BasisOperators>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<BasisOperators>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl BasisOperators {
    pub fn new(spec: WaveletBasisSpec) -> Self {
        let family = wavelet_family(&spec);
        let first = family.iter().map(|f| IntegerImage::new(f, 1)).collect();
        let second = family.iter().map(|f| IntegerImage::new(f, 2)).collect();
        Self {
            spec,
            family,
            first,
            second,
        }
    }

    /// Process-wide instance for `spec`, built on first use.
    pub fn shared(spec: WaveletBasisSpec) -> Arc<Self> {
        let key = (spec.k(), spec.m(), spec.gamma().to_bits());
        let mut map = cache().lock().unwrap_or_else(|e| e.into_inner());
        map.entry(key).or_insert_with(|| Arc::new(Self::new(spec))).clone()
    }

    pub fn spec(&self) -> &WaveletBasisSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    pub fn family(&self) -> &[FracMonomialSeries] {
        &self.family
    }

    /// Cached `I^n Ψ` as series on the own cells, for `n` in {1, 2}.
    pub fn integral_series(&self, n: u32) -> Result<Vec<FracMonomialSeries>> {
        let images = match n {
            1 => &self.first,
            2 => &self.second,
            _ => return Err(Error::arg(format!("only first and second integrals are cached, not {n}"))),
        };
        Ok(images.iter().map(|im| im.own.clone()).collect())
    }

    pub fn psi(&self, t: f64) -> Vec<f64> {
        self.family.iter().map(|f| f.eval(t)).collect()
    }

    pub fn first_integral(&self, t: f64) -> Vec<f64> {
        self.first.iter().map(|im| im.eval(t)).collect()
    }

    pub fn second_integral(&self, t: f64) -> Vec<f64> {
        self.second.iter().map(|im| im.eval(t)).collect()
    }

    /// `[I^λ Ψ](t)` for any `λ > 0`.
    pub fn integral(&self, lambda: f64, t: f64) -> Result<Vec<f64>> {
        check_lambda(lambda)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::arg(format!("t = {t} outside [0, 1]")));
        }
        if lambda == 1.0 {
            return Ok(self.first_integral(t));
        }
        if lambda == 2.0 {
            return Ok(self.second_integral(t));
        }
        let per_cell = self.spec.m() as usize + 1;
        let mut out = vec![0.0; self.len()];
        for (cell, chunk) in self.family.chunks(per_cell).enumerate() {
            let (lo, hi) = chunk[0].support();
            let slot = &mut out[cell * per_cell..(cell + 1) * per_cell];
            if chunk[0].contains(t) {
                for (o, f) in slot.iter_mut().zip(chunk) {
                    let im = rl_integral_local(f, lambda);
                    *o = im.eval_local(im.local(t));
                }
            } else if t > hi {
                let values = cross_cell_integral(chunk, lambda, t, lo, hi)?;
                slot.copy_from_slice(&values);
            }
        }
        Ok(out)
    }
}

/// `(1/Γ(λ)) ∫_lo^hi (t - τ)^(λ-1) f(τ) dτ` for every series of one cell, `t > hi`.
fn cross_cell_integral(chunk: &[FracMonomialSeries], lambda: f64, t: f64, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let w = hi - lo;
    let values = quadrature::adaptive_graded_unit_vec(
        |s, out| {
            let kernel = (t - lo - w * s).powf(lambda - 1.0);
            for (o, f) in out.iter_mut().zip(chunk) {
                *o = kernel * f.eval_local(s);
            }
        },
        chunk.len(),
    )?;
    let scale = w / gamma_unchecked(lambda);
    Ok(values.into_iter().map(|v| v * scale).collect())
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn check_coefficients(u: &[f64], ops: &BasisOperators) -> Result<()> {
    if u.len() != ops.len() {
        return Err(Error::arg(format!(
            "coefficient vector has length {}, basis has {}",
            u.len(),
            ops.len()
        )));
    }
    Ok(())
}

/// Caputo derivative `D^α(t) ℑ(t)` of the approximant with coefficients `u`.
///
/// The order is frozen at `α(t)`. The initial-value sum runs over
/// `j = ⌈α⌉..=1`, which is empty on (1, 2]; `α = 2` is the plain second
/// derivative.
pub fn caputo_on_approximant(
    u: &[f64],
    ops: &BasisOperators,
    alpha: &OrderFunction,
    init: (f64, f64),
    t: f64,
) -> Result<f64> {
    check_coefficients(u, ops)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::arg(format!("t = {t} outside (0, 1]")));
    }
    let a = alpha.checked(t)?;
    if a == 2.0 {
        return Ok(dot(u, &ops.psi(t)));
    }
    let mut value = dot(u, &ops.integral(2.0 - a, t)?);
    let derivs = [init.0, init.1];
    for (j, d) in derivs.iter().enumerate().skip(a.ceil() as usize) {
        let e = j as f64 - a;
        value += d * t.powf(e) / gamma_unchecked(1.0 + e);
    }
    Ok(value)
}

/// `(ℑ, ℑ′, ℑ″)` at `t` from `U` and the initial data.
pub fn reconstruct(u: &[f64], ops: &BasisOperators, init: (f64, f64), t: f64) -> Result<(f64, f64, f64)> {
    check_coefficients(u, ops)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::arg(format!("t = {t} outside [0, 1]")));
    }
    let y = dot(u, &ops.second_integral(t)) + init.0 + t * init.1;
    let dy = dot(u, &ops.first_integral(t)) + init.1;
    let ddy = dot(u, &ops.psi(t));
    Ok((y, dy, ddy))
}
