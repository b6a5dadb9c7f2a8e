//! Fractional-order Bernstein polynomials and the wavelet family built on them.
//!
//! Every basis function is kept as a [`FracMonomialSeries`] in the local
//! coordinate of its cell, so fractional integrals act on it termwise.

use crate::error::{Error, Result};
use crate::special::gen_binomial;

/// Terms with a coefficient below this magnitude are dropped.
pub const COEFF_FLOOR: f64 = 1e-300;

/// `s^p` with the continuous extension at `s = 0`.
#[inline]
pub fn frac_pow(s: f64, p: f64) -> f64 {
    if s == 0.0 {
        return if p == 0.0 { 1.0 } else { 0.0 };
    }
    if p == p.trunc() && p.abs() < 64.0 {
        s.powi(p as i32)
    } else {
        s.powf(p)
    }
}

/// Finite sum `Σ c · s^p` in the local coordinate `s = (t - lo) / (hi - lo)`
/// of its support; zero outside the support.
///
/// A support point shared with a neighbouring cell belongs to the left cell,
/// so the support is `(lo, hi]` unless `lo == 0`, where it is `[0, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracMonomialSeries {
    terms: Vec<(f64, f64)>,
    lo: f64,
    hi: f64,
}

impl FracMonomialSeries {
    /// Merges equal exponents (absolute tolerance `1e-12`) and sorts by exponent.
    pub fn new(terms: impl IntoIterator<Item = (f64, f64)>, support: (f64, f64)) -> Result<Self> {
        Self::with_exponent_tolerance(terms, support, 1e-12)
    }

    pub fn with_exponent_tolerance(
        terms: impl IntoIterator<Item = (f64, f64)>,
        support: (f64, f64),
        exponent_tol: f64,
    ) -> Result<Self> {
        let (lo, hi) = support;
        if !(0.0..1.0).contains(&lo) || !(hi > lo && hi <= 1.0) {
            return Err(Error::arg(format!("series support [{lo}, {hi}] must lie inside [0, 1]")));
        }
        let mut raw: Vec<(f64, f64)> = Vec::new();
        for (c, p) in terms {
            if !c.is_finite() || !p.is_finite() {
                return Err(Error::arg("series terms must be finite"));
            }
            if p < 0.0 {
                return Err(Error::arg(format!("negative exponent {p} in series")));
            }
            raw.push((c, p));
        }
        raw.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (c, p) in raw {
            match merged.last_mut() {
                Some(last) if (last.1 - p).abs() <= exponent_tol => last.0 += c,
                _ => merged.push((c, p)),
            }
        }
        merged.retain(|(c, _)| c.abs() >= COEFF_FLOOR);
        Ok(Self { terms: merged, lo, hi })
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        t <= self.hi && (t > self.lo || (self.lo == 0.0 && t == 0.0))
    }

    pub fn local(&self, t: f64) -> f64 {
        (t - self.lo) / (self.hi - self.lo)
    }

    /// Value of the sum at local coordinate `s`, ignoring the support.
    pub fn eval_local(&self, s: f64) -> f64 {
        self.terms.iter().map(|&(c, p)| c * frac_pow(s, p)).sum()
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.contains(t) {
            self.eval_local(self.local(t))
        } else {
            0.0
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|&(c, p)| (c * factor, p))
                .filter(|(c, _)| c.abs() >= COEFF_FLOOR)
                .collect(),
            lo: self.lo,
            hi: self.hi,
        }
    }

    pub(crate) fn from_sorted_unchecked(terms: Vec<(f64, f64)>, lo: f64, hi: f64) -> Self {
        Self { terms, lo, hi }
    }
}

/// Resolution `k`, top polynomial index `M` and fractional exponent `γ` of one
/// wavelet family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletBasisSpec {
    k: u32,
    m: u32,
    gamma: f64,
}

impl WaveletBasisSpec {
    pub fn new(k: u32, m: u32, gamma: f64) -> Result<Self> {
        if !(1..=16).contains(&k) {
            return Err(Error::arg(format!("resolution k = {k} must be in 1..=16")));
        }
        if m > 30 {
            return Err(Error::arg(format!("M = {m} is beyond the supported range 0..=30")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::arg(format!("fractional exponent gamma = {gamma} must be positive")));
        }
        Ok(Self { k, m, gamma })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Number of translations, `2^(k-1)`.
    pub fn cells(&self) -> u32 {
        1 << (self.k - 1)
    }

    /// Total basis size `2^(k-1) (M + 1)`.
    pub fn sigma_tilde(&self) -> usize {
        self.cells() as usize * (self.m as usize + 1)
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / f64::from(self.cells())
    }

    pub fn cell_bounds(&self, eta: u32) -> (f64, f64) {
        let w = self.cell_width();
        (f64::from(eta - 1) * w, f64::from(eta) * w)
    }

    /// Translation owning `t`; shared boundaries go to the left cell.
    pub fn cell_of(&self, t: f64) -> u32 {
        let scaled = t * f64::from(self.cells());
        (scaled.ceil() as u32).clamp(1, self.cells())
    }

    /// Normalisation `√γ · 2^((k-1)/2)`.
    pub fn amplitude(&self) -> f64 {
        self.gamma.sqrt() * f64::from(self.cells()).sqrt()
    }

    pub fn indices(&self) -> impl Iterator<Item = BasisIndex> + '_ {
        (1..=self.cells()).flat_map(move |eta| (0..=self.m).map(move |upsilon| BasisIndex { eta, upsilon }))
    }

    pub fn flat_index(&self, idx: BasisIndex) -> usize {
        (idx.eta as usize - 1) * (self.m as usize + 1) + idx.upsilon as usize
    }

    pub fn check_index(&self, idx: BasisIndex) -> Result<()> {
        if idx.eta < 1 || idx.eta > self.cells() || idx.upsilon > self.m {
            return Err(Error::arg(format!(
                "basis index (eta = {}, upsilon = {}) outside k = {}, M = {}",
                idx.eta, idx.upsilon, self.k, self.m
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub eta: u32,
    pub upsilon: u32,
}

impl BasisIndex {
    pub fn new(eta: u32, upsilon: u32) -> Self {
        Self { eta, upsilon }
    }
}

fn binom(n: u32, k: u32) -> f64 {
    // Integer arguments never hit a pole.
    gen_binomial(f64::from(n), k).unwrap_or(0.0)
}

fn check_poly_args(upsilon: u32, m: u32, gamma: f64) -> Result<()> {
    if upsilon > m {
        return Err(Error::arg(format!("polynomial index {upsilon} exceeds M = {m}")));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::arg(format!("gamma = {gamma} must be positive")));
    }
    Ok(())
}

/// Fractional Bernstein polynomial `B^γ_{υ,M}(t)` in closed form.
///
/// The alternating sum `Σ_i (-1)^i C(1+2M-i, υ-i) C(υ, i) y^(υ-i)` equals the
/// Jacobi polynomial `P_υ^(2(M-υ)+1, 0)(2y - 1)` with `y = t^γ`; the three-term
/// recurrence avoids the cancellation of the expanded sum.
pub fn bernstein_frac(upsilon: u32, m: u32, gamma: f64, t: f64) -> Result<f64> {
    check_poly_args(upsilon, m, gamma)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::arg(format!("t = {t} outside [0, 1]")));
    }
    let y = frac_pow(t, gamma);
    let sum = jacobi(upsilon, f64::from(2 * (m - upsilon) + 1), 0.0, 2.0 * y - 1.0);
    let norm = f64::from(1 + 2 * m - 2 * upsilon).sqrt();
    Ok(norm * frac_pow(1.0 - y, f64::from(m - upsilon)) * sum)
}

fn jacobi(n: u32, a: f64, b: f64, z: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (z - 1.0) / 2.0;
    for k in 2..=n {
        let k = f64::from(k);
        let c = 2.0 * k + a + b;
        let p2 = ((c - 1.0) * (c * (c - 2.0) * z + a * a - b * b) * p1 - 2.0 * (k + a - 1.0) * (k + b - 1.0) * c * p0)
            / (2.0 * k * (k + a + b) * (c - 2.0));
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Expanded form of [`bernstein_frac`] on support `[0, 1]`; exponents are
/// `γ(υ - i + r)` for `0 ≤ i ≤ υ`, `0 ≤ r ≤ M - υ`.
pub fn to_monomial_series(upsilon: u32, m: u32, gamma: f64) -> Result<FracMonomialSeries> {
    check_poly_args(upsilon, m, gamma)?;
    let norm = f64::from(1 + 2 * m - 2 * upsilon).sqrt();
    let mut terms = Vec::new();
    for i in 0..=upsilon {
        let outer = binom(1 + 2 * m - i, upsilon - i) * binom(upsilon, i);
        for r in 0..=(m - upsilon) {
            let sign = if (i + r) % 2 == 0 { 1.0 } else { -1.0 };
            let coeff = norm * sign * outer * binom(m - upsilon, r);
            terms.push((coeff, gamma * f64::from(upsilon - i + r)));
        }
    }
    FracMonomialSeries::with_exponent_tolerance(terms, (0.0, 1.0), 1e-12 * gamma)
}

/// One wavelet `Ξ_{η,υ}` as a series over its own cell, amplitude included.
pub fn wavelet_series(idx: BasisIndex, spec: &WaveletBasisSpec) -> Result<FracMonomialSeries> {
    spec.check_index(idx)?;
    let base = to_monomial_series(idx.upsilon, spec.m(), spec.gamma())?;
    let (lo, hi) = spec.cell_bounds(idx.eta);
    let terms = base.terms().iter().map(|&(c, p)| (c * spec.amplitude(), p)).collect();
    Ok(FracMonomialSeries::from_sorted_unchecked(terms, lo, hi))
}

/// All `σ̃` wavelets in coefficient order.
pub fn wavelet_family(spec: &WaveletBasisSpec) -> Vec<FracMonomialSeries> {
    spec.indices()
        .map(|idx| wavelet_series(idx, spec).expect("indices come from the spec"))
        .collect()
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::arg(format!("t = {t} outside [0, 1]")));
    }
    Ok(())
}

/// `Ξ_{η,υ}(t) = √γ 2^((k-1)/2) B^γ_{υ,M}(1 + 2^(k-1) t - η)` on cell η, 0 elsewhere.
pub fn fobw_eval(idx: BasisIndex, spec: &WaveletBasisSpec, t: f64) -> Result<f64> {
    spec.check_index(idx)?;
    check_t(t)?;
    if spec.cell_of(t) != idx.eta {
        return Ok(0.0);
    }
    let s = (1.0 + f64::from(spec.cells()) * t - f64::from(idx.eta)).clamp(0.0, 1.0);
    Ok(spec.amplitude() * bernstein_frac(idx.upsilon, spec.m(), spec.gamma(), s)?)
}

/// `Ψ(t)`, ordered `(η = 1: υ = 0..M), (η = 2: υ = 0..M), …`.
pub fn fobw_vector(spec: &WaveletBasisSpec, t: f64) -> Result<Vec<f64>> {
    check_t(t)?;
    spec.indices().map(|idx| fobw_eval(idx, spec, t)).collect()
}

/// Weight `Ω_{k,η}(t) = (1 + 2^(k-1) t - η)^(γ-1)` on cell η.
pub fn weight_eval(spec: &WaveletBasisSpec, eta: u32, t: f64) -> Result<f64> {
    if eta < 1 || eta > spec.cells() {
        return Err(Error::arg(format!("translation {eta} outside 1..={}", spec.cells())));
    }
    let (lo, hi) = spec.cell_bounds(eta);
    if !(lo..=hi).contains(&t) {
        return Err(Error::arg(format!("t = {t} outside cell [{lo}, {hi}]")));
    }
    let exponent = spec.gamma() - 1.0;
    if exponent == 0.0 {
        return Ok(1.0);
    }
    let s = 1.0 + f64::from(spec.cells()) * t - f64::from(eta);
    if s <= 0.0 && exponent < 0.0 {
        return Err(Error::domain(format!("weight is singular at the left end of cell {eta}")));
    }
    Ok(frac_pow(s.max(0.0), exponent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bernstein_closed_form_examples() {
        let v = bernstein_frac(0, 3, 1.0, 0.0).unwrap();
        assert!((v - 2.645_751_311_064_590_6).abs() < 1e-15);
        assert_eq!(bernstein_frac(0, 1, 1.0, 1.0).unwrap(), 0.0);
        let series = to_monomial_series(1, 2, 0.5).unwrap();
        let direct = bernstein_frac(1, 2, 0.5, 0.25).unwrap();
        assert!((series.eval(0.25) - direct).abs() < 1e-13);
    }

    #[test]
    fn bernstein_argument_errors() {
        assert!(matches!(bernstein_frac(3, 2, 1.0, 0.5), Err(Error::Argument(_))));
        assert!(matches!(bernstein_frac(0, 2, 1.0, 1.5), Err(Error::Argument(_))));
        assert!(matches!(bernstein_frac(0, 2, 0.0, 0.5), Err(Error::Argument(_))));
        assert!(matches!(to_monomial_series(4, 3, 1.0), Err(Error::Argument(_))));
    }

    #[test]
    fn monomial_series_examples() {
        let s3 = 3f64.sqrt();
        let s = to_monomial_series(0, 1, 1.0).unwrap();
        assert_eq!(s.terms().len(), 2);
        assert!((s.terms()[0].0 - s3).abs() < 1e-15 && s.terms()[0].1 == 0.0);
        assert!((s.terms()[1].0 + s3).abs() < 1e-15 && s.terms()[1].1 == 1.0);

        let s5 = 5f64.sqrt();
        let s = to_monomial_series(0, 2, 0.5).unwrap();
        let want = [(s5, 0.0), (-2.0 * s5, 0.5), (s5, 1.0)];
        assert_eq!(s.terms().len(), 3);
        for (got, want) in s.terms().iter().zip(want) {
            assert!((got.0 - want.0).abs() < 1e-14 && (got.1 - want.1).abs() < 1e-15);
        }
        assert_eq!(s.support(), (0.0, 1.0));

        let s = to_monomial_series(2, 3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let t: f64 = rng.gen();
            assert!((s.eval(t) - bernstein_frac(2, 3, 1.0, t).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn series_and_closed_form_agree_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..1000 {
            let m = rng.gen_range(0..=6u32);
            let upsilon = rng.gen_range(0..=m);
            let gamma = rng.gen_range(0.1..=1.0);
            let t: f64 = rng.gen();
            let a = to_monomial_series(upsilon, m, gamma).unwrap().eval(t);
            let b = bernstein_frac(upsilon, m, gamma, t).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "υ={upsilon} M={m} γ={gamma} t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn series_exponents_are_distinct_and_nonnegative() {
        for m in 0..=6 {
            for upsilon in 0..=m {
                let s = to_monomial_series(upsilon, m, 0.3).unwrap();
                for w in s.terms().windows(2) {
                    assert!(w[1].1 - w[0].1 > 0.1);
                }
                assert!(s.terms().iter().all(|&(_, p)| p >= 0.0));
            }
        }
    }

    #[test]
    fn series_merging_and_dropping() {
        let s = FracMonomialSeries::new([(1.0, 0.5), (2.0, 0.5 + 1e-14), (1e-301, 2.0), (-3.0, 0.0)], (0.0, 1.0))
            .unwrap();
        assert_eq!(s.terms(), &[(-3.0, 0.0), (3.0, 0.5)]);
        assert!(FracMonomialSeries::new([(1.0, -0.5)], (0.0, 1.0)).is_err());
        assert!(FracMonomialSeries::new([(1.0, 0.5)], (0.5, 0.25)).is_err());
    }

    #[test]
    fn fobw_examples() {
        let spec = WaveletBasisSpec::new(1, 3, 1.0).unwrap();
        let v = fobw_eval(BasisIndex::new(1, 0), &spec, 0.0).unwrap();
        assert!((v - 2.645_751_311_064_590_6).abs() < 1e-15);

        let spec = WaveletBasisSpec::new(2, 1, 1.0).unwrap();
        let idx = BasisIndex::new(2, 0);
        assert_eq!(fobw_eval(idx, &spec, 0.25).unwrap(), 0.0);
        assert_eq!(fobw_eval(idx, &spec, 0.5).unwrap(), 0.0);
        let just_right = 0.5 + 1e-12;
        let want = spec.amplitude() * bernstein_frac(0, 1, 1.0, 1e-12 * 2.0).unwrap();
        assert!((fobw_eval(idx, &spec, just_right).unwrap() - want).abs() < 1e-10);
        assert!(fobw_eval(BasisIndex::new(1, 0), &spec, 0.5).unwrap() == spec.amplitude() * bernstein_frac(0, 1, 1.0, 1.0).unwrap());

        let spec = WaveletBasisSpec::new(1, 5, 0.5).unwrap();
        let v = fobw_eval(BasisIndex::new(1, 3), &spec, 0.3).unwrap();
        let want = bernstein_frac(3, 5, 0.5, 0.3).unwrap() * 0.5f64.sqrt();
        assert!((v - want).abs() < 1e-14);

        assert!(matches!(fobw_eval(BasisIndex::new(3, 0), &spec, 0.3), Err(Error::Argument(_))));
        assert!(matches!(fobw_eval(BasisIndex::new(1, 6), &spec, 0.3), Err(Error::Argument(_))));
    }

    #[test]
    fn fobw_vector_examples() {
        let spec = WaveletBasisSpec::new(1, 3, 1.0).unwrap();
        let v = fobw_vector(&spec, 0.0).unwrap();
        assert_eq!(v.len(), 4);
        assert!((v[0] - 7f64.sqrt()).abs() < 1e-15);
        for (u, val) in v.iter().enumerate().skip(1) {
            assert_eq!(*val, bernstein_frac(u as u32, 3, 1.0, 0.0).unwrap());
        }

        let spec = WaveletBasisSpec::new(2, 1, 1.0).unwrap();
        let v = fobw_vector(&spec, 0.75).unwrap();
        assert_eq!(&v[..2], &[0.0, 0.0]);
        assert!(v[2] != 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let spec = WaveletBasisSpec::new(rng.gen_range(1..=3), rng.gen_range(0..=5), rng.gen_range(0.1..=1.0)).unwrap();
            let t: f64 = rng.gen();
            let v = fobw_vector(&spec, t).unwrap();
            for (j, idx) in spec.indices().enumerate() {
                assert_eq!(v[j], fobw_eval(idx, &spec, t).unwrap());
                assert_eq!(spec.flat_index(idx), j);
            }
        }
    }

    #[test]
    fn wavelet_series_matches_pointwise_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for k in 1..=3 {
            let spec = WaveletBasisSpec::new(k, 4, 0.4).unwrap();
            let family = wavelet_family(&spec);
            for _ in 0..40 {
                let t: f64 = rng.gen();
                let v = fobw_vector(&spec, t).unwrap();
                for (s, want) in family.iter().zip(&v) {
                    assert!((s.eval(t) - want).abs() <= 1e-11 * want.abs().max(1.0));
                }
            }
        }
    }

    /// Orthonormalised ordinary Bernstein polynomials b_0, …, b_n on [0, 1]:
    /// Cholesky of the exact Gram matrix `∫ b_i b_j = C(n,i) C(n,j) / ((2n+1) C(2n,i+j))`,
    /// then forward substitution on the vector of b_j(x). Each φ_j lies in
    /// span{b_0..b_j}; the sign makes φ_j(0) carry the sign (-1)^j.
    struct ClassicalOrtho {
        n: u32,
        chol: Vec<Vec<f64>>,
        signs: Vec<f64>,
    }

    impl ClassicalOrtho {
        fn new(n: u32) -> Self {
            let dim = n as usize + 1;
            let gram = |i: u32, j: u32| binom(n, i) * binom(n, j) / (f64::from(2 * n + 1) * binom(2 * n, i + j));
            let mut l = vec![vec![0.0; dim]; dim];
            for i in 0..dim {
                for j in 0..=i {
                    let mut s = gram(i as u32, j as u32);
                    for k in 0..j {
                        s -= l[i][k] * l[j][k];
                    }
                    l[i][j] = if i == j { s.sqrt() } else { s / l[j][j] };
                }
            }
            let mut me = Self { n, chol: l, signs: vec![1.0; dim] };
            let at0 = me.eval(0.0);
            me.signs = at0
                .iter()
                .enumerate()
                .map(|(j, v)| if (v.signum() > 0.0) == (j % 2 == 0) { 1.0 } else { -1.0 })
                .collect();
            me
        }

        fn eval(&self, x: f64) -> Vec<f64> {
            let n = self.n;
            let b: Vec<f64> = (0..=n)
                .map(|j| binom(n, j) * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32))
                .collect();
            let mut phi = vec![0.0; b.len()];
            for i in 0..b.len() {
                let mut s = b[i];
                for k in 0..i {
                    s -= self.chol[i][k] * phi[k];
                }
                phi[i] = s / self.chol[i][i];
            }
            phi.iter().zip(&self.signs).map(|(p, s)| p * s).collect()
        }
    }

    #[test]
    fn classical_reduction_for_unit_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 1..=2 {
            for m in 0..=5 {
                let ortho = ClassicalOrtho::new(m);
                let spec = WaveletBasisSpec::new(k, m, 1.0).unwrap();
                for _ in 0..20 {
                    let t: f64 = rng.gen();
                    let eta = spec.cell_of(t);
                    let x = f64::from(spec.cells()) * t - f64::from(eta - 1);
                    let values = ortho.eval(x);
                    for upsilon in 0..=m {
                        let want = f64::from(spec.cells()).sqrt() * values[upsilon as usize];
                        let got = fobw_eval(BasisIndex::new(eta, upsilon), &spec, t).unwrap();
                        assert!((got - want).abs() <= 1e-13 * want.abs().max(1.0), "k={k} M={m} υ={upsilon} t={t}: {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn weight_examples() {
        let spec = WaveletBasisSpec::new(1, 3, 1.0).unwrap();
        assert_eq!(weight_eval(&spec, 1, 0.0).unwrap(), 1.0);
        assert_eq!(weight_eval(&spec, 1, 0.7).unwrap(), 1.0);

        let spec = WaveletBasisSpec::new(1, 3, 0.5).unwrap();
        assert!((weight_eval(&spec, 1, 0.25).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(weight_eval(&spec, 1, 0.0), Err(Error::Domain(_))));

        let spec = WaveletBasisSpec::new(2, 3, 0.2).unwrap();
        let got = weight_eval(&spec, 2, 0.75).unwrap();
        let oracle = (-0.8 * 0.5f64.ln()).exp();
        assert!((got - oracle).abs() < 1e-14);
        assert!((got - 1.741_101_126_592_248_2).abs() < 1e-14);
        assert!(matches!(weight_eval(&spec, 2, 0.25), Err(Error::Argument(_))));
        assert!(matches!(weight_eval(&spec, 3, 0.75), Err(Error::Argument(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(WaveletBasisSpec::new(0, 3, 1.0).is_err());
        assert!(WaveletBasisSpec::new(1, 3, 0.0).is_err());
        assert!(WaveletBasisSpec::new(1, 3, f64::NAN).is_err());
        let s = WaveletBasisSpec::new(3, 5, 0.5).unwrap();
        assert_eq!(s.sigma_tilde(), 24);
        assert_eq!(s.cell_of(0.0), 1);
        assert_eq!(s.cell_of(0.25), 1);
        assert_eq!(s.cell_of(0.2500001), 2);
        assert_eq!(s.cell_of(1.0), 4);
    }
}
