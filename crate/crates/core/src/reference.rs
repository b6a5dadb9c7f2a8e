//! Integer-order reference trajectories and error metrics.

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::solver::{OscillatorProblem, SolutionApproximant};

/// Step used when building the reference for error tables.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Anything that can be sampled on [0, 1].
pub trait Evaluable {
    fn value_at(&self, t: f64) -> Result<f64>;
}

impl Evaluable for SolutionApproximant {
    fn value_at(&self, t: f64) -> Result<f64> {
        self.value(t)
    }
}

impl<F: Fn(f64) -> f64> Evaluable for F {
    fn value_at(&self, t: f64) -> Result<f64> {
        Ok(self(t))
    }
}

/// RK4 nodes `(t, y, y′)` on a uniform step, with cubic Hermite dense output.
#[derive(Debug, Clone)]
pub struct ReferenceTrajectory {
    step: f64,
    states: Vec<(f64, f64, f64)>,
    /// `y″` at each node, the slope of `y′` for the Hermite interpolant.
    accel: Vec<f64>,
}

impl ReferenceTrajectory {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn states(&self) -> &[(f64, f64, f64)] {
        &self.states
    }

    /// `(y, y′)` at `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::arg(format!("t = {t} outside [0, 1]")));
        }
        let last = self.states.len() - 1;
        let i = ((t / self.step).floor() as usize).min(last - 1);
        let (t0, y0, v0) = self.states[i];
        let (t1, y1, v1) = self.states[i + 1];
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        let y = h00 * y0 + h10 * h * v0 + h01 * y1 + h11 * h * v1;
        let (a0, a1) = (self.accel[i], self.accel[i + 1]);
        let v = h00 * v0 + h10 * h * a0 + h01 * v1 + h11 * h * a1;
        Ok((y, v))
    }
}

impl Evaluable for ReferenceTrajectory {
    fn value_at(&self, t: f64) -> Result<f64> {
        self.eval(t).map(|v| v.0)
    }
}

/// `y″ = Φ - a y - b y³ + μ y′ - μ y′ y²`.
fn accel(p: &OscillatorProblem, t: f64, y: f64, v: f64) -> f64 {
    p.forcing_at(t) - p.a * y - p.b * y * y * y + p.mu * v - p.mu * v * y * y
}

/// Classical RK4 over [0, 1] for a problem of order exactly 2. The step is
/// rounded down so that a whole number of steps covers the interval.
pub fn rk4_integrate(problem: &OscillatorProblem, h: f64) -> Result<ReferenceTrajectory> {
    problem.validate()?;
    if problem.alpha.as_constant() != Some(2.0) {
        return Err(Error::arg("the RK4 reference needs the integer order 2"));
    }
    if !(h > 0.0 && h <= 0.01) {
        return Err(Error::arg(format!("step {h} outside (0, 0.01]")));
    }
    let n = (1.0 / h - 1e-9).ceil() as usize;
    let h = 1.0 / n as f64;
    let mut states = Vec::with_capacity(n + 1);
    let mut acc = Vec::with_capacity(n + 1);
    let (mut y, mut v) = problem.init();
    states.push((0.0, y, v));
    acc.push(accel(problem, 0.0, y, v));
    for i in 0..n {
        let t = i as f64 * h;
        let k1y = v;
        let k1v = accel(problem, t, y, v);
        let k2y = v + 0.5 * h * k1v;
        let k2v = accel(problem, t + 0.5 * h, y + 0.5 * h * k1y, k2y);
        let k3y = v + 0.5 * h * k2v;
        let k3v = accel(problem, t + 0.5 * h, y + 0.5 * h * k2y, k3y);
        let k4y = v + h * k3v;
        let k4v = accel(problem, t + h, y + h * k3y, k4y);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        let t_next = (i + 1) as f64 * h;
        if !(y.is_finite() && v.is_finite()) {
            return Err(Error::Solver(format!("RK4 blew up after t = {t}")));
        }
        states.push((t_next, y, v));
        acc.push(accel(problem, t_next, y, v));
    }
    Ok(ReferenceTrajectory {
        step: h,
        states,
        accel: acc,
    })
}

pub fn absolute_error<A: Evaluable + ?Sized, B: Evaluable + ?Sized>(approx: &A, reference: &B, t: f64) -> Result<f64> {
    Ok((reference.value_at(t)? - approx.value_at(t)?).abs())
}

pub fn max_absolute_error<A: Evaluable + ?Sized, B: Evaluable + ?Sized>(
    approx: &A,
    reference: &B,
    grid: &[f64],
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::arg("maximum absolute error over an empty grid"));
    }
    grid.iter()
        .map(|&t| absolute_error(approx, reference, t))
        .try_fold(0.0_f64, |m, e| e.map(|e| m.max(e)))
}

/// `|R(t)|` of the approximant for `problem`, order taken from the problem.
pub fn residual_sample(approx: &SolutionApproximant, problem: &OscillatorProblem, t: f64) -> Result<f64> {
    let (y, dy, _) = approx.eval(t)?;
    let d = approx.caputo_with(&problem.alpha, t)?;
    Ok(problem.equation_residual(t, y, dy, d).abs())
}

/// Columns of values on a shared ascending grid; `None` marks a failed entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    grid: Vec<f64>,
    columns: IndexMap<String, Vec<Option<f64>>>,
}

impl ErrorTable {
    pub fn new(grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::arg("table grid is empty"));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::arg("table grid must be finite and strictly ascending"));
        }
        Ok(Self {
            grid,
            columns: IndexMap::new(),
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn columns(&self) -> &IndexMap<String, Vec<Option<f64>>> {
        &self.columns
    }

    pub fn push_column(&mut self, label: impl Into<String>, values: Vec<Option<f64>>) -> Result<()> {
        let label = label.into();
        if values.len() != self.grid.len() {
            return Err(Error::arg(format!("column `{label}` has {} values for {} rows", values.len(), self.grid.len())));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::arg(format!("column `{label}` has non-finite entries")));
        }
        if self.columns.contains_key(&label) {
            return Err(Error::arg(format!("duplicate column `{label}`")));
        }
        self.columns.insert(label, values);
        Ok(())
    }

    /// Labels of columns holding at least one failed entry.
    pub fn failed_columns(&self) -> Vec<&str> {
        self.columns
            .iter()
            .filter(|(_, v)| v.iter().any(Option::is_none))
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::WaveletBasisSpec;
    use crate::fracops::OrderFunction;
    use crate::solver::{CoefficientVector, Forcing};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn harmonic() -> OscillatorProblem {
        OscillatorProblem {
            mu: 0.0,
            a: 1.0,
            b: 0.0,
            f: 0.0,
            omega: 0.0,
            forcing: Forcing::ForceFree,
            alpha: OrderFunction::constant(2.0).unwrap(),
            init_value: 1.0,
            init_slope: 0.0,
        }
    }

    #[test]
    fn rk4_harmonic_oscillator() {
        let traj = rk4_integrate(&harmonic(), 1e-3).unwrap();
        assert!((traj.eval(1.0).unwrap().0 - 0.540_302_305_868_139_8).abs() < 1e-10);
        assert_eq!(traj.states().len(), 1001);
        // Dense output between nodes.
        for t in [0.123_45, 0.5, 0.999_9] {
            let (y, v) = traj.eval(t).unwrap();
            assert!((y - f64::cos(t)).abs() < 1e-10);
            assert!((v + f64::sin(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn rk4_constant_solution_is_exact() {
        let mut p = harmonic();
        p.a = 0.0;
        let traj = rk4_integrate(&p, 1e-2).unwrap();
        assert!(traj.states().iter().all(|s| s.1 == 1.0 && s.2 == 0.0));
        assert_eq!(traj.eval(0.456).unwrap().0, 1.0);
    }

    #[test]
    fn rk4_order_ratio() {
        let err = |h: f64| (rk4_integrate(&harmonic(), h).unwrap().eval(1.0).unwrap().0 - 1f64.cos()).abs();
        let ratio = err(0.01) / err(0.005);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rk4_rejects_bad_input() {
        let mut p = harmonic();
        assert!(rk4_integrate(&p, 0.02).is_err());
        assert!(rk4_integrate(&p, 0.0).is_err());
        p.alpha = OrderFunction::constant(1.5).unwrap();
        assert!(rk4_integrate(&p, 1e-3).is_err());
        let mut blow = harmonic();
        blow.b = -1e6;
        blow.init_value = 1e3;
        match rk4_integrate(&blow, 1e-2) {
            Err(Error::Solver(msg)) => assert!(msg.contains("after t =")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn metric_examples() {
        let one = |_: f64| 1.0;
        assert_eq!(absolute_error(&one, &one, 0.3).unwrap(), 0.0);
        let near = |_: f64| 0.999_999;
        assert!((absolute_error(&near, &one, 0.3).unwrap() - 1e-6).abs() < 1e-15);
        let a = |t: f64| if t < 0.5 { 1.0 } else { 2.0 };
        let b = |t: f64| if t < 0.5 { 1.0 } else { 2.5 };
        assert_eq!(max_absolute_error(&a, &b, &[0.25, 0.75]).unwrap(), 0.5);
        assert!(max_absolute_error(&a, &b, &[]).is_err());
    }

    #[test]
    fn residual_sample_examples() {
        let spec = WaveletBasisSpec::new(1, 3, 1.0).unwrap();
        let mut p = harmonic();
        p.a = 0.5;
        p.b = 0.5;
        p.alpha = OrderFunction::constant(1.5).unwrap();
        let approx = SolutionApproximant::from_coefficients(&p, &spec, CoefficientVector::zeros(&spec)).unwrap();
        for t in [0.1, 0.5, 1.0] {
            assert_eq!(residual_sample(&approx, &p, t).unwrap(), 1.0);
        }
    }

    #[test]
    fn residual_of_trivial_solution_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let k = rng.gen_range(1..=2);
            let m = rng.gen_range(0..=5);
            let spec = WaveletBasisSpec::new(k, m, rng.gen_range(0.1..=1.0)).unwrap();
            let p = OscillatorProblem {
                mu: 0.0,
                a: 0.0,
                b: 0.0,
                f: 0.0,
                omega: 0.0,
                forcing: Forcing::ForceFree,
                alpha: OrderFunction::constant(rng.gen_range(1.05..=2.0)).unwrap(),
                init_value: rng.gen_range(-2.0..2.0),
                init_slope: 0.0,
            };
            let approx = SolutionApproximant::from_coefficients(&p, &spec, CoefficientVector::zeros(&spec)).unwrap();
            let t = rng.gen_range(0.01..=1.0);
            assert!(residual_sample(&approx, &p, t).unwrap() <= 1e-13);
        }
    }

    proptest! {
        #[test]
        fn absolute_error_is_symmetric(x in -1e3f64..1e3, y in -1e3f64..1e3, t in 0.0f64..=1.0) {
            let a = move |_: f64| x;
            let b = move |_: f64| y;
            prop_assert_eq!(absolute_error(&a, &b, t).unwrap(), absolute_error(&b, &a, t).unwrap());
        }
    }

    #[test]
    fn error_table_validation() {
        assert!(ErrorTable::new(vec![]).is_err());
        assert!(ErrorTable::new(vec![0.3, 0.1]).is_err());
        let mut table = ErrorTable::new(vec![0.1, 0.3]).unwrap();
        table.push_column("x", vec![Some(1.0), None]).unwrap();
        assert!(table.push_column("x", vec![Some(1.0), Some(2.0)]).is_err());
        assert!(table.push_column("y", vec![Some(1.0)]).is_err());
        assert!(table.push_column("z", vec![Some(f64::NAN), Some(1.0)]).is_err());
        assert_eq!(table.failed_columns(), vec!["x"]);
    }
}
