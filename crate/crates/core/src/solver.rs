//! Collocation system for the oscillator and its damped Newton solve.
//!
//! The unknown is the coefficient vector `U` of the second derivative,
//! `ℑ″ = UᵀΨ`. Integrating twice and adding the initial data gives
//! `ℑ = UᵀI²Ψ + ℑ(0) + tℑ′(0)`, so the initial conditions hold for every `U`.

use std::sync::Arc;

use log::{debug, warn};

use crate::basis::WaveletBasisSpec;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fracops::{caputo_on_approximant, reconstruct, BasisOperators, OrderFunction};
use crate::linalg::{self, Matrix};
use crate::special::{chebyshev_grid, ChebyshevGrid};

#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    /// `f cos(ωt)`
    Forced,
    ForceFree,
    Expression(Expr),
}

/// `D^α ℑ - μℑ′ + μℑ′ℑ² + aℑ + bℑ³ = Φ(t)` with `ℑ(0)`, `ℑ′(0)` given.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorProblem {
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub f: f64,
    pub omega: f64,
    pub forcing: Forcing,
    pub alpha: OrderFunction,
    pub init_value: f64,
    pub init_slope: f64,
}

impl OscillatorProblem {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("mu", self.mu),
            ("a", self.a),
            ("b", self.b),
            ("init_value", self.init_value),
            ("init_slope", self.init_slope),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(Error::arg(format!("{name} = {v} is not finite")));
            }
        }
        if self.forcing == Forcing::Forced && !(self.f.is_finite() && self.omega.is_finite()) {
            return Err(Error::arg("forced problem needs finite f and omega"));
        }
        Ok(())
    }

    pub fn forcing_at(&self, t: f64) -> f64 {
        match &self.forcing {
            Forcing::Forced => self.f * (self.omega * t).cos(),
            Forcing::ForceFree => 0.0,
            Forcing::Expression(e) => e.eval(t),
        }
    }

    pub fn init(&self) -> (f64, f64) {
        (self.init_value, self.init_slope)
    }

    /// Left side minus right side for given `ℑ`, `ℑ′` and `D^α ℑ` at `t`.
    pub fn equation_residual(&self, t: f64, y: f64, dy: f64, d_alpha: f64) -> f64 {
        d_alpha - self.mu * dy + self.mu * dy * y * y + self.a * y + self.b * y * y * y - self.forcing_at(t)
    }
}

/// Unknown `U`, ordered as the basis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    entries: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(spec: &WaveletBasisSpec, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != spec.sigma_tilde() {
            return Err(Error::arg(format!(
                "coefficient vector has length {}, basis has {}",
                entries.len(),
                spec.sigma_tilde()
            )));
        }
        Ok(Self { entries })
    }

    pub fn zeros(spec: &WaveletBasisSpec) -> Self {
        Self {
            entries: vec![0.0; spec.sigma_tilde()],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.entries
    }
}

/// Basis images at one collocation point.
#[derive(Debug, Clone)]
pub struct CollocationRow {
    pub t: f64,
    pub alpha: f64,
    pub psi: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    /// `[I^(2-α)Ψ](t)`, or `Ψ(t)` when `α = 2`.
    pub caputo: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CollocationSystem {
    grid: ChebyshevGrid,
    rows: Vec<CollocationRow>,
    problem: OscillatorProblem,
    ops: Arc<BasisOperators>,
}

impl CollocationSystem {
    pub fn grid(&self) -> &ChebyshevGrid {
        &self.grid
    }

    pub fn rows(&self) -> &[CollocationRow] {
        &self.rows
    }

    pub fn problem(&self) -> &OscillatorProblem {
        &self.problem
    }

    pub fn ops(&self) -> &Arc<BasisOperators> {
        &self.ops
    }

    pub fn spec(&self) -> &WaveletBasisSpec {
        self.ops.spec()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `α(t_r)` per row.
    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.alpha).collect()
    }

    /// Same system with rows reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len() || perm.iter().any(|&p| p >= self.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::arg("row permutation is not a permutation of the system rows"));
        }
        let rows: Vec<CollocationRow> = perm.iter().map(|&p| self.rows[p].clone()).collect();
        let grid = ChebyshevGrid::from_points(rows.iter().map(|r| r.t).collect())?;
        Ok(Self {
            grid,
            rows,
            problem: self.problem.clone(),
            ops: self.ops.clone(),
        })
    }
}

/// Builds the system on the Chebyshev grid of size `σ̃`.
pub fn assemble(problem: &OscillatorProblem, spec: &WaveletBasisSpec) -> Result<CollocationSystem> {
    assemble_on_grid(problem, spec, chebyshev_grid(spec.sigma_tilde())?)
}

pub fn assemble_on_grid(
    problem: &OscillatorProblem,
    spec: &WaveletBasisSpec,
    grid: ChebyshevGrid,
) -> Result<CollocationSystem> {
    problem.validate()?;
    if grid.len() != spec.sigma_tilde() {
        return Err(Error::arg(format!(
            "grid has {} points but the basis has {} functions",
            grid.len(),
            spec.sigma_tilde()
        )));
    }
    if spec.sigma_tilde() == 1 {
        warn!("a single collocation point cannot represent an oscillation");
    }
    let ops = BasisOperators::shared(*spec);
    let rows = grid
        .points()
        .iter()
        .map(|&t| {
            let alpha = problem.alpha.checked(t)?;
            let psi = ops.psi(t);
            let caputo = if alpha == 2.0 { psi.clone() } else { ops.integral(2.0 - alpha, t)? };
            Ok(CollocationRow {
                t,
                alpha,
                first: ops.first_integral(t),
                second: ops.second_integral(t),
                psi,
                caputo,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CollocationSystem {
        grid,
        rows,
        problem: problem.clone(),
        ops,
    })
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Equation residual at every collocation point.
pub fn residual_vector(sys: &CollocationSystem, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != sys.len() {
        return Err(Error::arg(format!("coefficient vector has length {}, system has {} rows", u.len(), sys.len())));
    }
    let p = &sys.problem;
    Ok(sys
        .rows
        .iter()
        .map(|row| {
            let y = dot(u, &row.second) + p.init_value + row.t * p.init_slope;
            let dy = dot(u, &row.first) + p.init_slope;
            p.equation_residual(row.t, y, dy, dot(u, &row.caputo))
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            fd_step: 1e-7,
        }
    }
}

/// Maximum number of step halvings in the line search.
pub const MAX_HALVINGS: u32 = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub u: CoefficientVector,
    pub iterations: usize,
    pub final_residual_norm: f64,
    pub converged: bool,
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn jacobian(sys: &CollocationSystem, u: &[f64], fd_step: f64) -> Result<Matrix> {
    let n = u.len();
    let mut jac = Matrix::zeros(n);
    let mut probe = u.to_vec();
    for j in 0..n {
        let h = fd_step * u[j].abs().max(1.0);
        probe[j] = u[j] + h;
        let plus = residual_vector(sys, &probe)?;
        probe[j] = u[j] - h;
        let minus = residual_vector(sys, &probe)?;
        probe[j] = u[j];
        for i in 0..n {
            let d = (plus[i] - minus[i]) / (2.0 * h);
            if !d.is_finite() {
                return Err(Error::Solver(format!("non-finite Jacobian entry ({i}, {j})")));
            }
            jac.set(i, j, d);
        }
    }
    Ok(jac)
}

/// Damped Newton from `U = 0` with a central-difference Jacobian.
///
/// Stops when `‖F‖∞ ≤ tol`, after `max_iter` steps, or when twenty halvings
/// of the step fail to reduce `‖F‖∞`; the last two return the best iterate
/// with `converged = false`.
pub fn newton_solve(sys: &CollocationSystem, opts: NewtonOptions) -> Result<SolveReport> {
    let mut u = vec![0.0; sys.len()];
    let mut f = residual_vector(sys, &u)?;
    let mut norm = norm_inf(&f);
    if !norm.is_finite() {
        return Err(Error::Solver("residual is not finite at the initial guess".into()));
    }
    let mut iterations = 0;
    while norm > opts.tol && iterations < opts.max_iter {
        let jac = jacobian(sys, &u, opts.fd_step)?;
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = linalg::solve(&jac, &rhs)?;
        if step.shifted {
            debug!("near-singular Jacobian at iteration {iterations}; diagonal shifted");
        }
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = u.iter().zip(&step.x).map(|(a, d)| a + lambda * d).collect();
            let ft = residual_vector(sys, &trial)?;
            let nt = norm_inf(&ft);
            if nt < norm {
                accepted = Some((trial, ft, nt));
                break;
            }
            lambda *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((trial, ft, nt)) => {
                debug!("newton iteration {iterations}: |F| = {nt:e}, damping {lambda}");
                u = trial;
                f = ft;
                norm = nt;
            }
            None => {
                debug!("line search stalled at |F| = {norm:e}");
                break;
            }
        }
    }
    let converged = norm <= opts.tol;
    Ok(SolveReport {
        u: CoefficientVector::new(sys.spec(), u)?,
        iterations,
        final_residual_norm: norm,
        converged,
    })
}

/// Solved wavelet approximation with its derivatives.
#[derive(Debug, Clone)]
pub struct SolutionApproximant {
    problem: OscillatorProblem,
    ops: Arc<BasisOperators>,
    u: CoefficientVector,
    report: Option<SolveReport>,
}

impl SolutionApproximant {
    /// Approximant for a given `U`, without solving.
    pub fn from_coefficients(problem: &OscillatorProblem, spec: &WaveletBasisSpec, u: CoefficientVector) -> Result<Self> {
        problem.validate()?;
        if u.len() != spec.sigma_tilde() {
            return Err(Error::arg("coefficient vector does not match the basis"));
        }
        Ok(Self {
            problem: problem.clone(),
            ops: BasisOperators::shared(*spec),
            u,
            report: None,
        })
    }

    pub fn from_report(sys: &CollocationSystem, report: SolveReport) -> Self {
        Self {
            problem: sys.problem.clone(),
            ops: sys.ops.clone(),
            u: report.u.clone(),
            report: Some(report),
        }
    }

    pub fn problem(&self) -> &OscillatorProblem {
        &self.problem
    }

    pub fn spec(&self) -> &WaveletBasisSpec {
        self.ops.spec()
    }

    pub fn coefficients(&self) -> &CoefficientVector {
        &self.u
    }

    pub fn report(&self) -> Option<&SolveReport> {
        self.report.as_ref()
    }

    /// `(ℑ, ℑ′, ℑ″)` at `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> Result<(f64, f64, f64)> {
        reconstruct(self.u.as_slice(), &self.ops, self.problem.init(), t)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.eval(t).map(|v| v.0)
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        self.eval(t).map(|v| v.1)
    }

    pub fn second_derivative(&self, t: f64) -> Result<f64> {
        self.eval(t).map(|v| v.2)
    }

    /// `D^α ℑ(t)` with the order of the problem.
    pub fn caputo(&self, t: f64) -> Result<f64> {
        self.caputo_with(&self.problem.alpha, t)
    }

    pub fn caputo_with(&self, alpha: &OrderFunction, t: f64) -> Result<f64> {
        caputo_on_approximant(self.u.as_slice(), &self.ops, alpha, self.problem.init(), t)
    }
}

/// Assemble, solve, and wrap. Non-convergence is an error here; use
/// [`newton_solve`] with [`SolutionApproximant::from_report`] to keep the
/// best iterate.
pub fn solve_problem(
    problem: &OscillatorProblem,
    spec: &WaveletBasisSpec,
    opts: NewtonOptions,
) -> Result<SolutionApproximant> {
    let sys = assemble(problem, spec)?;
    let report = newton_solve(&sys, opts)?;
    if !report.converged {
        return Err(Error::Solver(format!(
            "no convergence after {} iterations (residual {:e})",
            report.iterations, report.final_residual_norm
        )));
    }
    Ok(SolutionApproximant::from_report(&sys, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn problem(mu: f64, a: f64, b: f64, forcing: Forcing, alpha: f64, init: (f64, f64)) -> OscillatorProblem {
        OscillatorProblem {
            mu,
            a,
            b,
            f: 0.5,
            omega: 0.79,
            forcing,
            alpha: OrderFunction::constant(alpha).unwrap(),
            init_value: init.0,
            init_slope: init.1,
        }
    }

    fn spec(k: u32, m: u32, gamma: f64) -> WaveletBasisSpec {
        WaveletBasisSpec::new(k, m, gamma).unwrap()
    }

    #[test]
    fn assemble_shapes_and_integer_branch() {
        let p = problem(0.1, 0.5, 0.5, Forcing::Forced, 2.0, (1.0, 0.0));
        let sys = assemble(&p, &spec(1, 3, 1.0)).unwrap();
        assert_eq!(sys.len(), 4);
        assert_eq!(sys.grid().len(), 4);
        for row in sys.rows() {
            assert_eq!(row.psi.len(), 4);
            assert_eq!(row.first.len(), 4);
            assert_eq!(row.second.len(), 4);
            assert_eq!(row.caputo, row.psi);
        }
    }

    #[test]
    fn variable_order_rows_increase() {
        let mut p = problem(0.1, 0.5, 0.5, Forcing::Forced, 2.0, (1.0, 0.0));
        p.alpha = OrderFunction::parse("1 + sin(t)").unwrap();
        let sys = assemble(&p, &spec(1, 5, 0.2)).unwrap();
        let orders = sys.orders();
        assert!(orders.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn cached_rows_match_operator_path() {
        let p = problem(0.1, 0.5, 0.5, Forcing::Forced, 1.5, (1.0, 0.0));
        for s in [spec(1, 5, 0.5), spec(2, 2, 0.5)] {
            let sys = assemble(&p, &s).unwrap();
            let u: Vec<f64> = (0..sys.len()).map(|i| 0.1 * i as f64 - 0.2).collect();
            let res = residual_vector(&sys, &u).unwrap();
            for (row, r) in sys.rows().iter().zip(&res) {
                let d = caputo_on_approximant(&u, sys.ops(), &p.alpha, p.init(), row.t).unwrap();
                let (y, dy, _) = reconstruct(&u, sys.ops(), p.init(), row.t).unwrap();
                let want = p.equation_residual(row.t, y, dy, d);
                assert!((r - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn residual_examples() {
        let s = spec(1, 3, 1.0);
        let trivial = problem(0.0, 0.0, 0.0, Forcing::ForceFree, 1.5, (1.0, 0.0));
        let sys = assemble(&trivial, &s).unwrap();
        assert!(residual_vector(&sys, &[0.0; 4]).unwrap().iter().all(|&r| r == 0.0));
        let wells = problem(0.0, 0.5, 0.5, Forcing::ForceFree, 1.5, (1.0, 0.0));
        let sys = assemble(&wells, &s).unwrap();
        assert!(residual_vector(&sys, &[0.0; 4]).unwrap().iter().all(|&r| r == 1.0));
        assert!(residual_vector(&sys, &[0.0; 3]).is_err());
    }

    #[test]
    fn newton_on_trivial_system() {
        let trivial = problem(0.0, 0.0, 0.0, Forcing::ForceFree, 1.7, (1.0, 0.0));
        let sys = assemble(&trivial, &spec(1, 3, 1.0)).unwrap();
        let rep = newton_solve(&sys, NewtonOptions::default()).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 1);
        assert!(rep.u.as_slice().iter().all(|&v| v == 0.0));
        let approx = SolutionApproximant::from_report(&sys, rep);
        for i in 0..=10 {
            assert!((approx.value(i as f64 / 10.0).unwrap() - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn manufactured_cosine() {
        let p = problem(0.0, 1.0, 0.0, Forcing::ForceFree, 2.0, (1.0, 0.0));
        let sys = assemble(&p, &spec(1, 5, 1.0)).unwrap();
        let rep = newton_solve(&sys, NewtonOptions::default()).unwrap();
        assert!(rep.converged);
        assert!(norm_inf(&residual_vector(&sys, rep.u.as_slice()).unwrap()) <= 1e-10);
        let approx = SolutionApproximant::from_report(&sys, rep);
        let worst = (0..=100)
            .map(|i| {
                let t = i as f64 / 100.0;
                (approx.value(t).unwrap() - t.cos()).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "max error {worst}");
    }

    #[test]
    fn initial_conditions_hold_exactly() {
        let p = problem(0.1, 0.5, 0.5, Forcing::Forced, 1.5, (1.0, 0.0));
        for s in [spec(1, 5, 0.2), spec(1, 3, 1.0), spec(2, 3, 0.5)] {
            let approx = solve_problem(&p, &s, NewtonOptions::default()).unwrap();
            let (y, dy, _) = approx.eval(0.0).unwrap();
            assert!((y - 1.0).abs() <= 1e-14);
            assert!(dy.abs() <= 1e-14);
        }
    }

    #[test]
    fn permutation_of_rows_leaves_solution_unchanged() {
        let p = problem(0.1, 0.5, 0.5, Forcing::Forced, 1.5, (1.0, 0.0));
        let sys = assemble(&p, &spec(1, 5, 0.5)).unwrap();
        let base = newton_solve(&sys, NewtonOptions::default()).unwrap();
        let perm = [3, 0, 5, 1, 4, 2];
        let shuffled = newton_solve(&sys.permuted(&perm).unwrap(), NewtonOptions::default()).unwrap();
        assert!(base.converged && shuffled.converged);
        for (a, b) in base.u.as_slice().iter().zip(shuffled.u.as_slice()) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
        assert!(sys.permuted(&[0, 0, 1, 2, 3, 4]).is_err());
    }

    #[test]
    fn non_finite_inputs_fail() {
        let mut p = problem(0.1, 0.5, 0.5, Forcing::Forced, 2.0, (1.0, 0.0));
        p.mu = f64::NAN;
        assert!(assemble(&p, &spec(1, 3, 1.0)).is_err());
        let mut p = problem(0.0, 0.0, 0.0, Forcing::ForceFree, 2.0, (1.0, 0.0));
        p.forcing = Forcing::Expression(Expr::parse("1 / (t - t)").unwrap());
        let sys = assemble(&p, &spec(1, 3, 1.0)).unwrap();
        assert!(matches!(newton_solve(&sys, NewtonOptions::default()), Err(Error::Solver(_))));
    }

    #[test]
    fn iteration_cap_reports_unconverged() {
        let p = problem(0.1, 0.5, 0.5, Forcing::Forced, 2.0, (1.0, 0.0));
        let sys = assemble(&p, &spec(1, 5, 1.0)).unwrap();
        let opts = NewtonOptions {
            max_iter: 1,
            ..NewtonOptions::default()
        };
        let rep = newton_solve(&sys, opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 1);
        assert!(solve_problem(&p, &spec(1, 5, 1.0), opts).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn converged_reports_meet_tolerance(a in -0.5f64..0.5, b in -0.5f64..0.5, alpha in 1.2f64..=2.0) {
            let p = problem(0.1, a, b, Forcing::Forced, alpha, (1.0, 0.0));
            let sys = assemble(&p, &spec(1, 3, 0.5)).unwrap();
            let rep = newton_solve(&sys, NewtonOptions::default()).unwrap();
            if rep.converged {
                prop_assert!(rep.final_residual_norm <= 1e-12);
                prop_assert!(norm_inf(&residual_vector(&sys, rep.u.as_slice()).unwrap()) <= 1e-12);
            }
        }
    }
}
