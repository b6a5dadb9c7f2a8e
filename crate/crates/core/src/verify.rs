//! The acceptance checks, shared by `fobw verify` and the test suite.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::WaveletBasisSpec;
use crate::cli::{preset_problem, render_csv, run_experiment, ExperimentConfig, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::fracops::{rl_integral_quadrature, rl_integral_series, weighted_inner_product, BasisOperators, OrderFunction};
use crate::reference::{absolute_error, max_absolute_error, residual_sample, rk4_integrate, DEFAULT_STEP};
use crate::solver::{solve_problem, Forcing, NewtonOptions, OscillatorProblem, SolutionApproximant};

/// One compared quantity; passes when `value <= bound`, or `value < bound`
/// for strict checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub bound: f64,
    pub strict: bool,
}

impl Check {
    fn at_most(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound,
            strict: false,
        }
    }

    fn below(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound,
            strict: true,
        }
    }

    pub fn passed(&self) -> bool {
        if self.strict {
            self.value < self.bound
        } else {
            self.value <= self.bound
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// Set when the criterion could not be evaluated at all.
    pub error: Option<String>,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(Check::passed)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    /// One summary line.
    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let detail = match &self.error {
            Some(e) => format!("error: {e}"),
            None => {
                let failed = self.failed_checks();
                if failed.is_empty() {
                    format!("{} checks", self.checks.len())
                } else {
                    let names: Vec<String> = failed
                        .iter()
                        .map(|c| format!("{} ({:.3e} vs {:.3e})", c.label, c.value, c.bound))
                        .collect();
                    format!("{}/{} checks failed: {}", failed.len(), self.checks.len(), names.join("; "))
                }
            }
        };
        format!("[{verdict}] {:>2}. {}: {detail}", self.id, self.title)
    }
}

pub const CRITERIA: [(u32, &str); 11] = [
    (1, "single-well, order 2, AE vs RK4"),
    (2, "double-well and double-hump, order 2, AE vs RK4"),
    (3, "example2, order 2, AE vs RK4"),
    (4, "single-well, order 1.5, residual magnitudes"),
    (5, "residual decreases from M=3 to M=5"),
    (6, "variable order 1 + sin t"),
    (7, "weighted orthonormality"),
    (8, "analytic vs quadrature fractional integrals"),
    (9, "manufactured cosine solution"),
    (10, "RK4 step-halving ratio"),
    (11, "preset table determinism"),
];

/// Printed residuals of the single-well order-1.5 run on the default grid.
pub const SINGLE_WELL_ORDER_1_5: [f64; 5] = [1.1e-4, 1.1e-4, 7.9e-5, 3.4e-5, 1.9e-5];

fn with_order(mut p: OscillatorProblem, alpha: OrderFunction) -> OscillatorProblem {
    p.alpha = alpha;
    p
}

fn solve(p: &OscillatorProblem, m: u32, gamma: f64) -> Result<SolutionApproximant> {
    solve_problem(p, &WaveletBasisSpec::new(1, m, gamma)?, NewtonOptions::default())
}

fn residuals(approx: &SolutionApproximant, p: &OscillatorProblem) -> Result<Vec<f64>> {
    DEFAULT_GRID.iter().map(|&t| residual_sample(approx, p, t)).collect()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(x))
}

fn ae_checks(preset: &str, bound: f64, checks: &mut Vec<Check>) -> Result<()> {
    let p = preset_problem(preset)?;
    let approx = solve(&p, 5, 1.0)?;
    let reference = rk4_integrate(&p, DEFAULT_STEP)?;
    for t in DEFAULT_GRID {
        checks.push(Check::at_most(
            format!("{preset} AE(t={t})"),
            absolute_error(&approx, &reference, t)?,
            bound,
        ));
    }
    Ok(())
}

fn criterion_1() -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut checks = Vec::new();
    ae_checks("example1-single", 1e-6, &mut checks)?;
    checks.push(Check::below("runtime [s]", start.elapsed().as_secs_f64(), 5.0));
    Ok(checks)
}

fn criterion_2() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    ae_checks("example1-double", 1e-6, &mut checks)?;
    ae_checks("example1-hump", 1e-6, &mut checks)?;
    Ok(checks)
}

fn criterion_3() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    ae_checks("example2", 5e-4, &mut checks)?;
    Ok(checks)
}

fn criterion_4() -> Result<Vec<Check>> {
    let p = with_order(preset_problem("example1-single")?, OrderFunction::constant(1.5)?);
    let approx = solve(&p, 5, 0.2)?;
    let r = residuals(&approx, &p)?;
    Ok(DEFAULT_GRID
        .iter()
        .zip(r)
        .zip(SINGLE_WELL_ORDER_1_5)
        .map(|((t, r), printed)| Check::at_most(format!("R(t={t})"), r, 10.0 * printed))
        .collect())
}

pub const REFINEMENT_PRESETS: [&str; 4] = ["example1-single", "example1-double", "example1-hump", "example2"];
pub const REFINEMENT_ORDERS: [f64; 4] = [1.2, 1.4, 1.6, 1.8];

fn criterion_5() -> Result<Vec<Check>> {
    let cases: Vec<(&str, f64)> = REFINEMENT_PRESETS
        .iter()
        .flat_map(|&p| REFINEMENT_ORDERS.iter().map(move |&a| (p, a)))
        .collect();
    cases
        .into_par_iter()
        .map(|(preset, alpha)| {
            let p = with_order(preset_problem(preset)?, OrderFunction::constant(alpha)?);
            let coarse = max_of(&residuals(&solve(&p, 3, 0.2)?, &p)?);
            let fine = max_of(&residuals(&solve(&p, 5, 0.2)?, &p)?);
            Ok(Check::below(format!("{preset} alpha={alpha} max R (M=5 vs M=3)"), fine, coarse))
        })
        .collect()
}

/// Presets held to the variable-order bound; the others only need to converge.
pub const VARIABLE_ORDER_BOUNDED: [&str; 3] = ["example1-single", "example1-double", "example1-hump"];

fn criterion_6() -> Result<Vec<Check>> {
    let alpha = OrderFunction::parse("1 + sin(t)")?;
    REFINEMENT_PRESETS
        .par_iter()
        .map(|&preset| {
            let p = with_order(preset_problem(preset)?, alpha.clone());
            let r = max_of(&residuals(&solve(&p, 5, 0.2)?, &p)?);
            Ok(if VARIABLE_ORDER_BOUNDED.contains(&preset) {
                Check::at_most(format!("{preset} max R"), r, 0.1)
            } else {
                Check::at_most(format!("{preset} max R (converged, unbounded)"), r, f64::INFINITY)
            })
        })
        .collect()
}

fn criterion_7() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for gamma in [0.2, 0.5, 1.0] {
        for k in [1, 2] {
            for m in 0..=5 {
                let spec = WaveletBasisSpec::new(k, m, gamma)?;
                let idx: Vec<_> = spec.indices().collect();
                let mut worst = 0.0_f64;
                for &i in &idx {
                    for &j in &idx {
                        let want = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((weighted_inner_product(&spec, i, j)? - want).abs());
                    }
                }
                checks.push(Check::at_most(format!("gamma={gamma} k={k} M={m}"), worst, 1e-8));
            }
        }
    }
    Ok(checks)
}

fn criterion_8() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checks = Vec::new();
    for gamma in [0.2, 0.5, 1.0] {
        for m in 0..=5 {
            let ops = BasisOperators::shared(WaveletBasisSpec::new(1, m, gamma)?);
            for lambda in [0.3, 0.5, 1.0, 1.7] {
                let mut worst = 0.0_f64;
                for f in ops.family() {
                    let image = rl_integral_series(f, lambda)?;
                    for _ in 0..10 {
                        let t: f64 = rng.gen_range(0.0..=1.0);
                        let q = rl_integral_quadrature(|x| f.eval(x), lambda, t)?;
                        worst = worst.max((image.eval(t) - q).abs());
                    }
                }
                checks.push(Check::at_most(format!("gamma={gamma} M={m} lambda={lambda}"), worst, 1e-10));
            }
        }
    }
    Ok(checks)
}

fn harmonic() -> OscillatorProblem {
    OscillatorProblem {
        mu: 0.0,
        a: 1.0,
        b: 0.0,
        f: 0.0,
        omega: 0.0,
        forcing: Forcing::ForceFree,
        alpha: OrderFunction::Constant(2.0),
        init_value: 1.0,
        init_slope: 0.0,
    }
}

fn criterion_9() -> Result<Vec<Check>> {
    let approx = solve(&harmonic(), 5, 1.0)?;
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mae = max_absolute_error(&approx, &f64::cos, &grid)?;
    Ok(vec![Check::at_most("MAE vs cos t", mae, 1e-8)])
}

fn criterion_10() -> Result<Vec<Check>> {
    let err = |h: f64| -> Result<f64> { Ok((rk4_integrate(&harmonic(), h)?.eval(1.0)?.0 - 1f64.cos()).abs()) };
    let mut checks = Vec::new();
    for h in [0.01, 0.005] {
        let ratio = err(h)? / err(h / 2.0)?;
        checks.push(Check::at_most(format!("ratio h={h} lower"), 12.0, ratio));
        checks.push(Check::at_most(format!("ratio h={h} upper"), ratio, 20.0));
    }
    Ok(checks)
}

/// Config used by `fobw preset <name>` before command-line overrides.
pub fn preset_config(name: &str) -> ExperimentConfig {
    ExperimentConfig {
        preset: Some(name.to_string()),
        comparison: Some(true),
        ..Default::default()
    }
}

fn criterion_11() -> Result<Vec<Check>> {
    let render = || -> Result<String> {
        let exp = preset_config("example1-single").validate()?;
        Ok(render_csv(&run_experiment(&exp)?.table))
    };
    let (a, b) = (render()?, render()?);
    let differing = a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
    Ok(vec![Check::at_most("differing bytes", differing as f64, 0.0)])
}

/// Evaluate one criterion by number.
pub fn run_criterion(id: u32) -> Result<CriterionReport> {
    let title = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .ok_or_else(|| Error::arg(format!("no criterion {id}")))?;
    let outcome = match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        _ => criterion_11(),
    };
    Ok(match outcome {
        Ok(checks) => CriterionReport {
            id,
            title,
            checks,
            error: None,
        },
        Err(e) => CriterionReport {
            id,
            title,
            checks: Vec::new(),
            error: Some(e.to_string()),
        },
    })
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA
        .iter()
        .map(|&(id, _)| run_criterion(id).expect("listed criterion"))
        .collect()
}
