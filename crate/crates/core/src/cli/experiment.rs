use indexmap::IndexMap;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{Experiment, Metric, ReferenceMode};
use super::comparison_columns;
use crate::basis::WaveletBasisSpec;
use crate::error::Result;
use crate::fracops::OrderFunction;
use crate::reference::{absolute_error, rk4_integrate, residual_sample, ErrorTable, ReferenceTrajectory, DEFAULT_STEP};
use crate::solver::{assemble, newton_solve, NewtonOptions, OscillatorProblem, SolutionApproximant};

/// One solve of the sweep.
#[derive(Debug, Clone)]
pub struct Run {
    pub spec: WaveletBasisSpec,
    pub alpha: OrderFunction,
    pub problem: OscillatorProblem,
    /// `None` when assembly failed or Newton did not converge.
    pub solution: Option<SolutionApproximant>,
    pub error: Option<String>,
}

impl Run {
    pub fn tag(&self) -> String {
        format!(
            "k={};M={};gamma={};alpha={}",
            self.spec.k(),
            self.spec.m(),
            self.spec.gamma(),
            self.alpha
        )
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: ErrorTable,
    pub meta: IndexMap<String, Value>,
    pub runs: Vec<Run>,
}

impl ExperimentOutput {
    pub fn failed(&self) -> bool {
        self.runs.iter().any(|r| r.solution.is_none()) || !self.table.failed_columns().is_empty()
    }
}

fn solve_one(problem: &OscillatorProblem, spec: WaveletBasisSpec) -> (Option<SolutionApproximant>, Option<String>) {
    let sys = match assemble(problem, &spec) {
        Ok(s) => s,
        Err(e) => return (None, Some(e.to_string())),
    };
    match newton_solve(&sys, NewtonOptions::default()) {
        Ok(rep) if rep.converged => (Some(SolutionApproximant::from_report(&sys, rep)), None),
        Ok(rep) => (
            None,
            Some(format!(
                "no convergence after {} iterations (residual {:e})",
                rep.iterations, rep.final_residual_norm
            )),
        ),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// Solve every (alpha, basis) combination and tabulate the requested metrics.
/// Column order follows the config: alpha outermost, then k, M, gamma.
pub fn run_experiment(exp: &Experiment) -> Result<ExperimentOutput> {
    let combos: Vec<(OrderFunction, WaveletBasisSpec)> = exp
        .alphas
        .iter()
        .flat_map(|a| exp.bases.iter().map(move |s| (a.clone(), *s)))
        .collect();

    let runs: Vec<Run> = combos
        .into_par_iter()
        .map(|(alpha, spec)| {
            let problem = OscillatorProblem {
                alpha: alpha.clone(),
                ..exp.problem.clone()
            };
            let (solution, error) = solve_one(&problem, spec);
            Run {
                spec,
                alpha,
                problem,
                solution,
                error,
            }
        })
        .collect();

    let reference: Option<ReferenceTrajectory> = match exp.reference {
        ReferenceMode::Rk4 => Some(rk4_integrate(&exp.problem, DEFAULT_STEP)?),
        ReferenceMode::None => None,
    };

    let mut table = ErrorTable::new(exp.grid.clone())?;
    let mut meta = IndexMap::new();
    let mut mae = IndexMap::new();
    let mut failures = IndexMap::new();
    for run in &runs {
        let tag = run.tag();
        if let Some(err) = &run.error {
            log::error!("{tag}: {err}");
            failures.insert(tag.clone(), Value::String(err.clone()));
        }
        for metric in &exp.metrics {
            let values: Vec<Option<f64>> = match metric {
                Metric::Ae | Metric::Mae => {
                    let reference = reference.as_ref().expect("validated: reference present");
                    let errs: Vec<Option<f64>> = exp
                        .grid
                        .iter()
                        .map(|&t| run.solution.as_ref().and_then(|s| absolute_error(s, reference, t).ok()))
                        .collect();
                    if *metric == Metric::Mae {
                        let m = errs.iter().try_fold(0.0_f64, |acc, e| e.map(|e| acc.max(e)));
                        log::info!("{tag}: MAE {}", m.map_or("failed".into(), |m| format!("{m:.5e}")));
                        mae.insert(tag.clone(), m.map_or(Value::Null, |m| json!(m)));
                        continue;
                    }
                    errs
                }
                Metric::Residual => exp
                    .grid
                    .iter()
                    .map(|&t| run.solution.as_ref().and_then(|s| residual_sample(s, &run.problem, t).ok()))
                    .collect(),
            };
            table.push_column(format!("{}[{tag}]", metric.label()), values)?;
        }
    }

    if exp.comparison {
        match &exp.preset {
            Some(p) if exp.grid == super::DEFAULT_GRID => {
                for (label, values) in comparison_columns(p)? {
                    table.push_column(label, values.into_iter().map(Some).collect())?;
                }
            }
            _ => log::warn!("comparison columns need a preset and the default grid; skipped"),
        }
    }

    if let Some(p) = &exp.preset {
        meta.insert("preset".into(), json!(p));
    }
    let pr = &exp.problem;
    meta.insert(
        "problem".into(),
        json!({
            "mu": pr.mu, "a": pr.a, "b": pr.b, "f": pr.f, "omega": pr.omega,
            "init": [pr.init_value, pr.init_slope],
        }),
    );
    if !mae.is_empty() {
        meta.insert("MAE".into(), Value::Object(mae.into_iter().collect()));
    }
    if !failures.is_empty() {
        meta.insert("failures".into(), Value::Object(failures.into_iter().collect()));
    }
    Ok(ExperimentOutput { table, meta, runs })
}
