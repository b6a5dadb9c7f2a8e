//! Configuration, presets, experiment sweeps and table output for the `fobw`
//! binary.

pub mod config;
pub mod experiment;
pub mod output;

use indexmap::IndexMap;
use serde::Deserialize;

pub use crate::expr::{BinOp, Expr as Expression, Func};
pub use config::{ExperimentConfig, Experiment};
pub use experiment::{run_experiment, ExperimentOutput};
pub use output::{emit_plot_data, emit_table, render_csv, render_json, parse_json, OutputFormat};

use crate::error::{Error, Result};
use crate::fracops::OrderFunction;
use crate::solver::{Forcing, OscillatorProblem};

pub fn parse_expression(src: &str) -> Result<Expression> {
    Expression::parse(src)
}

/// The table grid used unless a config overrides it.
pub const DEFAULT_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// Points in an emitted residual curve unless overridden.
pub const DEFAULT_PLOT_DENSITY: usize = 401;

pub const PRESET_NAMES: [&str; 5] = [
    "example1-single",
    "example1-double",
    "example1-hump",
    "example2",
    "example2-caption",
];

/// Problem of a named preset with order 2.
pub fn preset_problem(name: &str) -> Result<OscillatorProblem> {
    let forced = |a: f64, b: f64| OscillatorProblem {
        mu: 0.1,
        a,
        b,
        f: 0.5,
        omega: 0.79,
        forcing: Forcing::Forced,
        alpha: OrderFunction::Constant(2.0),
        init_value: 1.0,
        init_slope: 0.0,
    };
    let free = |a: f64, b: f64, f: f64, omega: f64| OscillatorProblem {
        mu: 0.1,
        a,
        b,
        f,
        omega,
        forcing: Forcing::ForceFree,
        alpha: OrderFunction::Constant(2.0),
        init_value: 2.0,
        init_slope: 0.0,
    };
    match name {
        "example1-single" => Ok(forced(0.5, 0.5)),
        "example1-double" => Ok(forced(-0.5, 0.5)),
        "example1-hump" => Ok(forced(0.5, -0.5)),
        "example2" => Ok(free(1.0, 0.01, 0.0, 0.0)),
        // Force-free runs labelled with the forced-case constants; f and ω
        // are carried but unused.
        "example2-caption" => Ok(free(0.5, 0.5, 0.5, 0.79)),
        _ => Err(Error::Config(format!(
            "unknown preset `{name}`; expected one of {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

#[derive(Debug, Deserialize)]
struct ComparisonFile(IndexMap<String, IndexMap<String, Vec<f64>>>);

/// Published comparison columns for a preset, on [`DEFAULT_GRID`].
pub fn comparison_columns(preset: &str) -> Result<IndexMap<String, Vec<f64>>> {
    let file: ComparisonFile = toml::from_str(include_str!("../../data/comparison.toml"))
        .map_err(|e| Error::Config(format!("bundled comparison data: {e}")))?;
    Ok(file.0.get(preset).cloned().unwrap_or_default())
}
