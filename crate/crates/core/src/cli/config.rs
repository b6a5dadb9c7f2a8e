//! TOML experiment description and its validation.
//!
//! ```toml
//! preset = "example1-single"      # optional base problem
//! mu = 0.1                        # problem fields override the preset
//! a = 0.5
//! b = 0.5
//! f = 0.5
//! omega = 0.79
//! init = [1.0, 0.0]
//! forcing = "forced"              # "forced", "force-free" or an expression in t
//! alpha = [1.5, "1 + sin(t)"]     # one value or a list; numbers or expressions
//! grid = [0.1, 0.3, 0.5, 0.7, 0.9]
//! metrics = ["AE", "MAE", "residual"]
//! reference = "rk4"               # or "none"
//! format = "csv"                  # or "json"
//! output = "table.csv"            # stdout when absent
//! comparison = true               # append published columns when they apply
//! plot_output = "curves.csv"      # optional dense residual curves
//! plot_density = 401
//!
//! [basis]
//! k = [1]
//! M = [3, 5]
//! gamma = [0.2, 1.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{preset_problem, OutputFormat, DEFAULT_GRID, DEFAULT_PLOT_DENSITY};
use crate::basis::WaveletBasisSpec;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fracops::OrderFunction;
use crate::solver::{Forcing, OscillatorProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "AE")]
    Ae,
    #[serde(rename = "MAE")]
    Mae,
    #[serde(rename = "residual")]
    Residual,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::Ae => "AE",
            Metric::Mae => "MAE",
            Metric::Residual => "residual",
        }
    }

    fn needs_reference(self) -> bool {
        matches!(self, Metric::Ae | Metric::Mae)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceMode {
    Rk4,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

fn default_k() -> Vec<u32> {
    vec![1]
}

fn default_m() -> Vec<u32> {
    vec![5]
}

fn default_gamma() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSweep {
    #[serde(default = "default_k")]
    pub k: Vec<u32>,
    #[serde(rename = "M", default = "default_m")]
    pub m: Vec<u32>,
    #[serde(default = "default_gamma")]
    pub gamma: Vec<f64>,
}

impl Default for BasisSweep {
    fn default() -> Self {
        Self {
            k: default_k(),
            m: default_m(),
            gamma: default_gamma(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub mu: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub f: Option<f64>,
    pub omega: Option<f64>,
    pub init: Option<[f64; 2]>,
    pub forcing: Option<String>,
    pub alpha: Option<OneOrMany<AlphaValue>>,
    #[serde(default)]
    pub basis: BasisSweep,
    pub grid: Option<Vec<f64>>,
    pub metrics: Option<Vec<Metric>>,
    pub reference: Option<ReferenceMode>,
    pub format: Option<OutputFormat>,
    pub output: Option<PathBuf>,
    pub comparison: Option<bool>,
    pub plot_output: Option<PathBuf>,
    pub plot_density: Option<usize>,
}

/// A validated configuration, ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub preset: Option<String>,
    /// Base problem; each column substitutes one of `alphas`.
    pub problem: OscillatorProblem,
    pub alphas: Vec<OrderFunction>,
    pub bases: Vec<WaveletBasisSpec>,
    pub grid: Vec<f64>,
    pub metrics: Vec<Metric>,
    pub reference: ReferenceMode,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub comparison: bool,
    pub plot_output: Option<PathBuf>,
    pub plot_density: usize,
}

fn parse_forcing(src: &str) -> Result<Forcing> {
    match src.trim() {
        "forced" => Ok(Forcing::Forced),
        "force-free" | "none" => Ok(Forcing::ForceFree),
        other => Expr::parse(other)
            .map(Forcing::Expression)
            .map_err(|e| Error::Config(format!("forcing `{other}`: {e}"))),
    }
}

fn parse_alpha(v: &AlphaValue) -> Result<OrderFunction> {
    let (shown, parsed) = match v {
        AlphaValue::Number(c) => (c.to_string(), OrderFunction::constant(*c)),
        AlphaValue::Text(s) => (s.clone(), OrderFunction::parse(s)),
    };
    parsed.map_err(|e| Error::Config(format!("alpha `{shown}` rejected: {e}")))
}

impl ExperimentConfig {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<Experiment> {
        let problem = self.problem()?;
        let alphas = match &self.alpha {
            Some(list) => list.to_vec().iter().map(parse_alpha).collect::<Result<Vec<_>>>()?,
            None => vec![OrderFunction::Constant(2.0)],
        };
        if alphas.is_empty() {
            return Err(Error::Config("alpha list is empty".into()));
        }

        let sweep = &self.basis;
        if sweep.k.is_empty() || sweep.m.is_empty() || sweep.gamma.is_empty() {
            return Err(Error::Config("basis sweep lists must not be empty".into()));
        }
        let mut bases = Vec::new();
        for &k in &sweep.k {
            for &m in &sweep.m {
                for &g in &sweep.gamma {
                    bases.push(WaveletBasisSpec::new(k, m, g).map_err(|e| Error::Config(e.to_string()))?);
                }
            }
        }

        let grid = self.grid.clone().unwrap_or_else(|| DEFAULT_GRID.to_vec());
        if grid.is_empty() {
            return Err(Error::Config("output grid is empty".into()));
        }
        if grid.iter().any(|&t| !(t > 0.0 && t <= 1.0)) || grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("output grid must be strictly ascending inside (0, 1]".into()));
        }

        let all_integer = alphas.iter().all(|a| a.as_constant() == Some(2.0));
        let metrics = match &self.metrics {
            Some(m) if m.is_empty() => return Err(Error::Config("metric list is empty".into())),
            Some(m) => m.clone(),
            None if all_integer => vec![Metric::Ae],
            None => vec![Metric::Residual],
        };
        let wants_reference = metrics.iter().any(|m| m.needs_reference());
        let reference = self
            .reference
            .unwrap_or(if wants_reference { ReferenceMode::Rk4 } else { ReferenceMode::None });
        if wants_reference {
            if reference != ReferenceMode::Rk4 {
                return Err(Error::Config("AE and MAE need reference = \"rk4\"".into()));
            }
            if !all_integer {
                return Err(Error::Config(
                    "AE and MAE compare against an order-2 RK4 run; every alpha must be 2".into(),
                ));
            }
        }
        let plot_density = self.plot_density.unwrap_or(DEFAULT_PLOT_DENSITY);
        if plot_density < 2 {
            return Err(Error::Config("plot_density must be at least 2".into()));
        }

        Ok(Experiment {
            preset: self.preset.clone(),
            problem,
            alphas,
            bases,
            grid,
            metrics,
            reference,
            format: self.format.unwrap_or(OutputFormat::Csv),
            output: self.output.clone(),
            comparison: self.comparison.unwrap_or(false),
            plot_output: self.plot_output.clone(),
            plot_density,
        })
    }

    fn problem(&self) -> Result<OscillatorProblem> {
        let mut p = match &self.preset {
            Some(name) => preset_problem(name)?,
            None => {
                let missing: Vec<&str> = [("mu", self.mu.is_none()), ("a", self.a.is_none()), ("b", self.b.is_none()), ("init", self.init.is_none())]
                    .iter()
                    .filter(|(_, m)| *m)
                    .map(|(n, _)| *n)
                    .collect();
                if !missing.is_empty() {
                    return Err(Error::Config(format!("without a preset, set {}", missing.join(", "))));
                }
                OscillatorProblem {
                    mu: 0.0,
                    a: 0.0,
                    b: 0.0,
                    f: 0.0,
                    omega: 0.0,
                    forcing: if self.f.is_some() { Forcing::Forced } else { Forcing::ForceFree },
                    alpha: OrderFunction::Constant(2.0),
                    init_value: 0.0,
                    init_slope: 0.0,
                }
            }
        };
        if let Some(v) = self.mu {
            p.mu = v;
        }
        if let Some(v) = self.a {
            p.a = v;
        }
        if let Some(v) = self.b {
            p.b = v;
        }
        if let Some(v) = self.f {
            p.f = v;
        }
        if let Some(v) = self.omega {
            p.omega = v;
        }
        if let Some([y0, dy0]) = self.init {
            p.init_value = y0;
            p.init_slope = dy0;
        }
        if let Some(src) = &self.forcing {
            p.forcing = parse_forcing(src)?;
        }
        p.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }
}
