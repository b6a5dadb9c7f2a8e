use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fobw::cli::config::{AlphaValue, OneOrMany};
use fobw::cli::{emit_plot_data, emit_table, run_experiment, ExperimentConfig, OutputFormat};
use fobw::verify;

#[derive(Parser)]
#[command(name = "fobw", version, about = "Wavelet collocation for fractional Duffing-Van der Pol oscillators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a built-in problem.
    Preset {
        name: String,
        /// Constant order or an expression in t; repeat for a sweep.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Vec<String>,
        /// Comma-separated gamma values.
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<f64>,
        /// Comma-separated M values.
        #[arg(long = "M", value_delimiter = ',')]
        m: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        k: Vec<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        /// Also write dense residual curves here.
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long)]
        density: Option<usize>,
    },
    /// Run the acceptance checks.
    Verify {
        /// Only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

fn alpha_value(src: &str) -> AlphaValue {
    match src.trim().parse::<f64>() {
        Ok(v) => AlphaValue::Number(v),
        Err(_) => AlphaValue::Text(src.to_string()),
    }
}

fn run(cli: Cli) -> fobw::Result<bool> {
    let cfg = match cli.command {
        Command::Verify { only } => {
            let ids: Vec<u32> = if only.is_empty() {
                verify::CRITERIA.iter().map(|c| c.0).collect()
            } else {
                only
            };
            let mut ok = true;
            for id in ids {
                let report = verify::run_criterion(id)?;
                println!("{}", report.line());
                ok &= report.passed();
            }
            return Ok(ok);
        }
        Command::Solve { config } => ExperimentConfig::load(&config)?,
        Command::Preset {
            name,
            alpha,
            gamma,
            m,
            k,
            out,
            format,
            plot,
            density,
        } => {
            let mut cfg = verify::preset_config(&name);
            if !alpha.is_empty() {
                cfg.alpha = Some(OneOrMany::Many(alpha.iter().map(|a| alpha_value(a)).collect()));
                if alpha.iter().any(|a| a.trim().parse::<f64>() != Ok(2.0)) {
                    cfg.metrics = Some(vec![fobw::cli::config::Metric::Residual]);
                }
            }
            if !gamma.is_empty() {
                cfg.basis.gamma = gamma;
            }
            if !m.is_empty() {
                cfg.basis.m = m;
            }
            if !k.is_empty() {
                cfg.basis.k = k;
            }
            cfg.output = out;
            cfg.format = format;
            cfg.plot_output = plot;
            cfg.plot_density = density;
            cfg
        }
    };
    let exp = cfg.validate()?;
    let out = run_experiment(&exp)?;
    emit_table(&out, exp.format, exp.output.as_deref())?;
    if let Some(path) = &exp.plot_output {
        emit_plot_data(&out, exp.plot_density, exp.format, path)?;
    }
    for label in out.table.failed_columns() {
        log::error!("column `{label}` has failed entries");
    }
    Ok(!out.failed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FOBW_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("fobw: {e}");
            ExitCode::from(2)
        }
    }
}
