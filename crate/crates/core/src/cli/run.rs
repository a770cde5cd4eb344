use std::fs;
use std::io::{self, Write};

use crate::analysis::{max_distance, optimize_mu, sweep, DEFAULT_DISTANCE_TOL_KM};
use crate::cli::config::{Command, ConfigError, RunConfig};
use crate::cli::csv::{format_number, format_row, write_sweep_csv, HEADER};
use crate::error::ModelError;
use crate::keyrate::{detector_free_bound, secure_key_rate, Scenario};

/// Lower end of the `optimize` intensity bracket.
const MU_SEARCH_MIN: f64 = 1e-3;
/// Upper end of the `optimize` intensity bracket before the `mu - nu <= 1` cap.
const MU_SEARCH_MAX: f64 = 1.5;
const MU_SEARCH_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    /// validation = 2, bracket = 3, undefined QBER = 4, I/O = 5.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(e) => match e.root_cause() {
                ModelError::Bracket { .. } => 3,
                ModelError::UndefinedQber => 4,
                _ => 2,
            },
            CliError::Io(_) => 5,
        }
    }
}

pub fn tool_banner() -> String {
    format!("generated-by {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

fn header_comments(config: &RunConfig) -> Vec<String> {
    let mut lines = vec![tool_banner(), format!("command = {}", config.command.name())];
    lines.extend(config.summary_lines());
    lines
}

/// Executes the configured command, writing diagnostics to `out`.
pub fn run<W: Write>(config: &RunConfig, out: &mut W) -> Result<(), CliError> {
    match config.command {
        Command::Eval => run_eval(config, out),
        Command::Sweep => run_sweep(config, out),
        Command::MaxDist => run_maxdist(config, out),
        Command::Optimize => run_optimize(config, out),
    }
}

fn write_comments<W: Write>(out: &mut W, lines: &[String]) -> io::Result<()> {
    for line in lines {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

fn run_eval<W: Write>(config: &RunConfig, out: &mut W) -> Result<(), CliError> {
    let fiber = config.channel.fiber_transmittance()?;
    let mut rows = Vec::with_capacity(config.scenarios.len());
    for &scenario in &config.scenarios {
        let rates = secure_key_rate(scenario, &config.interferometer, &config.channel)?;
        let bound = detector_free_bound(scenario, &config.interferometer, fiber)?;
        rows.push(format!("{},{}", format_row(&rates), format_number(bound)));
    }
    write_comments(out, &header_comments(config))?;
    writeln!(out, "{HEADER},detector_free_bound")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    Ok(())
}

fn run_sweep<W: Write>(config: &RunConfig, out: &mut W) -> Result<(), CliError> {
    let result = sweep(&config.sweep)?;
    let comments = header_comments(config);
    let mut summary = Vec::new();
    for series in &result.series {
        let value = series
            .max_distance_km
            .map(format_number)
            .unwrap_or_else(|| "none".to_string());
        summary.push(format!("max_distance_km[{}] = {value}", series.scenario));
    }
    match &config.output_path {
        Some(path) => {
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, &comments, &result)?;
            fs::write(path, buf)?;
            let rows: usize = result.series.iter().map(|s| s.points.len()).sum();
            writeln!(out, "wrote {rows} rows to {}", path.display())?;
            for line in summary {
                writeln!(out, "{line}")?;
            }
        }
        None => {
            write_sweep_csv(out, &comments, &result)?;
            write_comments(out, &summary)?;
        }
    }
    Ok(())
}

fn run_maxdist<W: Write>(config: &RunConfig, out: &mut W) -> Result<(), CliError> {
    let bracket = (config.sweep.d_min_km, config.sweep.d_max_km);
    let mut rows = Vec::new();
    for &scenario in &config.scenarios {
        let d = max_distance(
            scenario,
            &config.interferometer,
            &config.channel,
            bracket,
            DEFAULT_DISTANCE_TOL_KM,
        )?;
        rows.push(format!("{scenario},{}", format_number(d)));
    }
    write_comments(out, &header_comments(config))?;
    writeln!(out, "scenario,max_distance_km")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Largest `mu` keeping `mu - ratio·mu <= 1`.
fn mu_search_max(scenario: Scenario, loss_ratio: f64) -> f64 {
    if scenario == Scenario::IdealPM || loss_ratio >= 1.0 {
        MU_SEARCH_MAX
    } else {
        MU_SEARCH_MAX.min(1.0 / (1.0 - loss_ratio))
    }
}

fn run_optimize<W: Write>(config: &RunConfig, out: &mut W) -> Result<(), CliError> {
    let p = &config.interferometer;
    let loss_ratio = p.nu() / p.mu();
    let mut rows = Vec::new();
    for &scenario in &config.scenarios {
        // IdealPM ignores nu, so its search runs at the balanced ratio
        let ratio = if scenario == Scenario::IdealPM { 1.0 } else { loss_ratio };
        let opt = optimize_mu(
            scenario,
            ratio,
            &config.channel,
            (MU_SEARCH_MIN, mu_search_max(scenario, ratio)),
            MU_SEARCH_TOL,
        )?;
        rows.push(format!(
            "{scenario},{},{},{},{},{}",
            format_number(config.channel.distance_km),
            format_number(opt.mu),
            format_number(opt.nu),
            format_number(opt.rate),
            opt.zero_rate
        ));
    }
    write_comments(out, &header_comments(config))?;
    writeln!(out, "scenario,distance_km,mu_opt,nu_opt,rate_opt,zero_rate")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    Ok(())
}
