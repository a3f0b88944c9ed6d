//! The `discriminator` command-line front end.

pub mod io;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::fitter::{fit, FitConfig, FitResult};
use crate::lineshape::{
    absorption_profile, default_grid, transmission_profile, uniform_grid, CircuitParams, Spectrum,
    TlaParams,
};
use crate::models::ModelKind;
use crate::selection::{discriminate, eit_threshold, noise_threshold, SelectionReport};
use crate::simulation::{
    add_noise, sweep_gbc_boundary, sweep_omega, BoundaryResult, NoiseSpec, SweepResult,
};

/// Detuning grid of the circuit preset, in MHz/2π.
pub const CIRCUIT_GRID: &str = "-30:30:0.25";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] crate::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("repeated detuning {0} in input")]
    DuplicateDelta(f64),

    #[error("input has {rows} rows, at least {min} required")]
    TooShort { rows: usize, min: usize },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("usage: {0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Write a synthetic absorption spectrum.
    Generate,
    /// Fit one or both lineshapes.
    Fit,
    /// Fit both lineshapes and score them.
    Discriminate,
    /// Weights as a function of the pump Rabi frequency.
    Sweep,
    /// Crossover Ω_AIC as a function of Γ_bc.
    Boundary,
    /// Flux-qubit transmission case study.
    Circuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Eit,
    Ats,
    Both,
}

/// Resolved run configuration; echoed verbatim into every report.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "discriminator", version, about = "Objective EIT versus ATS test on absorption spectra")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,

    #[arg(long, default_value_t = 1.0)]
    pub gamma_ab: f64,
    #[arg(long, default_value_t = 0.1)]
    pub gamma_bc: f64,
    /// Pump Rabi frequency.
    #[arg(long, default_value_t = 0.0)]
    pub omega: f64,
    /// One-photon detuning.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub delta1: f64,
    /// Probe Rabi frequency.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    /// Relative Gaussian noise on synthetic data.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// Replicate index used by `generate`, `fit` and `discriminate`.
    #[arg(long, default_value_t = 0)]
    pub replicate: usize,

    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    #[arg(long, default_value_t = FitConfig::default().max_iterations)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = FitConfig::default().relative_tolerance)]
    pub tolerance: f64,
    #[arg(long, default_value_t = crate::selection::DEFAULT_MARGIN)]
    pub margin: f64,
    #[arg(long, value_enum, default_value_t = ModelChoice::Both)]
    pub model: ModelChoice,

    /// Detuning grid `lo:hi:step` (default -5:5:0.05, or -30:30:0.25 for `circuit`).
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Rabi-frequency axis `lo:hi:step` for `sweep` and `boundary`.
    #[arg(long, default_value = "0.05:1.5:0.01")]
    pub omegas: String,
    /// Comma-separated Γ_bc values for `boundary`.
    #[arg(long, default_value = "0.05,0.1,0.2,0.3")]
    pub gbc_values: String,

    /// Spectrum table to analyse instead of synthetic data.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Primary artifact: spectrum (`generate`), table (`sweep`, `boundary`) or report.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Extra copy of the JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Software {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Thresholds {
    pub omega_eit: Option<f64>,
    pub omega_sigma: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub n_points: usize,
    pub delta_min: f64,
    pub delta_max: f64,
    pub meta: std::collections::BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub status: &'static str,
    pub software: Software,
    pub seed: u64,
    pub config: RunConfig,
    /// Grid actually used, after defaults.
    pub grid: Option<String>,
    pub spectrum: Option<SpectrumSummary>,
    pub thresholds: Option<Thresholds>,
    pub fits: Vec<FitResult>,
    pub selection: Option<SelectionReport>,
    pub sweep: Option<SweepResult>,
    pub boundary: Option<BoundaryResult>,
}

impl Report {
    fn new(config: &RunConfig) -> Self {
        Self {
            status: "ok",
            software: Software {
                name: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
            },
            seed: config.seed,
            config: config.clone(),
            grid: None,
            spectrum: None,
            thresholds: None,
            fits: Vec::new(),
            selection: None,
            sweep: None,
            boundary: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Parses `lo:hi:step`.
pub fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("range {text:?} is not lo:hi:step")))?;
    match nums[..] {
        [lo, hi, step] => Ok(uniform_grid(lo, hi, step)?),
        _ => Err(CliError::Usage(format!("range {text:?} is not lo:hi:step"))),
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("{text:?} is not a comma-separated list of numbers")))
}

impl RunConfig {
    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            max_iterations: self.max_iterations,
            relative_tolerance: self.tolerance,
            n_starts: self.starts,
            seed: self.seed,
            ..FitConfig::default()
        }
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec {
            sigma: self.sigma,
            seed: self.seed,
            n_replicates: self.replicates.max(self.replicate + 1),
        }
    }

    pub fn atom(&self) -> TlaParams {
        TlaParams {
            alpha: self.alpha,
            omega: self.omega,
            delta1: self.delta1,
            gamma_ab: self.gamma_ab,
            gamma_bc: self.gamma_bc,
        }
    }

    fn grid_text(&self) -> String {
        match (&self.grid, self.command) {
            (Some(g), _) => g.clone(),
            (None, Command::Circuit) => CIRCUIT_GRID.into(),
            (None, _) => "-5:5:0.05".into(),
        }
    }

    fn grid(&self) -> Result<Vec<f64>, CliError> {
        if self.grid.is_none() && self.command != Command::Circuit {
            return Ok(default_grid());
        }
        parse_range(&self.grid_text())
    }

    /// Checks flag combinations before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.command {
            Command::Generate if self.output.is_none() => {
                return Err(CliError::Usage("`generate` needs --output".into()))
            }
            Command::Generate | Command::Sweep | Command::Boundary | Command::Circuit
                if self.input.is_some() =>
            {
                return Err(CliError::Usage(format!(
                    "--input is not used by `{:?}`",
                    self.command
                )))
            }
            _ => {}
        }
        if self.replicates == 0 || self.starts == 0 || self.max_iterations == 0 {
            return Err(CliError::Usage(
                "--replicates, --starts and --max-iterations must be >= 1".into(),
            ));
        }
        if !(self.margin >= 0.0) {
            return Err(CliError::Usage("--margin must be >= 0".into()));
        }
        self.grid()?;
        if matches!(self.command, Command::Sweep | Command::Boundary) {
            parse_range(&self.omegas)?;
        }
        if self.command == Command::Boundary {
            parse_list(&self.gbc_values)?;
        }
        Ok(())
    }

    fn spectrum(&self) -> Result<Spectrum, CliError> {
        if let Some(path) = &self.input {
            return io::read_spectrum(path);
        }
        let clean = absorption_profile(&self.atom(), &self.grid()?)?;
        Ok(add_noise(&clean, &self.noise(), self.replicate)?)
    }
}

fn summarize(s: &Spectrum) -> SpectrumSummary {
    SpectrumSummary {
        n_points: s.len(),
        delta_min: s.deltas.first().copied().unwrap_or(f64::NAN),
        delta_max: s.deltas.last().copied().unwrap_or(f64::NAN),
        meta: s.meta.clone(),
    }
}

fn thresholds(gamma_ab: f64, gamma_bc: f64, sigma: f64) -> Thresholds {
    Thresholds {
        omega_eit: eit_threshold(gamma_ab, gamma_bc).ok(),
        omega_sigma: noise_threshold(gamma_ab, gamma_bc, sigma).ok(),
    }
}

/// Executes one command, writing its artifacts. The returned report is what
/// `discriminator` prints on stdout.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let mut report = Report::new(config);
    let cfg = config.fit_config();
    report.grid = Some(config.grid_text());

    // primary artifact text, if it is not the report itself
    let mut artifact: Option<String> = None;

    match config.command {
        Command::Generate => {
            let s = config.spectrum()?;
            report.spectrum = Some(summarize(&s));
            artifact = Some(io::spectrum_to_csv(&s));
        }
        Command::Fit => {
            let s = config.spectrum()?;
            report.spectrum = Some(summarize(&s));
            let kinds: &[ModelKind] = match config.model {
                ModelChoice::Eit => &[ModelKind::Eit],
                ModelChoice::Ats => &[ModelKind::Ats],
                ModelChoice::Both => &ModelKind::ALL,
            };
            for &kind in kinds {
                report.fits.push(fit(kind, &s, &cfg)?);
            }
        }
        Command::Discriminate | Command::Circuit => {
            let s = if config.command == Command::Circuit {
                let c = CircuitParams::flux_qubit();
                report.thresholds = Some(thresholds(c.gamma_ab, c.gamma_bc, 0.0));
                transmission_profile(&c, &config.grid()?)?
            } else {
                if config.input.is_none() {
                    report.thresholds =
                        Some(thresholds(config.gamma_ab, config.gamma_bc, config.sigma));
                }
                config.spectrum()?
            };
            report.spectrum = Some(summarize(&s));
            let sel = discriminate(&s, &cfg, config.margin)?;
            report.fits = sel.models.iter().filter_map(|m| m.fit.clone()).collect();
            report.selection = Some(sel);
        }
        Command::Sweep => {
            let sweep = sweep_omega(
                config.gamma_ab,
                config.gamma_bc,
                &config.noise(),
                &parse_range(&config.omegas)?,
                &config.grid()?,
                &cfg,
            )?;
            report.thresholds = Some(thresholds(config.gamma_ab, config.gamma_bc, config.sigma));
            artifact = Some(io::sweep_to_csv(&sweep));
            report.sweep = Some(sweep);
        }
        Command::Boundary => {
            let boundary = sweep_gbc_boundary(
                config.gamma_ab,
                &parse_list(&config.gbc_values)?,
                &config.noise(),
                &parse_range(&config.omegas)?,
                &config.grid()?,
                &cfg,
            )?;
            artifact = Some(io::boundary_to_csv(&boundary));
            report.boundary = Some(boundary);
        }
    }

    let json = report.to_json();
    if let Some(path) = &config.output {
        io::write_atomic(path, artifact.as_deref().unwrap_or(&json))?;
    }
    if let Some(path) = &config.report {
        io::write_atomic(path, &json)?;
    }
    Ok(report)
}

/// Machine-readable error object printed on failure.
pub fn error_json(err: &CliError) -> String {
    serde_json::json!({ "status": "error", "error": err.to_string() }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> RunConfig {
        RunConfig::try_parse_from(std::iter::once("discriminator").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn ranges_parse() {
        assert_eq!(parse_range("-5:5:0.05").unwrap().len(), 201);
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("1:0:0.1").is_err());
        assert_eq!(parse_list("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
    }

    #[test]
    fn flag_combinations_are_checked() {
        assert!(matches!(config(&["generate"]).validate(), Err(CliError::Usage(_))));
        assert!(matches!(
            config(&["sweep", "--input", "x.csv"]).validate(),
            Err(CliError::Usage(_))
        ));
        assert!(config(&["discriminate", "--grid", "-5:5:0.1"]).validate().is_ok());
        assert!(matches!(
            config(&["discriminate", "--grid", "5:-5:0.1"]).validate(),
            Err(CliError::Core(_))
        ));
    }

    #[test]
    fn circuit_uses_its_own_grid() {
        let c = config(&["circuit"]);
        assert_eq!(c.grid().unwrap().len(), 241);
        assert_eq!(c.grid_text(), CIRCUIT_GRID);
    }

    #[test]
    fn fit_command_reports_requested_models() {
        let r = run(&config(&["fit", "--omega", "3", "--model", "ats", "--starts", "4"])).unwrap();
        assert_eq!(r.fits.len(), 1);
        assert_eq!(r.fits[0].model, ModelKind::Ats);
    }

    #[test]
    fn reports_are_reproducible() {
        let c = config(&["discriminate", "--omega", "0.3", "--sigma", "0.05", "--seed", "5", "--starts", "4"]);
        assert_eq!(run(&c).unwrap().to_json(), run(&c).unwrap().to_json());
    }
}
