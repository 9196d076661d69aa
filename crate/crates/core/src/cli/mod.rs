//! Experiment runner: configuration parsing, named presets, CSV output and run manifests.
//!
//! Parameters are resolved in order of increasing precedence: built-in
//! defaults, preset defaults, the TOML file given with `--config`, and
//! command-line flags.

mod manifest;
mod presets;
mod table;

use std::path::{Path, PathBuf};

use clap::{Args as ClapArgs, Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::distributions::{dbm_to_watts, NetworkConfig};
use crate::error::{Error, Result};
use crate::montecarlo::{with_threads, PointModel};

pub use manifest::{git_style_hash, Manifest, OutputFile};
pub use presets::{
    run_preset_custom, run_preset_fig3, run_preset_fig4, run_preset_fig5, RunOutput,
};
pub use table::CsvTable;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_GRID_POINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig3,
    Fig4,
    Fig5a,
    Fig5b,
    Custom,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5a => "fig5a",
            Preset::Fig5b => "fig5b",
            Preset::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Bpp,
    Ppp,
    Both,
}

impl ModelChoice {
    pub fn models(&self) -> Vec<PointModel> {
        match self {
            ModelChoice::Bpp => vec![PointModel::Bpp],
            ModelChoice::Ppp => vec![PointModel::Ppp],
            ModelChoice::Both => vec![PointModel::Bpp, PointModel::Ppp],
        }
    }
}

/// Per-parameter overrides; names follow the usual symbols.
#[derive(Debug, Clone, Default, PartialEq, ClapArgs, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    /// Window radius R in metres.
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    /// Number of APs L.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub num_aps: Option<usize>,
    /// Number of UEs K.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub num_ues: Option<usize>,
    /// Number of pilots.
    #[arg(long = "tau-p")]
    #[serde(rename = "tau_p")]
    pub num_pilots: Option<usize>,
    /// Pathloss exponent.
    #[arg(long = "alpha")]
    #[serde(rename = "alpha")]
    pub pathloss_exponent: Option<f64>,
    /// AP transmit power in watts.
    #[arg(long = "rho")]
    #[serde(rename = "rho")]
    pub tx_power: Option<f64>,
    /// Noise power, e.g. "3.98e-13 W" or "-94 dBm" (bare numbers are watts).
    #[arg(long = "sigma2", allow_hyphen_values = true)]
    #[serde(rename = "sigma2")]
    pub noise_power: Option<PowerValue>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Influence radius r in metres.
    #[arg(long = "r")]
    #[serde(rename = "r")]
    pub influence_radius: Option<f64>,
}

/// A power given as a bare number of watts or a string with a `W`/`dBm` suffix.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PowerValue {
    Watts(f64),
    Text(String),
}

impl std::str::FromStr for PowerValue {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(PowerValue::Text(s.to_string()))
    }
}

impl PowerValue {
    pub fn to_watts(&self) -> Result<f64> {
        match self {
            PowerValue::Watts(w) => Ok(*w),
            PowerValue::Text(s) => parse_power(s),
        }
    }
}

/// Parses `"<number> W"`, `"<number> dBm"` or a bare number of watts.
pub fn parse_power(text: &str) -> Result<f64> {
    let normalised = text.trim().replace('\u{2212}', "-");
    let lower = normalised.to_ascii_lowercase();
    let (number, dbm) = if let Some(n) = lower.strip_suffix("dbm") {
        (n, true)
    } else if let Some(n) = lower.strip_suffix('w') {
        (n, false)
    } else {
        (lower.as_str(), false)
    };
    let value: f64 = number.trim().parse().map_err(|_| {
        Error::validation(
            "sigma2",
            format!("cannot parse power {text:?}; expected a number with a W or dBm suffix"),
        )
    })?;
    Ok(if dbm { dbm_to_watts(value) } else { value })
}

impl ParamOverrides {
    pub fn apply(&self, mut config: NetworkConfig) -> Result<NetworkConfig> {
        if let Some(v) = self.radius {
            config.radius = v;
        }
        if let Some(v) = self.num_aps {
            config.num_aps = v;
        }
        if let Some(v) = self.num_ues {
            config.num_ues = v;
        }
        if let Some(v) = self.num_pilots {
            config.num_pilots = v;
        }
        if let Some(v) = self.pathloss_exponent {
            config.pathloss_exponent = v;
        }
        if let Some(v) = self.tx_power {
            config.tx_power = v;
        }
        if let Some(v) = &self.noise_power {
            config.noise_power = v.to_watts()?;
        }
        if let Some(v) = self.kappa {
            config.kappa = v;
        }
        if let Some(v) = self.mu {
            config.mu = v;
        }
        if let Some(v) = self.influence_radius {
            config.influence_radius = v;
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "cftin",
    version,
    about = "TIN-condition probability in cell-free massive MIMO: analytic curves and Monte Carlo"
)]
pub struct Args {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Monte Carlo trials per sweep point (hit-or-miss samples per abscissa for fig3).
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub model: Option<ModelChoice>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Points per analytic/empirical curve.
    #[arg(long = "grid-points")]
    pub grid_points: Option<usize>,
    /// Worker threads (0 uses all cores). Output does not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Sweep variable: a parameter name (R, L, K, tau_p, alpha, rho, sigma2, kappa, mu, r) or "none".
    #[arg(long)]
    pub sweep: Option<String>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
    #[command(flatten)]
    pub params: ParamOverrides,
}

/// Contents of a `--config` TOML file; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<Preset>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub model: Option<ModelChoice>,
    pub out: Option<PathBuf>,
    pub grid_points: Option<usize>,
    pub threads: Option<usize>,
    pub sweep: Option<String>,
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub network: ParamOverrides,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::validation("config", e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub base_config: NetworkConfig,
    pub preset: Preset,
    pub sweep_variable: String,
    pub sweep_values: Vec<f64>,
    pub model: ModelChoice,
    pub n_trials: usize,
    pub seed: u64,
    pub grid_points: usize,
    #[serde(skip)]
    pub output_path: PathBuf,
    #[serde(skip)]
    pub threads: usize,
}

pub const SWEEP_NAMES: [&str; 11] = [
    "none", "R", "L", "K", "tau_p", "alpha", "rho", "sigma2", "kappa", "mu", "r",
];

fn as_count(name: &str, value: f64) -> Result<usize> {
    if value.fract() != 0.0 || value < 0.0 || !value.is_finite() {
        return Err(Error::validation(
            name,
            format!("must be a nonnegative integer, got {value}"),
        ));
    }
    Ok(value as usize)
}

/// Returns `config` with the named parameter set to `value`.
pub fn apply_param(config: &NetworkConfig, name: &str, value: f64) -> Result<NetworkConfig> {
    let mut c = *config;
    match name {
        "none" => {}
        "R" => c.radius = value,
        "L" => c.num_aps = as_count(name, value)?,
        "K" => c.num_ues = as_count(name, value)?,
        "tau_p" => c.num_pilots = as_count(name, value)?,
        "alpha" => c.pathloss_exponent = value,
        "rho" => c.tx_power = value,
        "sigma2" => c.noise_power = value,
        "kappa" => c.kappa = value,
        "mu" => c.mu = value,
        "r" => c.influence_radius = value,
        other => {
            return Err(Error::validation(
                "sweep",
                format!(
                    "unknown variable {other:?}; expected one of {}",
                    SWEEP_NAMES.join(", ")
                ),
            ))
        }
    }
    Ok(c)
}

/// Sweep variable and values a preset uses when none are given.
pub fn preset_sweep(preset: Preset) -> (&'static str, Vec<f64>) {
    match preset {
        Preset::Fig3 | Preset::Fig4 => ("r", vec![20.0, 50.0, 100.0]),
        Preset::Fig5a => (
            "r",
            vec![
                10.0, 15.0, 20.0, 30.0, 50.0, 75.0, 100.0, 150.0, 200.0, 300.0, 400.0, 500.0,
                600.0, 700.0, 800.0, 900.0,
            ],
        ),
        Preset::Fig5b => ("K", vec![50.0, 100.0, 200.0, 400.0, 800.0, 1600.0]),
        Preset::Custom => ("none", vec![0.0]),
    }
}

/// Network parameters a preset changes from the built-in defaults.
pub fn preset_config(preset: Preset) -> NetworkConfig {
    let base = NetworkConfig::default();
    match preset {
        Preset::Fig5b => NetworkConfig {
            influence_radius: 20.0,
            ..base
        },
        _ => base,
    }
}

/// Resolves defaults, preset, file and flags into a validated spec.
pub fn resolve_spec(args: &Args, file: Option<&ConfigFile>) -> Result<ExperimentSpec> {
    let empty = ConfigFile::default();
    let file = file.unwrap_or(&empty);
    let preset = args.preset.or(file.preset).unwrap_or(Preset::Custom);
    let config = args
        .params
        .apply(file.network.apply(preset_config(preset))?)?;
    config.validate()?;

    let (default_var, default_values) = preset_sweep(preset);
    let sweep_variable = args
        .sweep
        .clone()
        .or_else(|| file.sweep.clone())
        .unwrap_or_else(|| default_var.to_string());
    let explicit_values = args.values.clone().or_else(|| file.values.clone());
    let sweep_values = match explicit_values {
        Some(v) => v,
        None if sweep_variable == default_var => default_values,
        None if sweep_variable == "none" => vec![0.0],
        None => {
            return Err(Error::validation(
                "values",
                format!("sweep over {sweep_variable:?} needs explicit values"),
            ))
        }
    };
    if sweep_values.is_empty() {
        return Err(Error::validation("values", "sweep values must be nonempty"));
    }
    if matches!(preset, Preset::Fig3 | Preset::Fig4 | Preset::Fig5a) && sweep_variable != "r" {
        return Err(Error::validation(
            "sweep",
            format!("preset {} sweeps r", preset.name()),
        ));
    }
    for &v in &sweep_values {
        apply_param(&config, &sweep_variable, v)?.validate()?;
    }

    let n_trials = args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
    if n_trials == 0 {
        return Err(Error::validation("trials", "must be >= 1"));
    }
    let grid_points = args
        .grid_points
        .or(file.grid_points)
        .unwrap_or(DEFAULT_GRID_POINTS);
    if grid_points < 2 {
        return Err(Error::validation("grid_points", "must be >= 2"));
    }
    Ok(ExperimentSpec {
        base_config: config,
        preset,
        sweep_variable,
        sweep_values,
        model: args.model.or(file.model).unwrap_or(ModelChoice::Both),
        n_trials,
        seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        grid_points,
        output_path: args
            .out
            .clone()
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
        threads: args.threads.or(file.threads).unwrap_or(0),
    })
}

/// Reads `--config` if given and resolves the full spec.
pub fn parse_config(args: &Args) -> Result<ExperimentSpec> {
    let file = args.config.as_deref().map(ConfigFile::load).transpose()?;
    resolve_spec(args, file.as_ref())
}

/// Runs the preset, writes its CSV files and `manifest.json`, and returns the manifest.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Manifest> {
    let output = with_threads(spec.threads, || match spec.preset {
        Preset::Fig3 => run_preset_fig3(spec),
        Preset::Fig4 => run_preset_fig4(spec),
        Preset::Fig5a | Preset::Fig5b => run_preset_fig5(spec),
        Preset::Custom => run_preset_custom(spec),
    })??;
    std::fs::create_dir_all(&spec.output_path)?;
    let mut files = Vec::new();
    for (name, table) in &output.tables {
        let text = table.write_to(&spec.output_path.join(name))?;
        files.push(OutputFile {
            name: name.clone(),
            sha256: git_style_hash(text.as_bytes()),
        });
    }
    let manifest = Manifest::new(spec, files, output.extra)?;
    manifest.write_to(&spec.output_path.join("manifest.json"))?;
    Ok(manifest)
}

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Validation { .. } | Error::Parse(_) => EXIT_VALIDATION,
        Error::Convergence { .. } | Error::Domain { .. } | Error::EmptySample => EXIT_CONVERGENCE,
        Error::Io(_) => EXIT_IO,
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(args: &Args) -> i32 {
    let result = parse_config(args).and_then(|spec| {
        log::info!(
            "running preset {} into {}",
            spec.preset.name(),
            spec.output_path.display()
        );
        run_experiment(&spec).map(|m| (spec, m))
    });
    match result {
        Ok((spec, manifest)) => {
            for f in &manifest.outputs {
                println!("{}  {}", f.sha256, spec.output_path.join(&f.name).display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
