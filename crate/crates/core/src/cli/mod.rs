//! Batch front end: read a config document, run a campaign, write reports.

pub mod config;
pub mod report;

use std::path::PathBuf;

pub use config::{parse_config, ConfigFile, ParsedConfig};

use crate::calibration::select_design_params;
use crate::engine::{compare_hmin_modes, run_campaign};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),

    #[error("mode `{mode}` needs a [{section}] section in the config")]
    MissingSection {
        mode: &'static str,
        section: &'static str,
    },

    #[error(transparent)]
    Core(#[from] crate::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    /// Operating characteristics over the drift grid.
    Simulate,
    /// Borrowing probabilities and `(t, γ)` selection.
    Calibrate,
    /// Stage-2 sizes under exact and approximate `H_min`.
    Compare,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Calibrate => "calibrate",
            Mode::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub output_dir: PathBuf,
    pub mode: Mode,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub reps_override: Option<u64>,
}

/// Loads the config named by the manifest, applying its overrides.
pub fn load(manifest: &RunManifest) -> Result<ParsedConfig, CliError> {
    let path = &manifest.config_path;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.clone(),
        source: e,
    })?;
    let mut file: ConfigFile = toml::from_str(&text).map_err(|e| CliError::Config {
        path: "<document>".into(),
        reason: format!("{}: {}", path.display(), e.message()),
    })?;
    if let Some(seed) = manifest.seed {
        file.seed = seed;
    }
    if let Some(reps) = manifest.reps_override {
        file.replications = reps;
    }
    config::build(file)
}

/// Runs the manifest and returns the files written.
pub fn run(manifest: &RunManifest) -> Result<Vec<PathBuf>, CliError> {
    let parsed = load(manifest)?;
    let dir = &manifest.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.clone(),
        source: e,
    })?;
    let missing = |section| CliError::MissingSection {
        mode: manifest.mode.name(),
        section,
    };
    match manifest.mode {
        Mode::Simulate => {
            let plan = parsed
                .simulation
                .as_ref()
                .ok_or_else(|| missing("simulation"))?;
            let options = crate::engine::CampaignOptions {
                workers: manifest.workers,
                ..plan.options
            };
            log::info!(
                "simulating {} scenarios x {} replicates",
                plan.scenarios.len(),
                parsed.file.replications
            );
            let reports = run_campaign(&plan.scenarios, &options)?;
            report::emit_simulation(dir, &parsed.file, plan, &reports)
        }
        Mode::Calibrate => {
            let plan = parsed
                .calibration
                .as_ref()
                .ok_or_else(|| missing("calibration"))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(manifest.workers.unwrap_or(0))
                .build()
                .map_err(|e| CliError::Config {
                    path: "--workers".into(),
                    reason: e.to_string(),
                })?;
            let report = pool.install(|| {
                select_design_params(&plan.grid, &plan.template, &plan.historical, &plan.model)
            })?;
            match (report.selected, &report.diagnostic) {
                (Some((t, g)), _) => log::info!("selected t = {t}, gamma = {g}"),
                (None, Some(d)) => log::warn!("{d}"),
                (None, None) => {}
            }
            report::emit_calibration(dir, &parsed.file, &report)
        }
        Mode::Compare => {
            let plan = parsed
                .simulation
                .as_ref()
                .ok_or_else(|| missing("simulation"))?;
            let mut rows = Vec::new();
            for p in &plan.points {
                // control data only, so one hypothesis per point is enough
                let i = p
                    .null
                    .or(p.alternative)
                    .expect("grid point without scenarios");
                rows.push((
                    p.clone(),
                    compare_hmin_modes(&plan.scenarios[i], manifest.workers)?,
                ));
            }
            report::emit_comparison(dir, &parsed.file, &rows)
        }
    }
}
