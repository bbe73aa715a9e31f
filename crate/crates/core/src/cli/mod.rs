//! Batch entry points behind the `ris-secrecy` binary.
//!
//! Each subcommand reads a [`RunConfig`], writes its CSV outputs into the
//! configured directory together with `effective_config.toml` and
//! `manifest.toml`, and maps failures onto exit codes: 2 for configuration
//! errors, 3 for violated model assumptions.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use config::{ConfigError, ElementCounts, RunConfig, SweepSpec};
pub use output::{emit_csv, format_significant, Field};

use crate::bounds::{ergodic_lower_bound, eta};
use crate::secrecy_map::{compute_map, extract_contour, max_secure_distance, FixedScene};
use crate::simulation::{ergodic_secrecy_rate_mc, expected_gain_sq_mc, sweep};
use crate::Error;

pub const SWEEP_SCHEMA: [&str; 4] = [
    "param_value",
    "mean_rate_bps_hz",
    "std_error",
    "lower_bound",
];
pub const GRID_SCHEMA: [&str; 3] = ["psi_rad", "dist_m", "rate_bps_hz"];
pub const CONTOUR_SCHEMA: [&str; 2] = ["psi_rad", "dist_m"];
pub const BOUND_CHECK_SCHEMA: [&str; 5] = [
    "n_ris_elements",
    "mc_mean_bps_hz",
    "std_error",
    "lower_bound_bps_hz",
    "margin_bps_hz",
];
pub const ETA_CHECK_SCHEMA: [&str; 5] = [
    "n_ris_elements",
    "mc_estimate",
    "std_error",
    "eta_formula",
    "relative_error",
];

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    ErgodicSweep,
    SecrecyMap,
    BoundCheck,
    EtaCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ErgodicSweep => "ergodic-sweep",
            Command::SecrecyMap => "secrecy-map",
            Command::BoundCheck => "bound-check",
            Command::EtaCheck => "eta-check",
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(seed) = self.seed {
            cfg.monte_carlo.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.monte_carlo.trials = trials;
        }
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = dir.clone();
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Assumption(String),
    Runtime(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Assumption(_) => 3,
            RunError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Assumption(m) => write!(f, "model assumption violated: {m}"),
            RunError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::AssumptionViolation(m) => RunError::Assumption(m),
            other => RunError::Runtime(other),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

/// Provenance record written next to every run's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    /// `ok` or `failed`.
    pub status: String,
    pub error: Option<String>,
    pub config_hash: String,
    pub seed: u64,
    pub trials: u64,
    pub duration_secs: f64,
    pub outputs: Vec<String>,
    pub summary: BTreeMap<String, toml::Value>,
}

/// Reads and validates a config file; a missing path means all defaults.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig, RunError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let src = fs::read_to_string(p).map_err(|source| {
                RunError::Config(ConfigError {
                    field: None,
                    line: None,
                    message: format!("{}: {source}", p.display()),
                })
            })?;
            Ok(RunConfig::from_toml(&src)?)
        }
    }
}

/// Runs one subcommand with an already-loaded config. A manifest is written
/// for failed runs too, recording the error, whenever the output directory
/// can be created.
pub fn run(
    command: Command,
    mut cfg: RunConfig,
    overrides: &Overrides,
) -> Result<RunManifest, RunError> {
    overrides.apply(&mut cfg);
    let started = Instant::now();
    let dir = cfg.output_dir.clone();
    let mut outputs = Vec::new();
    let mut summary = BTreeMap::new();
    let result = execute(command, &cfg, &dir, &mut outputs, &mut summary);

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: command.name().to_string(),
        status: if result.is_ok() { "ok" } else { "failed" }.to_string(),
        error: result.as_ref().err().map(|e| e.to_string()),
        config_hash: cfg.config_hash(),
        seed: cfg.monte_carlo.seed,
        trials: cfg.monte_carlo.trials,
        duration_secs: started.elapsed().as_secs_f64(),
        outputs,
        summary,
    };
    let written = write_manifest(&dir, &manifest);
    match result {
        Ok(()) => {
            written?;
            Ok(manifest)
        }
        Err(e) => {
            if let Err(w) = written {
                log::warn!("could not write manifest: {w}");
            }
            Err(e)
        }
    }
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let text = toml::to_string(manifest).expect("manifest serializes to TOML");
    output::write_text(&dir.join(MANIFEST_FILE), &text)
}

fn execute(
    command: Command,
    cfg: &RunConfig,
    dir: &Path,
    outputs: &mut Vec<String>,
    summary: &mut Summary,
) -> Result<(), RunError> {
    cfg.validate()?;
    if cfg.system.element_spacing_ratio != crate::channel::HALF_WAVELENGTH {
        log::warn!(
            "element_spacing_ratio = {} but the eta/bound formulas assume 0.5",
            cfg.system.element_spacing_ratio
        );
    }
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    match command {
        Command::ErgodicSweep => run_sweep(cfg, dir, outputs, summary)?,
        Command::SecrecyMap => run_map(cfg, dir, outputs, summary)?,
        Command::BoundCheck => run_bound_check(cfg, dir, outputs, summary)?,
        Command::EtaCheck => run_eta_check(cfg, dir, outputs, summary)?,
    }
    output::write_text(&dir.join(EFFECTIVE_CONFIG_FILE), &cfg.to_toml())?;
    outputs.push(EFFECTIVE_CONFIG_FILE.to_string());
    Ok(())
}

type Summary = BTreeMap<String, toml::Value>;

fn run_sweep(
    cfg: &RunConfig,
    dir: &Path,
    outputs: &mut Vec<String>,
    summary: &mut Summary,
) -> Result<(), RunError> {
    let points = sweep(
        &cfg.system,
        cfg.sweep.parameter,
        &cfg.sweep.values,
        &cfg.geometry,
        &cfg.monte_carlo,
    )?;
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for p in &points {
        match &p.outcome {
            Ok((est, bound)) => rows.push(vec![
                Field::Float(p.value),
                est.mean.into(),
                est.std_error.into(),
                (*bound).into(),
            ]),
            Err(e) => {
                log::warn!("{} = {}: {e}", cfg.sweep.parameter.name(), p.value);
                failed.push(toml::Value::String(format!("{}: {e}", p.value)));
            }
        }
    }
    emit_csv(&dir.join("sweep.csv"), &SWEEP_SCHEMA, &rows)?;
    outputs.push("sweep.csv".into());
    summary.insert("parameter".into(), cfg.sweep.parameter.name().into());
    summary.insert("points".into(), (rows.len() as i64).into());
    summary.insert("failed".into(), toml::Value::Array(failed));
    Ok(())
}

fn run_map(
    cfg: &RunConfig,
    dir: &Path,
    outputs: &mut Vec<String>,
    summary: &mut Summary,
) -> Result<(), RunError> {
    let scene = FixedScene::from_geometry(&cfg.geometry);
    let mut grid = compute_map(&cfg.system, &scene, &cfg.map, &cfg.monte_carlo)?;
    grid.provenance.config_hash = Some(cfg.config_hash());
    let rows: Vec<Vec<Field>> = grid
        .cells()
        .map(|(psi, d, r)| vec![psi.into(), d.into(), r.into()])
        .collect();
    emit_csv(&dir.join("grid.csv"), &GRID_SCHEMA, &rows)?;
    outputs.push("grid.csv".into());
    summary.insert("cells".into(), (grid.rates.len() as i64).into());

    for &r0 in &cfg.map.thresholds_bps_hz {
        let tag = format_significant(r0, 12);
        let contour = extract_contour(&grid, r0);
        let name = format!("contour_r0_{tag}.csv");
        let rows: Vec<Vec<Field>> = contour
            .points
            .iter()
            .map(|&(psi, d)| vec![psi.into(), d.into()])
            .collect();
        emit_csv(&dir.join(&name), &CONTOUR_SCHEMA, &rows)?;
        outputs.push(name);

        let mut entry = toml::Table::new();
        entry.insert(
            "cells_at_least".into(),
            (grid.count_at_least(r0) as i64).into(),
        );
        entry.insert(
            "coverage".into(),
            format!("{:?}", contour.coverage).to_lowercase().into(),
        );
        if let Some(d) = max_secure_distance(
            &cfg.system,
            &scene,
            scene.aod_eve_rad,
            r0,
            cfg.map.dist_max_m,
        )? {
            entry.insert("max_secure_distance_along_eve_m".into(), d.into());
        }
        summary.insert(format!("r0_{tag}"), toml::Value::Table(entry));
    }
    Ok(())
}

fn run_bound_check(
    cfg: &RunConfig,
    dir: &Path,
    outputs: &mut Vec<String>,
    summary: &mut Summary,
) -> Result<(), RunError> {
    let g = &cfg.geometry;
    let l_a = cfg.system.path_loss(g.dist_alice_ris_m)?;
    let l_b = cfg.system.path_loss(g.dist_ris_bob_m)?;
    let l_e = cfg.system.path_loss(g.dist_ris_eve_m)?;
    if l_b < l_e {
        return Err(RunError::Assumption(format!(
            "bound-check needs l_B >= l_E, but Bob ({} m) is farther than Eve ({} m)",
            g.dist_ris_bob_m, g.dist_ris_eve_m
        )));
    }
    let mut rows = Vec::new();
    let mut worst_margin_se = f64::INFINITY;
    for &n in &cfg.bound_check.n_values {
        let system = crate::channel::SystemConfig {
            n_ris_elements: n,
            ..cfg.system.clone()
        };
        let est = ergodic_secrecy_rate_mc(&system, g, &cfg.monte_carlo)?;
        let bound = ergodic_lower_bound(&system, l_a, l_b, l_e)?;
        let margin = est.mean - bound;
        if est.std_error > 0.0 {
            worst_margin_se = worst_margin_se.min(margin / est.std_error);
        }
        rows.push(vec![
            Field::from(n),
            est.mean.into(),
            est.std_error.into(),
            bound.into(),
            margin.into(),
        ]);
    }
    emit_csv(&dir.join("bound_check.csv"), &BOUND_CHECK_SCHEMA, &rows)?;
    outputs.push("bound_check.csv".into());
    if worst_margin_se.is_finite() {
        summary.insert("min_margin_in_std_errors".into(), worst_margin_se.into());
    }
    summary.insert("points".into(), (rows.len() as i64).into());
    Ok(())
}

fn run_eta_check(
    cfg: &RunConfig,
    dir: &Path,
    outputs: &mut Vec<String>,
    summary: &mut Summary,
) -> Result<(), RunError> {
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &n in &cfg.eta_check.n_values {
        let est = expected_gain_sq_mc(n, &cfg.monte_carlo)?;
        let formula = eta(n)?;
        let rel = (est.mean - formula).abs() / formula;
        worst = worst.max(rel);
        rows.push(vec![
            Field::from(n),
            est.mean.into(),
            est.std_error.into(),
            formula.into(),
            rel.into(),
        ]);
    }
    emit_csv(&dir.join("eta_check.csv"), &ETA_CHECK_SCHEMA, &rows)?;
    outputs.push("eta_check.csv".into());
    summary.insert("max_relative_error".into(), worst.into());
    Ok(())
}
